#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "heatlocus/distance.hpp"
#include "heatlocus/heat.hpp"
#include "heatlocus/laplace.hpp"
#include "heatlocus/singularity.hpp"

using namespace heatlocus;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

Vec v2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}

Vec v3(double a, double b, double c) {
  Vec x(3);
  x << a, b, c;
  return x;
}

std::vector<double> log_grid(int count, double lo_exp, double hi_exp) {
  std::vector<double> t;
  for (int i = 0; i < count; ++i) t.push_back(std::pow(10.0, lo_exp + (hi_exp - lo_exp) * i / (count - 1)));
  return t;
}

std::vector<GeodesicClassification> types(std::initializer_list<int> ms) {
  std::vector<GeodesicClassification> out;
  for (int m : ms) out.push_back({m, 1.0, 1.0});
  return out;
}

Mat random_invertible(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto orthogonal = [&] {
    Mat G(n, n);
    for (Eigen::Index i = 0; i < G.size(); ++i) G.data()[i] = g(rng);
    return Mat(Eigen::HouseholderQR<Mat>(G).householderQ());
  };
  Vec d(n);
  for (int i = 0; i < n; ++i) d[i] = std::exp(u(rng));
  return orthogonal() * d.asDiagonal() * orthogonal();
}

Vec random_vec(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = g(rng);
  return x;
}

// 1. Admissibility over the catalog.
void admissibility(Outcome& o) {
  std::set<std::string> admitted, singular;
  int maps = 0;
  for (const auto& [label, dim] : catalog_labels()) {
    for (int n = dim; n <= 5; ++n) {
      const SmoothMapSample map = catalog(label, n);
      const bool ok = admissible(map);
      singular.insert(label);
      if (ok) admitted.insert(label);
      o.check(ok == (label == "A3" || label == "A5"), label + " n=" + std::to_string(n));
      ++maps;
    }
  }
  o.detail << maps << " normal forms over " << singular.size() << " labels; admissible:";
  for (const auto& l : admitted) o.detail << " " << l;
  o.check(admitted == std::set<std::string>{"A3", "A5"}, "admitted set");
}

// 2. Type detection under affine coordinate changes.
void type_detection(Outcome& o) {
  std::mt19937_64 rng(2);
  int checked = 0;
  for (int m = 2; m <= 6; ++m) {
    const SmoothMapSample base = catalog("A" + std::to_string(m), 5);
    const auto direct = type_1m(base);
    o.check(direct && *direct == m, "A" + std::to_string(m));
    for (int trial = 0; trial < 20; ++trial) {
      const SmoothMapSample c = affine_conjugate(base, random_invertible(rng, 5), random_vec(rng, 5),
                                                 random_invertible(rng, 5), random_vec(rng, 5));
      const auto got = type_1m(c);
      o.check(got && *got == m, "A" + std::to_string(m) + " trial " + std::to_string(trial));
      ++checked;
    }
  }
  o.detail << "A2..A6, " << checked << " conjugated samples";
}

// 3. Two-term Laplace expansion against the quadrature oracle.
void laplace_expansion(Outcome& o) {
  struct Amplitude {
    std::string name;
    std::function<double(double)> f;
    double f0, f2;
  };
  const std::vector<Amplitude> amps{
      {"1", [](double) { return 1.0; }, 1.0, 0.0},
      {"1+x^2", [](double x) { return 1.0 + x * x; }, 1.0, 2.0},
      {"cos", [](double x) { return std::cos(x); }, 1.0, -1.0},
  };
  const std::vector<double> grid = log_grid(7, -5.0, -2.0);
  for (int m : {1, 2, 3}) {
    DiagonalPhase phase;
    phase.m_list = {m};
    for (const Amplitude& a : amps) {
      const auto f = [&a](const Vec& x) { return a.f(x[0]); };
      const LaplaceCheckResult r = laplace_check(f, a.f0, {a.f2}, phase, grid, Box::symmetric(1, 1.0));
      const std::string tag = "m=" + std::to_string(m) + " f=" + a.name;
      o.detail << " " << tag << ": c0 rel " << std::scientific;
      o.detail.precision(1);
      o.detail << r.c0_relative_error << std::defaultfloat;
      o.detail.precision(4);
      if (r.residual_exponent)
        o.detail << ", residual exponent " << *r.residual_exponent << " (need " << r.required_exponent << ")";
      else
        o.detail << ", residual at quadrature floor";
      o.detail << ";";
      o.check(r.c0_relative_error <= 1e-6, tag + " leading coefficient");
      o.check(r.residual_ok, tag + " residual exponent");
    }
  }
}

// 4. Exponent tables.
void exponent_tables(Outcome& o) {
  const AsymptoticPrediction a3 = predict(3, types({3}), false);
  o.check(a3.exponent == Rational(7, 4), "n=3 A3 exponent 7/4");
  o.check(a3.remainder_power == Rational(1, 2), "n=3 A3 remainder 1/2");
  o.check(predict(4, types({3}), false).exponent == Rational(9, 4), "n=4 A3 exponent 9/4");
  for (int n = 2; n <= 6; ++n) {
    o.check(predict(n, types({1, 3}), false).exponent == Rational(n, 2) + Rational(1, 4),
            "n=" + std::to_string(n) + " A3 exponent n/2+1/4");
    const Rational a5 = predict(n, types({5}), false).exponent;
    o.check(a5 == Rational(n, 2) + Rational(1, 6),
            "n=" + std::to_string(n) + " A5 exponent " + a5.str() + " vs n/2+1/6");
    for (int r = 1; r < n; ++r) {
      const BoundsPrediction b = predict_bounds(n, r);
      o.check(b.lower_exponent == Rational(n, 2) + Rational(r, 4) && b.upper_exponent == Rational(n, 2) + Rational(r, 2),
              "bounds n=" + std::to_string(n) + " r=" + std::to_string(r));
    }
  }
  o.detail << " n=3 A3 " << a3.exponent.str() << " rem " << a3.remainder_power.str() << "; n=4 A3 "
           << predict(4, types({3}), false).exponent.str() << "; n=2 A5 " << predict(2, types({5}), false).exponent.str()
           << "; bounds n=2..6";
}

// 5. Midpoint-integral exponent fits for x^2 + y^(m+1).
void midpoint_fits(Outcome& o) {
  const std::vector<double> grid = log_grid(8, -5.0, -2.0);
  const auto one = [](const Vec&) { return 1.0; };
  for (int m : {1, 3, 5, 7}) {
    const ExponentFit f = midpoint_integral_exponent(
        [m](const Vec& z) { return 0.25 + z[0] * z[0] + std::pow(z[1], m + 1); }, 0.25, Vec::Zero(2), one, grid);
    const double predicted = predict(2, types({m})).exponent.value();
    o.detail << " m=" << m << ": slope " << f.slope << " vs -" << predicted << ";";
    o.check(std::abs(f.slope + predicted) <= 0.02, "m=" + std::to_string(m));
  }
}

// 6. Heisenberg conjugate times, cut points and vertical distance.
void heisenberg(Outcome& o) {
  const Structure h = builtin("heisenberg");
  const Point origin(Vec::Zero(3));
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * pi), pz(0.5, 3.0);
  std::uniform_int_distribution<int> sign(0, 1);
  double conj_err = 0.0, axis_err = 0.0, cut_err = 0.0;
  int cut_found = 0;
  for (int i = 0; i < 50; ++i) {
    const double th = angle(rng), c = (sign(rng) ? 1.0 : -1.0) * pz(rng);
    const Covector lam(v3(std::cos(th), std::sin(th), c));
    const double expected = 2.0 * pi / std::abs(c);
    const auto tc = first_conjugate_time(h, origin, lam, 1.5 * expected);
    conj_err = std::max(conj_err, tc ? std::abs(*tc - expected) : HUGE_VAL);
    const CutTimeResult cut = cut_time(h, origin, lam, 1.2 * expected);
    if (cut.t_cut) {
      ++cut_found;
      cut_err = std::max(cut_err, std::abs(*cut.t_cut - expected));
      const Point q = exp_map(h, origin, lam, *cut.t_cut);
      axis_err = std::max(axis_err, std::hypot(q.coords[0], q.coords[1]));
    }
  }
  double dist_err = 0.0;
  for (double z : {0.25, 1.0, -2.0}) {
    const DistanceResult r = distance(h, origin, Point(v3(0.0, 0.0, z)));
    dist_err = std::max(dist_err, std::abs(r.d - std::sqrt(4.0 * pi * std::abs(z))));
  }
  o.detail << "50 covectors: max |t_conj - 2pi/|p_z|| " << conj_err << ", cut points found " << cut_found
           << ", max |t_cut - 2pi/|p_z|| " << cut_err << ", max axis distance " << axis_err
           << "; vertical distance error " << dist_err;
  o.check(conj_err <= 1e-6, "conjugate times");
  o.check(cut_found == 50, "cut points");
  o.check(axis_err <= 1e-6, "cut points on the vertical axis");
  o.check(dist_err <= 1e-6, "vertical distance");
}

// 7. Riemannian sanity checks.
void riemannian(Outcome& o) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  const Structure e = builtin("euclidean", {{"n", 3}});
  double exp_err = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Vec q0 = random_vec(rng, 3), p = random_vec(rng, 3);
    const double t = 0.5 + std::abs(g(rng));
    const Point q = exp_map(e, Point(q0), Covector(p), t);
    exp_err = std::max(exp_err, (q.coords - (q0 + t * p)).norm());
  }
  const Structure s = builtin("round_sphere");
  double conj_err = 0.0;
  for (int i = 0; i < 10; ++i) {
    const Point q0(Vec(0.5 * random_vec(rng, 2)));
    const Covector lam = normalize_covector(s, q0, Covector(random_vec(rng, 2)));
    const auto tc = first_conjugate_time(s, q0, lam, 4.0);
    conj_err = std::max(conj_err, tc ? std::abs(*tc - pi) : HUGE_VAL);
  }
  double c0_err = 0.0;
  const Point q(v2(0.0, 0.0));
  const Covector lam = normalize_covector(s, q, Covector(v2(0.3, 0.4)));
  for (int k = 1; k <= 30; ++k) {
    const double rho = 0.1 * k;
    const double c0 = ben_arous_c0(s, q, exp_map(s, q, lam, rho));
    c0_err = std::max(c0_err, std::abs(c0 - std::sqrt(rho / std::sin(rho))) / std::sqrt(rho / std::sin(rho)));
  }
  o.detail << "Euclidean exp error " << exp_err << "; sphere |t_conj - pi| " << conj_err
           << "; c0 relative error over rho = 0.1..3.0: " << c0_err;
  o.check(exp_err <= 1e-10, "Euclidean exponential map");
  o.check(conj_err <= 1e-6, "sphere conjugate time");
  o.check(c0_err <= 1e-6, "sphere c0");
}

// 8. Hinged energy identities on the Riemannian built-ins.
void hinged_identities(Outcome& o) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const char* name : {"euclidean", "round_sphere", "revolution_surface"}) {
    const Structure s = builtin(name);
    int pairs = 0, skipped = 0;
    double hmin_err = 0.0;
    int rank_mismatch = 0;
    while (pairs < 30) {
      const Point q1(v2(u(rng), u(rng))), q2(v2(u(rng), u(rng)));
      if ((q1.coords - q2.coords).norm() < 0.1) continue;
      const DistanceResult r = distance(s, q1, q2);
      if (r.minimizers.size() != 1 || r.non_discrete) {
        ++skipped;
        continue;
      }
      const HingedProfile p = midpoint_profile(s, q1, q2, r.minimizers[0]);
      hmin_err = std::max(hmin_err, std::abs(p.h_min - r.d * r.d / 4.0));
      rank_mismatch += p.r != r.roots[0].rank_deficit;
      ++pairs;
    }
    o.detail << " " << name << ": max |h_min - d^2/4| " << hmin_err << ", rank mismatches " << rank_mismatch
             << ", skipped " << skipped << ";";
    o.check(hmin_err <= 1e-7, std::string(name) + " h_min");
    o.check(rank_mismatch == 0, std::string(name) + " rank deficit");
  }
}

// 9. Fixture contact order and exponents.
void fixture(Outcome& o) {
  ProfileControls pc;
  pc.noise_floor = 1e-13;
  for (int eta : {3, 4}) {
    const ContactFixture fx = make_fixture(eta);
    const HingedProfile p = profile_of_function(fx.h, fx.z0, pc);
    const auto m = type_1m(fx.exp_sample);
    const Rational e = predict(2, types({2 * eta - 1})).exponent;
    o.detail << " eta=" << eta << ": profile m " << (p.m ? std::to_string(*p.m) : "none") << ", exp-map type "
             << (m ? std::to_string(*m) : "none") << ", exponent " << e.str() << ";";
    o.check(p.r == 1 && p.m && *p.m == 2 * eta - 1, "eta=" + std::to_string(eta) + " profile order");
    o.check(m && *m == 2 * eta - 1, "eta=" + std::to_string(eta) + " exponential map type");
    o.check(e == Rational(3 * eta - 1, 2 * eta), "eta=" + std::to_string(eta) + " exponent");
  }
}

}  // namespace

int main(int argc, char** argv) {
  bool strict = false;
  for (int i = 1; i < argc; ++i) strict = strict || std::strcmp(argv[i], "--strict") == 0;
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"admissibility", admissibility},         {"type detection", type_detection},
      {"laplace expansion", laplace_expansion}, {"exponent tables", exponent_tables},
      {"midpoint fits", midpoint_fits},         {"heisenberg", heisenberg},
      {"riemannian", riemannian},               {"hinged identities", hinged_identities},
      {"fixture", fixture},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    o.detail.precision(4);
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !o.pass;
    std::printf("criterion %zu (%s): %s (%.1fs) %s\n", i + 1, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL", secs,
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return strict && failed ? 1 : 0;
}
