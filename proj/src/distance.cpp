#include "heatlocus/distance.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/random/sobol.hpp>
#include <cmath>
#include <limits>

#include "heatlocus/parallel.hpp"

namespace heatlocus {

namespace {

double separation(const Structure& s, const Point& a, const Point& b) {
  if (a.chart == b.chart) return (a.coords - b.coords).norm();
  return (s.embed(a) - s.embed(b)).norm();
}

double covector_length(const Structure& s, const Point& q, const Vec& mu) {
  return std::sqrt(2.0 * hamiltonian(s, q, Covector(mu)));
}

int numerical_rank_deficit(const Mat& J, double tol) {
  Eigen::JacobiSVD<Mat> svd(J);
  const Vec& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] == 0.0) return static_cast<int>(J.cols());
  int deficit = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] < tol * sv[0]) ++deficit;
  return deficit + static_cast<int>(J.cols() - sv.size());
}

constexpr double kDiverseAngle = 0.3;

struct Candidate {
  double gap = std::numeric_limits<double>::infinity();
  Vec mu;
  std::size_t index = 0;
};

}  // namespace

std::vector<Vec> sphere_directions(int n, int count, std::uint64_t offset) {
  require(n >= 1, ErrorKind::InvalidInput, "sphere_directions: dimension must be positive");
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(count));
  if (n == 1) {
    for (int i = 0; i < count; ++i) out.push_back(Vec::Constant(1, (i + offset) % 2 == 0 ? 1.0 : -1.0));
    return out;
  }
  boost::random::sobol gen(static_cast<std::size_t>(n));
  // The first Sobol point is the origin of the cube; skip it.
  gen.discard(static_cast<std::uintmax_t>((offset + 1) * static_cast<std::uint64_t>(n)));
  const boost::math::normal_distribution<double> normal;
  const double range = static_cast<double>(gen.max()) + 1.0;
  while (static_cast<int>(out.size()) < count) {
    Vec w(n);
    for (int a = 0; a < n; ++a) {
      const double u = (static_cast<double>(gen()) + 0.5) / range;
      w[a] = boost::math::quantile(normal, u);
    }
    const double nw = w.norm();
    if (nw > 1e-12) out.push_back(w / nw);
  }
  return out;
}

std::vector<double> direction_angles(const Vec& w) {
  const int n = static_cast<int>(w.size());
  std::vector<double> th;
  for (int i = 0; i + 2 < n; ++i) th.push_back(std::atan2(w.tail(n - i - 1).norm(), w[i]));
  if (n >= 2) th.push_back(std::atan2(w[n - 1], w[n - 2]));
  return th;
}

std::optional<ShootingRoot> shoot(const Structure& s, const Point& q1, const Point& q2, const Covector& guess,
                                  const ShootingControls& ctrl) {
  const int n = s.dim();
  require(guess.dim() == n, ErrorKind::InvalidInput, "shoot: guess has the wrong dimension");
  const double scale = std::max(1.0, q2.coords.cwiseAbs().maxCoeff());
  const double tol = ctrl.residual_tol * scale;

  struct Eval {
    Point end;
    Mat J;
    Vec F;
  };
  auto evaluate = [&](const Vec& mu) -> std::optional<Eval> {
    try {
      Eval e;
      e.J = d_exp(s, q1, Covector(mu), ctrl.integrator, &e.end);
      e.F = e.end.coords - s.to_chart(q2, e.end.chart).coords;
      if (!e.F.allFinite() || !e.J.allFinite()) return std::nullopt;
      return e;
    } catch (const Error&) {
      return std::nullopt;
    }
  };

  Vec mu = guess.comps;
  std::optional<Eval> cur = evaluate(mu);
  if (!cur) return std::nullopt;
  bool converged = false;
  int it = 0;
  for (; it < ctrl.newton_iters; ++it) {
    const double fn = cur->F.norm();
    if (fn <= tol) {
      if (converged) break;
      converged = true;  // one polishing step past tolerance
    }
    Eigen::JacobiSVD<Mat> svd(cur->J, Eigen::ComputeThinU | Eigen::ComputeThinV);
    // Full steps with decreasing pseudo-inverse resolution; a nearly singular Jacobian
    // makes the untruncated step useless, so each must at least halve the residual.
    const double cap = 0.5 * std::max(mu.norm(), 0.2);
    std::vector<Vec> steps;
    for (double thr : {1e-12, 1e-7, 1e-4}) {
      svd.setThreshold(thr);
      Vec step = -svd.solve(cur->F);
      if (step.norm() > cap) step *= cap / step.norm();
      steps.push_back(std::move(step));
    }
    bool accepted = false;
    for (const Vec& step : steps) {
      std::optional<Eval> next = evaluate(mu + step);
      if (next && (next->F.norm() < 0.5 * fn || next->F.norm() <= tol)) {
        mu += step;
        cur = std::move(next);
        accepted = true;
        break;
      }
    }
    // Damped fallback along the most truncated step.
    double alpha = 0.5;
    for (int bt = 0; bt < 10 && !accepted; ++bt, alpha *= 0.5) {
      const Vec trial = mu + alpha * steps.back();
      std::optional<Eval> next = evaluate(trial);
      if (next && next->F.norm() < fn * (1.0 - 1e-4 * alpha)) {
        mu = trial;
        cur = std::move(next);
        accepted = true;
      }
    }
    if (!accepted) break;
  }
  if (!(cur->F.norm() <= tol)) return std::nullopt;

  ShootingRoot root;
  root.mu = Covector(mu);
  root.length = covector_length(s, q1, mu);
  root.endpoint = cur->end;
  root.jacobian = cur->J;
  root.rank_deficit = numerical_rank_deficit(cur->J, ctrl.rank_tol);
  root.residual = cur->F.norm();
  root.iterations = it;
  return root;
}

DistanceResult distance(const Structure& s, const Point& q1, const Point& q2, const ShootingControls& ctrl) {
  s.check_point(q1);
  s.check_point(q2);
  require(ctrl.samples > 0 && ctrl.refine > 0 && ctrl.screen_grid > 0, ErrorKind::InvalidInput,
          "distance: shooting controls must be positive");
  const double sep = separation(s, q1, q2);
  require(sep > 1e-14, ErrorKind::InvalidInput, "distance: q1 and q2 coincide");
  const int n = s.dim();
  const double L = ctrl.max_length > 0.0 ? ctrl.max_length : 4.0 * std::max(sep, std::sqrt(sep)) + 0.5;

  // Pre-screen: closest approach of unit-speed geodesics to q2 on a time grid.
  const std::vector<Vec> dirs = sphere_directions(n, ctrl.samples, ctrl.seed);
  std::vector<Candidate> cands(dirs.size());
  std::vector<double> times(static_cast<std::size_t>(ctrl.screen_grid));
  for (int i = 0; i < ctrl.screen_grid; ++i) times[i] = L * (i + 1) / ctrl.screen_grid;
  parallel_for(dirs.size(), [&](std::size_t i) {
    Candidate& c = cands[i];
    c.index = i;
    const double H = hamiltonian(s, q1, Covector(dirs[i]));
    if (!(H > 1e-14)) return;
    const Vec unit = dirs[i] / std::sqrt(2.0 * H);
    try {
      integrate(s, FlowPoint{q1, Covector(unit), Mat(), 0.0}, L, ctrl.integrator, times, [&](const FlowPoint& fp) {
        const double g = separation(s, fp.q, q2);
        if (g < c.gap) {
          c.gap = g;
          c.mu = unit * fp.t;
        }
      });
    } catch (const Error&) {
      // Directions whose flow fails are simply not candidates.
    }
  });
  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.gap < b.gap; });
  const std::size_t K = std::min<std::size_t>(static_cast<std::size_t>(ctrl.refine), cands.size());
  // Half of the Newton budget goes to well-separated directions, so that one shallow family of
  // near misses cannot crowd out the others; the rest follows the gap ranking.
  std::vector<std::size_t> chosen;
  std::vector<bool> taken(cands.size(), false);
  for (std::size_t i = 0; i < cands.size() && chosen.size() < K / 2; ++i) {
    if (!std::isfinite(cands[i].gap)) break;
    const Vec& di = dirs[cands[i].index];
    const bool apart = std::all_of(chosen.begin(), chosen.end(), [&](std::size_t j) {
      const Vec& dj = dirs[cands[j].index];
      return di.dot(dj) < std::cos(kDiverseAngle) * di.norm() * dj.norm();
    });
    if (apart) {
      chosen.push_back(i);
      taken[i] = true;
    }
  }
  for (std::size_t i = 0; i < cands.size() && chosen.size() < K; ++i)
    if (!taken[i]) chosen.push_back(i);
  std::vector<std::optional<ShootingRoot>> refined(chosen.size());
  parallel_for(chosen.size(), [&](std::size_t i) {
    const Candidate& c = cands[chosen[i]];
    if (std::isfinite(c.gap)) refined[i] = shoot(s, q1, q2, Covector(c.mu), ctrl);
  });

  DistanceResult out;
  out.candidates_refined = static_cast<int>(K);
  std::vector<ShootingRoot> roots;
  for (auto& r : refined) {
    if (!r) continue;
    ++out.roots_found;
    const bool dup = std::any_of(roots.begin(), roots.end(), [&](const ShootingRoot& o) {
      return (o.mu.comps - r->mu.comps).norm() < ctrl.same_root_tol * std::max(1.0, o.mu.comps.norm());
    });
    if (!dup) roots.push_back(std::move(*r));
  }
  if (roots.empty())
    fail(ErrorKind::NotFound, "distance: no shooting root converged (enlarge max_length or samples)");
  std::stable_sort(roots.begin(), roots.end(),
                   [](const ShootingRoot& a, const ShootingRoot& b) { return a.length < b.length; });
  out.d = roots.front().length;
  for (ShootingRoot& r : roots)
    if (r.length <= out.d * (1.0 + ctrl.multiplicity_tol)) out.roots.push_back(std::move(r));

  out.minimizers.resize(out.roots.size());
  ConjugateControls cc;
  cc.integrator = ctrl.integrator;
  parallel_for(out.roots.size(), [&](std::size_t i) {
    const ShootingRoot& r = out.roots[i];
    GeodesicRecord g = geodesic(s, q1, r.mu, r.length, cc);
    if (g.t_conj && *g.t_conj > r.length * (1.0 + 1e-9)) g.t_conj.reset();
    out.minimizers[i] = std::move(g);
  });
  out.non_discrete =
      out.roots.size() >= 3 &&
      std::all_of(out.roots.begin(), out.roots.end(), [](const ShootingRoot& r) { return r.rank_deficit >= 1; });
  return out;
}

CutTimeResult cut_time(const Structure& s, const Point& q0, const Covector& lam0, double t_max,
                       const ShootingControls& ctrl, int bisections) {
  require(t_max > 0.0, ErrorKind::InvalidInput, "cut_time: t_max must be positive");
  const Covector unit = normalize_covector(s, q0, lam0);
  ConjugateControls cc;
  cc.integrator = ctrl.integrator;
  CutTimeResult out;
  out.t_conj = first_conjugate_time(s, q0, unit, t_max, cc);
  const double upper = out.t_conj ? *out.t_conj : t_max;

  // Optimality of the arc [0, t] is monotone in t.
  auto optimal = [&](double t) {
    const Point z = exp_map(s, q0, unit, t, ctrl.integrator);
    ShootingControls local = ctrl;
    local.max_length = ctrl.max_length > 0.0 ? ctrl.max_length : 1.5 * t + 0.5;
    // At a conjugate endpoint the shooting Jacobian is singular and every start may fail;
    // the arc itself then remains the only geodesic found.
    try {
      const DistanceResult d = distance(s, q0, z, local);
      return d.d >= t * (1.0 - 1e-7);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NotFound) throw;
      return true;
    }
  };
  if (optimal(upper)) {
    if (out.t_conj) {
      out.t_cut = out.t_conj;
      out.cut_equals_conjugate = true;
    }
    return out;
  }
  double lo = 0.0, hi = upper;
  for (int i = 0; i < bisections; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (optimal(mid))
      lo = mid;
    else
      hi = mid;
  }
  out.t_cut = 0.5 * (lo + hi);
  out.cut_equals_conjugate = out.t_conj && std::abs(*out.t_cut - *out.t_conj) <= 1e-7 * std::max(1.0, *out.t_conj);
  return out;
}

double hinged(const Structure& s, const Point& q1, const Point& q2, const Point& q, const ShootingControls& ctrl) {
  auto dist = [&](const Point& a, const Point& b) {
    if (separation(s, a, b) <= 1e-14) return 0.0;
    return distance(s, a, b, ctrl).d;
  };
  const double d1 = dist(q1, q);
  const double d2 = dist(q, q2);
  return 0.5 * (d1 * d1 + d2 * d2);
}

std::function<double(const Vec&)> local_hinged(const Structure& s, const GeodesicRecord& g, int* chart,
                                               const ShootingControls& ctrl) {
  require(g.length > 0.0 && !g.samples.empty(), ErrorKind::InvalidInput, "local_hinged: empty geodesic");
  const double half = 0.5 * g.length;
  const Point q1 = g.q0;
  const Covector mu1(g.lambda0.comps * half);
  const Point z0 = exp_map(s, q1, g.lambda0, half, ctrl.integrator);
  const Point q2 = g.end().q;
  const Covector mu2(-g.end().p.comps * half);
  if (chart != nullptr) *chart = z0.chart;
  const int zc = z0.chart;
  return [s, q1, q2, mu1, mu2, zc, ctrl](const Vec& z) {
    const Point zp(z, zc);
    const auto r1 = shoot(s, q1, zp, mu1, ctrl);
    const auto r2 = shoot(s, q2, zp, mu2, ctrl);
    if (!r1 || !r2) fail(ErrorKind::NotFound, "local hinged energy: shooting did not converge near the midpoint");
    return 0.5 * (r1->length * r1->length + r2->length * r2->length);
  };
}

namespace {

Mat fd_hessian(const std::function<double(const Vec&)>& h, const Vec& z0, double f0, double d) {
  const int n = static_cast<int>(z0.size());
  Mat H(n, n);
  for (int i = 0; i < n; ++i) {
    Vec zp = z0, zm = z0;
    zp[i] += d;
    zm[i] -= d;
    H(i, i) = (h(zp) - 2.0 * f0 + h(zm)) / (d * d);
    for (int j = 0; j < i; ++j) {
      Vec a = z0, b = z0, c = z0, e = z0;
      a[i] += d, a[j] += d;
      b[i] += d, b[j] -= d;
      c[i] -= d, c[j] += d;
      e[i] -= d, e[j] -= d;
      H(i, j) = H(j, i) = (h(a) - h(b) - h(c) + h(e)) / (4.0 * d * d);
    }
  }
  return H;
}

}  // namespace

HingedProfile profile_of_function(const std::function<double(const Vec&)>& h, const Vec& z0,
                                  const ProfileControls& ctrl) {
  const int n = static_cast<int>(z0.size());
  HingedProfile prof;
  prof.z0 = Point(z0);
  prof.h_min = h(z0);
  const double d = ctrl.step * std::max(1.0, z0.cwiseAbs().maxCoeff());
  const Mat H1 = fd_hessian(h, z0, prof.h_min, d);
  const Mat H2 = fd_hessian(h, z0, prof.h_min, 0.5 * d);
  prof.hessian = (4.0 * H2 - H1) / 3.0;
  prof.hessian = 0.5 * (prof.hessian + prof.hessian.transpose());

  Eigen::SelfAdjointEigenSolver<Mat> eig(prof.hessian);
  prof.eigenvalues = eig.eigenvalues();
  const double top = std::max(prof.eigenvalues.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  if (prof.eigenvalues.minCoeff() < -ctrl.psd_tol * top)
    fail(ErrorKind::Inconsistency, "midpoint Hessian is indefinite (smallest eigenvalue " +
                                       std::to_string(prof.eigenvalues.minCoeff()) +
                                       "): the geodesic is not minimizing");
  std::vector<int> range;
  for (int i = 0; i < n; ++i) {
    if (prof.eigenvalues[i] < ctrl.rank_tol * top)
      prof.kernel_basis.push_back(eig.eigenvectors().col(i));
    else
      range.push_back(i);
  }
  prof.r = static_cast<int>(prof.kernel_basis.size());
  if (prof.r != 1) return prof;

  // Splitting reduction: phi(s) = min_w h(z0 + s k + W w) - h_min, w in the Hessian's range.
  const Vec k = prof.kernel_basis.front();
  const int nr = static_cast<int>(range.size());
  Mat W(n, nr);
  Vec lam(nr);
  for (int j = 0; j < nr; ++j) {
    W.col(j) = eig.eigenvectors().col(range[j]);
    lam[j] = prof.eigenvalues[range[j]];
  }
  const double eps = 1e-4 * std::max(1.0, z0.cwiseAbs().maxCoeff());
  auto reduced = [&](double s, Vec& w) {
    for (int it = 0; it < 40 && nr > 0; ++it) {
      const Vec base = z0 + s * k + W * w;
      Vec grad(nr);
      for (int j = 0; j < nr; ++j) grad[j] = (h(base + eps * W.col(j)) - h(base - eps * W.col(j))) / (2.0 * eps);
      const Vec dw = -grad.cwiseQuotient(lam);
      w += dw;
      if (dw.norm() <= 1e-13 * std::max(1.0, w.norm())) break;
    }
    return h(z0 + s * k + W * w) - prof.h_min;
  };
  Vec wp = Vec::Zero(nr), wm = Vec::Zero(nr);
  double s = ctrl.s_start;
  for (int j = 0; j < ctrl.max_order_samples; ++j, s *= ctrl.s_ratio) {
    const double phi = 0.5 * (reduced(s, wp) + reduced(-s, wm));
    if (!(phi > ctrl.noise_floor)) break;
    prof.order_s.push_back(s);
    prof.order_phi.push_back(phi);
  }
  for (std::size_t j = 1; j < prof.order_s.size(); ++j)
    prof.order_slopes.push_back(std::log(prof.order_phi[j - 1] / prof.order_phi[j]) /
                                std::log(prof.order_s[j - 1] / prof.order_s[j]));
  if (prof.order_slopes.empty()) return prof;
  const double slope = prof.order_slopes.back();
  const double even = 2.0 * std::round(slope / 2.0);
  if (std::abs(slope - even) < 0.3 && even >= 2.0) {
    prof.detected_order = static_cast<int>(even);
    prof.m = static_cast<int>(even) - 1;
  }
  return prof;
}

HingedProfile midpoint_profile(const Structure& s, const Point& q1, const Point& q2, const GeodesicRecord& g,
                               const ProfileControls& ctrl) {
  require(g.length > 0.0, ErrorKind::Precondition, "midpoint_profile: geodesic has zero length");
  require(separation(s, g.q0, q1) <= 1e-9, ErrorKind::Precondition, "midpoint_profile: geodesic does not start at q1");
  require(separation(s, g.end().q, q2) <= 1e-7, ErrorKind::Precondition, "midpoint_profile: geodesic does not end at q2");
  ShootingControls sc = ctrl.shooting;
  sc.integrator.rtol = std::min(sc.integrator.rtol, 1e-13);
  sc.integrator.atol = std::min(sc.integrator.atol, 1e-15);
  sc.residual_tol = std::min(sc.residual_tol, 1e-13);
  int chart = 0;
  const auto h = local_hinged(s, g, &chart, sc);
  const Point z0 = exp_map(s, g.q0, g.lambda0, 0.5 * g.length, sc.integrator);
  HingedProfile prof = profile_of_function(h, z0.coords, ctrl);
  prof.z0 = Point(z0.coords, chart);
  return prof;
}

std::vector<CutLocusSample> sample_cut_locus(const Structure& s, const Point& q0, const std::vector<Covector>& lams,
                                             double t_max, const ShootingControls& ctrl) {
  std::vector<CutLocusSample> rows(lams.size());
  parallel_for(lams.size(), [&](std::size_t i) {
    CutLocusSample& row = rows[i];
    row.theta = direction_angles(lams[i].comps);
    row.lambda0 = normalize_covector(s, q0, lams[i]);
    const CutTimeResult ct = cut_time(s, q0, row.lambda0, t_max, ctrl);
    row.t_cut = ct.t_cut;
    row.t_conj = ct.t_conj;
    if (ct.t_cut) row.endpoint = exp_map(s, q0, row.lambda0, *ct.t_cut, ctrl.integrator);
  });
  return rows;
}

}  // namespace heatlocus
