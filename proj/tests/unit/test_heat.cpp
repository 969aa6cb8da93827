#include <cmath>
#include <numbers>
#include <string>

#include "doctest.h"
#include "heatlocus/heat.hpp"
#include "heatlocus/singularity.hpp"

using namespace heatlocus;

namespace {
ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Parse;
}

std::vector<GeodesicClassification> ms(std::initializer_list<int> list) {
  std::vector<GeodesicClassification> out;
  for (int m : list) out.push_back({m, 1.0, 1.0});
  return out;
}

std::vector<double> grid(int count, double lo_exp, double hi_exp) {
  std::vector<double> t;
  for (int i = 0; i < count; ++i) t.push_back(std::pow(10.0, lo_exp + (hi_exp - lo_exp) * i / (count - 1)));
  return t;
}

const auto one = [](const Vec&) { return 1.0; };

Vec v2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}
}  // namespace

TEST_CASE("predicted exponents") {
  const AsymptoticPrediction a3 = predict(3, ms({3}));
  CHECK(a3.exponent == Rational(7, 4));
  CHECK(a3.remainder_power == Rational(1, 2));
  CHECK(a3.regime == "ogrande");
  CHECK(predict(4, ms({3})).exponent == Rational(9, 4));
  CHECK(predict(5, ms({3, 5})).exponent == Rational(17, 6));

  const AsymptoticPrediction smooth = predict(2, ms({1}));
  CHECK(smooth.exponent == Rational(1));
  CHECK(smooth.exponent.str() == "1");
  CHECK(smooth.remainder_power == Rational(1));
  CHECK(smooth.regime == "smooth");

  for (int n = 1; n <= 6; ++n) {
    CHECK(predict(n, ms({3})).exponent == Rational(n, 2) + Rational(1, 4));
    CHECK(predict(n, ms({1})).exponent == Rational(n, 2));
  }
}

TEST_CASE("largest type dominates") {
  for (int n = 2; n <= 5; ++n) {
    const AsymptoticPrediction mixed = predict(n, {{1, 2.0, 0.5}, {5, 1.5, 0.7}, {3, 1.0, 1.0}, {5, 0.5, 2.0}});
    const AsymptoticPrediction top = predict(n, {{5, 1.5, 0.7}, {5, 0.5, 2.0}});
    CHECK(mixed.exponent == top.exponent);
    CHECK(mixed.remainder_power == top.remainder_power);
    REQUIRE(mixed.leading_C.has_value());
    CHECK(*mixed.leading_C == doctest::Approx(*top.leading_C).epsilon(1e-15));
    CHECK(*top.leading_C == doctest::Approx(leading_constant_Ci(1.5, 0.7, 1.0, n, 5) +
                                            leading_constant_Ci(0.5, 2.0, 1.0, n, 5)));
  }
}

TEST_CASE("prediction errors and missing constants") {
  CHECK(kind_of([] { predict(2, {}); }) == ErrorKind::Precondition);
  CHECK(kind_of([] { predict(2, ms({2})); }) == ErrorKind::InvalidInput);
  CHECK_FALSE(predict(3, ms({3}), false).leading_C.has_value());
  const nlohmann::json j = to_json(predict(3, ms({3})));
  CHECK(j["exponent"] == "7/4");
  CHECK(j["remainder"] == "1/2");
  CHECK(j["classifications"].size() == 1);
}

TEST_CASE("bounds") {
  const BoundsPrediction b = predict_bounds(2, 1);
  CHECK(b.lower_exponent == Rational(5, 4));
  CHECK(b.upper_exponent == Rational(3, 2));
  const BoundsPrediction z = predict_bounds(3, 0);
  CHECK(z.lower_exponent == Rational(3, 2));
  CHECK(z.upper_exponent == Rational(3, 2));
  CHECK(kind_of([] { predict_bounds(2, 2); }) == ErrorKind::InvalidInput);
  CHECK(kind_of([] { predict_bounds(2, -1); }) == ErrorKind::InvalidInput);
  // Ogrande exponents stay within [n/2, n/2 + r/2] for r = 1.
  for (int n = 2; n <= 5; ++n)
    for (int m : {3, 5, 7}) {
      const Rational e = predict(n, ms({m})).exponent;
      CHECK(Rational(n, 2) <= e);
      CHECK(e <= predict_bounds(n, 1).upper_exponent);
    }
}

TEST_CASE("power-law fit") {
  const std::vector<double> t = grid(8, -5.0, -2.0);
  std::vector<double> v;
  for (double x : t) v.push_back(3.0 * std::pow(x, -1.25));
  const ExponentFit f = fit_power_law(t, v);
  CHECK(f.slope == doctest::Approx(-1.25).epsilon(1e-12));
  CHECK(std::exp(f.intercept) == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(f.r2 == doctest::Approx(1.0));

  std::vector<double> noisy = v;
  for (std::size_t i = 0; i < noisy.size(); ++i) noisy[i] *= i % 2 ? 5.0 : 0.2;
  try {
    fit_power_law(t, noisy);
    FAIL("expected a fit-quality error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::FitQuality);
    CHECK(std::string(e.what()).find("R^2") != std::string::npos);
  }
}

TEST_CASE("t grid validation") {
  CHECK_NOTHROW(validate_t_grid(grid(6, -5.0, -2.0)));
  CHECK(kind_of([] { validate_t_grid(grid(5, -5.0, -2.0)); }) == ErrorKind::InvalidInput);
  CHECK(kind_of([] { validate_t_grid(grid(6, -3.0, -2.0)); }) == ErrorKind::InvalidInput);
  CHECK(kind_of([] { validate_t_grid(grid(6, -2.0, 0.0)); }) == ErrorKind::InvalidInput);
}

TEST_CASE("midpoint integral exponents of model profiles") {
  const std::vector<double> t = grid(8, -5.0, -2.0);
  const ExponentFit gauss = midpoint_integral_exponent(
      [](const Vec& z) { return 0.25 + z[0] * z[0] + z[1] * z[1]; }, 0.25, Vec::Zero(2), one, t);
  CHECK(gauss.slope == doctest::Approx(-1.0).epsilon(1e-6));
  for (int m : {3, 5}) {
    const ExponentFit f = midpoint_integral_exponent(
        [m](const Vec& z) { return 0.25 + z[0] * z[0] + std::pow(z[1], m + 1); }, 0.25, Vec::Zero(2), one, t);
    CHECK(std::abs(f.slope + predict(2, ms({m})).exponent.value()) < 0.02);
  }
}

TEST_CASE("fixture midpoint integrals") {
  const std::vector<double> t = grid(8, -5.0, -2.0);
  for (int eta : {3, 4}) {
    const ContactFixture fx = make_fixture(eta);
    const ExponentFit f = midpoint_integral_exponent(fx.h, fx.h_min, fx.z0, one, t);
    const Rational e = predict(2, ms({2 * eta - 1})).exponent;
    CHECK(e == Rational(3 * eta - 1, 2 * eta));
    CHECK(std::abs(f.slope + e.value()) < 0.02);
    // Coarse bounds for a conjugate minimizer.
    CHECK(-f.slope >= 1.0 + 0.25 - 0.02);
    CHECK(-f.slope <= 2.0 - 0.5 + 0.02);
    for (double s : {1e-3, 1e-4}) {
      const double I = std::pow(2.0 / s, 2) *
                       quadrature_oracle(one, [&](const Vec& x) { return fx.h(fx.z0 + x) - fx.h_min; },
                                         Box::symmetric(2, 0.5), s);
      const auto [lo, hi] = bounding_integrals(2, 1, 0.5, s);
      CHECK(lo <= I);
      CHECK(I <= hi);
    }
  }
}

TEST_CASE("midpoint integral along a Euclidean minimizer") {
  const Structure s = builtin("euclidean", {{"n", 2}});
  const Point a(v2(0.0, 0.0)), b(v2(1.0, 0.5));
  const DistanceResult r = distance(s, a, b);
  const HingedProfile p = midpoint_profile(s, a, b, r.minimizers.front());
  const ExponentFit f = midpoint_integral_exponent(s, p, r.minimizers.front(), one, grid(6, -5.0, -2.0));
  CHECK(f.slope == doctest::Approx(-1.0).epsilon(1e-6));
  // h - h_min = |z - z0|^2, so the value is (2/t)^2 pi t.
  for (std::size_t i = 0; i < f.grid.size(); ++i)
    CHECK(f.values[i] == doctest::Approx(4.0 * std::numbers::pi / f.grid[i]).epsilon(1e-8));
}

TEST_CASE("leading Ben Arous coefficient") {
  const Structure e = builtin("euclidean", {{"n", 3}});
  Vec x(3), y(3);
  x << 0.1, -0.2, 0.3;
  y << 1.0, 0.4, -0.7;
  CHECK(ben_arous_c0(e, Point(x), Point(y)) == doctest::Approx(1.0).epsilon(1e-9));

  const Structure sphere = builtin("round_sphere");
  const Point q(v2(0.0, 0.0));
  const Covector lam = normalize_covector(sphere, q, Covector(v2(0.3, 0.4)));
  for (double rho : {0.1, 1.0, 2.5, 3.0}) {
    const Point z = exp_map(sphere, q, lam, rho);
    CHECK(ben_arous_c0(sphere, q, z) == doctest::Approx(std::sqrt(rho / std::sin(rho))).epsilon(1e-6));
  }
  const Point antipode = exp_map(sphere, q, lam, std::numbers::pi);
  CHECK(kind_of([&] { ben_arous_c0(sphere, q, antipode); }) == ErrorKind::Domain);

  const Structure heis = builtin("heisenberg");
  Vec h(3);
  h << 1.0, 0.0, 0.0;
  CHECK(kind_of([&] { ben_arous_c0(heis, Point(Vec::Zero(3)), Point(h)); }) == ErrorKind::Unsupported);
}
