#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "heatlocus/flow.hpp"

using namespace heatlocus;
using std::numbers::pi;

namespace {
Vec v(std::initializer_list<double> xs) {
  Vec out(static_cast<Eigen::Index>(xs.size()));
  int i = 0;
  for (double x : xs) out[i++] = x;
  return out;
}
}  // namespace

TEST_CASE("euclidean flow is a straight line") {
  const Structure e2 = builtin("euclidean", {{"n", 2}});
  const auto traj = flow(e2, Point(v({0, 0})), Covector(v({1, 0})), 2.0);
  CHECK((traj.back().q.coords - v({2, 0})).norm() < 1e-12);
  CHECK((traj.back().p.comps - v({1, 0})).norm() < 1e-12);
  CHECK(traj.back().t == doctest::Approx(2.0));
  const Structure e3 = builtin("euclidean", {{"n", 3}});
  const Point q = exp_map(e3, Point(v({1, 2, 3})), Covector(v({0.5, -1, 2})), 1.5);
  CHECK((q.coords - v({1.75, 0.5, 6})).norm() < 1e-10);
  CHECK(!first_conjugate_time(e3, Point(v({0, 0, 0})), Covector(v({1, 0, 0})), 5.0));
  CHECK((d_exp(e3, Point(v({0, 0, 0})), Covector(v({0.3, 0.1, -2}))) - Mat::Identity(3, 3)).norm() < 1e-10);
}

TEST_CASE("heisenberg horizontal line and vertical return") {
  const Structure h = builtin("heisenberg");
  const auto traj = flow(h, Point(v({0, 0, 0})), Covector(v({1, 0, 0})), 1.0);
  CHECK((traj.back().q.coords - v({1, 0, 0})).norm() < 1e-10);
  // Unit covector with p_z = c returns to the axis at t = 2 pi / c.
  const double c = 1.5;
  const Covector lam(v({0.6, 0.8, c}));
  const Point q = exp_map(h, Point(v({0, 0, 0})), lam, 2 * pi / c);
  CHECK(std::hypot(q.coords[0], q.coords[1]) < 1e-8);
  CHECK(q.coords[2] == doctest::Approx(pi / (c * c)).epsilon(1e-8));
  const auto tc = first_conjugate_time(h, Point(v({0, 0, 0})), lam, 8.0);
  REQUIRE(tc);
  CHECK(std::abs(*tc - 2 * pi / c) < 1e-6);
  const Mat J = d_exp(h, Point(v({0, 0, 0})), Covector(lam.comps * (2 * pi / c)));
  Eigen::JacobiSVD<Mat> svd(J);
  CHECK(svd.singularValues()[2] < 1e-7 * svd.singularValues()[0]);
  CHECK(svd.singularValues()[1] > 1e-3 * svd.singularValues()[0]);
}

TEST_CASE("sphere great circles close and conjugate at pi") {
  const Structure s = builtin("round_sphere", {{"radius", 1.0}});
  const Point q0(v({0.2, -0.1}));
  for (double th : {0.0, 1.0, 2.5, 4.0}) {
    const Covector lam = normalize_covector(s, q0, Covector(v({std::cos(th), std::sin(th)})));
    const auto traj = flow(s, q0, lam, 2 * pi);
    const Point end = s.to_chart(traj.back().q, q0.chart);
    CHECK((end.coords - q0.coords).norm() < 1e-8);
    double drift = 0;
    for (const auto& st : traj) drift = std::max(drift, std::abs(st.H - 0.5));
    CHECK(drift < 1e-9);
    const auto tc = first_conjugate_time(s, q0, lam, 4.0);
    REQUIRE(tc);
    CHECK(std::abs(*tc - pi) < 1e-6);
  }
}

TEST_CASE("exp_map depends on t*lambda only") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  for (const char* name : {"round_sphere", "revolution_surface"}) {
    const Structure s = builtin(name);
    for (int k = 0; k < 5; ++k) {
      const Point q0(v({0.3 * u(rng), 0.3 * u(rng)}));
      const Covector lam(v({u(rng), u(rng)}));
      for (double a : {0.5, 2.0, 3.0}) {
        const Point x = exp_map(s, q0, lam, a * 0.7);
        const Point y = s.to_chart(exp_map(s, q0, Covector(a * lam.comps), 0.7), x.chart);
        CHECK((x.coords - y.coords).norm() < 1e-10);
      }
    }
  }
}

TEST_CASE("variational jacobian matches finite differences") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  for (const char* name : {"round_sphere", "revolution_surface", "heisenberg", "contact3d_perturbed", "quasicontact4d"}) {
    const Structure s = builtin(name);
    for (int k = 0; k < 6; ++k) {
      Vec q = Vec::Zero(s.dim());
      Vec l(s.dim());
      for (int i = 0; i < s.dim(); ++i) {
        q[i] = 0.2 * u(rng);
        l[i] = u(rng);
      }
      const Mat J = d_exp(s, Point(q), Covector(l));
      const Mat Jfd = d_exp_fd(s, Point(q), Covector(l));
      CHECK((J - Jfd).norm() <= 1e-6 * std::max(1.0, J.norm()));
    }
  }
}

TEST_CASE("energy drift on all builtins") {
  for (const char* name : {"euclidean", "round_sphere", "revolution_surface", "heisenberg", "contact3d_perturbed", "quasicontact4d"}) {
    const Structure s = builtin(name);
    Vec q = Vec::Constant(s.dim(), 0.1);
    Vec l = Vec::LinSpaced(s.dim(), 0.5, 1.0);
    const GeodesicRecord g = geodesic(s, Point(q), Covector(l), 10.0);
    CHECK(g.max_energy_drift() < 1e-9);
  }
}

TEST_CASE("flow rejects bad input") {
  const Structure h = builtin("heisenberg");
  CHECK_THROWS_AS(flow(h, Point(v({0, 0, 0})), Covector(v({0, 0, 0})), 1.0), Error);
  CHECK_THROWS_AS(flow(h, Point(v({0, 0, 0})), Covector(v({1, 0, 0})), -1.0), Error);
  CHECK_THROWS_AS(exp_map(h, Point(v({0, 0, 0})), Covector(v({0, 0, 0})), 1.0), Error);
}
