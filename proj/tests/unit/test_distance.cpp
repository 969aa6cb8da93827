#include <cmath>
#include <numbers>

#include "doctest.h"
#include "heatlocus/distance.hpp"
#include "heatlocus/singularity.hpp"

using namespace heatlocus;
using std::numbers::pi;

namespace {
Vec v(std::initializer_list<double> xs) {
  Vec out(static_cast<Eigen::Index>(xs.size()));
  int i = 0;
  for (double x : xs) out[i++] = x;
  return out;
}

double sphere_angle(const Structure& s, const Point& a, const Point& b) {
  return std::acos(std::clamp(s.embed(a).dot(s.embed(b)), -1.0, 1.0));
}

void check_minimizers(const Structure& s, const Point& q2, const DistanceResult& r) {
  for (const GeodesicRecord& g : r.minimizers) {
    CHECK(std::abs(g.length - r.d) < 1e-7);
    const Point end = s.to_chart(g.end().q, q2.chart);
    CHECK((end.coords - q2.coords).norm() < 1e-7);
  }
}
}  // namespace

TEST_CASE("euclidean distance has one minimizer") {
  const Structure e3 = builtin("euclidean", {{"n", 3}});
  const Point q2(v({1, 2, 2}));
  const DistanceResult r = distance(e3, Point(v({0, 0, 0})), q2);
  CHECK(r.d == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(r.minimizers.size() == 1);
  CHECK(!r.non_discrete);
  check_minimizers(e3, q2, r);
}

TEST_CASE("sphere distance matches the great-circle angle") {
  const Structure s = builtin("round_sphere");
  const Point q1(v({0.1, 0.2})), q2(v({0.5, -0.3}));
  const DistanceResult r = distance(s, q1, q2);
  CHECK(r.d == doctest::Approx(sphere_angle(s, q1, q2)).epsilon(1e-9));
  CHECK(r.minimizers.size() == 1);
  check_minimizers(s, q2, r);
}

TEST_CASE("sphere antipodes form a flagged continuum") {
  const Structure s = builtin("round_sphere");
  const DistanceResult r = distance(s, Point(v({0, 0})), Point(v({0, 0}), 1));
  CHECK(r.d == doctest::Approx(pi).epsilon(1e-8));
  CHECK(r.minimizers.size() >= 3);
  CHECK(r.non_discrete);
}

TEST_CASE("heisenberg vertical distance") {
  const Structure h = builtin("heisenberg");
  const double z = 1.0;
  const Point q2(v({0, 0, z}));
  const DistanceResult r = distance(h, Point(v({0, 0, 0})), q2);
  CHECK(r.d == doctest::Approx(std::sqrt(4 * pi * z)).epsilon(1e-8));
  CHECK(r.non_discrete);
  check_minimizers(h, q2, r);
}

TEST_CASE("distance rejects coincident points") {
  const Structure e2 = builtin("euclidean", {{"n", 2}});
  CHECK_THROWS_AS(distance(e2, Point(v({1, 1})), Point(v({1, 1}))), Error);
}

TEST_CASE("cut times of the reference structures") {
  const Structure e2 = builtin("euclidean", {{"n", 2}});
  const CutTimeResult ce = cut_time(e2, Point(v({0, 0})), Covector(v({1, 0})), 5.0);
  CHECK(!ce.t_cut);
  CHECK(!ce.t_conj);

  const Structure h = builtin("heisenberg");
  const double c = 1.3;
  const CutTimeResult ch = cut_time(h, Point(v({0, 0, 0})), Covector(v({0.6, 0.8, c})), 8.0);
  REQUIRE(ch.t_cut);
  CHECK(*ch.t_cut == doctest::Approx(2 * pi / c).epsilon(1e-7));
  CHECK(ch.cut_equals_conjugate);

  const Structure s = builtin("round_sphere");
  const CutTimeResult cs = cut_time(s, Point(v({0, 0})), Covector(v({1, 0})), 5.0);
  REQUIRE(cs.t_cut);
  CHECK(*cs.t_cut == doctest::Approx(pi).epsilon(1e-7));
  CHECK(cs.cut_equals_conjugate);
  CHECK(*cs.t_cut <= *cs.t_conj + 1e-9);
}

TEST_CASE("hinged energy on a line") {
  const Structure e1 = builtin("euclidean", {{"n", 1}});
  const Point q1(v({0})), q2(v({2}));
  CHECK(hinged(e1, q1, q2, Point(v({1}))) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(hinged(e1, q1, q2, Point(v({0.0}))) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("hinged energy on the sphere") {
  const Structure s = builtin("round_sphere");
  const Point q1(v({0, 0}));
  const Covector lam = normalize_covector(s, q1, Covector(v({0.3, 0.7})));
  const Point q2 = exp_map(s, q1, lam, 1.0);
  const Point mid = exp_map(s, q1, lam, 0.5);
  CHECK(hinged(s, q1, q2, mid) == doctest::Approx(0.25).epsilon(1e-8));
  for (const Vec& off : {v({0.05, 0}), v({0, 0.05}), v({-0.04, 0.03})}) {
    const Point q(Vec(mid.coords + off), mid.chart);
    CHECK(hinged(s, q1, q2, q) >= 0.25 - 1e-9);
  }
}

TEST_CASE("euclidean midpoint profile is nondegenerate") {
  const Structure e2 = builtin("euclidean", {{"n", 2}});
  const Point q1(v({0, 0})), q2(v({2, 1}));
  const DistanceResult r = distance(e2, q1, q2);
  const HingedProfile p = midpoint_profile(e2, q1, q2, r.minimizers.at(0));
  CHECK(p.r == 0);
  CHECK(!p.m);
  CHECK(p.h_min == doctest::Approx(r.d * r.d / 4).epsilon(1e-7));
  CHECK((p.z0.coords - v({1, 0.5})).norm() < 1e-7);
  CHECK(p.eigenvalues.minCoeff() == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("sphere midpoint profile before the antipode") {
  const Structure s = builtin("round_sphere");
  const Point q1(v({0, 0}));
  const Covector lam = normalize_covector(s, q1, Covector(v({1, 0})));
  const Point q2 = exp_map(s, q1, lam, pi - 0.1);
  const DistanceResult r = distance(s, q1, q2);
  REQUIRE(r.minimizers.size() == 1);
  const HingedProfile p = midpoint_profile(s, q1, q2, r.minimizers[0]);
  CHECK(p.r == 0);
  CHECK(p.h_min == doctest::Approx(r.d * r.d / 4).epsilon(1e-7));
  CHECK(p.eigenvalues.minCoeff() > -1e-8);
  // Rank agreement with the exponential map at twice the midpoint covector.
  Eigen::JacobiSVD<Mat> svd(r.minimizers[0].end_jacobian);
  const Vec& sv = svd.singularValues();
  int deficit = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) deficit += sv[i] < 1e-6 * sv[0];
  CHECK(deficit == p.r);
}

TEST_CASE("hinged energy is stationary at the midpoint") {
  const Structure s = builtin("round_sphere");
  const Point q1(v({0.1, -0.2})), q2(v({-0.4, 0.3}));
  const DistanceResult r = distance(s, q1, q2);
  int chart = 0;
  const auto h = local_hinged(s, r.minimizers.at(0), &chart);
  const HingedProfile p = midpoint_profile(s, q1, q2, r.minimizers[0]);
  const double step = 1e-4;
  for (int i = 0; i < 2; ++i) {
    Vec e = Vec::Zero(2);
    e[i] = step;
    const double g = (h(p.z0.coords + e) - h(p.z0.coords - e)) / (2 * step);
    CHECK(std::abs(g) < 1e-6);
  }
}

TEST_CASE("profile of an explicit degenerate function") {
  const auto f = [](const Vec& x) { return 1.0 + x[0] * x[0] + std::pow(x[1], 4) + x[0] * x[1] * x[1]; };
  ProfileControls pc;
  pc.noise_floor = 1e-13;
  const HingedProfile p = profile_of_function(f, v({0, 0}), pc);
  CHECK(p.r == 1);
  REQUIRE(p.m);
  CHECK(*p.m == 3);
}

TEST_CASE("profile rejects a saddle") {
  const auto f = [](const Vec& x) { return x[0] * x[0] - x[1] * x[1]; };
  CHECK_THROWS_AS(profile_of_function(f, v({0, 0})), Error);
}

TEST_CASE("fixture profile recovers the contact order") {
  ProfileControls pc;
  pc.noise_floor = 1e-13;
  for (int eta : {3, 4}) {
    const ContactFixture fx = make_fixture(eta, 1.3, 0.7);
    const HingedProfile p = profile_of_function(fx.h, fx.z0, pc);
    CHECK(p.r == 1);
    REQUIRE(p.m);
    CHECK(*p.m == 2 * eta - 1);
    CHECK(p.h_min == doctest::Approx(0.25).epsilon(1e-12));
  }
}

TEST_CASE("sampled cut locus of the sphere") {
  const Structure s = builtin("round_sphere");
  std::vector<Covector> lams;
  for (const Vec& w : sphere_directions(2, 4, 0)) lams.emplace_back(w);
  const auto rows = sample_cut_locus(s, Point(v({0, 0})), lams, 4.0);
  REQUIRE(rows.size() == 4);
  for (const CutLocusSample& row : rows) {
    REQUIRE(row.t_cut);
    CHECK(*row.t_cut == doctest::Approx(pi).epsilon(1e-7));
    CHECK(row.theta.size() == 1);
  }
}

TEST_CASE("sphere directions are unit and deterministic") {
  const auto a = sphere_directions(3, 16, 5), b = sphere_directions(3, 16, 5);
  REQUIRE(a.size() == 16);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].norm() == doctest::Approx(1.0));
    CHECK((a[i] - b[i]).norm() == 0.0);
  }
  CHECK(direction_angles(v({0, 1})).at(0) == doctest::Approx(pi / 2));
}
