#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "heatlocus/singularity.hpp"

using namespace heatlocus;

namespace {
Vec v(std::initializer_list<double> xs) {
  Vec out(static_cast<Eigen::Index>(xs.size()));
  int i = 0;
  for (double x : xs) out[i++] = x;
  return out;
}

/// Q1 diag(e^u) Q2 with u uniform in [-1, 1]: random and well conditioned.
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

SmoothMapSample identity_map(int n) {
  return make_map_sample("identity", n, Vec::Zero(n), [n](auto x, auto out) {
    for (int i = 0; i < n; ++i) out[i] = x[i];
  });
}
}  // namespace

TEST_CASE("rank deficit of reference maps") {
  CHECK(rank_deficit(identity_map(3)) == 0);
  CHECK(rank_deficit(catalog("A3", 2)) == 1);
  CHECK(rank_deficit(catalog("D4+", 3)) == 2);
}

TEST_CASE("catalog normal forms") {
  const SmoothMapSample a5 = catalog("A5", 4);
  const Vec x = v({0.3, -0.2, 0.5, 0.7});
  const double X = x[0], y = x[1], z = x[2], t = x[3];
  CHECK((a5(x) - v({std::pow(X, 5) + X * X * X * y + X * X * z + X * t, y, z, t})).norm() < 1e-15);

  const SmoothMapSample d4m = catalog("D4-", 3);
  const Vec w = v({0.4, -0.6, 0.2});
  CHECK((d4m(w) - v({w[0] * w[0] - w[1] * w[1] + w[0] * w[2], w[0] * w[1], w[2]})).norm() < 1e-15);
  // Typographic minus is accepted.
  CHECK((catalog("D4\xE2\x88\x92", 3)(w) - d4m(w)).norm() == 0.0);

  const SmoothMapSample a3 = catalog("A3", 5);
  CHECK(a3.n == 5);
  const Vec q = v({0.1, 0.2, 0.3, 0.4, 0.5});
  CHECK(a3(q).tail(4) == q.tail(4));

  CHECK_THROWS_AS(catalog("A9", 5), Error);
  CHECK_THROWS_AS(catalog("E6+", 3), Error);
}

TEST_CASE("catalog self-test over all dimensions up to five") {
  std::set<std::string> admitted;
  for (const auto& [label, dim] : catalog_labels()) {
    for (int n = dim; n <= 5; ++n) {
      CAPTURE(label);
      CAPTURE(n);
      const SmoothMapSample map = catalog(label, n);
      const SingularityReport r = classify(map);
      const bool a_type = label[0] == 'A';
      CHECK(r.rank_deficit == (a_type ? 1 : 2));
      CHECK(r.label == label);
      if (a_type) {
        REQUIRE(r.type_m);
        CHECK(*r.type_m == std::stoi(label.substr(1)));
      } else {
        CHECK(!r.type_m);
      }
      if (r.admissible) admitted.insert(label);
    }
  }
  CHECK(admitted == std::set<std::string>{"A3", "A5"});
}

TEST_CASE("one-dimensional cubic has type three") {
  const SmoothMapSample cube = make_map_sample("cube", 1, v({0}), [](auto x, auto out) { out[0] = x[0] * x[0] * x[0]; });
  const auto m = type_1m(cube);
  REQUIRE(m);
  CHECK(*m == 3);
  CHECK(admissible(cube));
}

TEST_CASE("type search certifies orders beyond the search bound") {
  AnnihilationTrace trace;
  CHECK(!type_1m(catalog("A6", 5), 5, &trace));
  CHECK(trace.orders_annihilated == std::vector<int>{2, 3, 4, 5});
  CHECK_THROWS_AS(type_1m(catalog("D4+", 3)), Error);
  CHECK_THROWS_AS(type_1m(identity_map(2)), Error);
}

TEST_CASE("admissibility follows the rejection computations") {
  CHECK(admissible(catalog("A3", 2)));
  CHECK(!admissible(catalog("D4+", 3)));
  CHECK(!admissible(catalog("E6-", 5)));
  CHECK(admissible(identity_map(2)));
}

TEST_CASE("nonsingular report") {
  const SingularityReport r = classify(identity_map(3));
  CHECK(r.rank_deficit == 0);
  CHECK(r.label == "nonsingular");
  CHECK(r.admissible);
  CHECK(!r.type_m);
}

TEST_CASE("type order is invariant under affine conjugation") {
  std::mt19937_64 rng(20240611);
  for (int m = 2; m <= 6; ++m) {
    const SmoothMapSample base = catalog("A" + std::to_string(m), 5);
    for (int trial = 0; trial < 20; ++trial) {
      const SmoothMapSample c = affine_conjugate(base, random_invertible(rng, 5), random_vec(rng, 5),
                                                 random_invertible(rng, 5), random_vec(rng, 5));
      CAPTURE(m);
      CAPTURE(trial);
      const SingularityReport r = classify(c);
      CHECK(r.rank_deficit == 1);
      REQUIRE(r.type_m);
      CHECK(*r.type_m == m);
      CHECK(r.admissible == (m % 2 == 1));
    }
  }
}

TEST_CASE("corank-two labels survive a source rotation") {
  std::mt19937_64 rng(7);
  for (const char* label : {"D4+", "D4-"}) {
    const SmoothMapSample base = catalog(label, 3);
    const SmoothMapSample c = affine_conjugate(base, random_invertible(rng, 3), Vec::Zero(3), Mat::Identity(3, 3),
                                               Vec::Zero(3));
    CHECK(classify(c).label == label);
    CHECK(!classify(c).admissible);
  }
}

TEST_CASE("finite-difference jets agree with analytic jets") {
  for (const char* label : {"A2", "A3", "A4", "A5"}) {
    SmoothMapSample map = catalog(label, 4);
    const SingularityReport exact = classify(map);
    map.f_series = nullptr;
    const SingularityReport fd = classify(map);
    CAPTURE(label);
    CHECK(fd.rank_deficit == exact.rank_deficit);
    CHECK(fd.type_m == exact.type_m);
    CHECK(fd.label == exact.label);
  }
}

TEST_CASE("curve coefficients of a polynomial map") {
  const SmoothMapSample a3 = catalog("A3", 2);
  // x(s) = s, y(s) = -s^2: x^3 + x y = 0 through order 3.
  const auto coeffs = curve_coefficients(a3, {v({1, 0}), v({0, -1})}, 4);
  REQUIRE(coeffs.size() == 5);
  CHECK(coeffs[3].norm() < 1e-15);
  CHECK(coeffs[2][1] == doctest::Approx(-1.0));
}

TEST_CASE("report json") {
  const SingularityReport r = classify(catalog("A3", 2));
  const nlohmann::json j = to_json(r);
  CHECK(j["rank_deficit"] == 1);
  CHECK(j["type_m"] == 3);
  CHECK(j["admissible"] == true);
  CHECK(j["label"] == "A3");
  CHECK(j["evidence"]["orders_annihilated"] == nlohmann::json::array({2}));
  CHECK(j["evidence"]["curve_jets"].size() == 2);
  CHECK(to_json(classify(identity_map(2)))["type_m"].is_null());
}

TEST_CASE("contact fixture exponential map and sandwich") {
  for (int eta : {3, 4}) {
    const ContactFixture fx = make_fixture(eta, 1.3, 0.7);
    const SingularityReport r = classify(fx.exp_sample);
    CAPTURE(eta);
    CHECK(r.rank_deficit == 1);
    REQUIRE(r.type_m);
    CHECK(*r.type_m == 2 * eta - 1);
    const auto [lo, hi] = fixture_sandwich(fx, {0.01, 0.02, 0.05, 0.1, -0.05});
    CHECK(lo > 0.0);
    const double C = std::max(hi, 1.0 / lo);
    CHECK(C > 1.0);
    CHECK(C < 10.0);
  }
  CHECK(make_fixture(3).gamma(0.0) == 0.0);
  CHECK(make_fixture(3).h(Vec::Zero(2)) == doctest::Approx(0.25));
}
