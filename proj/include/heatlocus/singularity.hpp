#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "heatlocus/geometry.hpp"
#include "heatlocus/jet.hpp"
#include "json.hpp"

namespace heatlocus {

/// A smooth map R^n -> R^n sampled at a basepoint. When `f_series` is present, Taylor
/// coefficients along polynomial curves are exact (truncated power series); otherwise they
/// are obtained by least-squares polynomial fits of f along the curve on [-fd_radius, fd_radius].
struct SmoothMapSample {
  std::string name;
  int n = 0;
  Vec basepoint;
  std::function<Vec(const Vec&)> f;
  std::function<void(std::span<const Series> x, std::span<Series> out)> f_series;
  int jet_order = 10;
  double zero_tol = 1e-6;
  double fd_radius = 0.2;

  Vec operator()(const Vec& x) const { return f(x); }
  bool analytic() const { return static_cast<bool>(f_series); }
};

/// Wraps a generic callable `fn(std::span<const S> x, std::span<S> out)` valid for
/// S = double and S = Series.
template <class Fn>
SmoothMapSample make_map_sample(std::string name, int n, Vec basepoint, Fn fn) {
  SmoothMapSample m;
  m.name = std::move(name);
  m.n = n;
  m.basepoint = std::move(basepoint);
  m.f = [fn, n](const Vec& x) {
    std::vector<double> in(x.data(), x.data() + x.size()), out(static_cast<std::size_t>(n));
    fn(std::span<const double>(in), std::span<double>(out));
    return Vec(Eigen::Map<const Vec>(out.data(), n));
  };
  m.f_series = [fn](std::span<const Series> x, std::span<Series> out) { fn(x, out); };
  return m;
}

/// x -> B f(A x + a) + b, with the basepoint moved to A^{-1}(x0 - a).
SmoothMapSample affine_conjugate(const SmoothMapSample& map, const Mat& A, const Vec& a, const Mat& B, const Vec& b);

/// Jacobian at the basepoint (exact for analytic samples, Richardson central differences otherwise).
Mat map_jacobian(const SmoothMapSample& map);

/// Taylor coefficients 0..degree of s -> f(x0 + sum_i c[i] s^(i+1)).
std::vector<Vec> curve_coefficients(const SmoothMapSample& map, const std::vector<Vec>& c, int degree);

/// n minus the numerical rank of the Jacobian (singular values below tol * sigma_max are zero).
int rank_deficit(const SmoothMapSample& map, double tol = 1e-7);

/// Evidence of the sequential annihilation along a curve jet.
struct AnnihilationTrace {
  std::vector<int> orders_annihilated;
  std::vector<Vec> curve_jet;  // c_1 (kernel direction), c_2, ...
  std::optional<int> order;    // first order with an obstruction
  Vec obstruction;             // cokernel component at that order
};

/// Sequential annihilation starting from the direction xi: at each order k the range part
/// of the s^k coefficient is removed by c_k = -J^+ R_k; the first order with a cokernel
/// component above tolerance is the contact order.
AnnihilationTrace annihilate(const SmoothMapSample& map, const Vec& xi, int max_order);

/// Type (1, m) order of a corank-1 singular point; absent when no obstruction appears up to m_max.
std::optional<int> type_1m(const SmoothMapSample& map, int m_max = 9, AnnihilationTrace* trace = nullptr);

/// Minimality admissibility: nonsingular, or corank 1 with odd type; for corank >= 2 every
/// kernel direction must admit a curve jet whose image has order >= 3 (never the case for the
/// D/E normal forms).
bool admissible(const SmoothMapSample& map, int m_max = 9);

struct SingularityReport {
  int rank_deficit = 0;
  std::optional<int> type_m;
  bool admissible = true;
  std::string label;
  AnnihilationTrace evidence;
};

SingularityReport classify(const SmoothMapSample& map, int m_max = 9);
nlohmann::json to_json(const SingularityReport& r);

/// Normal forms of the Lagrangian singularity list, suspended to dimension n.
SmoothMapSample catalog(const std::string& label, int n);
/// Catalog labels with the smallest dimension each one exists in.
std::vector<std::pair<std::string, int>> catalog_labels();

/// Synthetic order-of-contact fixture: the hinged energy of a flat neighbourhood in which
/// the unit-distance spheres around q1 = (0,-1/2) and q2 = (0,1/2) are the truncated series
/// gamma_eta (first eta-1 terms of 1/2 - sqrt(1/4 - x^2)) and the circle xi.
struct ContactFixture {
  int eta = 3;
  double sigma1 = 1.0;
  double sigma3 = 0.0;
  Vec q1, q2, z0;
  double h_min = 0.25;
  /// Hinged energy near z0 = (0,0).
  std::function<double(const Vec&)> h;
  /// Exponential map from q1 in (theta, rho) coordinates near the focal covector (0, 1).
  SmoothMapSample exp_sample;
  /// gamma_eta(x) and the circle xi(x).
  std::function<double(double)> gamma, xi;
};

ContactFixture make_fixture(int eta, double sigma1 = 1.0, double sigma3 = 0.0);

/// Bounds [lo, hi] of (h - 1/4) / x^(2 eta) at points strictly between xi and gamma_eta for
/// x in `xs`; the sandwich 1/C x^(2 eta) < h - 1/4 < C x^(2 eta) holds with C = max(hi, 1/lo).
std::pair<double, double> fixture_sandwich(const ContactFixture& fx, const std::vector<double>& xs);

}  // namespace heatlocus
