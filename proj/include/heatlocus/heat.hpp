#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "heatlocus/distance.hpp"
#include "heatlocus/laplace.hpp"
#include "heatlocus/rational.hpp"
#include "json.hpp"

namespace heatlocus {

/// One minimizing geodesic as seen by the asymptotics: m = 1 encodes a non-conjugate
/// midpoint, odd m >= 3 a type (1, m) conjugate midpoint.
struct GeodesicClassification {
  int m = 1;
  double F_zi = 1.0;        // volume density at the midpoint in normal-form coordinates
  double c0_product = 1.0;  // c0(q1, z) c0(z, q2)
};

struct AsymptoticPrediction {
  int n = 0;
  std::vector<GeodesicClassification> classifications;
  Rational exponent;         // p_t ~ C t^{-exponent}
  Rational remainder_power;  // relative remainder O(t^{remainder_power})
  std::optional<double> leading_C;
  std::string regime;        // "smooth" or "ogrande"
};

/// l = max m; exponent (n+1)/2 - 1/(l+1), remainder 2/(l+1); leading_C sums the C_i of the
/// classifications with m = l (absent when constants are unavailable, e.g. sub-Riemannian).
AsymptoticPrediction predict(int n, const std::vector<GeodesicClassification>& classifications,
                             bool constants_available = true);

struct BoundsPrediction {
  Rational lower_exponent;  // n/2 + r/4
  Rational upper_exponent;  // n/2 + r/2
  int r = 0;
};

BoundsPrediction predict_bounds(int n, int r);

/// Weighted log-log fit of integral values against t.
struct ExponentFit {
  std::vector<double> grid;
  std::vector<double> values;  // integral times e^{h_min / t}
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Least squares of log(values) on log(t) with weights proportional to 1/t. Throws a
/// fit-quality error (with the grid, values and R^2 in the message) when R^2 < min_r2.
ExponentFit fit_power_law(const std::vector<double>& t, const std::vector<double>& values, double min_r2 = 0.999);

struct MidpointIntegralControls {
  double box_half_width = 0.5;  // neighbourhood of z0 (function form) or cap on the kernel extent
  QuadratureControls quadrature;
  double min_r2 = 0.999;
  double tail = 30.0;           // box edge where (h - h_min) / t reaches this value
  int panels = 1;               // composite 30-point Gauss-Legendre panels per axis
};

/// Checks a t grid: at least 6 points in (0, 0.1], spanning at least two decades.
void validate_t_grid(const std::vector<double>& t_grid);

/// (2/t)^n times the integral of F c0 e^{-(h - h_min)/t} over z0 + box, for each t, and the
/// fitted power of t (compare with -exponent from predict).
ExponentFit midpoint_integral_exponent(const std::function<double(const Vec&)>& h, double h_min, const Vec& z0,
                                       const std::function<double(const Vec&)>& weight,
                                       const std::vector<double>& t_grid, const MidpointIntegralControls& ctrl = {});

/// Same for the hinged energy of a minimizer g of s: h is evaluated by shooting, the
/// integral follows the valley of h along the kernel direction (r <= 1) using Gaussian
/// rules sized from the profile.
ExponentFit midpoint_integral_exponent(const Structure& s, const HingedProfile& profile, const GeodesicRecord& g,
                                       const std::function<double(const Vec&)>& weight,
                                       const std::vector<double>& t_grid, const MidpointIntegralControls& ctrl = {});

/// Value-level sandwich phases for an r-degenerate profile in splitting coordinates:
/// lower integrand e^{-(sum_{i<=n-r} x_i^2 + sum_{j>n-r} x_j^4)/t}, upper e^{-sum_{i<=n-r} x_i^2/t},
/// both over the symmetric box, times (2/t)^n.
std::pair<double, double> bounding_integrals(int n, int r, double box_half_width, double t,
                                             const QuadratureControls& ctrl = {});

/// Leading Ben Arous coefficient 1/sqrt(|det D exp|) in metric volumes for a Riemannian
/// structure, with z reached by the unique minimizer from q1.
double ben_arous_c0(const Structure& s, const Point& q1, const Point& z, const ShootingControls& ctrl = {});

nlohmann::json to_json(const AsymptoticPrediction& p);
nlohmann::json to_json(const BoundsPrediction& b);
nlohmann::json to_json(const ExponentFit& f);

}  // namespace heatlocus
