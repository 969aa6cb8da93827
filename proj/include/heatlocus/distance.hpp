#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "heatlocus/flow.hpp"

namespace heatlocus {

/// Multiple-start shooting controls for the two-point problem E_{q1}(mu) = q2.
struct ShootingControls {
  int samples = 512;             // low-discrepancy directions on Lambda_{q1}
  int refine = 24;               // best pre-screened candidates sent to Newton
  int screen_grid = 64;          // observation times per pre-screen trajectory
  int newton_iters = 60;
  double residual_tol = 1e-11;   // |E(mu) - q2| in chart coordinates
  double max_length = 0.0;       // search radius; 0 selects it from the endpoint separation
  double same_root_tol = 1e-5;   // covectors closer than this are one geodesic
  double multiplicity_tol = 1e-6;
  double rank_tol = 1e-6;        // singular values below rank_tol * sigma_max count as zero
  std::uint64_t seed = 0;        // offset into the low-discrepancy sequence
  IntegratorControls integrator;
};

/// A converged root of the shooting equation.
struct ShootingRoot {
  Covector mu;       // E_{q1}(mu) = q2; |mu| in the H-norm is the length
  double length = 0.0;
  Point endpoint;
  Mat jacobian;      // D_mu E_{q1}, rows in the chart of `endpoint`
  int rank_deficit = 0;
  double residual = 0.0;
  int iterations = 0;
};

struct DistanceResult {
  double d = 0.0;
  std::vector<GeodesicRecord> minimizers;
  std::vector<ShootingRoot> roots;  // one per minimizer, same order
  /// Minimizers appear to form a continuum (symmetric family); asymptotic
  /// predictions are refused for such inputs.
  bool non_discrete = false;
  int candidates_refined = 0;
  int roots_found = 0;
};

/// Newton refinement of a single shooting guess (SVD pseudo-inverse, backtracking).
std::optional<ShootingRoot> shoot(const Structure& s, const Point& q1, const Point& q2, const Covector& guess,
                                  const ShootingControls& ctrl = {});

/// Distance and all minimizing geodesics found by multiple-start shooting.
DistanceResult distance(const Structure& s, const Point& q1, const Point& q2, const ShootingControls& ctrl = {});

struct CutTimeResult {
  std::optional<double> t_cut;
  std::optional<double> t_conj;
  bool cut_equals_conjugate = false;
};

/// Cut time of the arclength geodesic with initial covector lam0 (rescaled onto H = 1/2):
/// min(first conjugate time, first time a competing geodesic of equal length reaches the
/// same endpoint), searched up to t_max. `bisections` bounds the competing-geodesic search.
CutTimeResult cut_time(const Structure& s, const Point& q0, const Covector& lam0, double t_max,
                       const ShootingControls& ctrl = {}, int bisections = 26);

/// Hinged energy h(q) = (d^2(q1, q) + d^2(q, q2)) / 2.
double hinged(const Structure& s, const Point& q1, const Point& q2, const Point& q, const ShootingControls& ctrl = {});

struct ProfileControls {
  double step = 1e-3;          // central-difference step (times max(1, |z0|))
  double rank_tol = 1e-5;      // Hessian eigenvalues below rank_tol * max(1, lambda_max) count as zero
  double psd_tol = 1e-6;       // eigenvalues below -psd_tol * max(1, lambda_max) are an inconsistency
  double noise_floor = 1e-10;  // values of the reduced function below this are not used for order detection
  double s_start = 0.2;        // largest kernel offset probed
  double s_ratio = 0.7;
  int max_order_samples = 40;
  ShootingControls shooting;
};

/// Hinged energy data at a midpoint.
struct HingedProfile {
  Point z0;
  double h_min = 0.0;
  Mat hessian;
  Vec eigenvalues;
  int r = 0;
  std::optional<int> m;  // present when r = 1 and the order was detected
  std::vector<Vec> kernel_basis;
  /// Order-detection evidence: kernel offsets, reduced values and local log-log slopes.
  std::vector<double> order_s;
  std::vector<double> order_phi;
  std::vector<double> order_slopes;
  std::optional<int> detected_order;
};

/// Profile of a scalar function with a minimum at z0: Hessian (Richardson-extrapolated
/// central differences), rank deficit and, for r = 1, the order of the splitting-reduced
/// function along the kernel (m = order - 1).
HingedProfile profile_of_function(const std::function<double(const Vec&)>& h, const Vec& z0,
                                  const ProfileControls& ctrl = {});

/// Local hinged energy near the midpoint of the minimizer g (from q1 to q2), evaluated by
/// warm-started shooting from both endpoints. Coordinates are those of the midpoint's chart.
std::function<double(const Vec&)> local_hinged(const Structure& s, const GeodesicRecord& g, int* chart = nullptr,
                                               const ShootingControls& ctrl = {});

/// Midpoint profile of the minimizer g from q1 to q2.
HingedProfile midpoint_profile(const Structure& s, const Point& q1, const Point& q2, const GeodesicRecord& g,
                               const ProfileControls& ctrl = {});

/// One sampled cut-locus row: direction angles of lam0, cut/conjugate times and cut point.
struct CutLocusSample {
  std::vector<double> theta;
  Covector lambda0;
  std::optional<double> t_cut;
  std::optional<double> t_conj;
  std::optional<Point> endpoint;
};

/// Cut/conjugate data for the given initial covectors (processed in parallel).
std::vector<CutLocusSample> sample_cut_locus(const Structure& s, const Point& q0, const std::vector<Covector>& lams,
                                             double t_max, const ShootingControls& ctrl = {});

/// Direction angles (n - 1 spherical angles) of a vector.
std::vector<double> direction_angles(const Vec& w);

/// Unit vectors from the first `count` points of a scrambled-free Sobol sequence mapped to S^{n-1}.
std::vector<Vec> sphere_directions(int n, int count, std::uint64_t offset);

}  // namespace heatlocus
