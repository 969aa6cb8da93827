#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "heatlocus/geometry.hpp"

namespace heatlocus {

/// Adaptive Dormand-Prince 5(4) controls.
struct IntegratorControls {
  double rtol = 1e-10;
  double atol = 1e-12;
  double initial_step = 1e-2;
  double min_step = 1e-13;
  long max_steps = 5'000'000;
};

struct FlowState {
  Point q;
  Covector p;
  double t = 0.0;
  double H = 0.0;
};

/// Integration failure carrying the trajectory computed before the failure.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, std::vector<FlowState> partial)
      : Error(ErrorKind::IntegrationFailure, what), partial_(std::move(partial)) {}
  const std::vector<FlowState>& partial() const { return partial_; }

 private:
  std::vector<FlowState> partial_;
};

/// One normal geodesic parametrized by arclength (H(q0, lambda0) = 1/2).
struct GeodesicRecord {
  Covector lambda0;
  Point q0;
  std::vector<FlowState> samples;
  std::optional<double> t_conj;
  std::optional<double> t_cut;
  /// D_{T lambda0} E_{q0} at the final time T, expressed in the chart of the endpoint.
  Mat end_jacobian;
  double length = 0.0;
  bool cut_equals_conjugate = false;

  const FlowState& end() const { return samples.back(); }
  double max_energy_drift() const;
};

/// Flow state (q, p) with an optional variation matrix V (rows dq then dp).
struct FlowPoint {
  Point q;
  Covector p;
  Mat variation;  // 2n x m, empty when not propagated
  double t = 0.0;
};

/// Low-level integrator for Hamilton's equations (and their linearization).
///
/// Integrates from `start` up to `T`, calling `observe` at every time in
/// `times` (ascending, within (start.t, T]) and, when `every_step` is set,
/// after every accepted step. Chart switches happen at step boundaries.
FlowPoint integrate(const Structure& s, const FlowPoint& start, double T, const IntegratorControls& ctrl,
                    const std::vector<double>& times, const std::function<void(const FlowPoint&)>& observe,
                    bool every_step = false);

/// Rescales lam onto {H = 1/2}; `scale` receives sqrt(2H(q0, lam)).
Covector normalize_covector(const Structure& s, const Point& q0, const Covector& lam, double* scale = nullptr);

/// Trajectory of the normal geodesic flow on [0, T], sampled at every accepted step
/// (plus t = 0 and t = T). No rescaling is applied to p0.
std::vector<FlowState> flow(const Structure& s, const Point& q0, const Covector& p0, double T,
                            const IntegratorControls& ctrl = {});

/// E_{q0}(t * lam). Depends only on t * lam.
Point exp_map(const Structure& s, const Point& q0, const Covector& lam, double t, const IntegratorControls& ctrl = {});

/// Jacobian of mu -> E_{q0}(mu) at mu = lam, from the variational flow. The
/// returned point receives E_{q0}(lam) when non-null (the chart of the Jacobian rows).
Mat d_exp(const Structure& s, const Point& q0, const Covector& lam, const IntegratorControls& ctrl = {},
          Point* endpoint = nullptr);

/// Central finite-difference Jacobian of mu -> E_{q0}(mu), rows in the chart of E_{q0}(lam).
Mat d_exp_fd(const Structure& s, const Point& q0, const Covector& lam, double step = 1e-6,
             const IntegratorControls& ctrl = {});

struct ConjugateControls {
  int grid = 400;
  double tol = 1e-9;
  IntegratorControls integrator;
};

/// Smallest t in (0, t_max] where det D_{t lam0} E_{q0} changes sign.
std::optional<double> first_conjugate_time(const Structure& s, const Point& q0, const Covector& lam0, double t_max,
                                           const ConjugateControls& ctrl = {});

/// Sign-normalized determinant det(M) / prod ||col||, in [-1, 1].
double hadamard_ratio(const Mat& M);

/// Arclength geodesic on [0, T] with sampled trajectory, end Jacobian and first conjugate time.
GeodesicRecord geodesic(const Structure& s, const Point& q0, const Covector& lam0, double T,
                        const ConjugateControls& ctrl = {});

}  // namespace heatlocus
