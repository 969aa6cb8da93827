#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "heatlocus/geometry.hpp"
#include "heatlocus/rational.hpp"

namespace heatlocus {

/// Phase g(x) = g0 + sum_i x_i^(2 m_i) with 1 <= m_1 <= ... <= m_n.
struct DiagonalPhase {
  double g0 = 0.0;
  std::vector<int> m_list;

  int n() const { return static_cast<int>(m_list.size()); }
  /// Smallest (1-based) index l with m_l = m_n.
  int ell_index() const;
  /// Throws invalid-input unless m_list is nonempty, positive and nondecreasing.
  void validate() const;
  double operator()(const Vec& x) const;
};

/// Two-term small-t expansion of the integral of f e^{-g/t} near the minimum of a diagonal phase:
/// e^{-g0/t} t^power (c0_term + c1_term t^{c1_power} + o(t^{c1_power})).
struct ExpansionResult {
  double exp_factor_rate = 0.0;
  Rational power;
  double c0_term = 0.0;
  double c1_term = 0.0;
  Rational c1_power;

  double evaluate(double t) const;
};

/// f0 = f(0); f_second_derivs = d^2 f / dx_k^2 (0) for k = l..n (n - l + 1 values).
ExpansionResult expand(double f0, const std::vector<double>& f_second_derivs, const DiagonalPhase& phase);

/// Axis-aligned box [lo, hi].
struct Box {
  Vec lo, hi;
  int dim() const { return static_cast<int>(lo.size()); }
  static Box symmetric(int n, double half_width);
};

struct QuadratureControls {
  double rtol = 1e-10;
  int max_depth = 20;
};

/// Adaptive nested Gauss-Kronrod integral of f e^{-g/t} over the box; each axis is split at 0.
/// Throws a quadrature error carrying the achieved tolerance when refinement does not converge.
double quadrature_oracle(const std::function<double(const Vec&)>& f, const std::function<double(const Vec&)>& g,
                         const Box& box, double t, const QuadratureControls& ctrl = {},
                         double* achieved_rtol = nullptr);

/// Oracle against the two-term expansion over a t grid.
struct LaplaceCheckRow {
  double t = 0.0;
  double oracle = 0.0;
  double expansion = 0.0;
  double residual = 0.0;  // |oracle - expansion| e^{g0/t}
};

struct LaplaceCheckResult {
  ExpansionResult expansion;
  std::vector<LaplaceCheckRow> rows;
  /// Leading coefficient recovered from the oracle at t_ref: (oracle e^{g0/t} t^-power - c1 tau)
  /// with tau = t^(1/m_n), Richardson-extrapolated between t_ref and t_ref / 2^(m_n).
  double c0_estimate = 0.0;
  double c0_relative_error = 0.0;
  /// Log-log slope of the residual against t; absent when every residual sits at the
  /// quadrature floor (the expansion is exact to rounding for this integrand).
  std::optional<double> residual_exponent;
  double residual_r2 = 0.0;
  double required_exponent = 0.0;  // power + 1/m_n + 0.4
  bool residual_ok = false;
};

/// f0 and the second derivatives as in expand(); f is the integrand factor.
LaplaceCheckResult laplace_check(const std::function<double(const Vec&)>& f, double f0,
                                 const std::vector<double>& f_second_derivs, const DiagonalPhase& phase,
                                 const std::vector<double>& t_grid, const Box& box, double t_ref = 1e-4,
                                 const QuadratureControls& ctrl = {});

/// C_i = F c0_left c0_right 4/(m+1) (4 pi)^((n-1)/2) Gamma(1/(m+1)) for odd m.
double leading_constant_Ci(double F_zi, double c0_left, double c0_right, int n, int m);

}  // namespace heatlocus
