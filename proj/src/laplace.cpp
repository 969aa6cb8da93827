#include "heatlocus/laplace.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

namespace heatlocus {

int DiagonalPhase::ell_index() const {
  validate();
  const int last = m_list.back();
  for (int i = 0; i < n(); ++i)
    if (m_list[static_cast<std::size_t>(i)] == last) return i + 1;
  return n();
}

void DiagonalPhase::validate() const {
  require(!m_list.empty(), ErrorKind::InvalidInput, "diagonal phase needs at least one exponent");
  for (std::size_t i = 0; i < m_list.size(); ++i) {
    require(m_list[i] >= 1, ErrorKind::InvalidInput, "diagonal phase exponents must be >= 1");
    require(i == 0 || m_list[i - 1] <= m_list[i], ErrorKind::InvalidInput, "diagonal phase m_list must be nondecreasing");
  }
  require(std::isfinite(g0), ErrorKind::InvalidInput, "diagonal phase g0 must be finite");
}

double DiagonalPhase::operator()(const Vec& x) const {
  double g = g0;
  for (int i = 0; i < n(); ++i) g += std::pow(x[i], 2 * m_list[static_cast<std::size_t>(i)]);
  return g;
}

double ExpansionResult::evaluate(double t) const {
  return std::exp(-exp_factor_rate / t) * std::pow(t, power.value()) * (c0_term + c1_term * std::pow(t, c1_power.value()));
}

ExpansionResult expand(double f0, const std::vector<double>& f_second_derivs, const DiagonalPhase& phase) {
  phase.validate();
  const int n = phase.n();
  const int ell = phase.ell_index();
  require(static_cast<int>(f_second_derivs.size()) == n - ell + 1, ErrorKind::InvalidInput,
          "expand needs one second derivative per index l..n (" + std::to_string(n - ell + 1) + ")");
  ExpansionResult r;
  r.exp_factor_rate = phase.g0;
  for (int m : phase.m_list) r.power += Rational(1, 2 * m);
  const int mn = phase.m_list.back();
  r.c1_power = Rational(1, mn);

  double prod_all = 1.0, prod_head = 1.0;
  for (int i = 0; i < n; ++i) {
    const double mi = phase.m_list[static_cast<std::size_t>(i)];
    const double factor = std::tgamma(1.0 / (2.0 * mi)) / mi;
    prod_all *= factor;
    if (i < n - 1) prod_head *= factor;
  }
  double lap = 0.0;
  for (double d2 : f_second_derivs) lap += d2;
  r.c0_term = prod_all * f0;
  // x^2 against e^{-x^(2m)/t} integrates to Gamma(3/2m)/m t^(3/2m); the Taylor factor is 1/2.
  r.c1_term = std::tgamma(3.0 / (2.0 * mn)) / (2.0 * mn) * prod_head * lap;
  return r;
}

Box Box::symmetric(int n, double half_width) {
  return Box{Vec::Constant(n, -half_width), Vec::Constant(n, half_width)};
}

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
constexpr int kGeometricSplits = 6;
constexpr double kExpCutoff = 690.0;
// Residuals within this many requested tolerances of the oracle value are quadrature noise.
constexpr double kResidualFloor = 100.0;

struct Nested {
  const std::function<double(const Vec&)>& f;
  const std::function<double(const Vec&)>& g;
  const Box& box;
  double t;
  const QuadratureControls& ctrl;
  double worst = 0.0;

  double axis(int k, Vec& x) {
    const int n = box.dim();
    auto integrand = [&](double xk) {
      x[k] = xk;
      if (k + 1 == n) {
        // Below e^-kExpCutoff the exponential turns subnormal and GK error estimates stop converging.
        const double a = g(x) / t;
        return a > kExpCutoff ? 0.0 : f(x) * std::exp(-a);
      }
      Vec inner = x;
      return axis(k + 1, inner);
    };
    // Geometric splitting towards 0, where the integrand of a phase minimized at the origin peaks.
    std::vector<std::pair<double, double>> pieces;
    auto add_side = [&](double a, double b) {
      // [a, b] with 0 at one end; `far` is the other end.
      const double far = a == 0.0 ? b : a;
      double outer = far;
      for (int j = 0; j < kGeometricSplits; ++j) {
        const double inner = outer / 4.0;
        pieces.emplace_back(std::min(inner, outer), std::max(inner, outer));
        outer = inner;
      }
      pieces.emplace_back(std::min(0.0, outer), std::max(0.0, outer));
    };
    if (box.lo[k] < 0.0 && box.hi[k] > 0.0) {
      add_side(box.lo[k], 0.0);
      add_side(0.0, box.hi[k]);
    } else {
      pieces.emplace_back(box.lo[k], box.hi[k]);
    }
    // Integrate over [-1, 1]: this Boost version compares the unscaled error of a sub-interval
    // against a scaled tolerance, which never terminates on short intervals.
    auto piece_integral = [&](double a, double b, unsigned depth, double tol, double* err, double* l1) {
      const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      auto mapped = [&](double u) { return half * integrand(mid + half * u); };
      return GK::integrate(mapped, -1.0, 1.0, depth, tol, err, l1);
    };
    double total = 0.0, err_sum = 0.0, l1_sum = 0.0;
    for (const auto& [a, b] : pieces) {
      double err = 0.0, l1 = 0.0;
      total += piece_integral(a, b, static_cast<unsigned>(ctrl.max_depth), ctrl.rtol, &err, &l1);
      err_sum += err;
      l1_sum += l1;
    }
    // Inner-axis errors surface as noise in the outer estimate.
    if (k == 0 && l1_sum > 0.0) worst = err_sum / l1_sum;
    return total;
  }
};

}  // namespace

double quadrature_oracle(const std::function<double(const Vec&)>& f, const std::function<double(const Vec&)>& g,
                         const Box& box, double t, const QuadratureControls& ctrl, double* achieved_rtol) {
  require(t > 0.0 && std::isfinite(t), ErrorKind::InvalidInput, "quadrature_oracle: t must be positive");
  require(box.dim() >= 1 && box.hi.size() == box.lo.size(), ErrorKind::InvalidInput, "quadrature_oracle: malformed box");
  for (int k = 0; k < box.dim(); ++k)
    require(box.lo[k] < box.hi[k], ErrorKind::InvalidInput, "quadrature_oracle: empty box");
  Nested nested{f, g, box, t, ctrl};
  Vec x = Vec::Zero(box.dim());
  const double value = nested.axis(0, x);
  if (achieved_rtol) *achieved_rtol = nested.worst;
  if (!(nested.worst <= 100.0 * ctrl.rtol) || !std::isfinite(value)) {
    std::ostringstream msg;
    msg.precision(3);
    msg << "quadrature did not converge: achieved relative tolerance " << nested.worst << " (requested " << ctrl.rtol
        << ")";
    fail(ErrorKind::Quadrature, msg.str());
  }
  return value;
}

LaplaceCheckResult laplace_check(const std::function<double(const Vec&)>& f, double f0,
                                 const std::vector<double>& f_second_derivs, const DiagonalPhase& phase,
                                 const std::vector<double>& t_grid, const Box& box, double t_ref,
                                 const QuadratureControls& ctrl) {
  require(box.dim() == phase.n(), ErrorKind::InvalidInput, "laplace_check: box dimension differs from the phase");
  require(t_ref > 0.0, ErrorKind::InvalidInput, "laplace_check: t_ref must be positive");
  LaplaceCheckResult out;
  out.expansion = expand(f0, f_second_derivs, phase);
  const ExpansionResult& e = out.expansion;
  const double p = e.power.value(), q = e.c1_power.value();
  // e^{-g0/t} is applied analytically so that large g0/t does not underflow the oracle.
  DiagonalPhase shifted = phase;
  shifted.g0 = 0.0;
  auto scaled_oracle = [&](double t) {
    return quadrature_oracle(f, [&](const Vec& x) { return shifted(x); }, box, t, ctrl);
  };
  std::vector<double> logt, logr;
  for (double t : t_grid) {
    require(t > 0.0, ErrorKind::InvalidInput, "laplace_check: t values must be positive");
    const double I = scaled_oracle(t);
    const double two_term = std::pow(t, p) * (e.c0_term + e.c1_term * std::pow(t, q));
    const double damp = std::exp(-phase.g0 / t);
    LaplaceCheckRow row{t, damp * I, damp * two_term, std::abs(I - two_term)};
    out.rows.push_back(row);
    if (row.residual > kResidualFloor * ctrl.rtol * std::abs(I)) {
      logt.push_back(std::log(t));
      logr.push_back(std::log(row.residual));
    }
  }
  out.required_exponent = p + q + 0.4;
  if (logt.size() >= 3) {
    const double n = static_cast<double>(logt.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < logt.size(); ++i) {
      mx += logt[i] / n;
      my += logr[i] / n;
    }
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < logt.size(); ++i) {
      sxx += (logt[i] - mx) * (logt[i] - mx);
      sxy += (logt[i] - mx) * (logr[i] - my);
      syy += (logr[i] - my) * (logr[i] - my);
    }
    require(sxx > 0.0, ErrorKind::InvalidInput, "laplace_check: t grid needs distinct values");
    out.residual_exponent = sxy / sxx;
    out.residual_r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    out.residual_ok = *out.residual_exponent >= out.required_exponent;
  } else {
    out.residual_ok = true;
  }

  const int mn = phase.m_list.back();
  auto reduced = [&](double t) { return scaled_oracle(t) / std::pow(t, p) - e.c1_term * std::pow(t, q); };
  out.c0_estimate = (4.0 * reduced(t_ref / std::pow(2.0, mn)) - reduced(t_ref)) / 3.0;
  const double diff = std::abs(out.c0_estimate - e.c0_term);
  out.c0_relative_error = e.c0_term != 0.0 ? diff / std::abs(e.c0_term) : diff;
  return out;
}

double leading_constant_Ci(double F_zi, double c0_left, double c0_right, int n, int m) {
  require(n >= 1, ErrorKind::InvalidInput, "leading_constant_Ci: n must be >= 1");
  require(m >= 1 && m % 2 == 1, ErrorKind::InvalidInput,
          "leading_constant_Ci: m must be odd (even m cannot occur on a minimizer)");
  require(F_zi > 0.0 && c0_left > 0.0 && c0_right > 0.0, ErrorKind::InvalidInput,
          "leading_constant_Ci: density and c0 factors must be positive");
  return F_zi * c0_left * c0_right * 4.0 / (m + 1.0) * std::pow(4.0 * std::numbers::pi, (n - 1) / 2.0) *
         std::tgamma(1.0 / (m + 1.0));
}

}  // namespace heatlocus
