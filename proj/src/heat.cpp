#include "heatlocus/heat.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <sstream>

#include "heatlocus/parallel.hpp"

namespace heatlocus {

AsymptoticPrediction predict(int n, const std::vector<GeodesicClassification>& classifications,
                             bool constants_available) {
  require(n >= 1, ErrorKind::InvalidInput, "predict: dimension must be >= 1");
  require(!classifications.empty(), ErrorKind::Precondition, "predict: no minimizing geodesics given");
  int ell = 1;
  for (const GeodesicClassification& c : classifications) {
    require(c.m >= 1 && c.m % 2 == 1, ErrorKind::InvalidInput,
            "predict: m = " + std::to_string(c.m) + " is not odd; such a midpoint cannot be minimizing");
    ell = std::max(ell, c.m);
  }
  AsymptoticPrediction p;
  p.n = n;
  p.classifications = classifications;
  p.exponent = Rational(n + 1, 2) - Rational(1, ell + 1);
  p.remainder_power = Rational(2, ell + 1);
  p.regime = ell == 1 ? "smooth" : "ogrande";
  if (constants_available) {
    double C = 0.0;
    for (const GeodesicClassification& c : classifications)
      if (c.m == ell) C += leading_constant_Ci(c.F_zi, c.c0_product, 1.0, n, ell);
    p.leading_C = C;
  }
  return p;
}

BoundsPrediction predict_bounds(int n, int r) {
  require(n >= 1, ErrorKind::InvalidInput, "predict_bounds: dimension must be >= 1");
  require(r >= 0 && r <= n - 1, ErrorKind::InvalidInput,
          "predict_bounds: r must lie in [0, n-1], got " + std::to_string(r));
  return BoundsPrediction{Rational(n, 2) + Rational(r, 4), Rational(n, 2) + Rational(r, 2), r};
}

ExponentFit fit_power_law(const std::vector<double>& t, const std::vector<double>& values, double min_r2) {
  require(t.size() == values.size() && t.size() >= 2, ErrorKind::InvalidInput, "fit_power_law: mismatched data");
  ExponentFit fit;
  fit.grid = t;
  fit.values = values;
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    require(t[i] > 0.0 && values[i] > 0.0 && std::isfinite(values[i]), ErrorKind::FitQuality,
            "fit_power_law: non-positive value at t = " + std::to_string(t[i]));
    const double w = 1.0 / t[i];
    sw += w;
    sx += w * std::log(t[i]);
    sy += w * std::log(values[i]);
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double w = 1.0 / t[i];
    const double dx = std::log(t[i]) - mx, dy = std::log(values[i]) - my;
    sxx += w * dx * dx;
    sxy += w * dx * dy;
    syy += w * dy * dy;
  }
  require(sxx > 0.0, ErrorKind::FitQuality, "fit_power_law: degenerate t grid");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double w = 1.0 / t[i];
    const double res = std::log(values[i]) - (fit.intercept + fit.slope * std::log(t[i]));
    ss_res += w * res * res;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  if (fit.r2 < min_r2) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "power-law fit rejected: R^2 = " << fit.r2 << " < " << min_r2 << "; slope " << fit.slope << "; points:";
    for (std::size_t i = 0; i < t.size(); ++i) msg << " (" << t[i] << ", " << values[i] << ")";
    fail(ErrorKind::FitQuality, msg.str());
  }
  return fit;
}

void validate_t_grid(const std::vector<double>& t_grid) {
  require(t_grid.size() >= 6, ErrorKind::InvalidInput, "t grid needs at least 6 points");
  double lo = t_grid.front(), hi = t_grid.front();
  for (double t : t_grid) {
    require(t > 0.0 && t <= 0.1, ErrorKind::InvalidInput, "t grid values must lie in (0, 0.1]");
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  require(hi / lo >= 100.0 * (1.0 - 1e-12), ErrorKind::InvalidInput, "t grid must span at least two decades");
}

ExponentFit midpoint_integral_exponent(const std::function<double(const Vec&)>& h, double h_min, const Vec& z0,
                                       const std::function<double(const Vec&)>& weight,
                                       const std::vector<double>& t_grid, const MidpointIntegralControls& ctrl) {
  validate_t_grid(t_grid);
  const int n = static_cast<int>(z0.size());
  const Box box = Box::symmetric(n, ctrl.box_half_width);
  std::vector<double> values(t_grid.size());
  parallel_for(t_grid.size(), [&](std::size_t i) {
    const double t = t_grid[i];
    const double integral = quadrature_oracle([&](const Vec& x) { return weight(z0 + x); },
                                              [&](const Vec& x) { return h(z0 + x) - h_min; }, box, t,
                                              ctrl.quadrature);
    values[i] = std::pow(2.0 / t, n) * integral;
  });
  return fit_power_law(t_grid, values, ctrl.min_r2);
}

namespace {

using GL = boost::math::quadrature::gauss<double, 30>;

/// Composite Gauss-Legendre nodes and weights on [-w, w] with `panels` equal panels.
std::vector<std::pair<double, double>> legendre_rule(double w, int panels) {
  std::vector<std::pair<double, double>> rule;
  const auto& x = GL::abscissa();
  const auto& wt = GL::weights();
  const double width = 2.0 * w / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = -w + (p + 0.5) * width, half = 0.5 * width;
    for (std::size_t j = 0; j < x.size(); ++j) {
      // The tables hold the nonnegative abscissae; zero appears once.
      rule.emplace_back(mid + half * x[j], half * wt[j]);
      if (x[j] != 0.0) rule.emplace_back(mid - half * x[j], half * wt[j]);
    }
  }
  return rule;
}

/// Tensor sum over the range coordinates around `centre` (quadratic widths).
double range_sum(const std::function<double(const Vec&)>& integrand, const Vec& base, const Mat& W,
                 const std::vector<std::vector<std::pair<double, double>>>& rules) {
  const int nr = static_cast<int>(W.cols());
  if (nr == 0) return integrand(base);
  std::vector<std::size_t> idx(static_cast<std::size_t>(nr), 0);
  double total = 0.0;
  while (true) {
    Vec z = base;
    double w = 1.0;
    for (int j = 0; j < nr; ++j) {
      const auto& [node, weight] = rules[static_cast<std::size_t>(j)][idx[static_cast<std::size_t>(j)]];
      z += node * W.col(j);
      w *= weight;
    }
    total += w * integrand(z);
    int j = 0;
    while (j < nr && ++idx[static_cast<std::size_t>(j)] == rules[static_cast<std::size_t>(j)].size()) {
      idx[static_cast<std::size_t>(j)] = 0;
      ++j;
    }
    if (j == nr) break;
  }
  return total;
}

}  // namespace

ExponentFit midpoint_integral_exponent(const Structure& s, const HingedProfile& profile, const GeodesicRecord& g,
                                       const std::function<double(const Vec&)>& weight,
                                       const std::vector<double>& t_grid, const MidpointIntegralControls& ctrl) {
  validate_t_grid(t_grid);
  require(profile.r <= 1, ErrorKind::Precondition, "midpoint_integral_exponent: needs a profile with r <= 1");
  require(profile.r == 0 || profile.detected_order, ErrorKind::Precondition,
          "midpoint_integral_exponent: kernel order was not detected");
  const int n = s.dim();
  ShootingControls sc;
  sc.integrator.rtol = 1e-13;
  sc.integrator.atol = 1e-15;
  sc.residual_tol = 1e-13;
  int chart = 0;
  const auto h = local_hinged(s, g, &chart, sc);
  const Vec z0 = profile.z0.coords;

  Eigen::SelfAdjointEigenSolver<Mat> eig(profile.hessian);
  const int nr = n - profile.r;
  // Eigenvalues ascend, so a kernel direction comes first.
  const Mat W = eig.eigenvectors().rightCols(nr);
  const Vec lam = eig.eigenvalues().tail(nr);
  const Vec k = profile.r == 1 ? Vec(eig.eigenvectors().col(0)) : Vec::Zero(n);
  double a = 0.0;
  int order = 0;
  if (profile.r == 1) {
    order = *profile.detected_order;
    a = profile.order_phi.back() / std::pow(profile.order_s.back(), order);
    require(a > 0.0, ErrorKind::Inconsistency, "midpoint_integral_exponent: nonpositive kernel coefficient");
  }

  auto valley = [&](double sk, Vec& y) {
    // Minimizes h over the range directions at kernel offset sk (fixed-Hessian quasi-Newton).
    const double eps = 1e-4;
    for (int it = 0; it < 40; ++it) {
      const Vec base = z0 + sk * k + W * y;
      Vec grad(nr);
      for (int j = 0; j < nr; ++j) grad[j] = (h(base + eps * W.col(j)) - h(base - eps * W.col(j))) / (2.0 * eps);
      const Vec dy = -grad.cwiseQuotient(lam);
      y += dy;
      if (dy.norm() <= 1e-12) break;
    }
  };

  std::vector<double> values(t_grid.size());
  parallel_for(t_grid.size(), [&](std::size_t i) {
    const double t = t_grid[i];
    std::vector<std::vector<std::pair<double, double>>> rules;
    for (int j = 0; j < nr; ++j) rules.push_back(legendre_rule(std::sqrt(2.0 * ctrl.tail * t / lam[j]), ctrl.panels));
    auto integrand = [&](const Vec& z) { return weight(z) * std::exp(-(h(z) - profile.h_min) / t); };
    double total = 0.0;
    if (profile.r == 0) {
      total = range_sum(integrand, z0, W, rules);
    } else {
      const double wk = std::min(std::pow(ctrl.tail * t / a, 1.0 / order), ctrl.box_half_width);
      auto kernel_rule = legendre_rule(wk, ctrl.panels);
      std::sort(kernel_rule.begin(), kernel_rule.end());
      // Walk outwards from the centre so each valley solve starts near the previous one.
      std::size_t centre = 0;
      while (centre < kernel_rule.size() && kernel_rule[centre].first < 0.0) ++centre;
      auto visit = [&](std::size_t j, Vec& y) {
        const auto [sk, wsk] = kernel_rule[j];
        valley(sk, y);
        total += wsk * range_sum(integrand, Vec(z0 + sk * k + W * y), W, rules);
      };
      Vec y = Vec::Zero(nr);
      for (std::size_t j = centre; j < kernel_rule.size(); ++j) visit(j, y);
      y.setZero();
      for (std::size_t j = centre; j-- > 0;) visit(j, y);
    }
    values[i] = std::pow(2.0 / t, n) * total;
  });
  return fit_power_law(t_grid, values, ctrl.min_r2);
}

std::pair<double, double> bounding_integrals(int n, int r, double box_half_width, double t,
                                             const QuadratureControls& ctrl) {
  require(r >= 0 && r <= n, ErrorKind::InvalidInput, "bounding_integrals: r out of range");
  const int nd = n - r;
  auto quad = [nd](const Vec& x) {
    double v = 0.0;
    for (int i = 0; i < nd; ++i) v += x[i] * x[i];
    return v;
  };
  auto quartic = [nd, n](const Vec& x) {
    double v = 0.0;
    for (int i = nd; i < n; ++i) v += std::pow(x[i], 4);
    return v;
  };
  const auto one = [](const Vec&) { return 1.0; };
  const Box box = Box::symmetric(n, box_half_width);
  const double scale = std::pow(2.0 / t, n);
  const double lower = quadrature_oracle(one, [&](const Vec& x) { return quad(x) + quartic(x); }, box, t, ctrl);
  const double upper = quadrature_oracle(one, quad, box, t, ctrl);
  return {scale * lower, scale * upper};
}

double ben_arous_c0(const Structure& s, const Point& q1, const Point& z, const ShootingControls& ctrl) {
  require(s.is_riemannian(), ErrorKind::Unsupported,
          "ben_arous_c0: the leading coefficient is only available for Riemannian structures");
  const DistanceResult r = distance(s, q1, z, ctrl);
  require(!r.non_discrete && r.minimizers.size() == 1, ErrorKind::Domain,
          "ben_arous_c0: z is on the cut locus of q1 (minimizer not unique)");
  const GeodesicRecord& g = r.minimizers.front();
  require(!g.t_conj || *g.t_conj > g.length * (1.0 + 1e-9), ErrorKind::Domain,
          "ben_arous_c0: z is at or beyond the first conjugate point");
  // Orthonormal coordinates on T_{q1} map to covectors through X(q1)^{-1}; the metric volume at z
  // is |det X(z)|^{-1} times the coordinate volume.
  const double det_j = std::abs(g.end_jacobian.determinant());
  const double det_x1 = std::abs(s.frame(q1).determinant());
  const double det_xz = std::abs(s.frame(g.end().q).determinant());
  const double jac = det_j / (det_x1 * det_xz);
  require(jac > 0.0 && std::isfinite(jac), ErrorKind::Domain, "ben_arous_c0: degenerate exponential map at z");
  return 1.0 / std::sqrt(jac);
}

nlohmann::json to_json(const AsymptoticPrediction& p) {
  nlohmann::json cls = nlohmann::json::array();
  for (const GeodesicClassification& c : p.classifications)
    cls.push_back({{"m", c.m}, {"F_zi", c.F_zi}, {"c0_product", c.c0_product}});
  return {{"n", p.n},
          {"classifications", cls},
          {"exponent", p.exponent.str()},
          {"remainder", p.remainder_power.str()},
          {"leading_C", p.leading_C ? nlohmann::json(*p.leading_C) : nlohmann::json(nullptr)},
          {"regime", p.regime}};
}

nlohmann::json to_json(const BoundsPrediction& b) {
  return {{"r", b.r}, {"lower_exponent", b.lower_exponent.str()}, {"upper_exponent", b.upper_exponent.str()}};
}

nlohmann::json to_json(const ExponentFit& f) {
  return {{"grid", f.grid}, {"values", f.values}, {"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}};
}

}  // namespace heatlocus
