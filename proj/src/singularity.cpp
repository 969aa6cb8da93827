#include "heatlocus/singularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace heatlocus {

namespace {

constexpr double kRankTol = 1e-7;
constexpr double kResidueFactor = 1e4;
constexpr double kRoundoff = 64.0 * std::numeric_limits<double>::epsilon();

std::vector<Series> series_point(const Vec& x0, const std::vector<Vec>& c, int degree) {
  const int n = static_cast<int>(x0.size());
  std::vector<Series> x;
  x.reserve(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    Series s = Series::constant(x0[a], degree);
    for (std::size_t i = 0; i < c.size() && static_cast<int>(i) + 1 <= degree; ++i) s[static_cast<int>(i) + 1] = c[i][a];
    x.push_back(std::move(s));
  }
  return x;
}

/// Orthonormal basis of the column space of P (a projector), built from the coordinate
/// axes in index order so that its orientation is reproducible.
Mat axis_aligned_basis(const Mat& P, int dim) {
  const int n = static_cast<int>(P.rows());
  Mat B(n, dim);
  int found = 0;
  for (int j = 0; j < n && found < dim; ++j) {
    Vec v = P.col(j);
    for (int i = 0; i < found; ++i) v -= B.col(i).dot(v) * B.col(i);
    if (v.norm() > 1e-6) B.col(found++) = v.normalized();
  }
  require(found == dim, ErrorKind::Inconsistency, "could not build a kernel/cokernel basis");
  return B;
}

struct LinearData {
  Mat J;
  Mat pinv;
  Mat kernel;    // n x r
  Mat cokernel;  // n x r
  double sigma_max = 0.0;
  int r = 0;
};

LinearData linear_data(const SmoothMapSample& map) {
  LinearData d;
  d.J = map_jacobian(map);
  const int n = map.n;
  Eigen::JacobiSVD<Mat> svd(d.J, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec& sv = svd.singularValues();
  d.sigma_max = sv.size() > 0 ? sv[0] : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > kRankTol * d.sigma_max && sv[i] > 0.0) ++rank;
  d.r = n - rank;
  Mat Sinv = Mat::Zero(n, n);
  for (int i = 0; i < rank; ++i) Sinv(i, i) = 1.0 / sv[i];
  d.pinv = svd.matrixV() * Sinv * svd.matrixU().transpose();
  if (d.r > 0) {
    const Mat Vk = svd.matrixV().rightCols(d.r);
    const Mat Uc = svd.matrixU().rightCols(d.r);
    d.kernel = axis_aligned_basis(Vk * Vk.transpose(), d.r);
    d.cokernel = axis_aligned_basis(Uc * Uc.transpose(), d.r);
  }
  return d;
}

AnnihilationTrace annihilate_with(const SmoothMapSample& map, const LinearData& lin, const Vec& xi, int max_order) {
  AnnihilationTrace tr;
  tr.curve_jet.push_back(xi);
  const Mat Pperp = lin.cokernel.size() > 0 ? Mat(lin.cokernel * lin.cokernel.transpose()) : Mat::Zero(map.n, map.n);
  for (int k = 2; k <= max_order; ++k) {
    const std::vector<Vec> coeffs = curve_coefficients(map, tr.curve_jet, k);
    const Vec& R = coeffs[static_cast<std::size_t>(k)];
    const Vec perp = Pperp * R;
    // Relative to the largest coefficient at this order, well above the residue left at order
    // k-1 by the previous annihilation step, and above plain rounding of the linear part.
    const double residue = coeffs[static_cast<std::size_t>(k - 1)].cwiseAbs().maxCoeff();
    const double threshold = std::max({map.zero_tol * R.cwiseAbs().maxCoeff(), kResidueFactor * residue,
                                       kRoundoff * lin.sigma_max});
    if (perp.cwiseAbs().maxCoeff() > threshold) {
      tr.order = k;
      tr.obstruction = perp;
      return tr;
    }
    tr.orders_annihilated.push_back(k);
    tr.curve_jet.push_back(-lin.pinv * R);
  }
  return tr;
}

/// Second-order coefficient of f along x0 + eta s, projected on the cokernel basis.
Vec quadratic_on_kernel(const SmoothMapSample& map, const LinearData& lin, const Vec& eta) {
  const Vec Q = curve_coefficients(map, {eta}, 2)[2];
  return lin.cokernel.transpose() * Q;
}

double cross2(const Vec& a, const Vec& b) { return a[0] * b[1] - a[1] * b[0]; }

Vec oriented(Vec v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > 1e-9) {
      if (v[i] < 0) v = -v;
      break;
    }
  }
  return v;
}

std::string label_corank2(const SmoothMapSample& map, const LinearData& lin) {
  const Vec k1 = lin.kernel.col(0), k2 = lin.kernel.col(1);
  const Vec Q11 = quadratic_on_kernel(map, lin, k1);
  const Vec Q22 = quadratic_on_kernel(map, lin, k2);
  const Vec Q12 = quadratic_on_kernel(map, lin, k1 + k2) - Q11 - Q22;  // coefficient of a*b
  // Binary forms A a^2 + B a b + C b^2, one per cokernel component.
  Mat forms(2, 3);
  for (int i = 0; i < 2; ++i) forms.row(i) << Q11[i], Q12[i], Q22[i];
  const double scale = forms.cwiseAbs().maxCoeff();
  const double tol = std::max(map.zero_tol, 1e-9);
  if (!(scale > tol * std::max(1.0, lin.sigma_max))) return "unrecognized";
  Eigen::JacobiSVD<Mat> svd(forms);
  const int pencil_rank = svd.singularValues()[1] > tol * svd.singularValues()[0] ? 2 : 1;

  auto form_at = [&](int i, const Vec& ab) {
    return forms(i, 0) * ab[0] * ab[0] + forms(i, 1) * ab[0] * ab[1] + forms(i, 2) * ab[1] * ab[1];
  };
  auto null_direction = [&](const Eigen::RowVector3d& q) -> std::vector<Vec> {
    // Real root directions (a, b) of q.
    Eigen::Matrix2d S;
    S << q[0], q[1] / 2, q[1] / 2, q[2];
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(S);
    const double l0 = es.eigenvalues()[0], l1 = es.eigenvalues()[1];
    const Vec e0 = es.eigenvectors().col(0), e1 = es.eigenvectors().col(1);
    const double qs = std::max(std::abs(l0), std::abs(l1));
    if (std::abs(l0) <= tol * qs) return {e0};
    if (std::abs(l1) <= tol * qs) return {e1};
    if (l0 * l1 > 0) return {};
    const double a = std::sqrt(std::abs(l1)), b = std::sqrt(std::abs(l0));
    return {Vec(a * e0 + b * e1).normalized(), Vec(a * e0 - b * e1).normalized()};
  };

  auto order_label = [&](const Vec& ab, const char* base3, const char* base4, bool square) -> std::string {
    const Vec eta = oriented(Vec(ab[0] * k1 + ab[1] * k2).normalized());
    const Vec ab_perp(Eigen::Vector2d(-ab[1], ab[0]));
    const Vec zeta = ab_perp[0] * k1 + ab_perp[1] * k2;
    const AnnihilationTrace tr = annihilate_with(map, lin, eta, 6);
    if (!tr.order || (*tr.order != 3 && *tr.order != 4)) return "unrecognized";
    if (*tr.order == 4 && base4 == nullptr) return "unrecognized";
    const Vec v = lin.cokernel.transpose() * tr.obstruction;
    const Vec Qz = quadratic_on_kernel(map, lin, zeta);
    double sign;
    if (square) {
      sign = cross2(Qz, v);
    } else {
      const Vec mixed = quadratic_on_kernel(map, lin, eta + zeta) - quadratic_on_kernel(map, lin, eta) - Qz;
      sign = cross2(mixed, v) * cross2(mixed, Qz);
    }
    if (std::abs(sign) <= tol * std::max(1.0, v.norm() * Qz.norm())) return "unrecognized";
    return std::string(*tr.order == 3 ? base3 : base4) + (sign > 0 ? "+" : "-");
  };

  if (pencil_rank == 2) {
    const Eigen::RowVector3d f1 = forms.row(0), f2 = forms.row(1);
    const double res = std::pow(f1[0] * f2[2] - f2[0] * f1[2], 2) -
                       (f1[0] * f2[1] - f2[0] * f1[1]) * (f1[1] * f2[2] - f2[1] * f1[2]);
    if (std::abs(res) > tol * std::pow(scale, 4)) {
      bool definite = false;
      for (int i = 0; i < 720 && !definite; ++i) {
        const double phi = std::numbers::pi * i / 720.0;
        const Eigen::RowVector3d q = std::cos(phi) * f1 + std::sin(phi) * f2;
        definite = q[1] * q[1] - 4 * q[0] * q[2] < -tol * scale * scale;
      }
      return definite ? "D4+" : "D4-";
    }
    // Common linear factor: its null direction is shared by both forms.
    const Eigen::RowVector3d big = f1.norm() >= f2.norm() ? f1 : f2;
    const int other = f1.norm() >= f2.norm() ? 1 : 0;
    std::optional<Vec> best;
    double best_val = 0.0;
    for (const Vec& ab : null_direction(big)) {
      const double val = std::abs(form_at(other, ab));
      if (!best || val < best_val) {
        best = ab;
        best_val = val;
      }
    }
    if (!best || best_val > 1e-6 * scale) return "unrecognized";
    return order_label(*best, "D5", "D6", false);
  }
  // Pencil of rank one: both forms are multiples of a single one; E6 needs a perfect square.
  const Eigen::RowVector3d q = forms.row(0).norm() >= forms.row(1).norm() ? forms.row(0) : forms.row(1);
  const double disc = q[1] * q[1] - 4 * q[0] * q[2];
  if (std::abs(disc) > 1e-6 * q.squaredNorm()) return "unrecognized";
  const std::vector<Vec> nd = null_direction(q);
  if (nd.empty()) return "unrecognized";
  return order_label(nd.front(), "E6", nullptr, true);
}

}  // namespace

SmoothMapSample affine_conjugate(const SmoothMapSample& map, const Mat& A, const Vec& a, const Mat& B, const Vec& b) {
  const int n = map.n;
  require(A.rows() == n && A.cols() == n && B.rows() == n && B.cols() == n && a.size() == n && b.size() == n,
          ErrorKind::InvalidInput, "affine_conjugate: dimension mismatch");
  Eigen::FullPivLU<Mat> lu(A);
  require(lu.isInvertible(), ErrorKind::InvalidInput, "affine_conjugate: source matrix is singular");
  SmoothMapSample out = map;
  out.name = map.name + "~affine";
  out.basepoint = lu.solve(map.basepoint - a);
  auto f = map.f;
  out.f = [f, A, a, B, b](const Vec& x) { return Vec(B * f(A * x + a) + b); };
  if (map.f_series) {
    auto fs = map.f_series;
    out.f_series = [fs, A, a, B, b, n](std::span<const Series> x, std::span<Series> res) {
      std::vector<Series> y(static_cast<std::size_t>(n)), fy(static_cast<std::size_t>(n));
      const int deg = x.empty() ? 0 : x[0].degree();
      for (int i = 0; i < n; ++i) {
        Series acc = Series::constant(a[i], deg);
        for (int j = 0; j < n; ++j)
          if (A(i, j) != 0.0) acc += x[j] * Series(A(i, j));
        y[i] = std::move(acc);
      }
      fs(y, fy);
      for (int i = 0; i < n; ++i) {
        Series acc = Series::constant(b[i], deg);
        for (int j = 0; j < n; ++j)
          if (B(i, j) != 0.0) acc += fy[j] * Series(B(i, j));
        res[i] = std::move(acc);
      }
    };
  }
  return out;
}

Mat map_jacobian(const SmoothMapSample& map) {
  const int n = map.n;
  require(map.basepoint.size() == n, ErrorKind::InvalidInput, "map sample: basepoint dimension mismatch");
  Mat J(n, n);
  if (map.f_series) {
    for (int j = 0; j < n; ++j) {
      std::vector<Series> x = series_point(map.basepoint, {Vec::Unit(n, j)}, 1);
      std::vector<Series> y(static_cast<std::size_t>(n));
      map.f_series(x, y);
      for (int i = 0; i < n; ++i) J(i, j) = y[i][1];
    }
    return J;
  }
  const double h = 1e-3 * std::max(1.0, map.basepoint.cwiseAbs().maxCoeff());
  for (int j = 0; j < n; ++j) {
    auto central = [&](double step) {
      Vec xp = map.basepoint, xm = map.basepoint;
      xp[j] += step;
      xm[j] -= step;
      return Vec((map.f(xp) - map.f(xm)) / (2 * step));
    };
    J.col(j) = (4.0 * central(0.5 * h) - central(h)) / 3.0;
  }
  return J;
}

std::vector<Vec> curve_coefficients(const SmoothMapSample& map, const std::vector<Vec>& c, int degree) {
  const int n = map.n;
  require(degree >= 0 && degree <= map.jet_order, ErrorKind::InvalidInput,
          "curve_coefficients: degree exceeds the sample's jet order");
  std::vector<Vec> out(static_cast<std::size_t>(degree) + 1, Vec::Zero(n));
  if (map.f_series) {
    std::vector<Series> x = series_point(map.basepoint, c, degree);
    std::vector<Series> y(static_cast<std::size_t>(n));
    map.f_series(x, y);
    for (int k = 0; k <= degree; ++k)
      for (int i = 0; i < n; ++i) out[k][i] = y[i][k];
    return out;
  }
  // Least-squares fit on Chebyshev nodes in the scaled parameter s / rho.
  const int D = degree + 4;
  const int N = 3 * (D + 1);
  const double rho = map.fd_radius;
  Mat V(N, D + 1);
  Mat Y(N, n);
  for (int j = 0; j < N; ++j) {
    const double t = std::cos(std::numbers::pi * (j + 0.5) / N);
    const double s = rho * t;
    Vec x = map.basepoint;
    double sp = s;
    for (const Vec& ci : c) {
      x += ci * sp;
      sp *= s;
    }
    Y.row(j) = map.f(x).transpose();
    double tp = 1.0;
    for (int k = 0; k <= D; ++k) {
      V(j, k) = tp;
      tp *= t;
    }
  }
  const Mat coef = V.colPivHouseholderQr().solve(Y);
  double rp = 1.0;
  for (int k = 0; k <= degree; ++k) {
    out[k] = coef.row(k).transpose() / rp;
    rp *= rho;
  }
  return out;
}

int rank_deficit(const SmoothMapSample& map, double tol) {
  const Mat J = map_jacobian(map);
  Eigen::JacobiSVD<Mat> svd(J);
  const Vec& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] == 0.0) return map.n;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > tol * sv[0]) ++rank;
  return map.n - rank;
}

AnnihilationTrace annihilate(const SmoothMapSample& map, const Vec& xi, int max_order) {
  require(max_order <= map.jet_order, ErrorKind::InvalidInput, "annihilate: order exceeds the sample's jet order");
  return annihilate_with(map, linear_data(map), xi, max_order);
}

std::optional<int> type_1m(const SmoothMapSample& map, int m_max, AnnihilationTrace* trace) {
  require(m_max >= 2, ErrorKind::InvalidInput, "type_1m: m_max must be at least 2");
  require(map.jet_order >= m_max, ErrorKind::InvalidInput, "type_1m: jet order below m_max");
  const LinearData lin = linear_data(map);
  require(lin.r == 1, ErrorKind::Precondition,
          "type_1m: rank deficit is " + std::to_string(lin.r) + ", expected 1");
  AnnihilationTrace tr = annihilate_with(map, lin, oriented(lin.kernel.col(0)), m_max);
  const std::optional<int> m = tr.order;
  if (trace != nullptr) *trace = std::move(tr);
  return m;
}

bool admissible(const SmoothMapSample& map, int m_max) {
  const LinearData lin = linear_data(map);
  if (lin.r == 0) return true;
  if (lin.r == 1) {
    const std::optional<int> m = annihilate_with(map, lin, oriented(lin.kernel.col(0)), m_max).order;
    return m && *m % 2 == 1;
  }
  // Order >= 3 along every kernel direction needs the cokernel part of the quadratic
  // term to vanish identically on the kernel (polarization over a basis).
  const double scale = std::max(lin.sigma_max, 1.0);
  for (int i = 0; i < lin.r; ++i) {
    for (int j = i; j < lin.r; ++j) {
      const Vec eta = i == j ? Vec(lin.kernel.col(i)) : Vec(lin.kernel.col(i) + lin.kernel.col(j));
      if (quadratic_on_kernel(map, lin, eta).cwiseAbs().maxCoeff() > map.zero_tol * scale) return false;
    }
  }
  return true;
}

SingularityReport classify(const SmoothMapSample& map, int m_max) {
  SingularityReport rep;
  const LinearData lin = linear_data(map);
  rep.rank_deficit = lin.r;
  if (lin.r == 0) {
    rep.label = "nonsingular";
    rep.admissible = true;
    return rep;
  }
  if (lin.r == 1) {
    rep.evidence = annihilate_with(map, lin, oriented(lin.kernel.col(0)), m_max);
    rep.type_m = rep.evidence.order;
    rep.admissible = rep.type_m && *rep.type_m % 2 == 1;
    rep.label = rep.type_m && *rep.type_m >= 2 && *rep.type_m <= 6 ? "A" + std::to_string(*rep.type_m) : "unrecognized";
    return rep;
  }
  rep.admissible = admissible(map, m_max);
  rep.label = lin.r == 2 ? label_corank2(map, lin) : "unrecognized";
  return rep;
}

nlohmann::json to_json(const SingularityReport& r) {
  nlohmann::json j;
  j["rank_deficit"] = r.rank_deficit;
  j["type_m"] = r.type_m ? nlohmann::json(*r.type_m) : nlohmann::json(nullptr);
  j["admissible"] = r.admissible;
  j["label"] = r.label;
  nlohmann::json jets = nlohmann::json::array();
  for (const Vec& c : r.evidence.curve_jet) jets.push_back(std::vector<double>(c.data(), c.data() + c.size()));
  j["evidence"] = {{"orders_annihilated", r.evidence.orders_annihilated}, {"curve_jets", jets}};
  return j;
}

namespace {

std::string canonical_label(std::string label) {
  // Accept the typographic minus sign.
  const std::string minus = "\xE2\x88\x92";
  if (const auto pos = label.find(minus); pos != std::string::npos) label.replace(pos, minus.size(), "-");
  return label;
}

template <class S>
S ipow(const S& x, int k) {
  S r = x;
  for (int i = 1; i < k; ++i) r = r * x;
  return r;
}

/// Core normal form (dimension `dim`) written into out[0..dim).
template <class S>
void normal_form(const std::string& label, std::span<const S> v, std::span<S> out) {
  const S& x = v[0];
  if (label[0] == 'A') {
    const int m = label[1] - '0';
    // x^m + x^(m-2) y_1 + ... + x y_(m-2), then the identity on y.
    S f = ipow(x, m);
    for (int j = 1; j <= m - 2; ++j) f = f + ipow(x, m - 1 - j) * v[j];
    out[0] = f;
    for (int j = 1; j <= m - 2; ++j) out[j] = v[j];
    return;
  }
  const S& y = v[1];
  const double sgn = label.back() == '+' ? 1.0 : -1.0;
  if (label.rfind("D4", 0) == 0) {
    out[0] = x * x + S(sgn) * y * y + x * v[2];
    out[1] = x * y;
    out[2] = v[2];
  } else if (label.rfind("D5", 0) == 0) {
    out[0] = S(sgn) * x * x * x + y * y + x * x * v[2] + x * v[3];
    out[1] = x * y;
    out[2] = v[2];
    out[3] = v[3];
  } else if (label.rfind("D6", 0) == 0) {
    out[0] = S(sgn) * ipow(x, 4) + y * y + ipow(x, 3) * v[2] + x * x * v[3] + x * v[4];
    out[1] = x * y;
    for (int j = 2; j < 5; ++j) out[j] = v[j];
  } else {  // E6
    const S& z = v[2];
    const S& t = v[3];
    const S& u = v[4];
    out[0] = x * x + x * y * z + t * y + u * x;
    out[1] = S(sgn) * y * y * y + x * x * z + t * x;
    for (int j = 2; j < 5; ++j) out[j] = v[j];
  }
}

}  // namespace

std::vector<std::pair<std::string, int>> catalog_labels() {
  return {{"A2", 1},  {"A3", 2},  {"A4", 3},  {"D4+", 3}, {"D4-", 3}, {"A5", 4},  {"D5+", 4},
          {"D5-", 4}, {"A6", 5},  {"D6+", 5}, {"D6-", 5}, {"E6+", 5}, {"E6-", 5}};
}

SmoothMapSample catalog(const std::string& label_in, int n) {
  const std::string label = canonical_label(label_in);
  int dim = 0;
  for (const auto& [l, d] : catalog_labels())
    if (l == label) dim = d;
  if (dim == 0) fail(ErrorKind::Catalog, "unknown normal form '" + label_in + "'");
  require(n >= dim, ErrorKind::InvalidInput,
          "normal form " + label + " needs dimension at least " + std::to_string(dim));
  auto fn = [label, dim, n](auto x, auto out) {
    normal_form(label, x.subspan(0, static_cast<std::size_t>(dim)), out.subspan(0, static_cast<std::size_t>(dim)));
    for (int j = dim; j < n; ++j) out[j] = x[j];  // suspension
  };
  SmoothMapSample m;
  m.name = label + (n > dim ? " (suspended to n=" + std::to_string(n) + ")" : "");
  m.n = n;
  m.basepoint = Vec::Zero(n);
  m.f = [fn, n](const Vec& x) {
    std::vector<double> in(x.data(), x.data() + x.size()), out(static_cast<std::size_t>(n));
    fn(std::span<const double>(in), std::span<double>(out));
    return Vec(Eigen::Map<const Vec>(out.data(), n));
  };
  m.f_series = [fn](std::span<const Series> x, std::span<Series> out) { fn(x, out); };
  return m;
}

namespace {

/// Coefficients of the first eta-1 terms of 1/2 - sqrt(1/4 - x^2) = sum_k C_{k-1} x^(2k)
/// (Catalan numbers).
std::vector<double> truncated_circle_coeffs(int eta) {
  std::vector<double> c;
  double catalan = 1.0;
  for (int k = 1; k <= eta - 1; ++k) {
    c.push_back(catalan);
    catalan = catalan * 2.0 * (2.0 * k - 1.0) / (k + 1.0);
  }
  return c;
}

template <class S>
S poly_even(const std::vector<double>& c, const S& x) {
  // sum_k c[k-1] x^(2k)
  const S x2 = x * x;
  S acc = S(0.0) * x;
  S p = x2;
  for (double ck : c) {
    acc = acc + S(ck) * p;
    p = p * x2;
  }
  return acc;
}

template <class S>
S poly_even_deriv(const std::vector<double>& c, const S& x) {
  const S x2 = x * x;
  S acc = S(0.0) * x;
  S p = x;
  for (std::size_t k = 0; k < c.size(); ++k) {
    acc = acc + S(c[k] * 2.0 * static_cast<double>(k + 1)) * p;
    p = p * x2;
  }
  return acc;
}

}  // namespace

ContactFixture make_fixture(int eta, double sigma1, double sigma3) {
  require(eta >= 3, ErrorKind::InvalidInput, "make_fixture: eta must be at least 3");
  require(sigma1 > 0.0, ErrorKind::InvalidInput, "make_fixture: sigma1 must be positive");
  ContactFixture fx;
  fx.eta = eta;
  fx.sigma1 = sigma1;
  fx.sigma3 = sigma3;
  fx.q1 = Vec(Eigen::Vector2d(0.0, -0.5));
  fx.q2 = Vec(Eigen::Vector2d(0.0, 0.5));
  fx.z0 = Vec::Zero(2);
  fx.h_min = 0.25;
  const std::vector<double> c = truncated_circle_coeffs(eta);
  fx.gamma = [c](double x) { return poly_even(c, x); };
  fx.xi = [](double x) { return 0.5 - std::sqrt(0.25 - x * x); };

  // Near the origin d(q1, z) = 1/2 + sigma(z), sigma the signed distance to gamma_eta
  // (positive above), and d(z, q2) = |z - q2| (flat metric).
  fx.h = [c](const Vec& z) {
    const double x = z[0], y = z[1];
    double u = x;
    for (int it = 0; it < 50; ++it) {
      const double P = poly_even(c, u), dP = poly_even_deriv(c, u);
      double ddP = 0.0, p = 1.0;
      for (std::size_t k = 0; k < c.size(); ++k) {
        const double e = 2.0 * static_cast<double>(k + 1);
        ddP += c[k] * e * (e - 1.0) * p;
        p *= u * u;
      }
      const double g = (u - x) + (P - y) * dP;
      const double dg = 1.0 + dP * dP + (P - y) * ddP;
      const double step = g / dg;
      u -= step;
      if (std::abs(step) < 1e-17) break;
    }
    const double P = poly_even(c, u), dP = poly_even_deriv(c, u);
    const double sigma = (-(x - u) * dP + (y - P)) / std::sqrt(1.0 + dP * dP);
    const double d1 = 0.5 + sigma;
    const double d2sq = x * x + (y - 0.5) * (y - 0.5);
    return 0.5 * (d1 * d1 + d2sq);
  };

  // Geodesics from q1 leave gamma_eta along its normals; rho is arclength, so rho = 1
  // lands on the focal point q2 of the central geodesic.
  auto expfn = [c, sigma1, sigma3](auto v, auto out) {
    using S = std::decay_t<decltype(v[0])>;
    const S& th = v[0];
    const S& rho = v[1];
    const S x = S(sigma1) * th + S(sigma3 / 6.0) * th * th * th;
    const S P = poly_even(c, x);
    const S dP = poly_even_deriv(c, x);
    const S norm = sqrt(S(1.0) + dP * dP);
    const S off = rho - S(0.5);
    out[0] = x - off * dP / norm;
    out[1] = P + off / norm;
  };
  fx.exp_sample.name = "fixture(eta=" + std::to_string(eta) + ")";
  fx.exp_sample.n = 2;
  fx.exp_sample.basepoint = Vec(Eigen::Vector2d(0.0, 1.0));
  fx.exp_sample.f = [expfn](const Vec& x) {
    std::vector<double> in{x[0], x[1]}, out(2);
    expfn(std::span<const double>(in), std::span<double>(out));
    return Vec(Eigen::Vector2d(out[0], out[1]));
  };
  fx.exp_sample.f_series = [expfn](std::span<const Series> x, std::span<Series> out) { expfn(x, out); };
  fx.exp_sample.jet_order = 2 * eta + 4;
  return fx;
}

std::pair<double, double> fixture_sandwich(const ContactFixture& fx, const std::vector<double>& xs) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double x : xs) {
    require(x != 0.0, ErrorKind::InvalidInput, "fixture_sandwich: x must be nonzero");
    const double yg = fx.gamma(x), yx = fx.xi(x);
    for (double w : {0.25, 0.5, 0.75}) {
      const double y = yg + w * (yx - yg);
      const double ratio = (fx.h(Vec(Eigen::Vector2d(x, y))) - fx.h_min) / std::pow(x, 2 * fx.eta);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
  }
  return {lo, hi};
}

}  // namespace heatlocus
