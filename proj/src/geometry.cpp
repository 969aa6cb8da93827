#include "heatlocus/geometry.hpp"

#include <cmath>

namespace heatlocus {

std::string to_string(StructureKind k) {
  switch (k) {
    case StructureKind::Riemannian: return "riemannian";
    case StructureKind::Contact3D: return "contact3d";
    case StructureKind::QuasiContact4D: return "quasicontact4d";
    case StructureKind::Other: return "other";
  }
  return "other";
}

Mat FrameJet::matrix() const {
  Mat m(k, n);
  for (int i = 0; i < k; ++i)
    for (int a = 0; a < n; ++a) m(i, a) = value(i, a);
  return m;
}

Structure::Structure(StructureDefinition def) {
  require(def.n >= 1 && def.n <= kMaxVars, ErrorKind::InvalidInput,
          "structure dimension must be in 1.." + std::to_string(kMaxVars));
  require(def.k >= 1 && def.k <= def.n, ErrorKind::InvalidInput, "structure rank must be in 1..n");
  require(static_cast<bool>(def.frame), ErrorKind::InvalidInput, "structure needs a frame evaluator");
  if (!def.density) def.density = [](int, std::span<const double>) { return 1.0; };
  if (def.atlas.count <= 1) {
    def.atlas.count = 1;
    def.atlas.preferred = [](int chart, const Vec&) { return chart; };
  }
  def_ = std::make_shared<const StructureDefinition>(std::move(def));
}

void Structure::check_point(const Point& q) const {
  require(q.dim() == dim(), ErrorKind::InvalidInput,
          "point has dimension " + std::to_string(q.dim()) + ", structure '" + name() + "' has " +
              std::to_string(dim()));
  require(q.chart >= 0 && q.chart < chart_count(), ErrorKind::Chart, "point refers to an unknown chart");
  require(q.coords.allFinite(), ErrorKind::InvalidInput, "point has non-finite coordinates");
}

void Structure::check_covector(const Covector& p) const {
  require(p.dim() == dim(), ErrorKind::InvalidInput,
          "covector has dimension " + std::to_string(p.dim()) + ", structure '" + name() + "' has " +
              std::to_string(dim()));
  require(p.comps.allFinite(), ErrorKind::InvalidInput, "covector has non-finite components");
}

void Structure::frame_into(int chart, std::span<const double> q, std::span<double> out) const {
  def_->frame(chart, q, out);
}

Mat Structure::frame(const Point& q) const {
  check_point(q);
  const int n = dim(), k = rank();
  std::vector<double> buf(static_cast<std::size_t>(k * n));
  def_->frame(q.chart, std::span<const double>(q.coords.data(), n), buf);
  Mat m(k, n);
  for (int i = 0; i < k; ++i)
    for (int a = 0; a < n; ++a) m(i, a) = buf[i * n + a];
  return m;
}

FrameJet Structure::jet(const Point& q) const {
  check_point(q);
  FrameJet j;
  jet_into(q.chart, std::span<const double>(q.coords.data(), q.dim()), j);
  return j;
}

void Structure::jet_into(int chart, std::span<const double> q, FrameJet& out) const {
  const int n = dim(), k = rank();
  if (out.n != n || out.k != k) out.resize(k, n);
  if (def_->frame_jet) {
    thread_local std::vector<Jet2> in, res;
    in.resize(static_cast<std::size_t>(n));
    res.assign(static_cast<std::size_t>(k * n), Jet2());
    for (int j = 0; j < n; ++j) in[j] = Jet2::variable(q[j], j, n);
    def_->frame_jet(chart, in, res);
    for (int i = 0; i < k; ++i) {
      for (int a = 0; a < n; ++a) {
        const Jet2& x = res[i * n + a];
        out.values[i * n + a] = x.value();
        for (int j = 0; j < n; ++j) {
          out.first[(i * n + a) * n + j] = j < x.nvars() ? x.grad(j) : 0.0;
          for (int l = 0; l < n; ++l)
            out.second[((i * n + a) * n + j) * n + l] = (j < x.nvars() && l < x.nvars()) ? x.hess(j, l) : 0.0;
        }
      }
    }
    return;
  }
  // Central differences, step 1e-6 scaled by coordinate magnitude.
  std::vector<double> x(q.begin(), q.end()), fp(static_cast<std::size_t>(k * n)),
      fm(static_cast<std::size_t>(k * n)), f0(static_cast<std::size_t>(k * n));
  def_->frame(chart, x, f0);
  std::copy(f0.begin(), f0.end(), out.values.begin());
  for (int j = 0; j < n; ++j) {
    const double hj = 1e-6 * std::max(1.0, std::abs(q[j]));
    x[j] = q[j] + hj;
    def_->frame(chart, x, fp);
    x[j] = q[j] - hj;
    def_->frame(chart, x, fm);
    x[j] = q[j];
    for (int e = 0; e < k * n; ++e) out.first[e * n + j] = (fp[e] - fm[e]) / (2 * hj);
  }
  // Second derivatives with a larger step (roundoff ~ eps/h^2).
  std::vector<double> fpp(f0.size()), fpm(f0.size()), fmp(f0.size()), fmm(f0.size());
  for (int j = 0; j < n; ++j) {
    const double hj = 1e-4 * std::max(1.0, std::abs(q[j]));
    for (int l = j; l < n; ++l) {
      const double hl = 1e-4 * std::max(1.0, std::abs(q[l]));
      auto eval_at = [&](double sj, double sl, std::vector<double>& f) {
        x.assign(q.begin(), q.end());
        x[j] += sj;
        x[l] += sl;
        def_->frame(chart, x, f);
      };
      if (j == l) {
        eval_at(hj, 0.0, fpp);
        eval_at(-hj, 0.0, fmm);
        for (int e = 0; e < k * n; ++e) out.second[(e * n + j) * n + j] = (fpp[e] - 2 * f0[e] + fmm[e]) / (hj * hj);
      } else {
        eval_at(hj, hl, fpp);
        eval_at(hj, -hl, fpm);
        eval_at(-hj, hl, fmp);
        eval_at(-hj, -hl, fmm);
        for (int e = 0; e < k * n; ++e) {
          const double v = (fpp[e] - fpm[e] - fmp[e] + fmm[e]) / (4 * hj * hl);
          out.second[(e * n + j) * n + l] = v;
          out.second[(e * n + l) * n + j] = v;
        }
      }
    }
  }
}

double Structure::density(const Point& q) const {
  check_point(q);
  return def_->density(q.chart, std::span<const double>(q.coords.data(), q.dim()));
}

Vec Structure::density_gradient(const Point& q) const {
  check_point(q);
  const int n = dim();
  Vec g(n);
  if (def_->density_jet) {
    std::vector<Jet2> in(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) in[j] = Jet2::variable(q.coords[j], j, n);
    const Jet2 f = def_->density_jet(q.chart, in);
    for (int j = 0; j < n; ++j) g[j] = j < f.nvars() ? f.grad(j) : 0.0;
    return g;
  }
  std::vector<double> x(q.coords.data(), q.coords.data() + n);
  for (int j = 0; j < n; ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
    const double x0 = x[j];
    x[j] = x0 + h;
    const double fp = def_->density(q.chart, x);
    x[j] = x0 - h;
    const double fm = def_->density(q.chart, x);
    x[j] = x0;
    g[j] = (fp - fm) / (2 * h);
  }
  return g;
}

Point Structure::to_chart(const Point& q, int chart) const {
  check_point(q);
  require(chart >= 0 && chart < chart_count(), ErrorKind::Chart, "unknown chart " + std::to_string(chart));
  if (chart == q.chart) return q;
  Vec out(dim());
  def_->atlas.map_d(q.chart, chart, std::span<const double>(q.coords.data(), dim()),
                    std::span<double>(out.data(), dim()));
  require(out.allFinite(), ErrorKind::Chart, "point is outside the domain of chart " + std::to_string(chart));
  return Point(out, chart);
}

int Structure::preferred_chart(const Point& q) const { return def_->atlas.preferred(q.chart, q.coords); }

bool Structure::normalize_chart(Point& q, Covector& p, Mat* variation) const {
  const int target = preferred_chart(q);
  if (target == q.chart) return false;
  const int n = dim();
  std::vector<Jet2> in(static_cast<std::size_t>(n)), out(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) in[j] = Jet2::variable(q.coords[j], j, n);
  def_->atlas.map_j(q.chart, target, in, out);
  Mat D(n, n);
  Vec qn(n);
  for (int a = 0; a < n; ++a) {
    qn[a] = out[a].value();
    for (int j = 0; j < n; ++j) D(a, j) = out[a].grad(j);
  }
  const Mat Dinv_t = D.inverse().transpose();
  const Vec pn = Dinv_t * p.comps;
  if (variation != nullptr) {
    Mat& V = *variation;
    const int m = static_cast<int>(V.cols());
    Mat Vn(2 * n, m);
    for (int c = 0; c < m; ++c) {
      const Vec dq = V.col(c).head(n);
      const Vec dp = V.col(c).tail(n);
      // dD[a][b] = sum_l d_l d_b phi_a dq_l
      Mat dD(n, n);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          double acc = 0.0;
          for (int l = 0; l < n; ++l) acc += out[a].hess(b, l) * dq[l];
          dD(a, b) = acc;
        }
      Vn.col(c).head(n) = D * dq;
      Vn.col(c).tail(n) = Dinv_t * dp - Dinv_t * dD.transpose() * pn;
    }
    V = Vn;
  }
  q = Point(qn, target);
  p = Covector(pn);
  return true;
}

Vec Structure::embed(const Point& q) const {
  if (def_->atlas.embed) return def_->atlas.embed(q);
  return q.coords;
}

double hamiltonian(const Structure& s, const Point& q, const Covector& p) {
  s.check_point(q);
  s.check_covector(p);
  const Mat X = s.frame(q);
  return 0.5 * (X * p.comps).squaredNorm();
}

void hamiltonian_gradient(const Structure& s, const Point& q, const Covector& p, Vec& dHdp, Vec& dHdq) {
  s.check_point(q);
  s.check_covector(p);
  const FrameJet J = s.jet(q);
  const int n = s.dim(), k = s.rank();
  dHdp = Vec::Zero(n);
  dHdq = Vec::Zero(n);
  for (int i = 0; i < k; ++i) {
    double u = 0.0;
    for (int a = 0; a < n; ++a) u += p.comps[a] * J.value(i, a);
    for (int a = 0; a < n; ++a) dHdp[a] += u * J.value(i, a);
    for (int j = 0; j < n; ++j) {
      double du = 0.0;
      for (int a = 0; a < n; ++a) du += p.comps[a] * J.d1(i, a, j);
      dHdq[j] += u * du;
    }
  }
}

SublaplacianCoeffs sublaplacian_coeffs(const Structure& s, const Point& q) {
  const double F = s.density(q);
  require(F > 0.0, ErrorKind::InvalidStructure, "volume density is not positive at the query point");
  const FrameJet J = s.jet(q);
  const Vec gradF = s.density_gradient(q);
  const int n = s.dim(), k = s.rank();
  SublaplacianCoeffs c{Mat::Zero(n, n), Vec::Zero(n)};
  for (int i = 0; i < k; ++i) {
    double div = 0.0;
    for (int a = 0; a < n; ++a) div += J.d1(i, a, a) + J.value(i, a) * gradF[a] / F;
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) c.second_order(a, b) += J.value(i, a) * J.value(i, b);
    }
    for (int b = 0; b < n; ++b) {
      double drift = 0.0;
      for (int a = 0; a < n; ++a) drift += J.value(i, a) * J.d1(i, b, a);
      c.first_order[b] += drift + div * J.value(i, b);
    }
  }
  return c;
}

Vec bracket(const Structure& s, const Point& q, int i, int j) {
  const FrameJet J = s.jet(q);
  const int n = s.dim();
  Vec out(n);
  for (int b = 0; b < n; ++b) {
    double acc = 0.0;
    for (int a = 0; a < n; ++a) acc += J.value(i, a) * J.d1(j, b, a) - J.value(j, a) * J.d1(i, b, a);
    out[b] = acc;
  }
  return out;
}

int bracket_rank(const Structure& s, const Point& q, int depth) {
  const FrameJet J = s.jet(q);
  const int n = s.dim(), k = s.rank();
  std::vector<Vec> fields;
  for (int i = 0; i < k; ++i) fields.push_back(J.matrix().row(i).transpose());
  if (depth >= 2) {
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) fields.push_back(bracket(s, q, i, j));
  }
  if (depth >= 3) {
    // [X_i, B] with B = [X_j, X_l]; needs dB from second derivatives of the frame.
    for (int j = 0; j < k; ++j)
      for (int l = j + 1; l < k; ++l) {
        Vec B(n);
        Mat dB(n, n);  // dB(b, c) = d_c B^b
        for (int b = 0; b < n; ++b) {
          double acc = 0.0;
          for (int a = 0; a < n; ++a) acc += J.value(j, a) * J.d1(l, b, a) - J.value(l, a) * J.d1(j, b, a);
          B[b] = acc;
          for (int c = 0; c < n; ++c) {
            double d = 0.0;
            for (int a = 0; a < n; ++a)
              d += J.d1(j, a, c) * J.d1(l, b, a) + J.value(j, a) * J.d2(l, b, a, c) -
                   J.d1(l, a, c) * J.d1(j, b, a) - J.value(l, a) * J.d2(j, b, a, c);
            dB(b, c) = d;
          }
        }
        for (int i = 0; i < k; ++i) {
          Vec br(n);
          for (int b = 0; b < n; ++b) {
            double acc = 0.0;
            for (int a = 0; a < n; ++a) acc += J.value(i, a) * dB(b, a) - B[a] * J.d1(i, b, a);
            br[b] = acc;
          }
          fields.push_back(br);
        }
      }
  }
  Mat M(n, static_cast<int>(fields.size()));
  for (int c = 0; c < static_cast<int>(fields.size()); ++c) M.col(c) = fields[c];
  Eigen::JacobiSVD<Mat> svd(M);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] == 0.0) return 0;
  int r = 0;
  for (int c = 0; c < sv.size(); ++c)
    if (sv[c] > 1e-9 * sv[0]) ++r;
  return r;
}

double gauss_curvature(const Structure& s, const Point& q) {
  require(s.dim() == 2 && s.rank() == 2, ErrorKind::InvalidInput, "Gauss curvature needs a 2D Riemannian structure");
  // [X1, X2] = a X1 + b X2 ;  K = X1(b) - X2(a) - a^2 - b^2
  auto coeffs = [&](const Point& x) {
    const Mat X = s.frame(x);
    const Vec br = bracket(s, x, 0, 1);
    const Eigen::Vector2d ab = X.transpose().fullPivLu().solve(br);
    return ab;
  };
  const Mat X = s.frame(q);
  const Eigen::Vector2d ab = coeffs(q);
  const double h = 1e-5;
  auto directional = [&](int field) {
    Point qp = q, qm = q;
    qp.coords += h * X.row(field).transpose();
    qm.coords -= h * X.row(field).transpose();
    return Eigen::Vector2d((coeffs(qp) - coeffs(qm)) / (2 * h));
  };
  const Eigen::Vector2d dX1 = directional(0);
  const Eigen::Vector2d dX2 = directional(1);
  return dX1[1] - dX2[0] - ab[0] * ab[0] - ab[1] * ab[1];
}

std::vector<Point> sample_grid(int n, int per_axis, double extent) {
  std::vector<Point> pts;
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  for (;;) {
    Vec x(n);
    for (int j = 0; j < n; ++j)
      x[j] = per_axis == 1 ? 0.0 : -extent + 2.0 * extent * idx[j] / (per_axis - 1);
    pts.emplace_back(x);
    int j = 0;
    while (j < n && ++idx[j] == per_axis) idx[j++] = 0;
    if (j == n) break;
  }
  return pts;
}

}  // namespace heatlocus
