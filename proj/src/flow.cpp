#include "heatlocus/flow.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>

namespace heatlocus {

namespace odeint = boost::numeric::odeint;
using State = std::vector<double>;

namespace {

/// Right-hand side of Hamilton's equations in a fixed chart, optionally with
/// the variational equations for m tangent vectors appended column-major.
class HamiltonianSystem {
 public:
  HamiltonianSystem(const Structure& s, int chart, int m) : s_(s), chart_(chart), n_(s.dim()), k_(s.rank()), m_(m) {}

  void operator()(const State& z, State& dz, double /*t*/) {
    const int n = n_, k = k_;
    const double* q = z.data();
    const double* p = z.data() + n;
    s_.jet_into(chart_, std::span<const double>(q, n), jet_);
    std::array<double, kMaxVars> u{};
    std::array<std::array<double, kMaxVars>, kMaxVars> du{};  // du[i][j] = d_j u_i
    for (int i = 0; i < k; ++i) {
      double acc = 0.0;
      for (int a = 0; a < n; ++a) acc += p[a] * jet_.value(i, a);
      u[i] = acc;
      for (int j = 0; j < n; ++j) {
        double d = 0.0;
        for (int a = 0; a < n; ++a) d += p[a] * jet_.d1(i, a, j);
        du[i][j] = d;
      }
    }
    for (int a = 0; a < n; ++a) {
      double hp = 0.0, hq = 0.0;
      for (int i = 0; i < k; ++i) {
        hp += u[i] * jet_.value(i, a);
        hq += u[i] * du[i][a];
      }
      dz[a] = hp;
      dz[n + a] = -hq;
    }
    if (m_ == 0) return;
    // Second derivatives of H.
    double Hpp[kMaxVars][kMaxVars], Hpq[kMaxVars][kMaxVars], Hqq[kMaxVars][kMaxVars];
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        double pp = 0.0, pq = 0.0, qq = 0.0;
        for (int i = 0; i < k; ++i) {
          pp += jet_.value(i, a) * jet_.value(i, b);
          pq += jet_.value(i, a) * du[i][b] + u[i] * jet_.d1(i, a, b);
          double d2u = 0.0;
          for (int l = 0; l < n; ++l) d2u += p[l] * jet_.d2(i, l, a, b);
          qq += du[i][a] * du[i][b] + u[i] * d2u;
        }
        Hpp[a][b] = pp;
        Hpq[a][b] = pq;
        Hqq[a][b] = qq;
      }
    }
    const int base = 2 * n;
    for (int c = 0; c < m_; ++c) {
      const double* dq = z.data() + base + c * 2 * n;
      const double* dp = dq + n;
      double* ddq = dz.data() + base + c * 2 * n;
      double* ddp = ddq + n;
      for (int a = 0; a < n; ++a) {
        double vq = 0.0, vp = 0.0;
        for (int b = 0; b < n; ++b) {
          vq += Hpq[a][b] * dq[b] + Hpp[a][b] * dp[b];
          vp -= Hqq[a][b] * dq[b] + Hpq[b][a] * dp[b];
        }
        ddq[a] = vq;
        ddp[a] = vp;
      }
    }
  }

 private:
  const Structure& s_;
  int chart_;
  int n_, k_, m_;
  FrameJet jet_;
};

State pack(const FlowPoint& fp) {
  const int n = fp.q.dim();
  const int m = static_cast<int>(fp.variation.cols());
  State z(static_cast<std::size_t>(2 * n + 2 * n * m));
  for (int a = 0; a < n; ++a) {
    z[a] = fp.q.coords[a];
    z[n + a] = fp.p.comps[a];
  }
  for (int c = 0; c < m; ++c)
    for (int r = 0; r < 2 * n; ++r) z[2 * n + c * 2 * n + r] = fp.variation(r, c);
  return z;
}

FlowPoint unpack(const State& z, int n, int m, int chart, double t) {
  FlowPoint fp;
  fp.q = Point(Eigen::Map<const Vec>(z.data(), n), chart);
  fp.p = Covector(Eigen::Map<const Vec>(z.data() + n, n));
  if (m > 0) fp.variation = Eigen::Map<const Mat>(z.data() + 2 * n, 2 * n, m);
  fp.t = t;
  return fp;
}

FlowState to_state(const Structure& s, const FlowPoint& fp) {
  return FlowState{fp.q, fp.p, fp.t, hamiltonian(s, fp.q, fp.p)};
}

}  // namespace

double GeodesicRecord::max_energy_drift() const {
  double worst = 0.0;
  for (const FlowState& st : samples) worst = std::max(worst, std::abs(st.H - 0.5));
  return worst;
}

FlowPoint integrate(const Structure& s, const FlowPoint& start, double T, const IntegratorControls& ctrl,
                    const std::vector<double>& times, const std::function<void(const FlowPoint&)>& observe,
                    bool every_step) {
  s.check_point(start.q);
  s.check_covector(start.p);
  const int n = s.dim();
  const int m = static_cast<int>(start.variation.cols());
  FlowPoint cur = start;
  if (T <= cur.t) return cur;

  std::vector<FlowState> partial;
  auto failure = [&](const std::string& why) -> IntegrationError {
    return IntegrationError(why + " at t=" + std::to_string(cur.t), std::move(partial));
  };

  Mat* var = m > 0 ? &cur.variation : nullptr;
  s.normalize_chart(cur.q, cur.p, var);

  std::size_t next_obs = 0;
  while (next_obs < times.size() && times[next_obs] <= cur.t) ++next_obs;

  const double span = T - start.t;
  double dt = std::min(ctrl.initial_step, span);
  long steps = 0;
  for (;;) {
    HamiltonianSystem sys(s, cur.q.chart, m);
    auto stepper = odeint::make_dense_output(ctrl.atol, ctrl.rtol, span / 4.0, odeint::runge_kutta_dopri5<State>());
    stepper.initialize(pack(cur), cur.t, dt);
    State buf(stepper.current_state().size());
    bool switched = false;
    while (!switched) {
      std::pair<double, double> iv;
      try {
        iv = stepper.do_step(std::ref(sys));
      } catch (const std::exception& e) {
        throw failure(std::string("step size adjustment failed: ") + e.what());
      }
      if (++steps > ctrl.max_steps) throw failure("step budget exhausted");
      const double step = iv.second - iv.first;
      if (!(step > ctrl.min_step * std::max(1.0, std::abs(iv.first))) && iv.second < T)
        throw failure("step size underflow");
      const State& zc = stepper.current_state();
      if (!std::all_of(zc.begin(), zc.end(), [](double v) { return std::isfinite(v); }))
        throw failure("non-finite state");
      while (next_obs < times.size() && times[next_obs] <= iv.second && times[next_obs] <= T) {
        stepper.calc_state(times[next_obs], buf);
        observe(unpack(buf, n, m, cur.q.chart, times[next_obs]));
        ++next_obs;
      }
      if (iv.second >= T) {
        stepper.calc_state(T, buf);
        cur = unpack(buf, n, m, cur.q.chart, T);
        if (every_step) observe(cur);
        return cur;
      }
      cur = unpack(zc, n, m, cur.q.chart, iv.second);
      if (every_step) {
        observe(cur);
      } else if (partial.size() < 4096) {
        partial.push_back(to_state(s, cur));
      }
      dt = stepper.current_time_step();
      var = m > 0 ? &cur.variation : nullptr;
      switched = s.normalize_chart(cur.q, cur.p, var);
    }
  }
}

Covector normalize_covector(const Structure& s, const Point& q0, const Covector& lam, double* scale) {
  const double H = hamiltonian(s, q0, lam);
  require(lam.comps.cwiseAbs().maxCoeff() > 0.0, ErrorKind::InvalidInput, "zero covector has no geodesic");
  require(H > 0.0, ErrorKind::InvalidInput, "covector annihilates the distribution (H = 0)");
  const double c = std::sqrt(2.0 * H);
  if (scale != nullptr) *scale = c;
  return Covector(lam.comps / c);
}

std::vector<FlowState> flow(const Structure& s, const Point& q0, const Covector& p0, double T,
                            const IntegratorControls& ctrl) {
  require(T > 0.0, ErrorKind::InvalidInput, "flow: T must be positive");
  const double H0 = hamiltonian(s, q0, p0);
  require(H0 > 0.0, ErrorKind::InvalidInput, "flow: H(q0, p0) must be positive");
  std::vector<FlowState> out;
  FlowPoint start{q0, p0, Mat(), 0.0};
  out.push_back(to_state(s, start));
  try {
    integrate(s, start, T, ctrl, {}, [&](const FlowPoint& fp) { out.push_back(to_state(s, fp)); }, true);
  } catch (const IntegrationError& e) {
    std::vector<FlowState> partial = out;
    throw IntegrationError(e.what(), std::move(partial));
  }
  return out;
}

Point exp_map(const Structure& s, const Point& q0, const Covector& lam, double t, const IntegratorControls& ctrl) {
  s.check_point(q0);
  s.check_covector(lam);
  if (t == 0.0) return q0;
  double c = 1.0;
  Covector unit = normalize_covector(s, q0, lam, &c);
  double that = t * c;
  if (that < 0.0) {
    unit.comps = -unit.comps;
    that = -that;
  }
  FlowPoint start{q0, unit, Mat(), 0.0};
  return integrate(s, start, that, ctrl, {}, [](const FlowPoint&) {}).q;
}

Mat d_exp(const Structure& s, const Point& q0, const Covector& lam, const IntegratorControls& ctrl, Point* endpoint) {
  s.check_point(q0);
  s.check_covector(lam);
  const int n = s.dim();
  double c = 1.0;
  const Covector unit = normalize_covector(s, q0, lam, &c);
  Mat V = Mat::Zero(2 * n, n);
  V.bottomRows(n) = Mat::Identity(n, n);
  // Integrate the unit covector for time c; d q(c)/d unit = c * DE(lam).
  FlowPoint start{q0, unit, V, 0.0};
  const FlowPoint end = integrate(s, start, c, ctrl, {}, [](const FlowPoint&) {});
  if (endpoint != nullptr) *endpoint = end.q;
  return end.variation.topRows(n) / c;
}

Mat d_exp_fd(const Structure& s, const Point& q0, const Covector& lam, double step, const IntegratorControls& ctrl) {
  const int n = s.dim();
  const Point base = exp_map(s, q0, lam, 1.0, ctrl);
  Mat J(n, n);
  for (int j = 0; j < n; ++j) {
    const double h = step * std::max(1.0, std::abs(lam.comps[j]));
    Covector lp = lam, lm = lam;
    lp.comps[j] += h;
    lm.comps[j] -= h;
    const Point ep = s.to_chart(exp_map(s, q0, lp, 1.0, ctrl), base.chart);
    const Point em = s.to_chart(exp_map(s, q0, lm, 1.0, ctrl), base.chart);
    J.col(j) = (ep.coords - em.coords) / (2 * h);
  }
  return J;
}

double hadamard_ratio(const Mat& M) {
  double scale = 1.0;
  for (int c = 0; c < M.cols(); ++c) {
    const double nc = M.col(c).norm();
    if (nc == 0.0) return 0.0;
    scale *= nc;
  }
  return M.determinant() / scale;
}

std::optional<double> first_conjugate_time(const Structure& s, const Point& q0, const Covector& lam0, double t_max,
                                           const ConjugateControls& ctrl) {
  require(t_max > 0.0, ErrorKind::InvalidInput, "first_conjugate_time: t_max must be positive");
  require(ctrl.grid >= 2, ErrorKind::InvalidInput, "first_conjugate_time: grid needs at least 2 points");
  const int n = s.dim();
  double c = 1.0;
  const Covector unit = normalize_covector(s, q0, lam0, &c);
  const double T = t_max * c;

  Mat V = Mat::Zero(2 * n, n);
  V.bottomRows(n) = Mat::Identity(n, n);
  std::vector<double> times(static_cast<std::size_t>(ctrl.grid));
  for (int i = 0; i < ctrl.grid; ++i) times[i] = T * (i + 1) / ctrl.grid;

  struct Sample {
    FlowPoint fp;
    double ratio;
  };
  std::optional<Sample> prev;
  std::optional<std::pair<FlowPoint, double>> bracket_lo;  // state at the left end, right time
  class Found {};
  try {
    integrate(s, FlowPoint{q0, unit, V, 0.0}, T, ctrl.integrator, times, [&](const FlowPoint& fp) {
      const double r = hadamard_ratio(fp.variation.topRows(n));
      if (prev && prev->ratio != 0.0 && r != 0.0 && (prev->ratio > 0.0) != (r > 0.0)) {
        bracket_lo = std::make_pair(prev->fp, fp.t);
        throw Found{};
      }
      if (r != 0.0 || !prev) prev = Sample{fp, r};
      if (r == 0.0 && prev && prev->fp.t != fp.t) {
        // exact zero on the grid
        bracket_lo = std::make_pair(fp, fp.t);
        throw Found{};
      }
    });
  } catch (const Found&) {
  }
  if (!bracket_lo) return std::nullopt;
  const FlowPoint lo = bracket_lo->first;
  const double hi = bracket_lo->second;
  if (lo.t == hi) return hi / c;

  auto det_at = [&](double t) {
    if (t <= lo.t) return hadamard_ratio(lo.variation.topRows(n));
    const FlowPoint fp = integrate(s, lo, t, ctrl.integrator, {}, [](const FlowPoint&) {});
    return hadamard_ratio(fp.variation.topRows(n));
  };
  const double f_lo = det_at(lo.t);
  const double f_hi = det_at(hi);
  // Re-integration can move a root sitting on the grid endpoint by rounding.
  if (f_hi == 0.0 || (f_lo > 0.0) == (f_hi > 0.0)) return hi / c;
  const double tol = ctrl.tol * c;
  auto tol_fn = [tol](double a, double b) { return std::abs(b - a) <= tol; };
  std::uintmax_t iters = 200;
  const auto root = boost::math::tools::toms748_solve(det_at, lo.t, hi, f_lo, f_hi, tol_fn, iters);
  return 0.5 * (root.first + root.second) / c;
}

GeodesicRecord geodesic(const Structure& s, const Point& q0, const Covector& lam0, double T,
                        const ConjugateControls& ctrl) {
  require(T > 0.0, ErrorKind::InvalidInput, "geodesic: T must be positive");
  const int n = s.dim();
  GeodesicRecord g;
  g.q0 = q0;
  g.lambda0 = normalize_covector(s, q0, lam0);
  g.length = T;
  Mat V = Mat::Zero(2 * n, n);
  V.bottomRows(n) = Mat::Identity(n, n);
  FlowPoint start{q0, g.lambda0, V, 0.0};
  g.samples.push_back(to_state(s, start));
  FlowPoint end;
  try {
    end = integrate(s, start, T, ctrl.integrator, {}, [&](const FlowPoint& fp) { g.samples.push_back(to_state(s, fp)); },
                    true);
  } catch (const IntegrationError& e) {
    throw IntegrationError(e.what(), g.samples);
  }
  g.end_jacobian = end.variation.topRows(n) / T;
  g.t_conj = first_conjugate_time(s, q0, g.lambda0, T, ctrl);
  return g;
}

}  // namespace heatlocus
