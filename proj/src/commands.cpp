#include "heatlocus/commands.hpp"

#include <cmath>
#include <sstream>

#include "heatlocus/distance.hpp"
#include "heatlocus/expression.hpp"
#include "heatlocus/flow.hpp"
#include "heatlocus/heat.hpp"
#include "heatlocus/io.hpp"
#include "heatlocus/jet.hpp"
#include "heatlocus/laplace.hpp"
#include "heatlocus/singularity.hpp"

namespace heatlocus {

int exit_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput:
    case ErrorKind::Catalog:
    case ErrorKind::InvalidStructure:
    case ErrorKind::Chart:
    case ErrorKind::Parse:
    case ErrorKind::Unsupported:
      return kExitInvalidConfig;
    case ErrorKind::ContinuumFamily:
      return kExitContinuum;
    default:
      return kExitNumerical;
  }
}

std::vector<std::string> command_names() {
  return {"geodesic", "distance", "cutlocus", "classify", "predict", "laplace-check"};
}

namespace {

using json = nlohmann::json;

constexpr double kFitTolerance = 0.02;

json optional_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

std::string optional_cell(const std::optional<double>& x) { return x ? format_real(*x) : ""; }

/// Command parameters live under the command name ("laplace-check" uses "laplace_check").
const json& section(const json& config, const std::string& command) {
  std::string key = command;
  for (char& c : key)
    if (c == '-') c = '_';
  static const json empty = json::object();
  if (!config.contains(key)) return empty;
  require(config.at(key).is_object(), ErrorKind::InvalidInput, "config: '" + key + "' must be an object");
  return config.at(key);
}

std::uint64_t seed_of(const json& config, const RunOptions& options) {
  if (options.seed) return *options.seed;
  if (!config.contains("seed")) return 0;
  require(config.at("seed").is_number_unsigned(), ErrorKind::InvalidInput, "config: 'seed' must be a nonnegative integer");
  return config.at("seed").get<std::uint64_t>();
}

Structure load_structure(const json& config) {
  const json& sc = cfg::member(config, "structure", "");
  return structure_from_config(sc);
}

bool is_fixture(const json& config) {
  return config.contains("structure") && config.at("structure").is_object() && config.at("structure").contains("fixture");
}

ContactFixture load_fixture(const json& config) {
  const json& fx = cfg::member(config.at("structure"), "fixture", "structure");
  require(fx.is_object(), ErrorKind::InvalidInput, "config: 'structure.fixture' must be an object");
  const int eta = cfg::integer(fx, "eta", "structure.fixture");
  require(eta >= 3, ErrorKind::InvalidInput, "config: 'structure.fixture.eta' must be >= 3");
  return make_fixture(eta, cfg::real_or(fx, "sigma1", 1.0, "structure.fixture"),
                      cfg::real_or(fx, "sigma3", 0.0, "structure.fixture"));
}

ShootingControls shooting_controls(const json& params, std::uint64_t seed, const std::string& path) {
  ShootingControls sc;
  sc.seed = seed;
  sc.samples = cfg::integer_or(params, "samples", sc.samples, path);
  sc.refine = cfg::integer_or(params, "refine", sc.refine, path);
  sc.max_length = cfg::real_or(params, "max_length", sc.max_length, path);
  return sc;
}

std::vector<double> t_grid_of(const json& params, const std::string& path, int default_points) {
  if (params.contains("t_grid")) return cfg::reals(params.at("t_grid"), path + ".t_grid");
  std::vector<double> t;
  for (int i = 0; i < default_points; ++i) t.push_back(std::pow(10.0, -5.0 + 3.0 * i / (default_points - 1)));
  return t;
}

// ---------------------------------------------------------------- geodesic

CommandOutput cmd_geodesic(const json& config, const RunOptions& options) {
  const Structure s = load_structure(config);
  const json& p = section(config, "geodesic");
  const Point q0 = cfg::point(cfg::member(p, "q0", "geodesic"), "geodesic.q0");
  const Vec lam = cfg::vector(cfg::member(p, "lambda", "geodesic"), "geodesic.lambda");
  const double T = cfg::real(p, "T", "geodesic");
  require(T > 0.0, ErrorKind::InvalidInput, "config: 'geodesic.T' must be positive");
  s.check_point(q0);
  s.check_covector(Covector(lam));
  const Covector unit = normalize_covector(s, q0, Covector(lam));
  const GeodesicRecord g = geodesic(s, q0, unit, T);
  const bool want_cut = !p.contains("cut") || p.at("cut").get<bool>();
  std::optional<double> t_cut;
  if (want_cut) t_cut = cut_time(s, q0, unit, T, shooting_controls(p, seed_of(config, options), "geodesic")).t_cut;

  const int n = s.dim();
  std::vector<std::string> header{"t", "chart"};
  for (int i = 1; i <= n; ++i) header.push_back("q" + std::to_string(i));
  for (int i = 1; i <= n; ++i) header.push_back("p" + std::to_string(i));
  header.push_back("H");
  CsvTable table(header);
  for (const FlowState& st : g.samples) {
    std::vector<std::string> row{format_real(st.t), std::to_string(st.q.chart)};
    for (int i = 0; i < n; ++i) row.push_back(format_real(st.q.coords[i]));
    for (int i = 0; i < n; ++i) row.push_back(format_real(st.p.comps[i]));
    row.push_back(format_real(st.H));
    table.add_raw_row(row);
  }
  CommandOutput out;
  out.format = "csv";
  out.primary = table.str();
  out.data = {{"structure", s.name()},
              {"T", T},
              {"lambda0", to_json(unit.comps)},
              {"t_conj", optional_json(g.t_conj)},
              {"t_cut", want_cut ? optional_json(t_cut) : json(nullptr)},
              {"cut_searched", want_cut},
              {"energy_drift", g.max_energy_drift()},
              {"samples", g.samples.size()}};
  out.sidecar = dump_json(out.data);
  return out;
}

// ---------------------------------------------------------------- distance

json geodesic_json(const Structure& s, const GeodesicRecord& g, const ShootingRoot& root) {
  const Point mid = exp_map(s, g.q0, g.lambda0, 0.5 * g.length);
  return {{"lambda0", to_json(g.lambda0.comps)},
          {"mu", to_json(root.mu.comps)},
          {"length", g.length},
          {"t_conj", optional_json(g.t_conj)},
          {"rank_deficit", root.rank_deficit},
          {"endpoint", to_json(g.end().q)},
          {"midpoint", to_json(mid)}};
}

CommandOutput cmd_distance(const json& config, const RunOptions& options) {
  const Structure s = load_structure(config);
  const json& p = section(config, "distance");
  const Point q1 = cfg::point(cfg::member(p, "q1", "distance"), "distance.q1");
  const Point q2 = cfg::point(cfg::member(p, "q2", "distance"), "distance.q2");
  const DistanceResult r = distance(s, q1, q2, shooting_controls(p, seed_of(config, options), "distance"));
  json mins = json::array();
  for (std::size_t i = 0; i < r.minimizers.size(); ++i) mins.push_back(geodesic_json(s, r.minimizers[i], r.roots[i]));
  CommandOutput out;
  out.format = "json";
  out.data = {{"structure", s.name()},       {"q1", to_json(q1)},          {"q2", to_json(q2)},
              {"d", r.d},                    {"minimizers", mins},         {"non_discrete", r.non_discrete},
              {"roots_found", r.roots_found}, {"candidates_refined", r.candidates_refined}};
  out.primary = dump_json(out.data);
  return out;
}

// ---------------------------------------------------------------- cutlocus

CommandOutput cmd_cutlocus(const json& config, const RunOptions& options) {
  const Structure s = load_structure(config);
  const json& p = section(config, "cutlocus");
  const Point q0 = cfg::point(cfg::member(p, "q0", "cutlocus"), "cutlocus.q0");
  const int count = cfg::integer_or(p, "directions", 32, "cutlocus");
  const double t_max = cfg::real(p, "t_max", "cutlocus");
  require(count >= 1, ErrorKind::InvalidInput, "config: 'cutlocus.directions' must be positive");
  require(t_max > 0.0, ErrorKind::InvalidInput, "config: 'cutlocus.t_max' must be positive");
  s.check_point(q0);
  const std::uint64_t seed = seed_of(config, options);
  const int n = s.dim();
  std::vector<Covector> lams;
  for (const Vec& d : sphere_directions(n, count, seed)) lams.emplace_back(d);
  const std::vector<CutLocusSample> rows = sample_cut_locus(s, q0, lams, t_max, shooting_controls(p, seed, "cutlocus"));

  std::vector<std::string> header;
  for (int i = 1; i < n; ++i) header.push_back("theta" + std::to_string(i));
  for (int i = 1; i <= n; ++i) header.push_back("lambda" + std::to_string(i));
  header.insert(header.end(), {"t_cut", "t_conj", "chart"});
  for (int i = 1; i <= n; ++i) header.push_back("x" + std::to_string(i));
  CsvTable table(header);
  int with_cut = 0;
  for (const CutLocusSample& r : rows) {
    std::vector<std::string> row;
    for (double th : r.theta) row.push_back(format_real(th));
    for (int i = 0; i < n; ++i) row.push_back(format_real(r.lambda0.comps[i]));
    row.push_back(optional_cell(r.t_cut));
    row.push_back(optional_cell(r.t_conj));
    row.push_back(r.endpoint ? std::to_string(r.endpoint->chart) : "");
    for (int i = 0; i < n; ++i) row.push_back(r.endpoint ? format_real(r.endpoint->coords[i]) : "");
    table.add_raw_row(row);
    with_cut += r.t_cut ? 1 : 0;
  }
  CommandOutput out;
  out.format = "csv";
  out.primary = table.str();
  out.data = {{"structure", s.name()}, {"q0", to_json(q0)},      {"directions", count},
              {"t_max", t_max},        {"seed", seed},           {"with_cut_point", with_cut}};
  out.sidecar = dump_json(out.data);
  return out;
}

// ---------------------------------------------------------------- classify

/// One classified minimizer, with what predict needs.
struct ClassifiedMinimizer {
  json report;
  GeodesicClassification cls;
  std::optional<HingedProfile> profile;
  std::optional<GeodesicRecord> geodesic;
};

struct Classification {
  int n = 0;
  bool constants_available = false;
  bool continuum = false;
  json report;
  std::vector<ClassifiedMinimizer> minimizers;
  std::optional<ContactFixture> fixture;
  std::optional<Structure> structure;
};

json profile_json(const HingedProfile& p) {
  json j = {{"z0", to_json(p.z0)},
            {"h_min", p.h_min},
            {"hessian_eigenvalues", to_json(p.eigenvalues)},
            {"r", p.r},
            {"m", p.m ? json(*p.m) : json(nullptr)},
            {"detected_order", p.detected_order ? json(*p.detected_order) : json(nullptr)}};
  if (!p.order_slopes.empty()) j["order_slopes"] = p.order_slopes;
  return j;
}

/// m from the hinged-energy profile: 1 when nondegenerate, the detected type when r = 1.
int type_from_profile(const HingedProfile& p) {
  if (p.r == 0) return 1;
  require(p.r == 1, ErrorKind::Inconsistency,
          "minimizer with a " + std::to_string(p.r) + "-dimensional degenerate midpoint Hessian (no prediction for r >= 2)");
  require(p.m.has_value(), ErrorKind::Inconsistency, "order of the degenerate midpoint direction was not detected");
  return *p.m;
}

/// Density of the normal-form coordinates u (h - h_min = sum u_i^2 + u_n^(m+1)) times `density`.
double normal_form_density(const HingedProfile& p, double density) {
  double F = density;
  for (Eigen::Index i = p.r; i < p.eigenvalues.size(); ++i) F *= std::sqrt(2.0 / p.eigenvalues[i]);
  if (p.r == 1 && p.detected_order && !p.order_s.empty()) {
    const double a = p.order_phi.back() / std::pow(p.order_s.back(), *p.detected_order);
    F *= std::pow(a, -1.0 / *p.detected_order);
  }
  return F;
}

/// Exponential map from q1 as a map of covector components near the shooting root.
SmoothMapSample exp_map_sample(const Structure& s, const Point& q1, const ShootingRoot& root) {
  SmoothMapSample m;
  m.name = "exp";
  m.n = s.dim();
  m.basepoint = root.mu.comps;
  const int chart = root.endpoint.chart;
  m.f = [s, q1, chart](const Vec& mu) { return s.to_chart(exp_map(s, q1, Covector(mu), 1.0), chart).coords; };
  m.fd_radius = 0.05 * std::max(1.0, root.mu.comps.norm());
  return m;
}

Classification classify_config(const json& config, const RunOptions& options) {
  Classification c;
  if (is_fixture(config)) {
    const ContactFixture fx = load_fixture(config);
    const HingedProfile prof = profile_of_function(fx.h, fx.z0);
    const SingularityReport rep = classify(fx.exp_sample);
    ClassifiedMinimizer cm;
    cm.cls.m = type_from_profile(prof);
    cm.cls.F_zi = normal_form_density(prof, 1.0);
    cm.cls.c0_product = 1.0;  // flat neighbourhood: c0 = 1 on both sides
    cm.report = {{"profile", profile_json(prof)}, {"singularity", to_json(rep)}, {"m", cm.cls.m}};
    cm.profile = prof;
    c.n = 2;
    c.constants_available = true;
    c.fixture = fx;
    c.minimizers.push_back(std::move(cm));
    c.report = {{"structure", "fixture"},
                {"eta", fx.eta},
                {"n", 2},
                {"non_discrete", false},
                {"minimizers", json::array({c.minimizers.front().report})}};
    return c;
  }

  const Structure s = load_structure(config);
  c.structure = s;
  c.n = s.dim();
  c.constants_available = s.is_riemannian();
  const json& p = section(config, "classify");
  const Point q1 = cfg::point(cfg::member(p, "q1", "classify"), "classify.q1");
  const Point q2 = cfg::point(cfg::member(p, "q2", "classify"), "classify.q2");
  const ShootingControls sc = shooting_controls(p, seed_of(config, options), "classify");
  const DistanceResult r = distance(s, q1, q2, sc);
  c.report = {{"structure", s.name()}, {"n", c.n}, {"q1", to_json(q1)}, {"q2", to_json(q2)},
              {"d", r.d},             {"non_discrete", r.non_discrete}};
  if (r.non_discrete) {
    c.continuum = true;
    c.report["refused"] = true;
    c.report["minimizer_count"] = r.minimizers.size();
    c.report["reason"] =
        "the minimizing geodesics appear to form a continuum (" + std::to_string(r.minimizers.size()) +
        " distinct minimizers, all conjugate); the finitely-many-midpoints hypothesis fails and no "
        "classification or prediction is emitted";
    return c;
  }
  ProfileControls pc;
  pc.shooting = sc;
  json mins = json::array();
  for (std::size_t i = 0; i < r.minimizers.size(); ++i) {
    const GeodesicRecord& g = r.minimizers[i];
    ClassifiedMinimizer cm;
    const HingedProfile prof = midpoint_profile(s, q1, q2, g, pc);
    const SingularityReport rep = classify(exp_map_sample(s, q1, r.roots[i]));
    cm.cls.m = type_from_profile(prof);
    if (c.constants_available) {
      cm.cls.F_zi = normal_form_density(prof, s.density(prof.z0));
      cm.cls.c0_product = ben_arous_c0(s, q1, prof.z0, sc) * ben_arous_c0(s, q2, prof.z0, sc);
    }
    cm.report = geodesic_json(s, g, r.roots[i]);
    cm.report["profile"] = profile_json(prof);
    cm.report["h_min_minus_quarter_d2"] = prof.h_min - 0.25 * r.d * r.d;
    cm.report["singularity"] = to_json(rep);
    cm.report["m"] = cm.cls.m;
    cm.profile = prof;
    cm.geodesic = g;
    mins.push_back(cm.report);
    c.minimizers.push_back(std::move(cm));
  }
  c.report["minimizers"] = mins;
  return c;
}

CommandOutput continuum_refusal(const json& report) {
  CommandOutput out;
  out.format = "json";
  out.status = kExitContinuum;
  out.data = report;
  out.primary = dump_json(report);
  return out;
}

CommandOutput cmd_classify(const json& config, const RunOptions& options) {
  const Classification c = classify_config(config, options);
  if (c.continuum) return continuum_refusal(c.report);
  CommandOutput out;
  out.format = "json";
  out.data = c.report;
  out.primary = dump_json(out.data);
  return out;
}

// ---------------------------------------------------------------- predict

CommandOutput cmd_predict(const json& config, const RunOptions& options) {
  const json& p = section(config, "predict");
  const bool explicit_input = p.contains("classifications");
  Classification c;
  if (explicit_input) {
    c.n = cfg::integer(p, "n", "predict");
    const json& list = p.at("classifications");
    require(list.is_array(), ErrorKind::InvalidInput, "config: 'predict.classifications' must be an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = "predict.classifications[" + std::to_string(i) + "]";
      ClassifiedMinimizer cm;
      cm.cls.m = cfg::integer(list[i], "m", path);
      cm.cls.F_zi = cfg::real_or(list[i], "F", 1.0, path);
      cm.cls.c0_product = cfg::real_or(list[i], "c0", 1.0, path);
      c.minimizers.push_back(std::move(cm));
    }
    c.constants_available = !p.contains("constants") || p.at("constants").get<bool>();
  } else {
    c = classify_config(config, options);
    if (c.continuum) return continuum_refusal(c.report);
  }
  std::vector<GeodesicClassification> cls;
  for (const ClassifiedMinimizer& m : c.minimizers) cls.push_back(m.cls);
  const AsymptoticPrediction pred = predict(c.n, cls, c.constants_available);

  json report = to_json(pred);
  int status = kExitOk;
  if (options.verify) {
    const auto one = [](const Vec&) { return 1.0; };
    int ell = 1;
    for (const auto& x : cls) ell = std::max(ell, x.m);
    ExponentFit fit;
    std::string method;
    if (c.fixture) {
      fit = midpoint_integral_exponent(c.fixture->h, c.fixture->h_min, c.fixture->z0, one, t_grid_of(p, "predict", 7));
      method = "fixture hinged energy, adaptive quadrature";
    } else if (c.structure) {
      const ClassifiedMinimizer* top = nullptr;
      for (const auto& m : c.minimizers)
        if (m.cls.m == ell && !top) top = &m;
      fit = midpoint_integral_exponent(*c.structure, *top->profile, *top->geodesic, one, t_grid_of(p, "predict", 6));
      method = "hinged energy by shooting, Gauss-Legendre along the midpoint valley";
    } else {
      // The model profile is separable, so its integral is a product of one-dimensional oracles.
      const int n = c.n;
      const Box unit = Box::symmetric(1, 0.5);
      const std::vector<double> grid = t_grid_of(p, "predict", 7);
      validate_t_grid(grid);
      std::vector<double> values;
      for (double t : grid) {
        const double quad = quadrature_oracle(one, [](const Vec& x) { return x[0] * x[0]; }, unit, t);
        const double top = quadrature_oracle(one, [ell](const Vec& x) { return std::pow(x[0], ell + 1); }, unit, t);
        values.push_back(std::pow(2.0 / t, n) * std::pow(quad, n - 1) * top);
      }
      fit = fit_power_law(grid, values);
      method = "model profile sum x_i^2 + x_n^(m+1), product of one-dimensional quadratures";
    }
    const bool matches = std::abs(fit.slope + pred.exponent.value()) <= kFitTolerance;
    report["fit"] = to_json(fit);
    report["fit"]["method"] = method;
    report["fit"]["tolerance"] = kFitTolerance;
    report["fit"]["matches_prediction"] = matches;
    if (!matches) status = kExitNumerical;
  }
  if (!explicit_input) report["classification"] = c.report;
  CommandOutput out;
  out.format = "json";
  out.status = status;
  out.data = report;
  out.primary = dump_json(report);
  return out;
}

// ---------------------------------------------------------------- laplace-check

CommandOutput cmd_laplace_check(const json& config, const RunOptions&) {
  const json& p = section(config, "laplace-check");
  const std::string path = "laplace_check";
  DiagonalPhase phase;
  phase.g0 = cfg::real_or(p, "g0", 0.0, path);
  const json& ms = cfg::member(p, "m_list", path);
  require(ms.is_array(), ErrorKind::InvalidInput, "config: 'laplace_check.m_list' must be an array of integers");
  for (const auto& m : ms) {
    require(m.is_number_integer(), ErrorKind::InvalidInput, "config: 'laplace_check.m_list' must be an array of integers");
    phase.m_list.push_back(m.get<int>());
  }
  phase.validate();
  const int n = phase.n();
  const std::string ftext = p.contains("f") ? p.at("f").get<std::string>() : std::string("1");
  const Expression f = Expression::parse(ftext);
  require(f.max_variable() <= n, ErrorKind::InvalidInput, "config: 'laplace_check.f' uses variables beyond x" + std::to_string(n));

  std::vector<Jet2> x0;
  for (int i = 0; i < n; ++i) x0.push_back(Jet2::variable(0.0, i, n));
  const Jet2 fj = f.eval<Jet2>(std::span<const Jet2>(x0));
  std::vector<double> d2;
  for (int i = phase.ell_index() - 1; i < n; ++i) d2.push_back(fj.hess(i, i));

  Box box;
  if (p.contains("box") && p.at("box").is_object()) {
    box.lo = cfg::vector(cfg::member(p.at("box"), "lo", path + ".box"), path + ".box.lo");
    box.hi = cfg::vector(cfg::member(p.at("box"), "hi", path + ".box"), path + ".box.hi");
  } else {
    box = Box::symmetric(n, cfg::real_or(p, "box", 1.0, path));
  }
  require(box.lo.size() == n && box.hi.size() == n, ErrorKind::InvalidInput, "config: 'laplace_check.box' has the wrong dimension");
  QuadratureControls qc;
  qc.rtol = cfg::real_or(p, "rtol", qc.rtol, path);
  const std::vector<double> grid = t_grid_of(p, path, 7);
  const double t_ref = cfg::real_or(p, "t_ref", 1e-4, path);

  const auto fv = [&f](const Vec& x) { return f(std::span<const double>(x.data(), static_cast<std::size_t>(x.size()))); };
  const LaplaceCheckResult r = laplace_check(fv, fj.value(), d2, phase, grid, box, t_ref, qc);

  CsvTable table({"t", "oracle", "expansion", "scaled_residual", "relative_error"});
  for (const LaplaceCheckRow& row : r.rows)
    table.add_row({row.t, row.oracle, row.expansion, row.residual,
                   row.oracle != 0.0 ? std::abs(row.oracle - row.expansion) / std::abs(row.oracle) : 0.0});
  const ExpansionResult& e = r.expansion;
  CommandOutput out;
  out.format = "csv";
  out.primary = table.str();
  out.data = {{"f", ftext},
              {"m_list", phase.m_list},
              {"g0", phase.g0},
              {"power", e.power.str()},
              {"c1_power", e.c1_power.str()},
              {"c0_term", e.c0_term},
              {"c1_term", e.c1_term},
              {"t_ref", t_ref},
              {"c0_estimate", r.c0_estimate},
              {"c0_relative_error", r.c0_relative_error},
              {"residual_exponent", optional_json(r.residual_exponent)},
              {"residual_r2", r.residual_exponent ? json(r.residual_r2) : json(nullptr)},
              {"required_residual_exponent", r.required_exponent},
              {"residual_ok", r.residual_ok}};
  out.sidecar = dump_json(out.data);
  return out;
}

}  // namespace

CommandOutput run_command(const std::string& name, const nlohmann::json& config, const RunOptions& options) {
  require(config.is_object(), ErrorKind::InvalidInput, "config must be a JSON object");
  try {
    if (name == "geodesic") return cmd_geodesic(config, options);
    if (name == "distance") return cmd_distance(config, options);
    if (name == "cutlocus") return cmd_cutlocus(config, options);
    if (name == "classify") return cmd_classify(config, options);
    if (name == "predict") return cmd_predict(config, options);
    if (name == "laplace-check") return cmd_laplace_check(config, options);
  } catch (const nlohmann::json::exception& e) {
    // Type mismatches inside config values reached through nlohmann accessors.
    fail(ErrorKind::InvalidInput, std::string("config: ") + e.what());
  }
  fail(ErrorKind::InvalidInput, "unknown command '" + name + "'");
}

}  // namespace heatlocus
