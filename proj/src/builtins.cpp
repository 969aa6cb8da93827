#include <cmath>
#include <string>

#include "heatlocus/expression.hpp"
#include "heatlocus/geometry.hpp"

namespace heatlocus {

namespace {

template <class F>
void set_frame(StructureDefinition& d, F f) {
  d.frame = [f](int chart, std::span<const double> q, std::span<double> out) { f(chart, q, out); };
  d.frame_jet = [f](int chart, std::span<const Jet2> q, std::span<Jet2> out) { f(chart, q, out); };
}

template <class F>
void set_density(StructureDefinition& d, F f) {
  d.density = [f](int chart, std::span<const double> q) { return f(chart, q); };
  d.density_jet = [f](int chart, std::span<const Jet2> q) { return f(chart, q); };
}

double param_double(const nlohmann::json& p, const char* key, double fallback) {
  if (!p.contains(key)) return fallback;
  require(p.at(key).is_number(), ErrorKind::InvalidInput, std::string("parameter '") + key + "' must be a number");
  return p.at(key).get<double>();
}

int param_int(const nlohmann::json& p, const char* key, int fallback) {
  if (!p.contains(key)) return fallback;
  require(p.at(key).is_number_integer(), ErrorKind::InvalidInput,
          std::string("parameter '") + key + "' must be an integer");
  return p.at(key).get<int>();
}

Structure make_euclidean(const nlohmann::json& params) {
  const int n = param_int(params, "n", 2);
  require(n >= 1 && n <= kMaxVars, ErrorKind::InvalidInput, "euclidean: n must be in 1.." + std::to_string(kMaxVars));
  StructureDefinition d;
  d.name = "euclidean";
  d.kind = StructureKind::Riemannian;
  d.n = d.k = n;
  d.params = {{"n", n}};
  set_frame(d, [n](int, auto, auto out) {
    using S = typename decltype(out)::value_type;
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < n; ++a) out[i * n + a] = S(i == a ? 1.0 : 0.0);
  });
  set_density(d, [](int, auto q) {
    using S = typename std::remove_cv_t<typename decltype(q)::value_type>;
    return S(1.0);
  });
  return Structure(std::move(d));
}

// Two stereographic charts; chart 1 is the projection from the opposite pole
// composed with the reflection x1 -> -x1, so the transition y = R x / |x|^2
// preserves orientation and is its own inverse.
Structure make_round_sphere(const nlohmann::json& params) {
  const double R = param_double(params, "radius", 1.0);
  require(R > 0.0 && std::isfinite(R), ErrorKind::InvalidInput, "round_sphere: radius must be positive");
  StructureDefinition d;
  d.name = "round_sphere";
  d.kind = StructureKind::Riemannian;
  d.n = d.k = 2;
  d.params = {{"radius", R}};
  set_frame(d, [R](int, auto q, auto out) {
    using S = typename decltype(out)::value_type;
    const S c = (S(1.0) + q[0] * q[0] + q[1] * q[1]) / S(2.0 * R);
    out[0] = c;
    out[1] = S(0.0);
    out[2] = S(0.0);
    out[3] = c;
  });
  set_density(d, [R](int, auto q) {
    using S = typename std::remove_cv_t<typename decltype(q)::value_type>;
    const S c = S(2.0 * R) / (S(1.0) + q[0] * q[0] + q[1] * q[1]);
    return c * c;
  });
  d.atlas.count = 2;
  d.atlas.preferred = [](int chart, const Vec& q) { return q.squaredNorm() > 4.0 ? 1 - chart : chart; };
  auto transition = [](int, int, auto q, auto out) {
    using S = typename decltype(out)::value_type;
    const S r2 = q[0] * q[0] + q[1] * q[1];
    out[0] = -q[0] / r2;
    out[1] = q[1] / r2;
  };
  d.atlas.map_d = [transition](int a, int b, std::span<const double> q, std::span<double> out) {
    transition(a, b, q, out);
  };
  d.atlas.map_j = [transition](int a, int b, std::span<const Jet2> q, std::span<Jet2> out) {
    transition(a, b, q, out);
  };
  d.atlas.embed = [R](const Point& p) {
    const Vec& x = p.coords;
    const double r2 = x.squaredNorm();
    Vec e(3);
    if (p.chart == 1)
      e << -2 * x[0], 2 * x[1], 1.0 - r2;  // chart-0 formula composed with y -> Ry/|y|^2
    else
      e << 2 * x[0], 2 * x[1], r2 - 1.0;
    return Vec(R * e / (r2 + 1.0));
  };
  return Structure(std::move(d));
}

Structure make_revolution_surface(const nlohmann::json& params) {
  const std::string text = params.value("profile", std::string("2 + cos(x1)"));
  const Expression profile = Expression::parse(text);
  require(profile.max_variable() <= 1, ErrorKind::InvalidInput, "revolution_surface: profile may only use x1");
  StructureDefinition d;
  d.name = "revolution_surface";
  d.kind = StructureKind::Riemannian;
  d.n = d.k = 2;
  d.params = {{"profile", text}};
  set_frame(d, [profile](int, auto q, auto out) {
    using S = typename decltype(out)::value_type;
    const S phi = profile.template eval<S>(q.subspan(0, 1));
    out[0] = S(1.0);
    out[1] = S(0.0);
    out[2] = S(0.0);
    out[3] = S(1.0) / phi;
  });
  set_density(d, [profile](int, auto q) {
    using S = typename std::remove_cv_t<typename decltype(q)::value_type>;
    return profile.template eval<S>(q.subspan(0, 1));
  });
  return Structure(std::move(d));
}

Structure make_heisenberg() {
  StructureDefinition d;
  d.name = "heisenberg";
  d.kind = StructureKind::Contact3D;
  d.n = 3;
  d.k = 2;
  // X1 = dx - (y/2) dz, X2 = dy + (x/2) dz
  set_frame(d, [](int, auto q, auto out) {
    using S = typename decltype(out)::value_type;
    out[0] = S(1.0);
    out[1] = S(0.0);
    out[2] = S(-0.5) * q[1];
    out[3] = S(0.0);
    out[4] = S(1.0);
    out[5] = S(0.5) * q[0];
  });
  return Structure(std::move(d));
}

Structure make_contact3d_perturbed(const nlohmann::json& params) {
  const double eps = param_double(params, "epsilon", param_double(params, "eps", 0.1));
  require(std::isfinite(eps), ErrorKind::InvalidInput, "contact3d_perturbed: epsilon must be finite");
  StructureDefinition d;
  d.name = "contact3d_perturbed";
  d.kind = StructureKind::Contact3D;
  d.n = 3;
  d.k = 2;
  d.params = {{"epsilon", eps}};
  // X1 = dx - (y/2)(1 + eps x^2) dz, X2 = dy + (x/2)(1 + eps y^2) dz
  set_frame(d, [eps](int, auto q, auto out) {
    using S = typename decltype(out)::value_type;
    out[0] = S(1.0);
    out[1] = S(0.0);
    out[2] = S(-0.5) * q[1] * (S(1.0) + S(eps) * q[0] * q[0]);
    out[3] = S(0.0);
    out[4] = S(1.0);
    out[5] = S(0.5) * q[0] * (S(1.0) + S(eps) * q[1] * q[1]);
  });
  return Structure(std::move(d));
}

Structure make_quasicontact4d() {
  StructureDefinition d;
  d.name = "quasicontact4d";
  d.kind = StructureKind::QuasiContact4D;
  d.n = 4;
  d.k = 3;
  // X1 = d1, X2 = d2 + x1 d3, X3 = d4 + (x1^2/2) d3
  set_frame(d, [](int, auto q, auto out) {
    using S = typename decltype(out)::value_type;
    for (int e = 0; e < 12; ++e) out[e] = S(0.0);
    out[0] = S(1.0);
    out[4 + 1] = S(1.0);
    out[4 + 2] = q[0];
    out[8 + 3] = S(1.0);
    out[8 + 2] = S(0.5) * q[0] * q[0];
  });
  return Structure(std::move(d));
}

StructureKind parse_kind(const std::string& s) {
  if (s == "riemannian") return StructureKind::Riemannian;
  if (s == "contact3d") return StructureKind::Contact3D;
  if (s == "quasicontact4d") return StructureKind::QuasiContact4D;
  if (s == "other") return StructureKind::Other;
  fail(ErrorKind::InvalidInput, "unknown structure kind '" + s + "'");
}

Structure make_custom(const nlohmann::json& params) {
  require(params.contains("frame") && params.at("frame").is_array(), ErrorKind::InvalidInput,
          "custom: params.frame must be a list of vector fields");
  const auto& rows = params.at("frame");
  const int k = static_cast<int>(rows.size());
  require(k >= 1, ErrorKind::InvalidInput, "custom: empty frame");
  const int n = param_int(params, "n", static_cast<int>(rows.at(0).size()));
  std::vector<Expression> comps;
  for (const auto& row : rows) {
    require(row.is_array() && static_cast<int>(row.size()) == n, ErrorKind::InvalidInput,
            "custom: every frame vector needs n components");
    for (const auto& e : row) {
      const Expression ex = Expression::parse(e.is_string() ? e.get<std::string>() : e.dump());
      require(ex.max_variable() <= n, ErrorKind::InvalidInput, "custom: frame expression uses a variable beyond n");
      comps.push_back(ex);
    }
  }
  StructureDefinition d;
  d.name = params.value("label", std::string("custom"));
  d.n = n;
  d.k = k;
  d.kind = parse_kind(params.value("kind", std::string(k == n ? "riemannian" : "other")));
  d.params = params;
  set_frame(d, [comps](int, auto q, auto out) {
    using S = typename decltype(out)::value_type;
    for (std::size_t e = 0; e < comps.size(); ++e) out[e] = comps[e].template eval<S>(q);
  });
  return Structure(std::move(d));
}

}  // namespace

std::vector<std::string> builtin_names() {
  return {"euclidean", "round_sphere", "revolution_surface", "heisenberg", "contact3d_perturbed", "quasicontact4d",
          "custom"};
}

Structure builtin(std::string_view name, const nlohmann::json& params_in) {
  const nlohmann::json params = params_in.is_null() ? nlohmann::json::object() : params_in;
  require(params.is_object(), ErrorKind::InvalidInput, "structure params must be an object");
  auto build = [&]() -> Structure {
    if (name == "euclidean") return make_euclidean(params);
    if (name == "round_sphere") return make_round_sphere(params);
    if (name == "revolution_surface") return make_revolution_surface(params);
    if (name == "heisenberg") return make_heisenberg();
    if (name == "contact3d_perturbed") return make_contact3d_perturbed(params);
    if (name == "quasicontact4d") return make_quasicontact4d();
    if (name == "custom") return make_custom(params);
    fail(ErrorKind::Catalog, "unknown built-in structure '" + std::string(name) + "'");
  };
  Structure s = build();
  const int per_axis = s.dim() <= 3 ? 5 : 3;
  validate_structure(s, sample_grid(s.dim(), per_axis, 1.0));
  return s;
}

void validate_structure(const Structure& s, const std::vector<Point>& grid) {
  for (const Point& q : grid) {
    const Mat X = s.frame(q);
    require(X.allFinite(), ErrorKind::InvalidStructure, "frame is not finite at a sample point");
    Eigen::JacobiSVD<Mat> svd(X);
    const auto& sv = svd.singularValues();
    require(sv[sv.size() - 1] > 1e-10 * std::max(1.0, sv[0]), ErrorKind::InvalidStructure,
            "frame of '" + s.name() + "' is not of full rank at a sample point");
    const double F = s.density(q);
    require(F > 0.0 && std::isfinite(F), ErrorKind::InvalidStructure,
            "volume density of '" + s.name() + "' is not positive at a sample point");
    if (s.rank() < s.dim()) {
      require(bracket_rank(s, q, 2) == s.dim(), ErrorKind::InvalidStructure,
              "'" + s.name() + "' is not bracket-generating at depth 2 at a sample point");
    }
  }
}

Structure with_volume(const Structure& s, const nlohmann::json& volume) {
  StructureDefinition d = s.definition();
  if (volume.is_string()) {
    require(volume.get<std::string>() == "lebesgue", ErrorKind::InvalidInput,
            "volume must be \"lebesgue\" or {\"density_expr\": ...}");
    set_density(d, [](int, auto q) {
      using S = typename std::remove_cv_t<typename decltype(q)::value_type>;
      return S(1.0);
    });
  } else {
    require(volume.is_object() && volume.contains("density_expr"), ErrorKind::InvalidInput,
            "volume must be \"lebesgue\" or {\"density_expr\": ...}");
    const Expression ex = Expression::parse(volume.at("density_expr").get<std::string>());
    require(ex.max_variable() <= s.dim(), ErrorKind::InvalidInput, "density expression uses a variable beyond n");
    set_density(d, [ex](int, auto q) {
      using S = typename std::remove_cv_t<typename decltype(q)::value_type>;
      return ex.template eval<S>(q);
    });
  }
  d.params["volume"] = volume;
  return Structure(std::move(d));
}

Structure structure_from_config(const nlohmann::json& cfg) {
  require(cfg.is_object() && cfg.contains("name") && cfg.at("name").is_string(), ErrorKind::InvalidInput,
          "structure config needs a string field 'name'");
  Structure s = builtin(cfg.at("name").get<std::string>(), cfg.value("params", nlohmann::json::object()));
  if (cfg.contains("volume")) s = with_volume(s, cfg.at("volume"));
  return s;
}

}  // namespace heatlocus
