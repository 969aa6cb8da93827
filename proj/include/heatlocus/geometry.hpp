#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "heatlocus/errors.hpp"
#include "heatlocus/jet.hpp"
#include "json.hpp"

namespace heatlocus {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// A point in chart coordinates. Single-chart structures always use chart 0.
struct Point {
  Vec coords;
  int chart = 0;

  Point() = default;
  Point(Vec c, int ch = 0) : coords(std::move(c)), chart(ch) {}  // NOLINT(implicit)
  int dim() const { return static_cast<int>(coords.size()); }
};

/// Covector components in the coordinate cobasis of the chart it lives in.
struct Covector {
  Vec comps;

  Covector() = default;
  Covector(Vec c) : comps(std::move(c)) {}  // NOLINT(implicit)
  int dim() const { return static_cast<int>(comps.size()); }
};

enum class StructureKind { Riemannian, Contact3D, QuasiContact4D, Other };

std::string to_string(StructureKind k);

/// Frame values and derivatives at a point, flattened row-major:
///   value(i, a)        = X_i^a
///   d1(i, a, j)        = d_j X_i^a
///   d2(i, a, j, l)     = d_j d_l X_i^a
struct FrameJet {
  int n = 0;
  int k = 0;
  std::vector<double> values;
  std::vector<double> first;
  std::vector<double> second;

  void resize(int k_, int n_) {
    k = k_;
    n = n_;
    values.assign(static_cast<std::size_t>(k * n), 0.0);
    first.assign(static_cast<std::size_t>(k * n * n), 0.0);
    second.assign(static_cast<std::size_t>(k * n * n * n), 0.0);
  }
  double value(int i, int a) const { return values[i * n + a]; }
  double d1(int i, int a, int j) const { return first[(i * n + a) * n + j]; }
  double d2(int i, int a, int j, int l) const { return second[((i * n + a) * n + j) * n + l]; }

  /// k x n matrix whose rows are the frame vectors.
  Mat matrix() const;
};

/// Frame evaluator: writes the k*n components of X_1..X_k (row-major) at q in `chart`.
template <class S>
using FrameFn = std::function<void(int chart, std::span<const S> q, std::span<S> out)>;
template <class S>
using DensityFn = std::function<S(int chart, std::span<const S> q)>;

/// Coordinate changes between the charts of an atlas.
struct ChartAtlas {
  int count = 1;
  /// Chart a point currently expressed in `chart` should move to (may be `chart`).
  std::function<int(int chart, const Vec& q)> preferred;
  /// Coordinate transition from chart `from` to chart `to`.
  std::function<void(int from, int to, std::span<const double> q, std::span<double> out)> map_d;
  std::function<void(int from, int to, std::span<const Jet2> q, std::span<Jet2> out)> map_j;
  /// Optional embedding into an ambient Euclidean space (diagnostics and tests).
  std::function<Vec(const Point&)> embed;
};

/// Everything needed to assemble a Structure.
struct StructureDefinition {
  std::string name;
  StructureKind kind = StructureKind::Other;
  int n = 0;
  int k = 0;
  FrameFn<double> frame;
  FrameFn<Jet2> frame_jet;  // optional; finite differences are used when absent
  DensityFn<double> density;
  DensityFn<Jet2> density_jet;  // optional
  ChartAtlas atlas;
  nlohmann::json params = nlohmann::json::object();
};

/// A chart-level (sub)-Riemannian structure given by an orthonormal frame.
/// Immutable after construction and cheap to copy.
class Structure {
 public:
  explicit Structure(StructureDefinition def);

  int dim() const { return def_->n; }
  int rank() const { return def_->k; }
  StructureKind kind() const { return def_->kind; }
  const std::string& name() const { return def_->name; }
  const nlohmann::json& params() const { return def_->params; }
  bool is_riemannian() const { return def_->kind == StructureKind::Riemannian; }
  bool has_analytic_jets() const { return static_cast<bool>(def_->frame_jet); }
  int chart_count() const { return def_->atlas.count; }
  const StructureDefinition& definition() const { return *def_; }

  /// k x n matrix with rows X_i(q).
  Mat frame(const Point& q) const;
  void frame_into(int chart, std::span<const double> q, std::span<double> out) const;
  FrameJet jet(const Point& q) const;
  /// Fills `out` (resized on first use). Analytic when available, else central differences.
  void jet_into(int chart, std::span<const double> q, FrameJet& out) const;

  double density(const Point& q) const;
  /// Gradient of the volume density in chart coordinates.
  Vec density_gradient(const Point& q) const;

  /// Re-expresses q in `chart`.
  Point to_chart(const Point& q, int chart) const;
  /// Chart q should be expressed in for numerical work.
  int preferred_chart(const Point& q) const;
  /// Moves (q, p) into the preferred chart; returns true when the chart changed.
  /// `variation` (2n x m, rows dq then dp) is transported along when non-null.
  bool normalize_chart(Point& q, Covector& p, Mat* variation = nullptr) const;
  /// Ambient embedding when the atlas provides one, otherwise the chart coordinates.
  Vec embed(const Point& q) const;

  void check_point(const Point& q) const;
  void check_covector(const Covector& p) const;

 private:
  std::shared_ptr<const StructureDefinition> def_;
};

double hamiltonian(const Structure& s, const Point& q, const Covector& p);
/// dH/dp and dH/dq.
void hamiltonian_gradient(const Structure& s, const Point& q, const Covector& p, Vec& dHdp, Vec& dHdq);

struct SublaplacianCoeffs {
  Mat second_order;
  Vec first_order;
};

/// Coefficients of sum X_i^2 + (div X_i) X_i, divergence taken w.r.t. the volume density.
SublaplacianCoeffs sublaplacian_coeffs(const Structure& s, const Point& q);

/// Lie bracket [X, Y] of two frame fields at q.
Vec bracket(const Structure& s, const Point& q, int i, int j);
/// Rank of span{X_i, [X_i,X_j], [X_i,[X_j,X_k]]} truncated at `depth` (1..3).
int bracket_rank(const Structure& s, const Point& q, int depth);
/// Gauss curvature of a two-dimensional Riemannian structure (frame structure functions + FD).
double gauss_curvature(const Structure& s, const Point& q);

/// Built-in catalog: euclidean, round_sphere, revolution_surface, heisenberg,
/// contact3d_perturbed, quasicontact4d, custom.
Structure builtin(std::string_view name, const nlohmann::json& params = nlohmann::json::object());
std::vector<std::string> builtin_names();

/// Structure config object {name, params, volume}.
Structure structure_from_config(const nlohmann::json& cfg);

/// Replaces the volume density by an expression in x1..xn, or Lebesgue measure.
Structure with_volume(const Structure& s, const nlohmann::json& volume);

/// Throws InvalidStructure unless, at every grid point, the frame has rank k, the
/// density is positive, and (sub-Riemannian only) brackets of length <= 2 span.
void validate_structure(const Structure& s, const std::vector<Point>& grid);

/// Standard sample grid (per-axis `per_axis` points on [-extent, extent]) used by invariant checks.
std::vector<Point> sample_grid(int n, int per_axis, double extent);

}  // namespace heatlocus
