#pragma once

// Worked classes of directionally differentiable functions: distance
// functions to closed sets (with nearest-point sets and medial-axis scans),
// infimal convolutions, and pointwise maxima of finite C^1 families.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tangentia/funcspace.hpp"
#include "tangentia/kernels.hpp"
#include "tangentia/types.hpp"

namespace tangentia::specials {

using funcspace::DirectionalFunction;

enum class SetKind { Points, Polygon, LevelSet };

struct NearestSet {
  double distance = 0.0;
  std::vector<Vec> points;    ///< nearest points, deduplicated
  bool cell_accurate = false;  ///< true for grid level sets: candidates are only as good as the grid
};

/// Nonempty closed set A in R^n.
class ClosedSetModel {
 public:
  /// Finite point set.
  static ClosedSetModel points(std::vector<Vec> pts);
  /// Boundary of a simple polygon in R^2 (closed loop; clockwise input is reversed).
  static ClosedSetModel polygon(std::vector<Vec> vertices);
  /// `[[x, y], ...]` or `{"vertices": [[x, y], ...]}`.
  static ClosedSetModel polygon_from_json(const std::string& text);
  /// {g = level} for a sampled field g, approximated by its grid-edge crossings.
  static ClosedSetModel level_set(const funcspace::GridFunction& g, double level = 0.0);

  SetKind kind() const { return kind_; }
  int dim() const { return dim_; }
  /// Vertices (polygon), points (finite set) or edge crossings (level set).
  const std::vector<Vec>& vertices() const { return pts_; }
  /// Largest grid spacing of a level set; 0 otherwise.
  double cell() const { return cell_; }

  double distance(const Vec& x) const;
  bool contains(const Vec& x) const;

  /// One candidate per primitive (point or edge) with its distance, unsorted.
  struct Candidate {
    Vec point;
    double distance;
  };
  std::vector<Candidate> candidates(const Vec& x) const;

 private:
  ClosedSetModel(SetKind kind, int dim, std::vector<Vec> pts);

  SetKind kind_;
  int dim_;
  std::vector<Vec> pts_;
  PointBatch batch_;
  double scale_ = 1.0;
  double cell_ = 0.0;
};

/// g_A(x) and every nearest point within relative tolerance 1e-6 (angular dedup 1e-4 rad).
/// Throws ArgumentError when x lies in A.
NearestSet nearest_set(const ClosedSetModel& a, const Vec& x);

/// D_theta g_A(x) = min over nearest y of theta . (x - y) / |x - y|.
double distance_directional_derivative(const ClosedSetModel& a, const Vec& x, const Vec& theta);

struct FormulaCheck {
  double formula = 0.0;
  double finite_difference = 0.0;
  double difference = 0.0;
};

/// Compares the nearest-point formula with (g(x + h theta) - g(x)) / h.
FormulaCheck check_distance_derivative(const ClosedSetModel& a, const Vec& x, const Vec& theta, double h = 1e-5);

/// g_A as a function: 1-Lipschitz, derivative oracle from the nearest-point formula.
DirectionalFunction distance_function(const ClosedSetModel& a);

struct MedialPoint {
  Vec x;
  double distance = 0.0;
  int multiplicity = 0;  ///< number of distinct nearest points at this grid scale

  int bucket() const { return multiplicity >= 3 ? 3 : multiplicity; }
};

/// Grid scan with `resolution` cells per axis (nodes on both faces); nodes in A are skipped.
/// Two nearest candidates a_i, a_j count as tied when
///   |d_i - d_j| <= max(1e-6 d, (h / 2) |u_i - u_j|),  u = (x - a) / |x - a|,
/// which to first order means "the bisector passes within half a cell of x".
std::vector<MedialPoint> medial_scan(const ClosedSetModel& a, const Box& box, const std::vector<int>& resolution);

using Coupling = std::function<double(const Vec& x, const Vec& y)>;

/// Quadratic coupling |x - y|^2 / (2 t).
Coupling moreau_coupling(double t);

struct InfConvolution {
  double value = 0.0;
  std::vector<Vec> minimizers;
  bool boundary = false;  ///< a minimiser sits on the y-box boundary (box may be too small)
};

/// inf over y in `ybox` of u(y) + coupling(x, y): grid search with `resolution`
/// cells per axis, then pattern-search refinement of every grid-local minimum.
/// With `strict`, a boundary minimiser raises PreconditionError.
InfConvolution inf_convolution(const DirectionalFunction& u, const Coupling& coupling, const Vec& x, const Box& ybox,
                               int resolution = 200, bool strict = false);

/// The function x -> inf_y u(y) + coupling(x, y) over a fixed y-box.
DirectionalFunction inf_convolution_function(const DirectionalFunction& u, const Coupling& coupling, const Box& ybox,
                                             int resolution = 200);

struct FamilyMember {
  DirectionalFunction f;
  std::function<Vec(const Vec&)> gradient;
};

/// F = max_k f_k over a finite family of C^1 functions with gradient oracles.
class MaxFamily {
 public:
  /// Gradients are checked against central differences at 10 seeded points of
  /// `probe_box` (default [-1, 1]^n); disagreement above 1e-5 throws ConsistencyError.
  MaxFamily(std::vector<FamilyMember> members, double active_tol = 1e-9, std::uint64_t seed = 0,
            std::optional<Box> probe_box = std::nullopt);

  static MaxFamily affine(const kernels::AffineFamily& family, double active_tol = 1e-9);

  int dim() const { return dim_; }
  std::size_t size() const { return members_.size(); }
  double active_tol() const { return active_tol_; }
  const std::vector<FamilyMember>& members() const { return members_; }

  double operator()(const Vec& x) const;
  std::vector<std::size_t> active_set(const Vec& x) const;
  /// F as a DirectionalFunction with the active-set derivative as oracle.
  DirectionalFunction assembled() const;

 private:
  int dim_ = 0;
  double active_tol_;
  std::vector<FamilyMember> members_;
};

/// max over the active set of grad f_k(x) . theta.
double max_family_derivative(const MaxFamily& family, const Vec& x, const Vec& theta);

}  // namespace tangentia::specials
