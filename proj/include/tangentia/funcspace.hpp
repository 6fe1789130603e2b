#pragma once

// Function representations, ball/sphere averaging, and grid-sampled fields.

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tangentia/types.hpp"

namespace tangentia::funcspace {

/// Exact one-sided derivative D_theta f(x) for unit theta; nullopt where the
/// oracle has no closed form (callers then fall back to difference quotients).
using DerivativeOracle = std::function<std::optional<double>(const Vec& x, const Vec& theta)>;
using BatchEvaluator = std::function<void(const PointBatch&, std::span<double>)>;

/// Scalar function on R^n (n = 1..3) plus whatever structural knowledge is
/// available about it. Immutable once built; evaluation must be deterministic.
class DirectionalFunction {
 public:
  DirectionalFunction() = default;
  DirectionalFunction(int dim, std::function<double(const Vec&)> eval, std::string label = {});

  int dim() const { return dim_; }
  const std::string& label() const { return label_; }

  double operator()(const Vec& x) const { return eval_(x); }
  /// Evaluates every point of `points` into `out`; uses the vectorised path when one was attached.
  void evaluate(const PointBatch& points, std::span<double> out) const;

  const std::optional<double>& lipschitz() const { return lipschitz_; }
  bool continuous() const { return continuous_; }
  bool has_derivative_oracle() const { return static_cast<bool>(derivative_); }
  std::optional<double> exact_derivative(const Vec& x, const Vec& theta) const;
  const std::optional<Box>& domain() const { return domain_; }
  /// Box outside of which f vanishes, when known.
  const std::optional<Box>& support() const { return support_; }

  DirectionalFunction& with_batch(BatchEvaluator batch);
  DirectionalFunction& with_derivative(DerivativeOracle oracle);
  DirectionalFunction& with_lipschitz(double k);
  DirectionalFunction& with_continuity(bool continuous);
  DirectionalFunction& with_domain(Box box);
  DirectionalFunction& with_support(Box box);
  DirectionalFunction& with_label(std::string label);

 private:
  int dim_ = 0;
  std::function<double(const Vec&)> eval_;
  BatchEvaluator batch_;
  DerivativeOracle derivative_;
  std::optional<double> lipschitz_;
  bool continuous_ = true;
  std::optional<Box> domain_;
  std::optional<Box> support_;
  std::string label_;
};

/// |f|, carrying over continuity, domain, support and Lipschitz bound.
DirectionalFunction absolute(const DirectionalFunction& f);
/// c * f.
DirectionalFunction scaled(const DirectionalFunction& f, double c);

/// Multilinear interpolant of samples on an axis-aligned box.
/// Samples are row-major with the last axis varying fastest.
class GridFunction {
 public:
  GridFunction(Box box, std::vector<int> resolution, std::vector<double> samples);

  /// CSV: header line `n,res_1..res_n,lo_1..lo_n,hi_1..hi_n`, then the samples
  /// separated by commas and/or newlines.
  static GridFunction load_csv(const std::string& path);
  static GridFunction parse_csv(const std::string& text);

  int dim() const { return box_.dim(); }
  const Box& box() const { return box_; }
  const std::vector<int>& resolution() const { return resolution_; }
  const std::vector<double>& samples() const { return samples_; }
  double spacing(int axis) const;

  double sample(std::span<const int> index) const;
  Vec node(std::span<const int> index) const;
  /// Throws DomainError outside the box.
  double operator()(const Vec& x) const;

  DirectionalFunction as_function() const;

 private:
  Box box_;
  std::vector<int> resolution_;
  std::vector<double> samples_;
};

/// Reference quadrature on the unit ball and unit sphere of R^n.
struct QuadratureConfig {
  int ball_order = 32;       ///< q: Gauss nodes per radial / polar axis
  int sphere_nodes_2d = 720;  ///< M for the circle
  int sphere_polar_3d = 36;   ///< Gauss nodes in cos(polar); azimuth gets twice as many
  double adaptive_tol_1d = 1e-13;  ///< relative tolerance of the adaptive 1D rule
  int adaptive_depth_1d = 18;      ///< the 1D rule may use up to 2^min(depth, 16) subintervals
};

/// Nodes (unit ball / unit sphere) with weights normalised to sum 1
/// against the ball volume, i.e. sum w_i g(xi_i) ~ (1/|B_1|) int_B g.
struct ReferenceRule {
  int dim = 0;
  PointBatch nodes;
  std::vector<double> weights;
};

class Quadrature {
 public:
  explicit Quadrature(QuadratureConfig config = {});

  const QuadratureConfig& config() const { return config_; }
  /// Ball rule for n = 2, 3 (n = 1 is integrated adaptively).
  const ReferenceRule& ball_rule(int dim) const;
  /// Unit-sphere nodes; weights are surface-measure weights summing to |S^{n-1}|.
  const ReferenceRule& sphere_rule(int dim) const;

  /// Shared default instance.
  static const Quadrature& standard();

 private:
  QuadratureConfig config_;
  ReferenceRule ball2_, ball3_, sphere2_, sphere3_;
};

/// Volume of the unit ball in R^n.
double unit_ball_volume(int n);
/// Surface area of the unit sphere in R^n.
double unit_sphere_area(int n);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights);

/// Average of f over B(x, r); f(x) when r == 0.
double ball_average(const DirectionalFunction& f, const Vec& x, double r,
                    const Quadrature& quad = Quadrature::standard());

/// D_theta f_r(x) by the sphere integral
///   (1 / |B(x,r)|) * int_{dB(x,r)} f(y) theta . nu(y) dS(y),
/// which is the normalisation that makes the result exact (= a . theta) for linear f.
double sphere_average_derivative(const DirectionalFunction& f, const Vec& x, double r, const Vec& theta,
                                 const Quadrature& quad = Quadrature::standard());

}  // namespace tangentia::funcspace
