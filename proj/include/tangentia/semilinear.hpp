#pragma once

// Semi-linear subspaces W = V + <b_1, b_2>^+ (a linear part plus at most two
// rays), the restricted Hausdorff distance between them, and linear maps on W.

#include <cstdint>
#include <string>
#include <vector>

#include "tangentia/types.hpp"

namespace tangentia::semilinear {

inline constexpr double kCanonicalTol = 1e-10;
inline constexpr int kMaxRays = 2;

class SemiLinearSubspace {
 public:
  /// Canonicalises: orthonormal V, rays projected onto V-perp and normalised,
  /// opposite ray pairs absorbed into V, duplicates and rays inside V dropped.
  /// Throws ArgumentError if more than two rays survive.
  SemiLinearSubspace(int ambient_dim, const std::vector<Vec>& linear_generators, const std::vector<Vec>& rays);
  /// Empty placeholder (ambient dimension 0).
  SemiLinearSubspace() = default;

  static SemiLinearSubspace whole(int n);
  static SemiLinearSubspace trivial(int n);
  static SemiLinearSubspace span(const std::vector<Vec>& generators);
  static SemiLinearSubspace ray(const Vec& b);
  /// Parses `V=[v1;v2];ray=[b1;b2]` (either part optional).
  static SemiLinearSubspace parse(int n, const std::string& text);

  int ambient_dim() const { return n_; }
  const Basis& linear_basis() const { return linear_; }
  int linear_dim() const { return static_cast<int>(linear_.cols()); }
  const std::vector<Vec>& rays() const { return rays_; }
  bool is_linear() const { return rays_.empty(); }
  bool is_trivial() const { return linear_dim() == 0 && rays_.empty(); }

  /// Orthonormal basis of span(W): V's basis followed by the Gram-Schmidt'd rays.
  const Basis& span_basis() const { return span_; }
  int span_dim() const { return static_cast<int>(span_.cols()); }

  bool contains(const Vec& w, double tol = 1e-9) const;
  /// Nearest point of W to w (W is a closed convex cone).
  Vec project(const Vec& w) const;
  /// Generators: +-V basis vectors and the rays.
  std::vector<Vec> generators() const;

  bool equals(const SemiLinearSubspace& other, double tol = kCanonicalTol) const;
  std::string describe() const;

 private:
  int n_ = 0;
  Basis linear_;
  std::vector<Vec> rays_;
  Basis span_;
};

/// H(V, b) = V + <b>^+. `linear` must have no rays. b == 0 yields V.
SemiLinearSubspace halfspace(const SemiLinearSubspace& linear, const Vec& b);

/// N unit vectors of W, quasi-uniform on W cap S^{n-1}, deterministic per seed.
/// Generators come first; the rest is a filtered equal-angle / Fibonacci lattice.
std::vector<Vec> sample_unit_vectors(const SemiLinearSubspace& w, int count, std::uint64_t seed = 0);

struct HausdorffEstimate {
  double value = 0.0;
  /// Largest angular gap between consecutive sample directions; the estimate
  /// is within this of the true distance.
  double mesh_error = 0.0;
};

/// Hausdorff distance between W1 cap B_n and W2 cap B_n. The inner distance to
/// a cone-ball intersection is exact; the outer sup runs over `samples` unit
/// directions per set (the sup is attained on the unit sphere or at 0).
HausdorffEstimate hc_distance(const SemiLinearSubspace& a, const SemiLinearSubspace& b, int samples = 360);

/// Linear map on W in the positively homogeneous sense, given by its values on
/// W's generators. `extend_linear_map` fills a coefficient vector D on R^n.
struct SemiLinearMap {
  SemiLinearSubspace carrier;
  std::vector<double> generator_values;  ///< one per carrier.generators()
  Vec coefficients;                      ///< D with D . w = L(w) on W, D in span(W); valid once extended
  bool extended = false;

  double operator()(const Vec& w) const;
};

SemiLinearMap make_map(const SemiLinearSubspace& w, const std::vector<double>& generator_values);
/// Map given directly by coefficients D (restricted to W).
SemiLinearMap map_from_coefficients(const SemiLinearSubspace& w, const Vec& coefficients);

/// Zero extension across span(W)-perp; throws ConsistencyError if the
/// generator values are not the restriction of one linear map.
SemiLinearMap extend_linear_map(const SemiLinearMap& map, double tol = 1e-9);

}  // namespace tangentia::semilinear
