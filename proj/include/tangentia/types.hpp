#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tangentia {

inline constexpr int kMaxDim = 3;

/// Point or vector in R^n, n <= 3, stored inline.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
/// Column-orthonormal basis of a subspace of R^n (n x k).
using Basis = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// Structure-of-arrays point batch; feeds the SIMD kernels.
struct PointBatch {
  int dim = 0;
  std::array<std::vector<double>, kMaxDim> coord;

  PointBatch() = default;
  PointBatch(int n, std::size_t count) : dim(n) {
    for (int d = 0; d < n; ++d) coord[d].resize(count);
  }

  std::size_t size() const { return dim == 0 ? 0 : coord[0].size(); }

  Vec point(std::size_t i) const {
    Vec p(dim);
    for (int d = 0; d < dim; ++d) p[d] = coord[d][i];
    return p;
  }

  void set(std::size_t i, const Vec& p) {
    for (int d = 0; d < dim; ++d) coord[d][i] = p[d];
  }
};

/// Axis-aligned box.
struct Box {
  Vec lo;
  Vec hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Vec& p, double slack = 0.0) const {
    for (int d = 0; d < dim(); ++d)
      if (p[d] < lo[d] - slack || p[d] > hi[d] + slack) return false;
    return true;
  }
  double diameter() const { return (hi - lo).norm(); }
};

std::string format_point(const Vec& p);

/// Row-major grid nodes of `box` with `res[d]` nodes per axis (endpoints included).
std::vector<Vec> grid_nodes(const Box& box, const std::vector<int>& res);

/// Smallest node spacing of such a grid.
double grid_spacing(const Box& box, const std::vector<int>& res);

}  // namespace tangentia
