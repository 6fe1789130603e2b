#include "tangentia/functions.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

#include "tangentia/errors.hpp"

namespace tangentia::functions {

namespace {

Box symmetric_box(int n, double half) {
  return Box{Vec::Constant(n, -half), Vec::Constant(n, half)};
}

}  // namespace

DirectionalFunction tent() {
  DirectionalFunction f(1, [](const Vec& x) { return std::max(0.0, 1.0 - std::abs(x[0])); }, "tent");
  f.with_derivative([](const Vec& x, const Vec& theta) -> std::optional<double> {
    const double y = x[0], t = theta[0];
    if (y == 0.0) return -std::abs(t);
    if (y == 1.0) return std::max(0.0, -t);
    if (y == -1.0) return std::max(0.0, t);
    if (std::abs(y) > 1.0) return 0.0;
    return y > 0 ? -t : t;
  });
  f.with_lipschitz(1.0).with_support(symmetric_box(1, 1.0));
  return f;
}

DirectionalFunction abs_coordinate(int n, int axis) {
  if (axis < 0 || axis >= n) throw ArgumentError("axis out of range");
  DirectionalFunction f(n, [axis](const Vec& x) { return std::abs(x[axis]); }, n == 1 ? "abs" : "abs@" + std::to_string(n));
  f.with_derivative([axis](const Vec& x, const Vec& theta) -> std::optional<double> {
    const double v = x[axis];
    if (v > 0) return theta[axis];
    if (v < 0) return -theta[axis];
    return std::abs(theta[axis]);
  });
  f.with_lipschitz(1.0);
  return f;
}

DirectionalFunction norm(int n) {
  DirectionalFunction f(n, [](const Vec& x) { return x.norm(); }, "norm@" + std::to_string(n));
  f.with_derivative([](const Vec& x, const Vec& theta) -> std::optional<double> {
    const double r = x.norm();
    if (r == 0.0) return theta.norm();
    return x.dot(theta) / r;
  });
  f.with_lipschitz(1.0);
  return f;
}

DirectionalFunction gaussian(int n, double s) {
  if (!(s > 0)) throw ArgumentError("gaussian width must be positive");
  const double k = 1.0 / (2 * s * s);
  DirectionalFunction f(n, [k](const Vec& x) { return std::exp(-k * x.squaredNorm()); }, "gauss");
  f.with_derivative([k](const Vec& x, const Vec& theta) -> std::optional<double> {
    return -2 * k * std::exp(-k * x.squaredNorm()) * x.dot(theta);
  });
  f.with_lipschitz(1.0 / (s * std::sqrt(std::numbers::e)));
  return f;
}

DirectionalFunction constant(int n, double c) {
  DirectionalFunction f(n, [c](const Vec&) { return c; }, "const");
  f.with_derivative([](const Vec&, const Vec&) -> std::optional<double> { return 0.0; });
  f.with_lipschitz(0.0);
  return f;
}

DirectionalFunction linear(const Vec& a, double c) {
  DirectionalFunction f(static_cast<int>(a.size()), [a, c](const Vec& x) { return a.dot(x) + c; }, "linear");
  f.with_derivative([a](const Vec&, const Vec& theta) -> std::optional<double> { return a.dot(theta); });
  f.with_lipschitz(a.norm());
  return f;
}

DirectionalFunction quadratic(const Eigen::MatrixXd& a, const Vec& b, double c) {
  const int n = static_cast<int>(b.size());
  if (a.rows() != n || a.cols() != n) throw ArgumentError("quadratic form dimension mismatch");
  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  DirectionalFunction f(
      n, [sym, b, c](const Vec& x) { return 0.5 * x.dot(sym * x) + b.dot(x) + c; }, "quadratic");
  f.with_derivative([sym, b](const Vec& x, const Vec& theta) -> std::optional<double> {
    return (sym * x + b).dot(theta);
  });
  return f;
}

kernels::AffineFamily make_affine_family(const std::vector<Vec>& slopes, const std::vector<double>& offsets) {
  if (slopes.empty() || slopes.size() != offsets.size()) throw ArgumentError("affine family needs matching nonempty rows");
  kernels::AffineFamily fam;
  fam.dim = static_cast<int>(slopes[0].size());
  if (fam.dim < 1 || fam.dim > kMaxDim) throw ArgumentError("affine family dimension must be 1..3");
  for (const auto& a : slopes) {
    if (a.size() != fam.dim) throw ArgumentError("affine slopes have mixed dimensions");
    for (int d = 0; d < fam.dim; ++d) fam.slope[d].push_back(a[d]);
  }
  fam.offset = offsets;
  return fam;
}

double affine_lipschitz(const kernels::AffineFamily& family) {
  double k = 0.0;
  for (std::size_t j = 0; j < family.size(); ++j) {
    double s = 0.0;
    for (int d = 0; d < family.dim; ++d) s += family.slope[d][j] * family.slope[d][j];
    k = std::max(k, std::sqrt(s));
  }
  return k;
}

DirectionalFunction max_affine(const kernels::AffineFamily& family) {
  if (family.size() == 0) throw ArgumentError("affine family must be nonempty");
  auto fam = std::make_shared<const kernels::AffineFamily>(family);
  auto value_of = [fam](std::size_t j, const Vec& x) {
    double v = fam->offset[j];
    for (int d = 0; d < fam->dim; ++d) v += fam->slope[d][j] * x[d];
    return v;
  };
  DirectionalFunction f(
      fam->dim,
      [fam, value_of](const Vec& x) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < fam->size(); ++j) best = std::max(best, value_of(j, x));
        return best;
      },
      "maxaffine");
  f.with_batch([fam](const PointBatch& p, std::span<double> out) { kernels::max_affine(*fam, p, out); });
  f.with_derivative([fam, value_of](const Vec& x, const Vec& theta) -> std::optional<double> {
    std::vector<double> v(fam->size());
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < fam->size(); ++j) best = std::max(best, v[j] = value_of(j, x));
    const double tol = 1e-12 * (1.0 + std::abs(best));
    double d = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < fam->size(); ++j) {
      if (v[j] < best - tol) continue;
      double s = 0.0;
      for (int k = 0; k < fam->dim; ++k) s += fam->slope[k][j] * theta[k];
      d = std::max(d, s);
    }
    return d;
  });
  f.with_lipschitz(affine_lipschitz(*fam));
  return f;
}

DirectionalFunction sqrt_abs() {
  DirectionalFunction f(1, [](const Vec& x) { return std::sqrt(std::abs(x[0])); }, "sqrtabs");
  f.with_derivative([](const Vec& x, const Vec& theta) -> std::optional<double> {
    const double y = x[0];
    if (y == 0.0) return theta[0] == 0.0 ? std::optional<double>(0.0) : std::nullopt;
    return (y > 0 ? 1.0 : -1.0) * theta[0] / (2 * std::sqrt(std::abs(y)));
  });
  return f;
}

}  // namespace tangentia::functions
