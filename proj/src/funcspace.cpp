#include "tangentia/funcspace.hpp"

#include <cmath>
#include <fstream>
#include <exception>
#include <memory>
#include <numbers>
#include <sstream>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include "tangentia/errors.hpp"
#include "tangentia/kernels.hpp"

namespace tangentia::funcspace {

// ---------------------------------------------------------------------------
// DirectionalFunction

DirectionalFunction::DirectionalFunction(int dim, std::function<double(const Vec&)> eval, std::string label)
    : dim_(dim), eval_(std::move(eval)), label_(std::move(label)) {
  if (dim < 1 || dim > kMaxDim) throw ArgumentError("function dimension must be 1..3, got " + std::to_string(dim));
}

void DirectionalFunction::evaluate(const PointBatch& points, std::span<double> out) const {
  if (batch_) {
    batch_(points, out);
    return;
  }
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = eval_(points.point(i));
}

std::optional<double> DirectionalFunction::exact_derivative(const Vec& x, const Vec& theta) const {
  if (!derivative_) return std::nullopt;
  return derivative_(x, theta);
}

DirectionalFunction& DirectionalFunction::with_batch(BatchEvaluator batch) {
  batch_ = std::move(batch);
  return *this;
}
DirectionalFunction& DirectionalFunction::with_derivative(DerivativeOracle oracle) {
  derivative_ = std::move(oracle);
  return *this;
}
DirectionalFunction& DirectionalFunction::with_lipschitz(double k) {
  if (!(k >= 0.0)) throw ArgumentError("Lipschitz bound must be nonnegative");
  lipschitz_ = k;
  return *this;
}
DirectionalFunction& DirectionalFunction::with_continuity(bool continuous) {
  continuous_ = continuous;
  return *this;
}
DirectionalFunction& DirectionalFunction::with_domain(Box box) {
  domain_ = std::move(box);
  return *this;
}
DirectionalFunction& DirectionalFunction::with_support(Box box) {
  support_ = std::move(box);
  return *this;
}
DirectionalFunction& DirectionalFunction::with_label(std::string label) {
  label_ = std::move(label);
  return *this;
}

DirectionalFunction absolute(const DirectionalFunction& f) {
  DirectionalFunction g(f.dim(), [f](const Vec& x) { return std::abs(f(x)); }, "|" + f.label() + "|");
  g.with_batch([f](const PointBatch& p, std::span<double> out) {
    f.evaluate(p, out);
    for (double& v : out) v = std::abs(v);
  });
  if (f.has_derivative_oracle()) {
    g.with_derivative([f](const Vec& x, const Vec& theta) -> std::optional<double> {
      const auto d = f.exact_derivative(x, theta);
      if (!d) return std::nullopt;
      const double v = f(x);
      if (v > 0) return *d;
      if (v < 0) return -*d;
      return std::abs(*d);
    });
  }
  if (f.lipschitz()) g.with_lipschitz(*f.lipschitz());
  g.with_continuity(f.continuous());
  if (f.domain()) g.with_domain(*f.domain());
  if (f.support()) g.with_support(*f.support());
  return g;
}

DirectionalFunction scaled(const DirectionalFunction& f, double c) {
  DirectionalFunction g(f.dim(), [f, c](const Vec& x) { return c * f(x); }, std::to_string(c) + "*" + f.label());
  g.with_batch([f, c](const PointBatch& p, std::span<double> out) {
    f.evaluate(p, out);
    for (double& v : out) v *= c;
  });
  if (f.has_derivative_oracle()) {
    g.with_derivative([f, c](const Vec& x, const Vec& theta) -> std::optional<double> {
      const auto d = f.exact_derivative(x, theta);
      if (!d) return std::nullopt;
      return c * *d;
    });
  }
  if (f.lipschitz()) g.with_lipschitz(std::abs(c) * *f.lipschitz());
  g.with_continuity(f.continuous());
  if (f.domain()) g.with_domain(*f.domain());
  if (f.support()) g.with_support(*f.support());
  return g;
}

// ---------------------------------------------------------------------------
// GridFunction

GridFunction::GridFunction(Box box, std::vector<int> resolution, std::vector<double> samples)
    : box_(std::move(box)), resolution_(std::move(resolution)), samples_(std::move(samples)) {
  const int n = box_.dim();
  if (n < 1 || n > kMaxDim || box_.hi.size() != n || static_cast<int>(resolution_.size()) != n)
    throw ArgumentError("grid: inconsistent dimension");
  std::size_t count = 1;
  for (int d = 0; d < n; ++d) {
    if (!(box_.hi[d] > box_.lo[d])) throw ArgumentError("grid: degenerate box on axis " + std::to_string(d));
    if (resolution_[d] < 2) throw ArgumentError("grid: resolution must be >= 2 per axis");
    count *= static_cast<std::size_t>(resolution_[d]);
  }
  if (samples_.size() != count)
    throw ArgumentError("grid: expected " + std::to_string(count) + " samples, got " + std::to_string(samples_.size()));
}

GridFunction GridFunction::parse_csv(const std::string& text) {
  std::vector<double> values;
  std::size_t header_end = text.find('\n');
  if (header_end == std::string::npos) header_end = text.size();
  auto read_numbers = [](const std::string& s, std::vector<double>& out) {
    std::string tok;
    auto flush = [&] {
      if (tok.empty()) return;
      try {
        std::size_t used = 0;
        out.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ArgumentError("grid: bad number '" + tok + "'");
      }
      tok.clear();
    };
    for (char c : s) {
      if (c == ',' || c == '\n' || c == '\r' || c == ' ' || c == '\t')
        flush();
      else
        tok += c;
    }
    flush();
  };
  std::vector<double> header;
  read_numbers(text.substr(0, header_end), header);
  if (header.empty()) throw ArgumentError("grid: empty header");
  const int n = static_cast<int>(header[0]);
  if (n < 1 || n > kMaxDim || static_cast<int>(header.size()) != 1 + 3 * n)
    throw ArgumentError("grid: header must be n,res...,lo...,hi...");
  std::vector<int> res(n);
  Box box{Vec(n), Vec(n)};
  for (int d = 0; d < n; ++d) {
    res[d] = static_cast<int>(header[1 + d]);
    box.lo[d] = header[1 + n + d];
    box.hi[d] = header[1 + 2 * n + d];
  }
  if (header_end < text.size()) read_numbers(text.substr(header_end + 1), values);
  return GridFunction(std::move(box), std::move(res), std::move(values));
}

GridFunction GridFunction::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("grid: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

double GridFunction::spacing(int axis) const {
  return (box_.hi[axis] - box_.lo[axis]) / (resolution_[axis] - 1);
}

double GridFunction::sample(std::span<const int> index) const {
  std::size_t flat = 0;
  for (int d = 0; d < dim(); ++d) flat = flat * resolution_[d] + static_cast<std::size_t>(index[d]);
  return samples_[flat];
}

Vec GridFunction::node(std::span<const int> index) const {
  Vec p(dim());
  for (int d = 0; d < dim(); ++d)
    p[d] = box_.lo[d] + (box_.hi[d] - box_.lo[d]) * static_cast<double>(index[d]) / (resolution_[d] - 1);
  return p;
}

double GridFunction::operator()(const Vec& x) const {
  const int n = dim();
  if (!box_.contains(x, 1e-12 * (1.0 + box_.diameter())))
    throw DomainError("grid: point " + format_point(x) + " outside the sampled box");
  std::array<int, kMaxDim> cell{};
  std::array<double, kMaxDim> frac{};
  for (int d = 0; d < n; ++d) {
    const double u = (x[d] - box_.lo[d]) / (box_.hi[d] - box_.lo[d]) * (resolution_[d] - 1);
    int i = static_cast<int>(std::floor(u));
    i = std::clamp(i, 0, resolution_[d] - 2);
    cell[d] = i;
    frac[d] = std::clamp(u - i, 0.0, 1.0);
  }
  double acc = 0.0;
  std::array<int, kMaxDim> idx{};
  for (int corner = 0; corner < (1 << n); ++corner) {
    double w = 1.0;
    for (int d = 0; d < n; ++d) {
      const bool upper = (corner >> d) & 1;
      idx[d] = cell[d] + (upper ? 1 : 0);
      w *= upper ? frac[d] : 1.0 - frac[d];
    }
    if (w != 0.0) acc += w * sample(std::span<const int>(idx.data(), n));
  }
  return acc;
}

DirectionalFunction GridFunction::as_function() const {
  auto self = std::make_shared<const GridFunction>(*this);
  DirectionalFunction f(dim(), [self](const Vec& x) { return (*self)(x); }, "grid");
  f.with_domain(box_).with_continuity(true);
  return f;
}

// ---------------------------------------------------------------------------
// Quadrature

double unit_ball_volume(int n) {
  switch (n) {
    case 1: return 2.0;
    case 2: return std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi / 3.0;
    default: throw ArgumentError("dimension must be 1..3");
  }
}

double unit_sphere_area(int n) {
  switch (n) {
    case 1: return 2.0;
    case 2: return 2.0 * std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi;
    default: throw ArgumentError("dimension must be 1..3");
  }
}

void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights) {
  if (order < 1) throw ArgumentError("Gauss-Legendre order must be >= 1");
  nodes.assign(order, 0.0);
  weights.assign(order, 0.0);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 1; j <= order; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
      }
      dp = order * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    nodes[i] = -z;
    nodes[order - 1 - i] = z;
    weights[i] = weights[order - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

namespace {

ReferenceRule make_ball_rule_2d(int q) {
  std::vector<double> t, w;
  gauss_legendre(q, t, w);
  const int m = 2 * q;
  ReferenceRule rule{2, PointBatch(2, static_cast<std::size_t>(q) * m), {}};
  rule.weights.reserve(static_cast<std::size_t>(q) * m);
  std::size_t k = 0;
  for (int i = 0; i < q; ++i) {
    const double rho = 0.5 * (t[i] + 1.0);
    const double wr = 0.5 * w[i] * rho;
    for (int j = 0; j < m; ++j, ++k) {
      const double phi = 2.0 * std::numbers::pi * (j + 0.5 * (i % 2)) / m;
      rule.nodes.coord[0][k] = rho * std::cos(phi);
      rule.nodes.coord[1][k] = rho * std::sin(phi);
      rule.weights.push_back(wr * (2.0 * std::numbers::pi / m) / std::numbers::pi);
    }
  }
  return rule;
}

ReferenceRule make_ball_rule_3d(int q) {
  std::vector<double> t, w;
  gauss_legendre(q, t, w);
  const int m = 2 * q;
  const double volume = unit_ball_volume(3);
  ReferenceRule rule{3, PointBatch(3, static_cast<std::size_t>(q) * q * m), {}};
  rule.weights.reserve(rule.nodes.size());
  std::size_t k = 0;
  for (int i = 0; i < q; ++i) {
    const double rho = 0.5 * (t[i] + 1.0);
    const double wr = 0.5 * w[i] * rho * rho;
    for (int a = 0; a < q; ++a) {
      const double z = t[a];
      const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
      for (int j = 0; j < m; ++j, ++k) {
        const double phi = 2.0 * std::numbers::pi * (j + 0.5 * (a % 2)) / m;
        rule.nodes.coord[0][k] = rho * s * std::cos(phi);
        rule.nodes.coord[1][k] = rho * s * std::sin(phi);
        rule.nodes.coord[2][k] = rho * z;
        rule.weights.push_back(wr * w[a] * (2.0 * std::numbers::pi / m) / volume);
      }
    }
  }
  return rule;
}

ReferenceRule make_sphere_rule_2d(int m) {
  ReferenceRule rule{2, PointBatch(2, static_cast<std::size_t>(m)), std::vector<double>(m, 2.0 * std::numbers::pi / m)};
  for (int j = 0; j < m; ++j) {
    const double phi = 2.0 * std::numbers::pi * j / m;
    rule.nodes.coord[0][j] = std::cos(phi);
    rule.nodes.coord[1][j] = std::sin(phi);
  }
  return rule;
}

ReferenceRule make_sphere_rule_3d(int p) {
  std::vector<double> t, w;
  gauss_legendre(p, t, w);
  const int m = 2 * p;
  ReferenceRule rule{3, PointBatch(3, static_cast<std::size_t>(p) * m), {}};
  std::size_t k = 0;
  for (int a = 0; a < p; ++a) {
    const double s = std::sqrt(std::max(0.0, 1.0 - t[a] * t[a]));
    for (int j = 0; j < m; ++j, ++k) {
      const double phi = 2.0 * std::numbers::pi * j / m;
      rule.nodes.coord[0][k] = s * std::cos(phi);
      rule.nodes.coord[1][k] = s * std::sin(phi);
      rule.nodes.coord[2][k] = t[a];
      rule.weights.push_back(w[a] * 2.0 * std::numbers::pi / m);
    }
  }
  return rule;
}

void check_finite(std::span<const double> values, const PointBatch& points) {
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!std::isfinite(values[i]))
      throw DomainError("nonfinite function value at " + format_point(points.point(i)));
}

PointBatch place(const PointBatch& ref, const Vec& x, double r) {
  PointBatch out(ref.dim, ref.size());
  for (int d = 0; d < ref.dim; ++d) {
    const double c = x[d];
    const auto& src = ref.coord[d];
    auto& dst = out.coord[d];
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = c + r * src[i];
  }
  return out;
}

}  // namespace

Quadrature::Quadrature(QuadratureConfig config) : config_(config) {
  if (config_.ball_order < 2 || config_.sphere_nodes_2d < 4 || config_.sphere_polar_3d < 2)
    throw ArgumentError("quadrature orders too small");
  ball2_ = make_ball_rule_2d(config_.ball_order);
  ball3_ = make_ball_rule_3d(config_.ball_order);
  sphere2_ = make_sphere_rule_2d(config_.sphere_nodes_2d);
  sphere3_ = make_sphere_rule_3d(config_.sphere_polar_3d);
}

const ReferenceRule& Quadrature::ball_rule(int dim) const {
  if (dim == 2) return ball2_;
  if (dim == 3) return ball3_;
  throw ArgumentError("ball rule exists for n = 2, 3 only");
}

const ReferenceRule& Quadrature::sphere_rule(int dim) const {
  if (dim == 2) return sphere2_;
  if (dim == 3) return sphere3_;
  throw ArgumentError("sphere rule exists for n = 2, 3 only");
}

const Quadrature& Quadrature::standard() {
  static const Quadrature q{};
  return q;
}

namespace {

struct Integrand1d {
  const DirectionalFunction* f;
  double x;
  double r;
  std::exception_ptr failure;
};

// GSL calls back through C, so exceptions are parked and rethrown afterwards.
double integrand_1d(double t, void* params) {
  auto* p = static_cast<Integrand1d*>(params);
  if (p->failure) return 0.0;
  try {
    Vec y(1);
    y[0] = p->x + p->r * t;
    const double v = (*p->f)(y);
    if (!std::isfinite(v)) throw DomainError("nonfinite function value at " + format_point(y));
    return v;
  } catch (...) {
    p->failure = std::current_exception();
    return 0.0;
  }
}

// Average over [x - r, x + r] in the unit variable t (y = x + r t), so the
// tolerances apply on the scale of the average itself.
double adaptive_average_1d(const DirectionalFunction& f, double x, double r, const QuadratureConfig& cfg) {
  double a = -1.0, b = 1.0;
  if (f.support()) {
    a = std::max(a, (f.support()->lo[0] - x) / r);
    b = std::min(b, (f.support()->hi[0] - x) / r);
    if (!(a < b)) return 0.0;
  }
  static const bool handler_off = [] {
    gsl_set_error_handler_off();
    return true;
  }();
  (void)handler_off;
  const std::size_t limit = std::size_t{1} << std::min(cfg.adaptive_depth_1d, 16);
  // One workspace per thread and size; allocating megabytes per average costs more than the integral.
  thread_local std::unique_ptr<gsl_integration_workspace, decltype(&gsl_integration_workspace_free)> ws(
      nullptr, &gsl_integration_workspace_free);
  if (!ws || ws->limit != limit) ws.reset(gsl_integration_workspace_alloc(limit));
  Integrand1d params{&f, x, r, nullptr};
  gsl_function fn{&integrand_1d, &params};
  double result = 0.0, abserr = 0.0;
  const int status = gsl_integration_qag(&fn, a, b, cfg.adaptive_tol_1d * 1e-2, cfg.adaptive_tol_1d, limit,
                                         GSL_INTEG_GAUSS21, ws.get(), &result, &abserr);
  if (params.failure) std::rethrow_exception(params.failure);
  if (status != GSL_SUCCESS && !(abserr <= 1e-9 * (1.0 + std::abs(result))))
    throw DomainError("1D ball average did not converge at " + format_point(Vec::Constant(1, x)) + ": " +
                      gsl_strerror(status));
  return 0.5 * result;
}

}  // namespace

double ball_average(const DirectionalFunction& f, const Vec& x, double r, const Quadrature& quad) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw ArgumentError("ball radius must be finite and >= 0");
  if (x.size() != f.dim()) throw ArgumentError("point dimension does not match function");
  if (r == 0.0) {
    const double v = f(x);
    if (!std::isfinite(v)) throw DomainError("nonfinite function value at " + format_point(x));
    return v;
  }
  if (f.dim() == 1) return adaptive_average_1d(f, x[0], r, quad.config());
  const ReferenceRule& rule = quad.ball_rule(f.dim());
  const PointBatch nodes = place(rule.nodes, x, r);
  std::vector<double> values(nodes.size());
  f.evaluate(nodes, values);
  check_finite(values, nodes);
  return kernels::weighted_sum(rule.weights, values);
}

double sphere_average_derivative(const DirectionalFunction& f, const Vec& x, double r, const Vec& theta,
                                 const Quadrature& quad) {
  if (!(r > 0.0) || !std::isfinite(r)) throw ArgumentError("sphere radius must be finite and > 0");
  if (x.size() != f.dim() || theta.size() != f.dim()) throw ArgumentError("dimension mismatch");
  const int n = f.dim();
  if (n == 1) {
    Vec a(1), b(1);
    a[0] = x[0] + r;
    b[0] = x[0] - r;
    const double fa = f(a), fb = f(b);
    if (!std::isfinite(fa)) throw DomainError("nonfinite function value at " + format_point(a));
    if (!std::isfinite(fb)) throw DomainError("nonfinite function value at " + format_point(b));
    return theta[0] * (fa - fb) / (2.0 * r);
  }
  const ReferenceRule& rule = quad.sphere_rule(n);
  const PointBatch nodes = place(rule.nodes, x, r);
  std::vector<double> values(nodes.size());
  f.evaluate(nodes, values);
  check_finite(values, nodes);
  std::vector<double> w(rule.weights.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    double c = 0.0;
    for (int d = 0; d < n; ++d) c += theta[d] * rule.nodes.coord[d][i];
    w[i] = rule.weights[i] * c;
  }
  return kernels::weighted_sum(w, values) / (unit_ball_volume(n) * r);
}

}  // namespace tangentia::funcspace
