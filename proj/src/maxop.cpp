#include "tangentia/maxop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "json.hpp"
#include "tangentia/errors.hpp"
#include "tangentia/nonsmooth.hpp"
#include "tangentia/parallel.hpp"
#include "tangentia/semilinear.hpp"

namespace tangentia::maxop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInvGolden = 0.6180339887498949;

double default_r_max(const DirectionalFunction& f) {
  if (f.support()) return 10.0 * f.support()->diameter();
  if (f.domain()) return 10.0 * f.domain()->diameter();
  return 100.0;
}

void require_point(const DirectionalFunction& f, const Vec& x) {
  if (x.size() != f.dim()) throw ArgumentError("point dimension does not match the function");
  for (int d = 0; d < x.size(); ++d)
    if (!std::isfinite(x[d])) throw ArgumentError("point must be finite");
}

class AverageProbe {
 public:
  AverageProbe(const DirectionalFunction& f, const Vec& x, double guard, RadiiSet& out)
      : abs_f_(funcspace::absolute(f)), x_(x), guard_(guard), out_(out) {}

  double operator()(double r) {
    const double v = funcspace::ball_average(abs_f_, x_, r);
    out_.trace.emplace_back(r, v);
    if (!std::isfinite(v) || v > guard_) overflow = true;
    return v;
  }

  bool overflow = false;

 private:
  DirectionalFunction abs_f_;
  Vec x_;
  double guard_;
  RadiiSet& out_;
};

// Golden-section maximisation on [a, b]; returns (r, value) of the best point seen.
std::pair<double, double> golden_max(AverageProbe& avg, double a, double b) {
  double c = b - kInvGolden * (b - a);
  double d = a + kInvGolden * (b - a);
  double fc = avg(c), fd = avg(d);
  for (int it = 0; it < 200 && (b - a) > 1e-11 * b; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvGolden * (b - a);
      fc = avg(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvGolden * (b - a);
      fd = avg(d);
    }
  }
  return fc >= fd ? std::pair{c, fc} : std::pair{d, fd};
}

// Boundary of a tied run between a tied radius `in` and an untied radius `out`.
double bisect_edge(AverageProbe& avg, double in, double out, const auto& tied) {
  for (int it = 0; it < 60 && std::abs(out - in) > 1e-10 * std::max(in, out); ++it) {
    const double mid = 0.5 * (in + out);
    if (tied(avg(mid)))
      in = mid;
    else
      out = mid;
  }
  return in;
}

}  // namespace

double AuditConstants::for_dim(int n) const {
  switch (n) {
    case 1:
      return c1;
    case 2:
      return c2;
    case 3:
      return c3;
    default:
      throw ArgumentError("audit constants exist for n = 1..3");
  }
}

bool RadiiSet::contains_zero() const {
  for (const auto& b : radii)
    if (b.kind == RadiusKind::Zero) return true;
  for (const auto& p : plateaus)
    if (p.lo == 0.0) return true;
  return false;
}

bool RadiiSet::contains_infinity() const {
  for (const auto& b : radii)
    if (b.kind == RadiusKind::Infinity) return true;
  for (const auto& p : plateaus)
    if (std::isinf(p.hi)) return true;
  return false;
}

std::vector<double> RadiiSet::finite_radii() const {
  std::vector<double> out;
  for (const auto& b : radii)
    if (b.kind == RadiusKind::Finite) out.push_back(b.r);
  return out;
}

RadiiSet maximal(const DirectionalFunction& f, const Vec& x, double lambda, const RadiusSearch& search) {
  require_point(f, x);
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ArgumentError("lambda must be finite and >= 0");
  if (!f.continuous()) throw PreconditionError("the maximal-operator search requires a continuous function");
  if (search.grid_points < 8) throw ArgumentError("radius grid needs at least 8 points");

  RadiiSet out;
  out.x = x;
  out.lambda = lambda;
  out.r_max = search.r_max.value_or(default_r_max(f));
  const double r_lo = std::max(lambda, search.min_radius);
  if (!(out.r_max > r_lo * (1 + 1e-9))) throw ArgumentError("r_max must exceed the smallest searched radius");

  std::vector<double> grid;
  if (lambda > 0 && lambda < r_lo) grid.push_back(lambda);
  const double step = std::log(out.r_max / r_lo) / (search.grid_points - 1);
  for (int j = 0; j < search.grid_points; ++j)
    grid.push_back(j + 1 == search.grid_points ? out.r_max : r_lo * std::exp(step * j));

  AverageProbe avg(f, x, search.overflow_guard, out);
  std::vector<double> a(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    a[j] = avg(grid[j]);
    if (avg.overflow) break;
  }
  const bool with_zero = lambda == 0.0;
  const double zero_value = with_zero ? std::abs(f(x)) : 0.0;
  if (avg.overflow || !std::isfinite(zero_value) || zero_value > search.overflow_guard) {
    out.value = kInf;
    out.infinite = true;
    out.warnings.push_back("average exceeded the overflow guard: M f(x) is treated as infinite");
    return out;
  }

  // Refine every strict local maximum of the grid.
  const std::size_t last = grid.size() - 1;
  std::vector<std::pair<double, double>> peaks;
  for (std::size_t j = 0; j <= last; ++j) {
    const bool ge_left = j == 0 || a[j] >= a[j - 1];
    const bool ge_right = j == last || a[j] >= a[j + 1];
    const bool strict = (j > 0 && a[j] > a[j - 1]) || (j < last && a[j] > a[j + 1]);
    if (!ge_left || !ge_right || !strict) continue;
    const double lo = grid[j == 0 ? 0 : j - 1], hi = grid[j == last ? last : j + 1];
    auto [r, v] = golden_max(avg, lo, hi);
    for (auto [rr, vv] : {std::pair{grid[j], a[j]}, std::pair{lo, j == 0 ? a[0] : a[j - 1]},
                          std::pair{hi, j == last ? a[last] : a[j + 1]}}) {
      if (vv >= v) {
        r = rr;
        v = vv;
      }
    }
    peaks.emplace_back(r, v);
  }

  double best = *std::max_element(a.begin(), a.end());
  for (const auto& p : peaks) best = std::max(best, p.second);
  if (with_zero) best = std::max(best, zero_value);
  out.value = best;
  const double slack = search.tie_rel * std::max(best, std::numeric_limits<double>::min());
  auto tied = [&](double v) { return best - v <= slack; };

  // Decay check for the r = infinity convention.
  const double tail = a[last];
  const double half = avg(out.r_max / 2);
  const bool increasing = tail > half * (1 + 1e-9) && tail - half > slack;
  if (increasing)
    out.warnings.push_back("average still increasing at r_max; the best radius may be infinite (raise r_max)");

  // Tied runs of grid points become plateaus.
  std::vector<char> in_plateau(grid.size(), 0);
  for (std::size_t j = 0; j <= last;) {
    if (!tied(a[j])) {
      ++j;
      continue;
    }
    std::size_t k = j;
    while (k < last && tied(a[k + 1])) ++k;
    if (k > j) {
      RadiusInterval run;
      if (j == 0)
        run.lo = (with_zero && tied(zero_value)) ? 0.0 : grid[0];
      else
        run.lo = bisect_edge(avg, grid[j], grid[j - 1], tied);
      if (k == last)
        run.hi = increasing ? grid[last] : kInf;
      else
        run.hi = bisect_edge(avg, grid[k], grid[k + 1], tied);
      out.plateaus.push_back(run);
      for (std::size_t i = j; i <= k; ++i) in_plateau[i] = 1;
    }
    j = k + 1;
  }
  auto covered = [&](double r) {
    for (const auto& p : out.plateaus)
      if (r >= p.lo * (1 - 1e-9) && r <= p.hi * (1 + 1e-9)) return true;
    return false;
  };

  if (with_zero && tied(zero_value) && !covered(0.0)) out.radii.push_back({RadiusKind::Zero, 0.0, zero_value});
  std::sort(peaks.begin(), peaks.end());
  for (const auto& [r, v] : peaks) {
    if (!tied(v) || covered(r)) continue;
    if (!out.radii.empty() && out.radii.back().kind == RadiusKind::Finite &&
        std::abs(out.radii.back().r - r) <= 1e-6 * r) {
      if (v > out.radii.back().value) out.radii.back() = {RadiusKind::Finite, r, v};
      continue;
    }
    out.radii.push_back({RadiusKind::Finite, r, v});
  }
  if (!increasing && tied(tail) && !covered(kInf)) out.radii.push_back({RadiusKind::Infinity, kInf, tail});
  return out;
}

std::vector<RadiiSet> maximal_field(const DirectionalFunction& f, const Box& box, const std::vector<int>& nodes,
                                    double lambda, const RadiusSearch& search) {
  const auto points = grid_nodes(box, nodes);
  std::vector<RadiiSet> out(points.size());
  parallel_for(points.size(), [&](std::size_t i) { out[i] = maximal(f, points[i], lambda, search); });
  return out;
}

namespace {

void require_differentiable(const DirectionalFunction& f, const Vec& x, double tol) {
  const int n = f.dim();
  const std::string refusal = "; the envelope formula for lambda = 0 is only valid where f is differentiable";
  bool oracle_complete = f.has_derivative_oracle();
  bool linear = true;
  for (int d = 0; d < n && oracle_complete; ++d) {
    const auto plus = f.exact_derivative(x, Vec::Unit(n, d));
    const auto minus = f.exact_derivative(x, -Vec::Unit(n, d));
    if (!plus || !minus)
      oracle_complete = false;
    else if (std::abs(*plus + *minus) > 1e-9 * (1 + std::abs(*plus)))
      linear = false;
  }
  if (oracle_complete) {
    if (!linear) throw PreconditionError("f is not differentiable at " + format_point(x) + refusal);
    return;
  }
  const double t = nonsmooth::tau(f, x, semilinear::SemiLinearSubspace::whole(n)).value;
  if (!(t < tol))
    throw PreconditionError("f is not differentiable at " + format_point(x) + " (tau = " + std::to_string(t) + ")" +
                            refusal);
}

}  // namespace

EnvelopeDerivative maximal_directional_derivative(const DirectionalFunction& f, const Vec& x, const Vec& theta,
                                                  double lambda, const RadiusSearch& search, double diff_tol) {
  require_point(f, x);
  if (theta.size() != f.dim() || std::abs(theta.norm() - 1.0) > 1e-9) throw ArgumentError("theta must be a unit vector");
  if (lambda == 0.0) require_differentiable(f, x, diff_tol);

  EnvelopeDerivative out;
  out.radii = maximal(f, x, lambda, search);
  if (out.radii.infinite) throw DomainError("M f(x) is infinite at " + format_point(x));
  const auto abs_f = funcspace::absolute(f);

  auto zero_term = [&] { return nonsmooth::directional_derivative(abs_f, x, theta).value; };
  auto finite_term = [&](double r) { return funcspace::sphere_average_derivative(abs_f, x, r, theta); };
  auto add = [&](const std::string& label, double v) { out.contributions.emplace_back(label, v); };

  for (const auto& b : out.radii.radii) {
    switch (b.kind) {
      case RadiusKind::Zero:
        add("0", zero_term());
        break;
      case RadiusKind::Finite:
        add(std::to_string(b.r), finite_term(b.r));
        break;
      case RadiusKind::Infinity:
        add("inf", 0.0);
        break;
    }
  }
  for (const auto& p : out.radii.plateaus) {
    if (p.lo == 0.0) add("0", zero_term());
    if (std::isinf(p.hi)) add("inf", 0.0);
    const double lo = p.lo > 0 ? p.lo : std::max(search.min_radius, 1e-6);
    const double hi = std::isinf(p.hi) ? out.radii.r_max : p.hi;
    constexpr int kSamples = 9;
    for (int i = 0; i < kSamples; ++i) {
      const double r = hi > lo ? lo * std::pow(hi / lo, static_cast<double>(i) / (kSamples - 1)) : lo;
      add(std::to_string(r), finite_term(r));
    }
  }
  out.value = -kInf;
  for (const auto& [label, v] : out.contributions) out.value = std::max(out.value, v);
  return out;
}

std::string BoundReport::to_json() const {
  nlohmann::json j;
  j["check"] = check;
  j["lhs"] = lhs;
  j["rhs"] = rhs;
  j["ratio"] = std::isfinite(ratio) ? nlohmann::json(ratio) : nlohmann::json("inf");
  j["pass"] = pass;
  return j.dump();
}

double remainder_sup(const DirectionalFunction& f, const Vec& x, const Vec& d, double radius, int shells) {
  require_point(f, x);
  if (d.size() != f.dim()) throw ArgumentError("D must match the function dimension");
  if (!(radius > 0) || shells < 1) throw ArgumentError("remainder_sup needs radius > 0 and shells >= 1");
  const int n = f.dim();
  const auto dirs = semilinear::sample_unit_vectors(semilinear::SemiLinearSubspace::whole(n), n == 1 ? 2 : (n == 2 ? 72 : 200));
  const double f0 = f(x);
  double sup = 0.0;
  for (int s = 1; s <= shells; ++s) {
    const double t = radius * s / shells;
    for (const auto& u : dirs) {
      const Vec a = t * u;
      sup = std::max(sup, std::abs(f(x + a) - f0 - d.dot(a)) / t);
    }
  }
  return sup;
}

BoundReport check_translation_bound(const DirectionalFunction& f, const Vec& x, const Vec& h, double r, const Vec& d,
                                    double u_sup, const AuditConstants& constants) {
  require_point(f, x);
  if (h.size() != f.dim() || d.size() != f.dim()) throw ArgumentError("h and D must match the function dimension");
  const double nh = h.norm();
  if (!(nh > 0)) throw ArgumentError("translation h must be nonzero");
  if (!(r > 0)) throw ArgumentError("radius must be positive");
  if (!(u_sup >= 0)) throw ArgumentError("u_sup must be >= 0");
  BoundReport rep;
  rep.check = "translation-bound";
  rep.lhs = std::abs(funcspace::ball_average(f, x + h, r) - funcspace::ball_average(f, x, r) - d.dot(h));
  rep.rhs = nh * constants.for_dim(f.dim()) * u_sup;
  if (u_sup > 0)
    rep.ratio = rep.lhs / (nh * u_sup);
  else
    rep.ratio = rep.lhs > 1e-10 ? kInf : 0.0;
  rep.pass = rep.lhs <= rep.rhs + 1e-10;
  return rep;
}

BoundReport LipschitzAudit::report() const {
  BoundReport rep;
  rep.check = "lipschitz-audit";
  rep.lhs = measured;
  rep.rhs = bound;
  rep.ratio = ratio;
  rep.pass = pass;
  return rep;
}

LipschitzAudit lipschitz_audit(const DirectionalFunction& f, double lambda, const Box& box, int samples,
                               std::uint64_t seed, const RadiusSearch& search, const AuditConstants& constants) {
  if (!(lambda > 0)) throw ArgumentError("the Lipschitz audit needs lambda > 0");
  if (box.dim() != f.dim()) throw ArgumentError("box dimension does not match the function");
  if (samples < 1) throw ArgumentError("samples must be >= 1");
  const int n = f.dim();
  const double diam = box.diameter();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<Vec> pts;
  for (int s = 0; s < samples; ++s) {
    Vec p(n), u(n);
    for (int d = 0; d < n; ++d) {
      std::uniform_real_distribution<double> coord(box.lo[d], box.hi[d]);
      p[d] = coord(rng);
      u[d] = normal(rng);
    }
    std::uniform_real_distribution<double> logstep(std::log(1e-3 * diam), std::log(0.25 * diam));
    Vec q = p + std::exp(logstep(rng)) * u.normalized();
    for (int d = 0; d < n; ++d) q[d] = std::clamp(q[d], box.lo[d], box.hi[d]);
    if ((q - p).norm() == 0.0) q[0] = 2 * p[0] > box.lo[0] + box.hi[0] ? box.lo[0] : box.hi[0];
    pts.push_back(p);
    pts.push_back(q);
  }
  std::vector<double> values(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) {
    const auto rs = maximal(f, pts[i], lambda, search);
    if (rs.infinite) throw DomainError("M_lambda f is infinite at " + format_point(pts[i]));
    values[i] = rs.value;
  });
  LipschitzAudit audit;
  for (std::size_t i = 0; i < pts.size(); i += 2) {
    audit.measured = std::max(audit.measured, std::abs(values[i] - values[i + 1]) / (pts[i] - pts[i + 1]).norm());
    audit.sup_value = std::max({audit.sup_value, values[i], values[i + 1]});
  }
  audit.bound = constants.for_dim(n) * audit.sup_value / lambda;
  audit.ratio = audit.bound > 0 ? audit.measured / audit.bound : (audit.measured > 0 ? kInf : 0.0);
  audit.pass = audit.measured <= audit.bound * (1 + 1e-9) + 1e-12;
  return audit;
}

}  // namespace tangentia::maxop
