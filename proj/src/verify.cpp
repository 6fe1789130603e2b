#include "tangentia/verify.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "tangentia/errors.hpp"
#include "tangentia/functions.hpp"
#include "tangentia/maxop.hpp"
#include "tangentia/nonsmooth.hpp"
#include "tangentia/specials.hpp"
#include "tangentia/tangency.hpp"

namespace tangentia::verify {

namespace {

using funcspace::DirectionalFunction;

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) { return Vec{{a, b}}; }

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

class Recorder {
 public:
  explicit Recorder(std::string suite) : suite_(std::move(suite)) {}
  void check(const std::string& name, bool pass, const std::string& detail) {
    results_.push_back({suite_, name, pass, detail});
  }
  std::vector<CheckResult> take() { return std::move(results_); }

 private:
  std::string suite_;
  std::vector<CheckResult> results_;
};

std::vector<CheckResult> envelope(std::uint64_t) {
  Recorder r("envelope");
  const auto tent = functions::tent();
  const auto m2 = maxop::maximal(tent, v1(2.0), 0.0);
  const double exact = (3 - std::sqrt(7.0)) / 2;
  r.check("value at x=2", std::abs(m2.value - exact) <= 1e-6, "Mf(2) = " + fmt(m2.value) + ", closed form " + fmt(exact));
  const auto radii = m2.finite_radii();
  const bool one = radii.size() == 1 && m2.plateaus.empty();
  r.check("best radius at x=2", one && std::abs(radii[0] - std::sqrt(7.0)) <= 1e-4,
          one ? "R = {" + fmt(radii[0]) + "}" : "best radius set is not a single point");
  double worst = 0.0;
  const double h = 1e-3;
  for (int i = 0; i <= 8; ++i) {
    const double x = 1.2 + 1.8 * i / 8;
    const double d = maxop::maximal_directional_derivative(tent, v1(x), v1(1.0), 0.0).value;
    const double fd = (maxop::maximal(tent, v1(x + h), 0.0).value - maxop::maximal(tent, v1(x - h), 0.0).value) / (2 * h);
    worst = std::max(worst, std::abs(d - fd));
  }
  r.check("envelope derivative vs central differences", worst <= 1e-3, "max gap " + fmt(worst) + " over 9 points");
  const auto m1 = maxop::maximal(tent, v1(0.0), 1.0);
  r.check("restricted operator at 0", std::abs(m1.value - 0.5) <= 1e-6, "M_1 f(0) = " + fmt(m1.value));
  return r.take();
}

std::vector<CheckResult> tangential(std::uint64_t seed) {
  Recorder r("tangential");
  using namespace tangency;
  std::vector<Vec> par, circ, cross;
  for (int i = -200; i <= 200; ++i) par.push_back(v2(i * 0.005, i * i * 2.5e-5));
  for (int i = 0; i < 628; ++i) circ.push_back(v2(std::cos(i * 0.01), 1 + std::sin(i * 0.01)));
  for (int i = -100; i <= 100; ++i) {
    cross.push_back(v2(i * 0.01, 0));
    if (i != 0) cross.push_back(v2(i * 0.01, i * 0.01));
  }
  const Basis xaxis = Basis(v2(1, 0));
  r.check("parabola is 1-tangential", is_k_tangential(par, v2(0, 0), fit_tangent(par, v2(0, 0), 1, 0.08).basis).verdict == Verdict::Tangential, "");
  const Vec on_circle = v2(1, 1);
  r.check("circle is 1-tangential", is_k_tangential(circ, on_circle, fit_tangent(circ, on_circle, 1, 0.16).basis).verdict == Verdict::Tangential, "");
  r.check("crossing lines fail a single line", is_k_tangential(cross, v2(0, 0), xaxis, {.radius = 0.5}).verdict == Verdict::NotTangential, "");
  SigmaOptions two;
  two.pieces = 2;
  const auto dec = sigma_decompose(cross, 1, two);
  r.check("crossing lines split into two pieces", dec.pass && dec.pieces.size() == 2, dec.diagnostics);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  int passed = 0;
  const int trials = 3, res = 64;
  for (int t = 0; t < trials; ++t) {
    std::vector<Vec> slopes;
    std::vector<double> offsets;
    for (int k = 0; k < 3; ++k) {
      slopes.push_back(v2(g(rng), g(rng)));
      offsets.push_back(0.3 * g(rng));
    }
    const auto f = functions::max_affine(functions::make_affine_family(slopes, offsets));
    nonsmooth::ScanOptions so;
    so.annotate_gamma = false;
    std::vector<Vec> pts;
    for (const auto& p : nonsmooth::singular_scan(f, Box{v2(-1, -1), v2(1, 1)}, {res, res}, so)) pts.push_back(p.x);
    SigmaOptions opt;
    opt.pieces = 3;
    opt.noise = 2.0 / res;
    const auto d = sigma_decompose(pts, 1, opt);
    if (d.pass) ++passed;
  }
  r.check("kinks of max-of-3-affine are sigma-1-tangential", passed == trials,
          std::to_string(passed) + "/" + std::to_string(trials) + " scans decompose into <= 3 tangential pieces");
  return r.take();
}

std::vector<CheckResult> singular(std::uint64_t) {
  Recorder r("singular");
  const auto tent = functions::tent();
  const DirectionalFunction mf(1, [tent](const Vec& x) { return maxop::maximal(tent, x, 0.0).value; }, "Mf");
  int bounded = 0;
  const int probes = 16;
  for (int i = 0; i < probes; ++i) {
    const double x = -3 + 6.0 * (i + 0.5) / probes;
    if (!nonsmooth::quotient_ladder(mf, v1(x), nonsmooth::Ladder::geometric(0.25, 10)).divergent) ++bounded;
  }
  r.check("Mf of the tent has bounded quotient ladders", bounded == probes,
          std::to_string(bounded) + "/" + std::to_string(probes) + " probes bounded");
  const auto control = nonsmooth::quotient_ladder(functions::sqrt_abs(), v1(0.0), nonsmooth::Ladder::geometric());
  r.check("sqrt|x| at 0 is detected as singular", control.divergent, "control for the detector");
  return r.take();
}

std::vector<CheckResult> translation(std::uint64_t seed) {
  Recorder r("translation");
  const auto sq = functions::quadratic(Eigen::MatrixXd::Constant(1, 1, 2.0), v1(0.0));
  double worst_lhs = 0.0;
  bool all_pass = true;
  for (double h : {0.2, 0.1, 0.05, 0.01}) {
    const double radius = 0.5;
    const double u = maxop::remainder_sup(sq, v1(0), v1(0), radius + h);
    const auto rep = maxop::check_translation_bound(sq, v1(0), v1(h), radius, v1(0), u);
    worst_lhs = std::max(worst_lhs, std::abs(rep.lhs - h * h));
    all_pass = all_pass && rep.pass;
  }
  r.check("x^2: left side equals h^2", worst_lhs <= 1e-8, "max |LHS - h^2| = " + fmt(worst_lhs));
  r.check("x^2: bound holds", all_pass, "");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(-1, 1);
  int fails = 0;
  double worst_ratio = 0.0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) {
    const int n = 1 + t % 3;
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = g(rng);
    a = (a + a.transpose()).eval() / 2;
    Vec b(n), x(n), h(n);
    for (int d = 0; d < n; ++d) b[d] = g(rng), x[d] = u(rng), h[d] = 0.1 * u(rng);
    const auto f = functions::quadratic(a, b);
    const Vec grad = a * x + b;
    const double radius = 0.3;
    const double usup = maxop::remainder_sup(f, x, grad, radius + h.norm());
    const auto rep = maxop::check_translation_bound(f, x, h, radius, grad, usup);
    if (!rep.pass) ++fails;
    worst_ratio = std::max(worst_ratio, rep.ratio);
  }
  r.check("random quadratics satisfy the bound", fails == 0,
          std::to_string(fails) + " failures, largest empirical constant " + fmt(worst_ratio));
  return r.take();
}

std::vector<CheckResult> distance(std::uint64_t seed) {
  Recorder r("distance");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    std::vector<Vec> pts;
    for (int i = 0; i < 5; ++i) pts.push_back(v2(u(rng), u(rng)));
    const auto a = specials::ClosedSetModel::points(pts);
    const Vec x = v2(2 * u(rng), 2 * u(rng));
    if (a.distance(x) < 1e-3) continue;
    const Vec theta = v2(g(rng), g(rng)).normalized();
    worst = std::max(worst, specials::check_distance_derivative(a, x, theta).difference);
  }
  r.check("derivative formula vs forward differences", worst < 1e-3, "max gap " + fmt(worst));

  const auto square = specials::ClosedSetModel::polygon({v2(-1, -1), v2(1, -1), v2(1, 1), v2(-1, 1)});
  const int res = 64;
  const double h = 2.0 / res;
  double off = 0.0;
  int flagged = 0;
  for (const auto& m : specials::medial_scan(square, Box{v2(-1, -1), v2(1, 1)}, {res, res})) {
    if (m.multiplicity < 2) continue;
    ++flagged;
    off = std::max(off, std::min(std::abs(m.x[0] - m.x[1]), std::abs(m.x[0] + m.x[1])) / std::sqrt(2.0));
  }
  r.check("square medial axis on the diagonals", flagged > 0 && off <= h / 2 + 1e-12,
          std::to_string(flagged) + " medial nodes, max offset " + fmt(off / h) + " cells");
  const auto pair = specials::ClosedSetModel::points({v2(-1, 0), v2(1, 0)});
  bool bisector = true;
  int on_axis = 0;
  for (const auto& m : specials::medial_scan(pair, Box{v2(-2, -2), v2(2, 2)}, {res, res})) {
    if (m.multiplicity >= 2) {
      bisector = bisector && std::abs(m.x[0]) <= 2.0 / res + 1e-12;
      ++on_axis;
    }
  }
  r.check("two-point bisector", bisector && on_axis == res + 1, std::to_string(on_axis) + " medial nodes");
  return r.take();
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"envelope", "tangential", "singular", "translation",
                                                 "distance"};
  return names;
}

std::vector<CheckResult> run_suite(const std::string& name, std::uint64_t seed) {
  if (name == "all") {
    std::vector<CheckResult> all;
    for (const auto& s : suite_names()) {
      auto part = run_suite(s, seed);
      all.insert(all.end(), part.begin(), part.end());
    }
    return all;
  }
  // A qualifier after the suite name ("distance-foo") selects the same suite.
  const auto is = [&](const std::string& base) { return name == base || name.rfind(base + "-", 0) == 0; };
  if (is("envelope")) return envelope(seed);
  if (is("tangential")) return tangential(seed);
  if (is("singular")) return singular(seed);
  if (is("translation")) return translation(seed);
  if (is("distance")) return distance(seed);
  throw ArgumentError("unknown suite '" + name + "'");
}

}  // namespace tangentia::verify
