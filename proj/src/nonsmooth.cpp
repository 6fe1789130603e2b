#include "tangentia/nonsmooth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tangentia/errors.hpp"
#include "tangentia/minimax.hpp"
#include "tangentia/parallel.hpp"

namespace tangentia::nonsmooth {

Ladder Ladder::geometric(double r0, int rungs) {
  if (!(r0 > 0) || rungs < 1) throw ArgumentError("ladder needs r0 > 0 and at least one rung");
  Ladder l;
  for (int j = 0; j < rungs; ++j) l.radii.push_back(std::ldexp(r0, -j));
  return l;
}

void Ladder::validate() const {
  if (radii.empty()) throw ArgumentError("empty radius ladder");
  for (std::size_t j = 0; j < radii.size(); ++j) {
    if (!(radii[j] > 0) || !std::isfinite(radii[j])) throw ArgumentError("ladder radii must be positive");
    if (j && !(radii[j] < radii[j - 1])) throw ArgumentError("ladder radii must decrease");
  }
}

namespace {

void require_dim(const DirectionalFunction& f, const Vec& v, const char* what) {
  if (v.size() != f.dim()) throw ArgumentError(std::string(what) + " dimension does not match the function");
}

Vec require_unit(const DirectionalFunction& f, const Vec& theta) {
  require_dim(f, theta, "direction");
  const double nt = theta.norm();
  if (std::abs(nt - 1.0) > 1e-9) throw ArgumentError("direction must be a unit vector");
  return theta;
}

double eval_checked(const DirectionalFunction& f, const Vec& p) {
  const double v = f(p);
  if (!std::isfinite(v)) throw DomainError("nonfinite function value at " + format_point(p));
  return v;
}

}  // namespace

double difference_quotient(const DirectionalFunction& f, const Vec& x, const Vec& h) {
  require_dim(f, x, "point");
  require_dim(f, h, "increment");
  const double nh = h.norm();
  if (nh == 0.0) throw ArgumentError("difference quotient needs h != 0");
  return (eval_checked(f, x + h) - eval_checked(f, x)) / nh;
}

DirectionalDerivative directional_derivative(const DirectionalFunction& f, const Vec& x, const Vec& theta,
                                             const Ladder& ladder, double tol) {
  require_dim(f, x, "point");
  const Vec u = require_unit(f, theta);
  ladder.validate();
  DirectionalDerivative out;
  const double f0 = eval_checked(f, x);
  for (double r : ladder.radii) out.rungs.push_back((eval_checked(f, x + r * u) - f0) / r);

  const auto& q = out.rungs;
  const std::size_t m = q.size();
  out.numeric = q.back();
  if (m >= 3) {
    const double lo = std::min({q[m - 1], q[m - 2], q[m - 3]});
    const double hi = std::max({q[m - 1], q[m - 2], q[m - 3]});
    out.converged = hi - lo <= 10.0 * tol;
    const double d1 = q[m - 2] - q[m - 3];
    const double d2 = q[m - 1] - q[m - 2];
    const double small = 1e-13 * (1.0 + std::abs(q[m - 1]));
    if (std::abs(d2) > small && d1 * d2 > 0 && std::abs(d2) <= 0.75 * std::abs(d1)) {
      // Error behaves like c * r: eliminate it from the last two rungs.
      const double ra = ladder.radii[m - 2], rb = ladder.radii[m - 1];
      out.numeric = (ra * q[m - 1] - rb * q[m - 2]) / (ra - rb);
    }
  }
  out.value = out.numeric;
  if (const auto exact = f.exact_derivative(x, u)) {
    out.value = *exact;
    out.from_oracle = true;
  }
  return out;
}

TauEstimate tau(const DirectionalFunction& f, const Vec& x, const SemiLinearSubspace& w, const TauOptions& options) {
  require_dim(f, x, "point");
  if (w.ambient_dim() != f.dim()) throw ArgumentError("subspace dimension does not match the function");
  if (w.is_trivial()) throw ArgumentError("tau is undefined on the trivial subspace {0}");
  if (options.directions < 2 * f.dim()) throw ArgumentError("tau needs at least 2n directions");
  options.ladder.validate();

  const auto dirs = semilinear::sample_unit_vectors(w, options.directions, options.seed);
  const Basis& basis = w.span_basis();
  const int m = static_cast<int>(basis.cols());
  PointBatch coords(m, dirs.size());
  for (std::size_t i = 0; i < dirs.size(); ++i) coords.set(i, basis.transpose() * dirs[i]);

  const double f0 = eval_checked(f, x);
  TauEstimate est;
  est.directions = static_cast<int>(dirs.size());
  PointBatch probes(f.dim(), dirs.size());
  std::vector<double> values(dirs.size()), excess(dirs.size());
  ChebyshevFit fit;
  for (double r : options.ladder.radii) {
    for (std::size_t i = 0; i < dirs.size(); ++i) probes.set(i, x + r * dirs[i]);
    f.evaluate(probes, values);
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      if (!std::isfinite(values[i])) throw DomainError("nonfinite function value at " + format_point(probes.point(i)));
      excess[i] = (values[i] - f0) / r;
    }
    fit = chebyshev_fit(coords, excess);
    est.ladder.push_back({r, fit.residual});
  }
  est.value = est.ladder.back().residual;
  Vec coef = Vec::Zero(f.dim());
  for (int d = 0; d < m; ++d) coef += fit.coefficients[d] * basis.col(d);
  est.map = semilinear::map_from_coefficients(w, coef);
  return est;
}

// ---------------------------------------------------------------------------
// gamma

namespace {

double golden_fraction(std::uint64_t seed) {
  if (seed == 0) return 0.0;
  const double g = 0.6180339887498949;
  return std::fmod(static_cast<double>(seed % 1000003) * g, 1.0);
}

Basis orthonormal_complement(const Basis& v, int n) {
  Eigen::MatrixXd full = Eigen::MatrixXd::Identity(n, n);
  if (v.cols()) full -= v * v.transpose();
  std::vector<Vec> cols;
  for (int i = 0; i < n && static_cast<int>(cols.size()) < n - v.cols(); ++i) {
    // Largest remaining projected axis first keeps the result deterministic.
    int best = -1;
    double best_norm = 0;
    Vec best_vec;
    for (int j = 0; j < n; ++j) {
      Vec c = full.col(j);
      for (const auto& u : cols) c -= u.dot(c) * u;
      if (c.norm() > best_norm + 1e-12) {
        best_norm = c.norm();
        best = j;
        best_vec = c;
      }
    }
    if (best < 0 || best_norm < 1e-9) break;
    cols.push_back(best_vec / best_norm);
  }
  Basis out(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = cols[i];
  return out;
}

Basis single(const Vec& u) {
  Basis b(u.size(), 1);
  b.col(0) = u.normalized();
  return b;
}

std::vector<Vec> hemisphere_directions(int count, std::uint64_t seed) {
  // First `count` points of a 2*count Fibonacci sphere (z > 0), rotated about z by the seed.
  std::vector<Vec> out;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  const double spin = 2 * std::numbers::pi * golden_fraction(seed);
  const int total = 2 * count;
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / total;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i + spin;
    Vec v(3);
    v << r * std::cos(phi), r * std::sin(phi), z;
    out.push_back(v);
  }
  return out;
}

std::vector<Basis> grassmannian_sweep(int n, int k, int count, std::uint64_t seed) {
  std::vector<Basis> out;
  if (n == 2 && k == 1) {
    const double off = golden_fraction(seed);
    for (int i = 0; i < count; ++i) {
      const double phi = std::numbers::pi * (i + off) / count;
      Vec u(2);
      u << std::cos(phi), std::sin(phi);
      out.push_back(single(u));
    }
  } else if (n == 3 && k == 1) {
    for (const auto& u : hemisphere_directions(count, seed)) out.push_back(single(u));
  } else if (n == 3 && k == 2) {
    for (const auto& u : hemisphere_directions(count, seed)) out.push_back(orthonormal_complement(single(u), 3));
  }
  return out;
}

Vec numeric_gradient(const DirectionalFunction& f, const Vec& p, double step) {
  Vec g(f.dim());
  for (int d = 0; d < f.dim(); ++d) {
    const Vec e = Vec::Unit(f.dim(), d) * step;
    g[d] = (eval_checked(f, p + e) - eval_checked(f, p - e)) / (2 * step);
  }
  return g;
}

// Subspace orthogonal to every gradient jump seen near x.
Basis kink_tangent_space(const DirectionalFunction& f, const Vec& x, double radius) {
  const int n = f.dim();
  const auto dirs = semilinear::sample_unit_vectors(SemiLinearSubspace::whole(n), n == 1 ? 2 : (n == 2 ? 32 : 64));
  std::vector<Vec> grads;
  double scale = 0.0;
  for (const auto& u : dirs) {
    grads.push_back(numeric_gradient(f, x + radius * u, radius / 16));
    scale = std::max(scale, grads.back().norm());
  }
  const double tol = 1e-3 * (1.0 + scale);
  std::vector<Vec> centres;
  for (const auto& g : grads) {
    bool found = false;
    for (const auto& c : centres)
      if ((c - g).norm() <= tol) found = true;
    if (!found) centres.push_back(g);
  }
  if (centres.size() <= 1) return orthonormal_complement(Basis(n, 0), n);
  Eigen::MatrixXd jumps(n, static_cast<Eigen::Index>(centres.size() - 1));
  for (std::size_t i = 1; i < centres.size(); ++i) jumps.col(static_cast<Eigen::Index>(i - 1)) = centres[i] - centres[0];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jumps, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-2 * sv[0]) ++rank;
  Basis normals(n, rank);
  normals = svd.matrixU().leftCols(rank);
  return orthonormal_complement(normals, n);
}

std::vector<Vec> halfspace_directions(const Basis& v, int n, int count) {
  const Basis comp = orthonormal_complement(v, n);
  std::vector<Vec> bs;
  if (comp.cols() == 1) {
    bs.push_back(comp.col(0));
    bs.push_back(-comp.col(0));
  } else if (comp.cols() == 2) {
    for (int i = 0; i < count; ++i) {
      const double phi = 2 * std::numbers::pi * i / count;
      bs.push_back(std::cos(phi) * comp.col(0) + std::sin(phi) * comp.col(1));
    }
  }
  return bs;
}

SemiLinearSubspace as_subspace(const Basis& v, int n) {
  std::vector<Vec> cols;
  for (Eigen::Index i = 0; i < v.cols(); ++i) cols.push_back(v.col(i));
  return SemiLinearSubspace(n, cols, {});
}

}  // namespace

GammaEstimate gamma(const DirectionalFunction& f, const Vec& x, const GammaOptions& options) {
  require_dim(f, x, "point");
  if (!(options.tol > 0)) throw ArgumentError("gamma tolerance must be positive");
  const int n = f.dim();
  GammaEstimate est;
  est.tol = options.tol;

  const double full = tau(f, x, SemiLinearSubspace::whole(n), options.tau).value;
  ++est.candidates_tried;
  if (full < options.tol) {
    est.degree = n;
    est.witness = Basis::Identity(n, n);
    est.worst_residual = full;
    return est;
  }

  const double probe = 4.0 * options.tau.ladder.radii.back();
  const Basis seed_space = kink_tangent_space(f, x, probe);

  for (int k = n - 1; k >= 1; --k) {
    std::vector<Basis> candidates;
    if (seed_space.cols() == k) {
      candidates.push_back(seed_space);
    } else if (seed_space.cols() > k) {
      for (Eigen::Index c = 0; c + k <= seed_space.cols(); ++c) candidates.push_back(seed_space.middleCols(c, k));
    }
    for (auto& b : grassmannian_sweep(n, k, options.candidates_per_dim, options.seed)) candidates.push_back(std::move(b));

    bool any = false;
    double best = std::numeric_limits<double>::infinity();
    Basis best_basis;
    for (const auto& v : candidates) {
      ++est.candidates_tried;
      const SemiLinearSubspace lin = as_subspace(v, n);
      double worst = tau(f, x, lin, options.tau).value;
      if (worst < options.tol) {
        for (const auto& b : halfspace_directions(v, n, options.b_per_subspace)) {
          worst = std::max(worst, tau(f, x, semilinear::halfspace(lin, b), options.tau).value);
          if (worst >= options.tol) break;
        }
      }
      if (worst < options.tol && worst < best) {
        any = true;
        best = worst;
        best_basis = v;
      }
    }
    if (any) {
      est.degree = k;
      est.witness = best_basis;
      est.worst_residual = best;
      return est;
    }
  }
  est.degree = 0;
  est.witness = Basis(n, 0);
  est.worst_residual = 0.0;
  return est;
}

// ---------------------------------------------------------------------------
// Scans

QuotientLadder quotient_ladder(const DirectionalFunction& f, const Vec& x, const Ladder& ladder) {
  require_dim(f, x, "point");
  ladder.validate();
  const int n = f.dim();
  std::vector<Vec> dirs;
  for (int d = 0; d < n; ++d) {
    dirs.push_back(Vec::Unit(n, d));
    dirs.push_back(-Vec::Unit(n, d));
  }
  if (n > 1) {
    const Vec diag = Vec::Ones(n).normalized();
    dirs.push_back(diag);
    dirs.push_back(-diag);
  }
  QuotientLadder out;
  out.radii = ladder.radii;
  const double f0 = eval_checked(f, x);
  for (double r : ladder.radii) {
    double worst = 0.0;
    for (const auto& u : dirs) worst = std::max(worst, std::abs(eval_checked(f, x + r * u) - f0) / r);
    out.max_abs_quotient.push_back(worst);
  }
  if (f.lipschitz()) return out;
  const auto& q = out.max_abs_quotient;
  if (q.size() >= 6) {
    bool growing = true;
    for (std::size_t j = q.size() - 5; j < q.size(); ++j)
      if (!(q[j] >= 1.2 * q[j - 1] && q[j] > 0)) growing = false;
    out.divergent = growing;
  }
  return out;
}

std::vector<SingularPoint> singular_scan(const DirectionalFunction& f, const Box& box, const std::vector<int>& resolution,
                                         const ScanOptions& options) {
  if (box.dim() != f.dim() || static_cast<int>(resolution.size()) != f.dim())
    throw ArgumentError("scan box / resolution dimension mismatch");
  for (int r : resolution)
    if (r < 16) throw ArgumentError("scan resolution must be >= 16 per axis");
  std::vector<int> node_counts(resolution);
  for (int& c : node_counts) ++c;
  const auto nodes = grid_nodes(box, node_counts);
  const double rho = 0.5 * grid_spacing(box, node_counts);

  TauOptions probe;
  probe.directions = std::max(options.directions, 2 * f.dim());
  probe.ladder.radii = {2 * rho, rho};
  GammaOptions gopt = options.gamma;
  gopt.tol = options.tol;
  gopt.tau = probe;
  const Ladder sf_ladder = Ladder::geometric(2 * rho, 20);

  std::vector<SingularPoint> slots(nodes.size());
  std::vector<char> keep(nodes.size(), 0);
  parallel_for(nodes.size(), [&](std::size_t i) {
    SingularPoint p;
    p.x = nodes[i];
    p.tau = tau(f, p.x, SemiLinearSubspace::whole(f.dim()), probe).value;
    p.sf_flag = quotient_ladder(f, p.x, sf_ladder).divergent;
    const bool flagged = p.tau >= options.tol || p.sf_flag;
    if (flagged) {
      p.gamma = options.annotate_gamma ? gamma(f, p.x, gopt).degree : -1;
      slots[i] = std::move(p);
      keep[i] = 1;
    }
  });
  std::vector<SingularPoint> out;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (keep[i]) out.push_back(std::move(slots[i]));
  return out;
}

}  // namespace tangentia::nonsmooth
