#include "tangentia/semilinear.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "tangentia/errors.hpp"

namespace tangentia::semilinear {

namespace {

// Deterministic orthonormal basis of the column space of `g`: greedy
// Gram-Schmidt over the projected unit vectors e_1..e_n, largest residual first.
Basis canonical_basis(int n, const Eigen::MatrixXd& g) {
  if (g.cols() == 0) return Basis(n, 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  int rank = 0;
  const double scale = std::max(1.0, sv.size() ? sv[0] : 0.0);
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-9 * scale) ++rank;
  if (rank == 0) return Basis(n, 0);
  const Eigen::MatrixXd u = svd.matrixU().leftCols(rank);
  const Eigen::MatrixXd proj = u * u.transpose();

  Basis basis(n, rank);
  std::vector<bool> used(n, false);
  for (int k = 0; k < rank; ++k) {
    int best = -1;
    double best_norm = -1.0;
    Vec best_vec(n);
    for (int i = 0; i < n; ++i) {
      if (used[i]) continue;
      Vec v = proj.col(i);
      for (int j = 0; j < k; ++j) v -= basis.col(j).dot(v) * basis.col(j);
      const double nv = v.norm();
      if (nv > best_norm + 1e-12) {
        best = i;
        best_norm = nv;
        best_vec = v;
      }
    }
    used[best] = true;
    basis.col(k) = best_vec / best_norm;
  }
  return basis;
}

Vec perp(const Basis& v, const Vec& w) {
  if (v.cols() == 0) return w;
  return w - v * (v.transpose() * w);
}

bool lex_less(const Vec& a, const Vec& b) {
  for (int i = 0; i < a.size(); ++i) {
    if (a[i] < b[i] - 1e-12) return true;
    if (a[i] > b[i] + 1e-12) return false;
  }
  return false;
}

std::vector<Vec> parse_vector_list(int n, const std::string& body, const std::string& full) {
  std::vector<Vec> out;
  std::size_t start = 0;
  while (start <= body.size()) {
    std::size_t end = body.find(';', start);
    if (end == std::string::npos) end = body.size();
    const std::string item = body.substr(start, end - start);
    if (!item.empty()) {
      std::vector<double> comps;
      std::size_t p = 0;
      while (p <= item.size()) {
        std::size_t q = item.find(',', p);
        if (q == std::string::npos) q = item.size();
        try {
          comps.push_back(std::stod(item.substr(p, q - p)));
        } catch (const std::exception&) {
          throw ParseError("bad number in subspace spec '" + full + "'", p);
        }
        p = q + 1;
      }
      if (static_cast<int>(comps.size()) != n)
        throw ArgumentError("subspace vector has " + std::to_string(comps.size()) + " components, expected " +
                            std::to_string(n));
      Vec v(n);
      for (int d = 0; d < n; ++d) v[d] = comps[d];
      out.push_back(v);
    }
    start = end + 1;
  }
  return out;
}

// Nonnegative least squares of w onto the (at most two) rays; returns the coefficients.
std::vector<double> cone_coefficients(const std::vector<Vec>& rays, const Vec& w) {
  if (rays.empty()) return {};
  if (rays.size() == 1) return {std::max(0.0, rays[0].dot(w))};
  const double g11 = 1.0, g22 = 1.0, g12 = rays[0].dot(rays[1]);
  const double r1 = rays[0].dot(w), r2 = rays[1].dot(w);
  const double det = g11 * g22 - g12 * g12;
  const double l1 = (r1 * g22 - r2 * g12) / det;
  const double l2 = (r2 * g11 - r1 * g12) / det;
  if (l1 >= 0 && l2 >= 0) return {l1, l2};
  // Optimum sits on a face: one ray or the apex.
  const double a = std::max(0.0, r1), b = std::max(0.0, r2);
  const double da = (w - a * rays[0]).squaredNorm();
  const double db = (w - b * rays[1]).squaredNorm();
  return da <= db ? std::vector<double>{a, 0.0} : std::vector<double>{0.0, b};
}

}  // namespace

SemiLinearSubspace::SemiLinearSubspace(int ambient_dim, const std::vector<Vec>& linear_generators,
                                       const std::vector<Vec>& ray_generators)
    : n_(ambient_dim) {
  if (n_ < 1 || n_ > kMaxDim) throw ArgumentError("ambient dimension must be 1..3");
  std::vector<Vec> lin;
  for (const auto& g : linear_generators) {
    if (g.size() != n_) throw ArgumentError("generator dimension mismatch");
    lin.push_back(g);
  }
  std::vector<Vec> pending;
  for (const auto& b : ray_generators) {
    if (b.size() != n_) throw ArgumentError("ray dimension mismatch");
    const double nb = b.norm();
    if (nb > 0) pending.push_back(b / nb);
  }

  for (;;) {
    Eigen::MatrixXd g(n_, static_cast<Eigen::Index>(lin.size()));
    for (std::size_t i = 0; i < lin.size(); ++i) g.col(static_cast<Eigen::Index>(i)) = lin[i];
    linear_ = canonical_basis(n_, g);

    std::vector<Vec> reduced;
    for (const auto& b : pending) {
      Vec p = perp(linear_, b);
      const double np = p.norm();
      if (np <= kCanonicalTol) continue;
      p /= np;
      bool dup = false;
      for (const auto& r : reduced)
        if ((r - p).norm() <= kCanonicalTol) dup = true;
      if (!dup) reduced.push_back(p);
    }
    bool absorbed = false;
    for (std::size_t i = 0; i < reduced.size() && !absorbed; ++i)
      for (std::size_t j = i + 1; j < reduced.size() && !absorbed; ++j)
        if ((reduced[i] + reduced[j]).norm() <= kCanonicalTol) {
          lin.push_back(reduced[i]);
          absorbed = true;
        }
    if (absorbed) continue;

    // Drop rays already generated by the others.
    if (reduced.size() > static_cast<std::size_t>(kMaxRays)) {
      for (std::size_t i = 0; i < reduced.size();) {
        std::vector<Vec> others;
        for (std::size_t j = 0; j < reduced.size(); ++j)
          if (j != i) others.push_back(reduced[j]);
        bool redundant = false;
        if (others.size() <= 2) {
          const auto c = cone_coefficients(others, reduced[i]);
          Vec fit = Vec::Zero(n_);
          for (std::size_t k = 0; k < c.size(); ++k) fit += c[k] * others[k];
          redundant = (fit - reduced[i]).norm() <= 1e-9;
        }
        if (redundant)
          reduced.erase(reduced.begin() + static_cast<std::ptrdiff_t>(i));
        else
          ++i;
      }
    }
    if (reduced.size() > static_cast<std::size_t>(kMaxRays))
      throw ArgumentError("semi-linear subspace needs more than two rays; only V + <b1,b2>^+ is supported");
    std::sort(reduced.begin(), reduced.end(), lex_less);
    rays_ = std::move(reduced);
    break;
  }

  Eigen::MatrixXd all(n_, linear_.cols() + static_cast<Eigen::Index>(rays_.size()));
  all.leftCols(linear_.cols()) = linear_;
  for (std::size_t i = 0; i < rays_.size(); ++i) all.col(linear_.cols() + static_cast<Eigen::Index>(i)) = rays_[i];
  // Keep V's columns first so coordinates split into linear and ray parts.
  Basis span(n_, 0);
  std::vector<Vec> cols;
  for (Eigen::Index c = 0; c < all.cols(); ++c) {
    Vec v = all.col(c);
    for (const auto& u : cols) v -= u.dot(v) * u;
    const double nv = v.norm();
    if (nv > 1e-9) cols.push_back(v / nv);
  }
  span_.resize(n_, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) span_.col(static_cast<Eigen::Index>(i)) = cols[i];
}

SemiLinearSubspace SemiLinearSubspace::whole(int n) {
  std::vector<Vec> e;
  for (int i = 0; i < n; ++i) e.push_back(Vec::Unit(n, i));
  return SemiLinearSubspace(n, e, {});
}

SemiLinearSubspace SemiLinearSubspace::trivial(int n) { return SemiLinearSubspace(n, {}, {}); }

SemiLinearSubspace SemiLinearSubspace::span(const std::vector<Vec>& generators) {
  if (generators.empty()) throw ArgumentError("span of nothing: pass the ambient dimension via trivial()");
  return SemiLinearSubspace(static_cast<int>(generators[0].size()), generators, {});
}

SemiLinearSubspace SemiLinearSubspace::ray(const Vec& b) {
  return SemiLinearSubspace(static_cast<int>(b.size()), {}, {b});
}

SemiLinearSubspace SemiLinearSubspace::parse(int n, const std::string& text) {
  std::vector<Vec> lin, rays;
  std::string compact;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) compact += c;
  if (compact == "full" || compact == "R") return whole(n);
  if (compact == "0" || compact.empty()) return trivial(n);
  std::size_t pos = 0;
  while (pos < compact.size()) {
    const std::size_t eq = compact.find('=', pos);
    if (eq == std::string::npos) throw ParseError("expected 'V=[...]' or 'ray=[...]' in '" + text + "'", pos);
    const std::string key = compact.substr(pos, eq - pos);
    if (eq + 1 >= compact.size() || compact[eq + 1] != '[') throw ParseError("expected '['", eq + 1);
    const std::size_t close = compact.find(']', eq + 2);
    if (close == std::string::npos) throw ParseError("missing ']'", eq + 2);
    auto vecs = parse_vector_list(n, compact.substr(eq + 2, close - eq - 2), text);
    if (key == "V")
      lin.insert(lin.end(), vecs.begin(), vecs.end());
    else if (key == "ray")
      rays.insert(rays.end(), vecs.begin(), vecs.end());
    else
      throw ParseError("unknown subspace key '" + key + "' (expected V or ray)", pos);
    pos = close + 1;
    if (pos < compact.size()) {
      if (compact[pos] != ';') throw ParseError("expected ';' between parts", pos);
      ++pos;
    }
  }
  return SemiLinearSubspace(n, lin, rays);
}

bool SemiLinearSubspace::contains(const Vec& w, double tol) const {
  if (w.size() != n_) return false;
  const Vec p = perp(linear_, w);
  const double scale = 1.0 + w.norm();
  const auto c = cone_coefficients(rays_, p);
  Vec fit = Vec::Zero(n_);
  for (std::size_t k = 0; k < c.size(); ++k) fit += c[k] * rays_[k];
  return (p - fit).norm() <= tol * scale;
}

Vec SemiLinearSubspace::project(const Vec& w) const {
  const Vec p = perp(linear_, w);
  Vec out = w - p;
  const auto c = cone_coefficients(rays_, p);
  for (std::size_t k = 0; k < c.size(); ++k) out += c[k] * rays_[k];
  return out;
}

std::vector<Vec> SemiLinearSubspace::generators() const {
  std::vector<Vec> g;
  for (Eigen::Index i = 0; i < linear_.cols(); ++i) {
    g.push_back(linear_.col(i));
    g.push_back(-linear_.col(i));
  }
  for (const auto& r : rays_) g.push_back(r);
  return g;
}

bool SemiLinearSubspace::equals(const SemiLinearSubspace& other, double tol) const {
  if (n_ != other.n_ || linear_dim() != other.linear_dim() || rays_.size() != other.rays_.size()) return false;
  const Eigen::MatrixXd pa = linear_ * linear_.transpose();
  const Eigen::MatrixXd pb = other.linear_ * other.linear_.transpose();
  if ((pa - pb).norm() > tol * 10) return false;
  for (std::size_t i = 0; i < rays_.size(); ++i)
    if ((rays_[i] - other.rays_[i]).norm() > tol * 10) return false;
  return true;
}

std::string SemiLinearSubspace::describe() const {
  auto list = [](const std::vector<Vec>& vs) {
    std::string s = "[";
    char buf[32];
    for (std::size_t i = 0; i < vs.size(); ++i) {
      if (i) s += ";";
      for (int d = 0; d < vs[i].size(); ++d) {
        std::snprintf(buf, sizeof buf, "%.12g", vs[i][d]);
        if (d) s += ",";
        s += buf;
      }
    }
    return s + "]";
  };
  std::vector<Vec> lin;
  for (Eigen::Index i = 0; i < linear_.cols(); ++i) lin.push_back(linear_.col(i));
  std::string s;
  if (!lin.empty()) s += "V=" + list(lin);
  if (!rays_.empty()) s += (s.empty() ? "" : ";") + std::string("ray=") + list(rays_);
  return s.empty() ? "0" : s;
}

SemiLinearSubspace halfspace(const SemiLinearSubspace& linear, const Vec& b) {
  if (!linear.is_linear()) throw ArgumentError("halfspace: V must be a linear subspace");
  std::vector<Vec> lin;
  for (Eigen::Index i = 0; i < linear.linear_basis().cols(); ++i) lin.push_back(linear.linear_basis().col(i));
  if (b.norm() == 0.0) return SemiLinearSubspace(linear.ambient_dim(), lin, {});
  return SemiLinearSubspace(linear.ambient_dim(), lin, {b});
}

// ---------------------------------------------------------------------------
// Direction sampling

namespace {

double unit_from(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

Eigen::Matrix3d seeded_rotation(std::uint64_t seed) {
  if (seed == 0) return Eigen::Matrix3d::Identity();
  std::mt19937_64 rng(seed);
  // Uniform random unit quaternion (Shoemake).
  const double u1 = unit_from(rng()), u2 = unit_from(rng()), u3 = unit_from(rng());
  const double a = std::sqrt(1 - u1), b = std::sqrt(u1);
  Eigen::Quaterniond q(a * std::sin(2 * std::numbers::pi * u2), a * std::cos(2 * std::numbers::pi * u2),
                       b * std::sin(2 * std::numbers::pi * u3), b * std::cos(2 * std::numbers::pi * u3));
  return q.normalized().toRotationMatrix();
}

std::vector<Eigen::Vector3d> fibonacci_sphere(int count, const Eigen::Matrix3d& rot) {
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(count);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    pts.push_back(rot * Eigen::Vector3d(r * std::cos(phi), r * std::sin(phi), z));
  }
  return pts;
}

void push_unique(std::vector<Vec>& out, const Vec& v) {
  for (const auto& u : out)
    if ((u - v).norm() < 1e-12) return;
  out.push_back(v);
}

}  // namespace

std::vector<Vec> sample_unit_vectors(const SemiLinearSubspace& w, int count, std::uint64_t seed) {
  if (w.is_trivial()) throw ArgumentError("cannot sample unit vectors of the trivial subspace {0}");
  if (count < 1) throw ArgumentError("sample count must be >= 1");
  const int m = w.span_dim();
  const Basis& basis = w.span_basis();

  std::vector<Vec> gens;
  for (const auto& g : w.generators()) push_unique(gens, g);

  std::vector<Vec> out;
  out.reserve(count);
  if (m == 1) {
    for (int i = 0; i < count; ++i) out.push_back(gens[i % gens.size()]);
    return out;
  }

  if (m == 2) {
    // Circle or arc in the plane spanned by the two basis columns.
    const Vec e0 = basis.col(0), e1 = basis.col(1);
    auto angle_of = [&](const Vec& v) { return std::atan2(v.dot(e1), v.dot(e0)); };
    if (w.is_linear()) {
      const double offset = 2.0 * std::numbers::pi * unit_from(seed * 0x9E3779B97F4A7C15ULL) / count;
      for (int i = 0; i < count; ++i) {
        const double phi = offset + 2.0 * std::numbers::pi * i / count;
        out.push_back(std::cos(phi) * e0 + std::sin(phi) * e1);
      }
      return out;
    }
    // Arc between the two extreme directions of the cone.
    Vec start, finish;
    if (w.linear_dim() == 1) {
      const Vec v = w.linear_basis().col(0);
      start = -v;
      finish = v;
    } else {
      start = w.rays()[0];
      finish = w.rays()[1];
    }
    const double a0 = angle_of(start);
    double span;
    if (w.linear_dim() == 1) {
      // Half circle from -v to +v passing through the ray.
      const double to_ray = std::remainder(angle_of(w.rays()[0]) - a0, 2 * std::numbers::pi);
      span = to_ray >= 0 ? std::numbers::pi : -std::numbers::pi;
    } else {
      // Pointed cone: the short arc between its two rays.
      span = std::remainder(angle_of(finish) - a0, 2 * std::numbers::pi);
    }
    if (count == 1) {
      const double phi = a0 + span / 2;
      out.push_back(std::cos(phi) * e0 + std::sin(phi) * e1);
      return out;
    }
    for (int i = 0; i < count; ++i) {
      const double phi = a0 + span * i / (count - 1);
      out.push_back(std::cos(phi) * e0 + std::sin(phi) * e1);
    }
    return out;
  }

  // m == 3 (so n == 3).
  const Eigen::Matrix3d rot = seeded_rotation(seed);
  if (w.is_linear()) {
    for (const auto& p : fibonacci_sphere(count, rot)) out.push_back(Vec(p));
    return out;
  }
  if (count <= static_cast<int>(gens.size())) return {gens.begin(), gens.begin() + count};
  std::vector<Vec> candidates;
  for (int k = std::max(64, 8 * count); k <= (1 << 22); k *= 2) {
    candidates.clear();
    for (const auto& p : fibonacci_sphere(k, rot)) {
      const Vec v(p);
      if (w.contains(v, 1e-12)) candidates.push_back(v);
    }
    if (static_cast<int>(candidates.size()) >= 4 * (count - static_cast<int>(gens.size()))) break;
  }
  // Farthest-point selection seeded with the generators.
  out = gens;
  std::vector<double> gap(candidates.size(), std::numeric_limits<double>::infinity());
  for (std::size_t c = 0; c < candidates.size(); ++c)
    for (const auto& g : gens) gap[c] = std::min(gap[c], (candidates[c] - g).norm());
  while (static_cast<int>(out.size()) < count && !candidates.empty()) {
    const auto it = std::max_element(gap.begin(), gap.end());
    const std::size_t pick = static_cast<std::size_t>(it - gap.begin());
    const Vec chosen = candidates[pick];
    out.push_back(chosen);
    for (std::size_t c = 0; c < candidates.size(); ++c) gap[c] = std::min(gap[c], (candidates[c] - chosen).norm());
  }
  while (static_cast<int>(out.size()) < count) out.push_back(out[out.size() % gens.size()]);
  return out;
}

// ---------------------------------------------------------------------------
// Hausdorff distance

namespace {

double directed_hc(const std::vector<Vec>& from, const SemiLinearSubspace& to) {
  double worst = 0.0;
  for (const auto& u : from) {
    Vec p = to.project(u);
    const double np = p.norm();
    if (np > 1.0) p /= np;
    worst = std::max(worst, (u - p).norm());
  }
  return worst;
}

double mesh_spacing(const SemiLinearSubspace& w, const std::vector<Vec>& samples) {
  if (w.span_dim() <= 1) return 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < samples.size(); ++j) {
      const double d = (samples[i] - samples[j]).norm();
      if (j != i && d > 1e-14) nearest = std::min(nearest, d);
    }
    if (std::isfinite(nearest)) worst = std::max(worst, nearest);
  }
  return worst;
}

}  // namespace

HausdorffEstimate hc_distance(const SemiLinearSubspace& a, const SemiLinearSubspace& b, int samples) {
  if (a.ambient_dim() != b.ambient_dim()) throw ArgumentError("hc_distance: ambient dimensions differ");
  if (samples < 100) throw ArgumentError("hc_distance: need at least 100 samples");
  if (a.is_trivial() && b.is_trivial()) return {0.0, 0.0};
  if (a.is_trivial() || b.is_trivial()) return {1.0, 0.0};
  const auto sa = sample_unit_vectors(a, samples);
  const auto sb = sample_unit_vectors(b, samples);
  HausdorffEstimate est;
  est.value = std::max(directed_hc(sa, b), directed_hc(sb, a));
  est.mesh_error = std::max(mesh_spacing(a, sa), mesh_spacing(b, sb));
  return est;
}

// ---------------------------------------------------------------------------
// Linear maps

double SemiLinearMap::operator()(const Vec& w) const {
  if (!extended) throw ArgumentError("map must be extended before evaluation");
  return coefficients.dot(w);
}

SemiLinearMap make_map(const SemiLinearSubspace& w, const std::vector<double>& generator_values) {
  if (generator_values.size() != w.generators().size())
    throw ArgumentError("need one value per generator (" + std::to_string(w.generators().size()) + ")");
  return SemiLinearMap{w, generator_values, Vec::Zero(w.ambient_dim()), false};
}

SemiLinearMap map_from_coefficients(const SemiLinearSubspace& w, const Vec& coefficients) {
  const Basis& b = w.span_basis();
  const Vec d = b.cols() ? Vec(b * (b.transpose() * coefficients)) : Vec(Vec::Zero(w.ambient_dim()));
  std::vector<double> values;
  for (const auto& g : w.generators()) values.push_back(d.dot(g));
  return SemiLinearMap{w, std::move(values), d, true};
}

SemiLinearMap extend_linear_map(const SemiLinearMap& map, double tol) {
  const auto gens = map.carrier.generators();
  const Basis& basis = map.carrier.span_basis();
  const int n = map.carrier.ambient_dim();
  SemiLinearMap out = map;
  if (gens.empty()) {
    out.coefficients = Vec::Zero(n);
    out.extended = true;
    return out;
  }
  const int m = static_cast<int>(basis.cols());
  Eigen::MatrixXd a(static_cast<Eigen::Index>(gens.size()), m);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(gens.size()));
  for (std::size_t i = 0; i < gens.size(); ++i) {
    a.row(static_cast<Eigen::Index>(i)) = (basis.transpose() * gens[i]).transpose();
    rhs[static_cast<Eigen::Index>(i)] = map.generator_values[i];
  }
  const Eigen::VectorXd c = a.colPivHouseholderQr().solve(rhs);
  const Eigen::VectorXd resid = a * c - rhs;
  const double scale = 1.0 + rhs.cwiseAbs().maxCoeff();
  if (resid.cwiseAbs().maxCoeff() > tol * scale)
    throw ConsistencyError("generator values are not positively linear on W (residual " +
                           std::to_string(resid.cwiseAbs().maxCoeff()) + ")");
  out.coefficients = basis * c;
  out.extended = true;
  return out;
}

}  // namespace tangentia::semilinear
