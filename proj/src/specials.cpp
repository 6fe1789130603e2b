#include "tangentia/specials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "json.hpp"
#include "tangentia/errors.hpp"
#include "tangentia/parallel.hpp"

namespace tangentia::specials {

namespace {

constexpr double kTieRel = 1e-6;
constexpr double kDedupAngle = 1e-4;

double angle_between(const Vec& a, const Vec& b) {
  const double c = std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0);
  return std::acos(c);
}

Vec closest_on_segment(const Vec& p, const Vec& a, const Vec& b) {
  const Vec ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return a + t * ab;
}

void require_dim(int n, const Vec& v, const char* what) {
  if (v.size() != n) throw ArgumentError(std::string(what) + " dimension does not match the set");
}

// Greedy angular clustering of candidates already sorted by distance.
std::vector<Vec> dedup_by_angle(const Vec& x, const std::vector<ClosedSetModel::Candidate>& sorted, double min_angle) {
  std::vector<Vec> kept;
  for (const auto& c : sorted) {
    bool fresh = true;
    for (const auto& k : kept) {
      if ((k - c.point).norm() <= 1e-12 * (1 + k.norm()) || angle_between(x - k, x - c.point) < min_angle) {
        fresh = false;
        break;
      }
    }
    if (fresh) kept.push_back(c.point);
  }
  return kept;
}

// Level-set crossings sample a connected curve, so nearby candidates are merged
// by single linkage; each cluster is represented by its closest member.
std::vector<Vec> cluster_by_linkage(const std::vector<ClosedSetModel::Candidate>& sorted, double link) {
  std::vector<int> label(sorted.size(), -1);
  std::vector<Vec> reps;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (label[i] >= 0) continue;
    const int id = static_cast<int>(reps.size());
    reps.push_back(sorted[i].point);
    std::vector<std::size_t> stack{i};
    label[i] = id;
    while (!stack.empty()) {
      const std::size_t k = stack.back();
      stack.pop_back();
      for (std::size_t j = 0; j < sorted.size(); ++j)
        if (label[j] < 0 && (sorted[j].point - sorted[k].point).norm() <= link) {
          label[j] = id;
          stack.push_back(j);
        }
    }
  }
  return reps;
}

std::vector<Vec> distinct_points(const ClosedSetModel& a, const Vec& x,
                                 const std::vector<ClosedSetModel::Candidate>& sorted) {
  if (a.kind() == SetKind::LevelSet) return cluster_by_linkage(sorted, 2 * a.cell());
  return dedup_by_angle(x, sorted, kDedupAngle);
}

}  // namespace

// ---------------------------------------------------------------------------
// ClosedSetModel

ClosedSetModel::ClosedSetModel(SetKind kind, int dim, std::vector<Vec> pts)
    : kind_(kind), dim_(dim), pts_(std::move(pts)), batch_(dim, pts_.size()) {
  if (pts_.empty()) throw ArgumentError("closed set must be nonempty");
  if (dim < 1 || dim > kMaxDim) throw ArgumentError("set dimension must be 1..3");
  double extent = 0.0;
  for (std::size_t i = 0; i < pts_.size(); ++i) {
    require_dim(dim, pts_[i], "point");
    for (int d = 0; d < dim; ++d)
      if (!std::isfinite(pts_[i][d])) throw ArgumentError("set coordinates must be finite");
    batch_.set(i, pts_[i]);
    extent = std::max(extent, pts_[i].cwiseAbs().maxCoeff());
  }
  scale_ = 1.0 + extent;
}

ClosedSetModel ClosedSetModel::points(std::vector<Vec> pts) {
  if (pts.empty()) throw ArgumentError("closed set must be nonempty");
  const int n = static_cast<int>(pts[0].size());
  return ClosedSetModel(SetKind::Points, n, std::move(pts));
}

ClosedSetModel ClosedSetModel::polygon(std::vector<Vec> vertices) {
  if (vertices.size() >= 2 && (vertices.front() - vertices.back()).norm() == 0.0) vertices.pop_back();
  if (vertices.size() < 3) throw ArgumentError("polygon needs at least three vertices");
  for (const auto& v : vertices)
    if (v.size() != 2) throw ArgumentError("polygon vertices must be 2D");
  double area2 = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const Vec& a = vertices[i];
    const Vec& b = vertices[(i + 1) % vertices.size()];
    area2 += a[0] * b[1] - a[1] * b[0];
  }
  if (std::abs(area2) < 1e-14) throw ArgumentError("polygon is degenerate (zero area)");
  if (area2 < 0) std::reverse(vertices.begin(), vertices.end());
  return ClosedSetModel(SetKind::Polygon, 2, std::move(vertices));
}

ClosedSetModel ClosedSetModel::polygon_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("polygon JSON: ") + e.what(), e.byte);
  }
  const nlohmann::json& list = j.is_object() ? j.at("vertices") : j;
  if (!list.is_array()) throw ArgumentError("polygon JSON must be a vertex array");
  std::vector<Vec> verts;
  for (const auto& v : list) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
      throw ArgumentError("polygon vertices must be [x, y] number pairs");
    verts.push_back(Vec{{v[0].get<double>(), v[1].get<double>()}});
  }
  return polygon(std::move(verts));
}

ClosedSetModel ClosedSetModel::level_set(const funcspace::GridFunction& g, double level) {
  const int n = g.dim();
  const auto& res = g.resolution();
  std::vector<Vec> crossings;
  std::vector<int> idx(n, 0), nb(n);
  std::size_t total = 1;
  for (int r : res) total *= static_cast<std::size_t>(r);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (int d = n - 1; d >= 0; --d) {
      idx[d] = static_cast<int>(rem % res[d]);
      rem /= res[d];
    }
    const double v0 = g.sample(idx) - level;
    const Vec p0 = g.node(idx);
    if (v0 == 0.0) crossings.push_back(p0);
    for (int d = 0; d < n; ++d) {
      if (idx[d] + 1 >= res[d]) continue;
      nb = idx;
      ++nb[d];
      const double v1 = g.sample(nb) - level;
      if (v0 * v1 < 0.0) {
        const double t = v0 / (v0 - v1);
        crossings.push_back(p0 + t * (g.node(nb) - p0));
      }
    }
  }
  if (crossings.empty()) throw ArgumentError("level set is empty on this grid");
  ClosedSetModel m(SetKind::LevelSet, n, std::move(crossings));
  for (int d = 0; d < n; ++d) m.cell_ = std::max(m.cell_, g.spacing(d));
  return m;
}

std::vector<ClosedSetModel::Candidate> ClosedSetModel::candidates(const Vec& x) const {
  require_dim(dim_, x, "query point");
  std::vector<Candidate> out;
  if (kind_ == SetKind::Polygon) {
    for (std::size_t i = 0; i < pts_.size(); ++i) {
      const Vec p = closest_on_segment(x, pts_[i], pts_[(i + 1) % pts_.size()]);
      out.push_back({p, (x - p).norm()});
    }
    return out;
  }
  std::vector<double> d2(pts_.size());
  kernels::squared_distances(batch_, x, d2);
  out.reserve(pts_.size());
  for (std::size_t i = 0; i < pts_.size(); ++i) out.push_back({pts_[i], std::sqrt(d2[i])});
  return out;
}

double ClosedSetModel::distance(const Vec& x) const {
  require_dim(dim_, x, "query point");
  if (kind_ == SetKind::Polygon) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : candidates(x)) best = std::min(best, c.distance);
    return best;
  }
  std::vector<double> d2(pts_.size());
  kernels::squared_distances(batch_, x, d2);
  return std::sqrt(*std::min_element(d2.begin(), d2.end()));
}

bool ClosedSetModel::contains(const Vec& x) const { return distance(x) <= 1e-12 * scale_; }

// ---------------------------------------------------------------------------
// Nearest points and the derivative formula

NearestSet nearest_set(const ClosedSetModel& a, const Vec& x) {
  auto cands = a.candidates(x);
  double dmin = std::numeric_limits<double>::infinity();
  for (const auto& c : cands) dmin = std::min(dmin, c.distance);
  if (a.contains(x)) throw ArgumentError("point " + format_point(x) + " lies in A; the distance function lives on R^n \\ A");
  NearestSet out;
  out.distance = dmin;
  out.cell_accurate = a.kind() == SetKind::LevelSet;
  const double cutoff = out.cell_accurate ? dmin + 0.5 * a.cell() : dmin * (1 + kTieRel);
  std::vector<ClosedSetModel::Candidate> near;
  for (const auto& c : cands)
    if (c.distance <= cutoff) near.push_back(c);
  std::stable_sort(near.begin(), near.end(), [](const auto& p, const auto& q) { return p.distance < q.distance; });
  out.points = distinct_points(a, x, near);
  return out;
}

double distance_directional_derivative(const ClosedSetModel& a, const Vec& x, const Vec& theta) {
  require_dim(a.dim(), theta, "direction");
  if (std::abs(theta.norm() - 1.0) > 1e-9) throw ArgumentError("theta must be a unit vector");
  const auto ns = nearest_set(a, x);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& y : ns.points) best = std::min(best, theta.dot((x - y).normalized()));
  return best;
}

FormulaCheck check_distance_derivative(const ClosedSetModel& a, const Vec& x, const Vec& theta, double h) {
  if (!(h > 0)) throw ArgumentError("step must be positive");
  FormulaCheck c;
  c.formula = distance_directional_derivative(a, x, theta);
  c.finite_difference = (a.distance(x + h * theta) - a.distance(x)) / h;
  c.difference = std::abs(c.formula - c.finite_difference);
  return c;
}

DirectionalFunction distance_function(const ClosedSetModel& a) {
  auto model = std::make_shared<const ClosedSetModel>(a);
  DirectionalFunction g(a.dim(), [model](const Vec& x) { return model->distance(x); }, "dist");
  g.with_derivative([model](const Vec& x, const Vec& theta) -> std::optional<double> {
    if (model->contains(x) || model->kind() == SetKind::LevelSet) return std::nullopt;
    return distance_directional_derivative(*model, x, theta);
  });
  g.with_lipschitz(1.0);
  return g;
}

// ---------------------------------------------------------------------------
// Medial axis scan

std::vector<MedialPoint> medial_scan(const ClosedSetModel& a, const Box& box, const std::vector<int>& resolution) {
  if (box.dim() != a.dim() || static_cast<int>(resolution.size()) != a.dim())
    throw ArgumentError("scan box / resolution dimension mismatch");
  for (int r : resolution)
    if (r < 32) throw ArgumentError("medial scan resolution must be >= 32 per axis");
  std::vector<int> counts(resolution);
  for (int& c : counts) ++c;
  const auto nodes = grid_nodes(box, counts);
  const double h = grid_spacing(box, counts);

  std::vector<MedialPoint> slots(nodes.size());
  std::vector<char> keep(nodes.size(), 0);
  parallel_for(nodes.size(), [&](std::size_t i) {
    const Vec& x = nodes[i];
    if (a.contains(x)) return;
    auto cands = a.candidates(x);
    std::stable_sort(cands.begin(), cands.end(), [](const auto& p, const auto& q) { return p.distance < q.distance; });
    const double dmin = cands.front().distance;
    const Vec umin = (x - cands.front().point) / dmin;
    std::vector<ClosedSetModel::Candidate> tied;
    for (const auto& c : cands) {
      const Vec u = (x - c.point) / c.distance;
      if (c.distance - dmin <= std::max(kTieRel * dmin, 0.5 * h * (u - umin).norm())) tied.push_back(c);
    }
    slots[i] = {x, dmin, static_cast<int>(distinct_points(a, x, tied).size())};
    keep[i] = 1;
  });
  std::vector<MedialPoint> out;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (keep[i]) out.push_back(std::move(slots[i]));
  return out;
}

// ---------------------------------------------------------------------------
// Infimal convolution

Coupling moreau_coupling(double t) {
  if (!(t > 0)) throw ArgumentError("Moreau parameter must be positive");
  return [t](const Vec& x, const Vec& y) { return (x - y).squaredNorm() / (2 * t); };
}

namespace {

std::vector<Vec> pattern_directions(int m) {
  std::vector<Vec> dirs;
  for (int i = 0; i < m; ++i) {
    dirs.push_back(Vec::Unit(m, i));
    dirs.push_back(-Vec::Unit(m, i));
    for (int j = i + 1; j < m; ++j)
      for (int s : {1, -1}) {
        dirs.push_back((Vec::Unit(m, i) + s * Vec::Unit(m, j)).normalized());
        dirs.push_back(-(Vec::Unit(m, i) + s * Vec::Unit(m, j)).normalized());
      }
  }
  return dirs;
}

Vec clamp_to(const Box& b, Vec y) {
  for (int d = 0; d < y.size(); ++d) y[d] = std::clamp(y[d], b.lo[d], b.hi[d]);
  return y;
}

}  // namespace

InfConvolution inf_convolution(const DirectionalFunction& u, const Coupling& coupling, const Vec& x, const Box& ybox,
                               int resolution, bool strict) {
  const int m = u.dim();
  if (ybox.dim() != m) throw ArgumentError("y-box dimension does not match u");
  if (resolution < 2) throw ArgumentError("y resolution must be >= 2");
  if (!coupling) throw ArgumentError("coupling is empty");
  auto phi = [&](const Vec& y) {
    const double v = u(y) + coupling(x, y);
    if (!std::isfinite(v)) throw DomainError("nonfinite objective at y = " + format_point(y));
    return v;
  };
  std::vector<int> counts(m, resolution + 1);
  const auto ys = grid_nodes(ybox, counts);
  std::vector<double> vals(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) vals[i] = phi(ys[i]);
  const double grid_best = *std::min_element(vals.begin(), vals.end());

  // Grid-local minima (<= every axis neighbour).
  std::vector<std::size_t> stride(m, 1);
  for (int d = m - 2; d >= 0; --d) stride[d] = stride[d + 1] * static_cast<std::size_t>(counts[d + 1]);
  const double h = grid_spacing(ybox, counts);
  const double spread = std::abs(grid_best) + 1.0;
  std::vector<std::pair<Vec, double>> refined;
  const auto dirs = pattern_directions(m);
  for (std::size_t i = 0; i < ys.size(); ++i) {
    bool local = true;
    std::size_t rem = i;
    for (int d = 0; d < m && local; ++d) {
      const std::size_t k = (rem / stride[d]) % counts[d];
      if (k > 0 && vals[i - stride[d]] < vals[i]) local = false;
      if (k + 1 < static_cast<std::size_t>(counts[d]) && vals[i + stride[d]] < vals[i]) local = false;
    }
    (void)rem;
    if (!local || vals[i] > grid_best + 0.1 * spread) continue;
    Vec y = ys[i];
    double fy = vals[i];
    for (double step = h; step > 1e-13 * (1 + ybox.diameter());) {
      bool moved = false;
      for (const auto& dvec : dirs) {
        const Vec cand = clamp_to(ybox, y + step * dvec);
        const double fc = phi(cand);
        if (fc < fy) {
          y = cand;
          fy = fc;
          moved = true;
          break;
        }
      }
      if (!moved) step *= 0.5;
    }
    refined.emplace_back(y, fy);
  }
  InfConvolution out;
  out.value = std::numeric_limits<double>::infinity();
  for (const auto& r : refined) out.value = std::min(out.value, r.second);
  const double tie = 1e-9 * (1 + std::abs(out.value));
  for (const auto& [y, v] : refined) {
    if (v > out.value + tie) continue;
    bool dup = false;
    for (const auto& k : out.minimizers)
      if ((k - y).norm() <= 1e-6 * (1 + ybox.diameter())) dup = true;
    if (!dup) out.minimizers.push_back(y);
  }
  for (const auto& y : out.minimizers)
    for (int d = 0; d < m; ++d)
      if (y[d] <= ybox.lo[d] + 1e-9 * (1 + std::abs(ybox.lo[d])) || y[d] >= ybox.hi[d] - 1e-9 * (1 + std::abs(ybox.hi[d])))
        out.boundary = true;
  if (strict && out.boundary)
    throw PreconditionError("infimal convolution minimum sits on the y-box boundary; enlarge the box");
  return out;
}

DirectionalFunction inf_convolution_function(const DirectionalFunction& u, const Coupling& coupling, const Box& ybox,
                                             int resolution) {
  return DirectionalFunction(
      u.dim(), [u, coupling, ybox, resolution](const Vec& x) { return inf_convolution(u, coupling, x, ybox, resolution).value; },
      "infconv(" + u.label() + ")");
}

// ---------------------------------------------------------------------------
// Pointwise maxima of C^1 families

MaxFamily::MaxFamily(std::vector<FamilyMember> members, double active_tol, std::uint64_t seed,
                     std::optional<Box> probe_box)
    : active_tol_(active_tol), members_(std::move(members)) {
  if (members_.empty()) throw ArgumentError("max family must be nonempty");
  if (!(active_tol >= 0)) throw ArgumentError("active tolerance must be >= 0");
  dim_ = members_[0].f.dim();
  for (const auto& m : members_) {
    if (m.f.dim() != dim_) throw ArgumentError("family members have mixed dimensions");
    if (!m.gradient) throw ArgumentError("every family member needs a gradient oracle");
  }
  const Box box = probe_box.value_or(Box{Vec::Constant(dim_, -1.0), Vec::Constant(dim_, 1.0)});
  std::mt19937_64 rng(seed);
  for (int probe = 0; probe < 10; ++probe) {
    Vec p(dim_);
    for (int d = 0; d < dim_; ++d) p[d] = std::uniform_real_distribution<double>(box.lo[d], box.hi[d])(rng);
    for (std::size_t k = 0; k < members_.size(); ++k) {
      const Vec g = members_[k].gradient(p);
      if (g.size() != dim_) throw ArgumentError("gradient oracle returned the wrong dimension");
      for (int d = 0; d < dim_; ++d) {
        const double h = 1e-6 * (1 + std::abs(p[d]));
        const Vec e = Vec::Unit(dim_, d) * h;
        const double fd = (members_[k].f(p + e) - members_[k].f(p - e)) / (2 * h);
        if (std::abs(fd - g[d]) > 1e-5 * (1 + std::abs(g[d])))
          throw ConsistencyError("gradient of family member " + std::to_string(k) + " disagrees with finite differences at " +
                                 format_point(p));
      }
    }
  }
}

MaxFamily MaxFamily::affine(const kernels::AffineFamily& family, double active_tol) {
  std::vector<FamilyMember> members;
  for (std::size_t k = 0; k < family.size(); ++k) {
    Vec a(family.dim);
    for (int d = 0; d < family.dim; ++d) a[d] = family.slope[d][k];
    const double c = family.offset[k];
    DirectionalFunction f(family.dim, [a, c](const Vec& x) { return a.dot(x) + c; }, "affine");
    members.push_back({f, [a](const Vec&) { return a; }});
  }
  return MaxFamily(std::move(members), active_tol);
}

double MaxFamily::operator()(const Vec& x) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& m : members_) best = std::max(best, m.f(x));
  return best;
}

std::vector<std::size_t> MaxFamily::active_set(const Vec& x) const {
  if (x.size() != dim_) throw ArgumentError("point dimension does not match the family");
  std::vector<double> v(members_.size());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < members_.size(); ++k) best = std::max(best, v[k] = members_[k].f(x));
  std::vector<std::size_t> active;
  for (std::size_t k = 0; k < members_.size(); ++k)
    if (v[k] >= best - active_tol_) active.push_back(k);
  return active;
}

DirectionalFunction MaxFamily::assembled() const {
  auto self = std::make_shared<const MaxFamily>(*this);
  DirectionalFunction f(dim_, [self](const Vec& x) { return (*self)(x); }, "maxfamily");
  f.with_derivative(
      [self](const Vec& x, const Vec& theta) -> std::optional<double> { return max_family_derivative(*self, x, theta); });
  return f;
}

double max_family_derivative(const MaxFamily& family, const Vec& x, const Vec& theta) {
  if (theta.size() != family.dim()) throw ArgumentError("direction dimension does not match the family");
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k : family.active_set(x)) best = std::max(best, family.members()[k].gradient(x).dot(theta));
  return best;
}

}  // namespace tangentia::specials
