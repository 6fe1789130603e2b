#include "tangentia/tangency.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <tuple>

#include "tangentia/errors.hpp"
#include "tangentia/kernels.hpp"
#include "tangentia/parallel.hpp"

namespace tangentia::tangency {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int common_dim(const std::vector<Vec>& points) {
  if (points.empty()) return 0;
  const int n = static_cast<int>(points[0].size());
  if (n < 1 || n > kMaxDim) throw ArgumentError("points must live in R^1..R^3");
  for (const auto& p : points)
    if (p.size() != n) throw ArgumentError("points have mixed dimensions");
  return n;
}

PointBatch to_batch(const std::vector<Vec>& points, int n) {
  PointBatch b(n, points.size());
  for (std::size_t i = 0; i < points.size(); ++i) b.set(i, points[i]);
  return b;
}

nlohmann::json number_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

nlohmann::json basis_json(const Basis& b) {
  nlohmann::json cols = nlohmann::json::array();
  for (int c = 0; c < b.cols(); ++c) {
    nlohmann::json col = nlohmann::json::array();
    for (int r = 0; r < b.rows(); ++r) col.push_back(b(r, c));
    cols.push_back(col);
  }
  return cols;
}

// Sine of the largest principal angle between span(a) and span(b), equal dims.
double subspace_distance(const Basis& a, const Basis& b) {
  const Basis residual = b - a * (a.transpose() * b);
  if (residual.size() == 0) return 0.0;
  const Eigen::MatrixXd r = residual;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r);
  return std::min(1.0, svd.singularValues()(0));
}

// Top-k eigenvectors of a symmetric matrix, largest first, sign-normalised.
Basis top_eigenvectors(const Eigen::MatrixXd& m, int k, int* rank) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const int n = static_cast<int>(m.rows());
  const double top = std::max(es.eigenvalues()(n - 1), 0.0);
  int r = 0;
  for (int i = 0; i < n; ++i)
    if (es.eigenvalues()(i) > 1e-10 * top && top > 0) ++r;
  const int take = std::min(k, r);
  Basis out(n, take);
  for (int c = 0; c < take; ++c) {
    Vec v = es.eigenvectors().col(n - 1 - c);
    for (int d = 0; d < n; ++d) {
      if (std::abs(v[d]) > 1e-12) {
        if (v[d] < 0) v = -v;
        break;
      }
    }
    out.col(c) = v;
  }
  if (rank) *rank = take;
  return out;
}

double default_radius(const std::vector<Vec>& points, const Vec& x) {
  const double s = median_spacing(points);
  if (s > 0) return 16 * s;
  double far = 0.0;
  for (const auto& p : points) far = std::max(far, (p - x).norm());
  return far;
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Tangential: return "tangential";
    case Verdict::NotTangential: return "not tangential";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

TangentFit fit_tangent(const std::vector<Vec>& points, const Vec& x, int k, std::optional<double> radius) {
  const int n = static_cast<int>(x.size());
  if (k < 1 || k > n) throw ArgumentError("tangent dimension k must satisfy 1 <= k <= n");
  if (common_dim(points) != n && !points.empty()) throw ArgumentError("points and base point differ in dimension");
  const double r = radius.value_or(kInf);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  TangentFit fit;
  fit.requested = k;
  for (const auto& p : points) {
    const Vec h = p - x;
    const double t = h.norm();
    if (t == 0.0 || t > r) continue;
    const Vec u = h / t;
    m += (u * u.transpose()) / t;
    ++fit.neighbours;
  }
  if (fit.neighbours < 2 * k)
    throw ArgumentError("fit_tangent needs at least 2k points within the analysis radius, found " +
                        std::to_string(fit.neighbours));
  fit.basis = top_eigenvectors(m, k, &fit.rank);
  return fit;
}

double median_spacing(const std::vector<Vec>& points) {
  const int n = common_dim(points);
  if (points.size() < 2) return 0.0;
  const PointBatch batch = to_batch(points, n);
  std::vector<double> nearest(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    std::vector<double> d2(points.size());
    kernels::squared_distances(batch, points[i], d2);
    double best = kInf;
    for (std::size_t j = 0; j < points.size(); ++j)
      if (j != i && d2[j] > 0) best = std::min(best, d2[j]);
    nearest[i] = std::isinf(best) ? 0.0 : std::sqrt(best);
  });
  std::nth_element(nearest.begin(), nearest.begin() + nearest.size() / 2, nearest.end());
  return nearest[nearest.size() / 2];
}

nlohmann::json TangencyReport::to_json() const {
  nlohmann::json shells_json = nlohmann::json::array();
  for (const auto& s : shells)
    shells_json.push_back({{"shell", s.index},
                           {"inner", s.inner},
                           {"outer", s.outer},
                           {"population", s.population},
                           {"max_ratio", number_or_inf(s.max_ratio)}});
  nlohmann::json xs = nlohmann::json::array();
  for (int d = 0; d < x.size(); ++d) xs.push_back(x[d]);
  return {{"x", xs},
          {"subspace", basis_json(basis)},
          {"shells", shells_json},
          {"empty_shells", empty_shells},
          {"verdict", to_string(verdict)},
          {"eta", eta},
          {"radius", radius},
          {"noise", noise},
          {"rule", "shell trend: innermost three populated shells < eta and not rising by more than eta/4; "
                   "three consecutive shells >= 2 eta reject"},
          {"reason", reason}};
}

TangencyReport is_k_tangential(const std::vector<Vec>& points, const Vec& x, const Basis& v,
                               const TangencyOptions& options) {
  const int n = static_cast<int>(x.size());
  if (!(options.eta > 0 && options.eta < 1)) throw ArgumentError("eta must lie in (0, 1)");
  if (options.shells < 4) throw ArgumentError("at least 4 dyadic shells are required");
  if (v.rows() != n) throw ArgumentError("subspace basis has the wrong ambient dimension");
  if (!(options.noise >= 0)) throw ArgumentError("noise floor must be >= 0");
  if (v.cols() > 0 && !(v.transpose() * v).isIdentity(1e-9)) throw ArgumentError("subspace basis must be orthonormal");
  common_dim(points);

  TangencyReport rep;
  rep.x = x;
  rep.basis = v;
  rep.eta = options.eta;
  rep.noise = options.noise;
  rep.radius = options.radius.value_or(default_radius(points, x));
  if (!(rep.radius > 0)) {
    rep.reason = "no points near x";
    return rep;
  }
  const int s_count = options.shells;
  std::vector<ShellStat> all(s_count);
  for (int j = 1; j <= s_count; ++j) {
    all[j - 1].index = j;
    all[j - 1].outer = rep.radius * std::ldexp(1.0, -(j - 1));
    all[j - 1].inner = rep.radius * std::ldexp(1.0, -j);
  }
  for (const auto& p : points) {
    if (p.size() != n) throw ArgumentError("points and base point differ in dimension");
    const Vec h = p - x;
    const double t = h.norm();
    if (t == 0.0 || t > rep.radius || t <= all.back().inner) continue;
    int j = static_cast<int>(std::floor(std::log2(rep.radius / t))) + 1;
    j = std::clamp(j, 1, s_count);
    if (t > all[j - 1].outer) --j;
    if (j >= 1 && t <= all[j - 1].inner) ++j;
    if (j < 1 || j > s_count) continue;
    const Vec hv = v.cols() > 0 ? Vec(v * (v.transpose() * h)) : Vec(Vec::Zero(n));
    const double perp = std::max(0.0, (h - hv).norm() - options.noise);
    const double along = hv.norm();
    double ratio = 0.0;
    if (perp > 0) ratio = along <= 1e-15 * t ? kInf : perp / along;
    auto& s = all[j - 1];
    ++s.population;
    s.max_ratio = std::max(s.max_ratio, ratio);
  }
  for (const auto& s : all) {
    if (s.population > 0)
      rep.shells.push_back(s);
    else
      rep.empty_shells.push_back(s.index);
  }
  const auto& sh = rep.shells;
  const double eta = options.eta;
  if (sh.size() >= 3) {
    bool small = true, settled = true;
    for (std::size_t i = sh.size() - 3; i < sh.size(); ++i) {
      if (!(sh[i].max_ratio < eta)) small = false;
      if (i > sh.size() - 3 && sh[i].max_ratio > sh[i - 1].max_ratio + eta / 4) settled = false;
    }
    if (small && settled) {
      rep.verdict = Verdict::Tangential;
      rep.reason = "innermost three populated shells below eta with a non-increasing trend";
      return rep;
    }
    for (std::size_t i = 0; i + 2 < sh.size(); ++i) {
      if (sh[i].max_ratio >= 2 * eta && sh[i + 1].max_ratio >= 2 * eta && sh[i + 2].max_ratio >= 2 * eta) {
        rep.verdict = Verdict::NotTangential;
        rep.reason = "three consecutive populated shells at or above 2 eta (from shell " +
                     std::to_string(sh[i].index) + ")";
        return rep;
      }
    }
    rep.reason = small ? "ratios below eta but rising inwards" : "ratios neither settle below eta nor stay above 2 eta";
  } else {
    rep.reason = "fewer than three populated shells";
  }
  rep.verdict = Verdict::Inconclusive;
  return rep;
}

nlohmann::json Decomposition::to_json() const {
  nlohmann::json ps = nlohmann::json::array();
  for (const auto& p : pieces) {
    nlohmann::json bases = nlohmann::json::array();
    for (const auto& b : p.bases) bases.push_back(b.to_json());
    ps.push_back({{"size", p.members.size()},
                  {"direction", basis_json(p.direction)},
                  {"tangential_bases", p.tangential},
                  {"decisive_bases", p.decisive},
                  {"pass", p.pass},
                  {"bases", bases}});
  }
  return {{"pass", pass}, {"pieces", ps}, {"diagnostics", diagnostics}};
}

namespace {

// Local direction at points[i] for k = 1: the neighbour direction supported by
// the most other neighbours (|sin| < 0.2), refined by a weighted PCA of its supporters.
Basis local_line(const std::vector<Vec>& points, const PointBatch& batch, std::size_t i, double rho) {
  const Vec& p = points[i];
  std::vector<double> d2(points.size());
  kernels::squared_distances(batch, p, d2);
  std::vector<std::size_t> near;
  for (std::size_t j = 0; j < points.size(); ++j)
    if (j != i && d2[j] > 0 && d2[j] <= rho * rho) near.push_back(j);
  if (near.size() < 2) {
    // Isolated: fall back to the two nearest points.
    std::vector<std::size_t> order;
    for (std::size_t j = 0; j < points.size(); ++j)
      if (j != i && d2[j] > 0) order.push_back(j);
    std::partial_sort(order.begin(), order.begin() + std::min<std::size_t>(2, order.size()), order.end(),
                      [&](std::size_t a, std::size_t b) { return d2[a] < d2[b]; });
    order.resize(std::min<std::size_t>(2, order.size()));
    near = order;
  }
  const int n = static_cast<int>(p.size());
  if (near.empty()) return Basis(Vec::Unit(n, 0));
  std::vector<std::size_t> voters;
  for (std::size_t j : near)
    if (d2[j] >= rho * rho / 9) voters.push_back(j);
  if (voters.size() < 3) voters = near;
  std::vector<Vec> u;
  for (std::size_t j : voters) u.push_back((points[j] - p).normalized());
  constexpr double kSin = 0.2;
  std::size_t best = 0;
  int best_count = -1;
  for (std::size_t a = 0; a < u.size(); ++a) {
    int count = 0;
    for (std::size_t b = 0; b < u.size(); ++b) {
      const double c = u[a].dot(u[b]);
      if (1 - c * c < kSin * kSin) ++count;
    }
    if (count > best_count) {
      best_count = count;
      best = a;
    }
  }
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t b = 0; b < u.size(); ++b) {
    const double c = u[best].dot(u[b]);
    if (1 - c * c < kSin * kSin) m += u[b] * u[b].transpose();
  }
  int rank = 0;
  Basis dir = top_eigenvectors(m, 1, &rank);
  return rank == 1 ? dir : Basis(u[best]);
}

struct PieceContext {
  const std::vector<Vec>& points;
  const std::vector<Basis>& local;
  int k;
  int n;
  double radius;
  const SigmaOptions& options;
};

// Direction, sampled bases and verdict counts for one group of points.
Piece evaluate_piece(const PieceContext& ctx, std::vector<std::size_t> members) {
  Piece piece;
  piece.members = std::move(members);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(ctx.n, ctx.n);
  std::vector<Vec> pts;
  for (std::size_t i : piece.members) {
    m += ctx.local[i] * ctx.local[i].transpose();
    pts.push_back(ctx.points[i]);
  }
  piece.direction = top_eigenvectors(m, ctx.k, nullptr);
  const std::size_t count = piece.members.size();
  const std::size_t b = std::min<std::size_t>(ctx.options.bases_per_piece, count);
  piece.bases.resize(b);
  parallel_for(b, [&](std::size_t s) {
    const Vec& x = ctx.points[piece.members[s * count / b]];
    TangencyOptions topt;
    topt.eta = ctx.options.eta;
    topt.radius = ctx.radius;
    topt.noise = ctx.options.noise;
    TangencyReport rep;
    rep.x = x;
    rep.eta = ctx.options.eta;
    rep.radius = ctx.radius;
    rep.noise = ctx.options.noise;
    try {
      const auto fit = fit_tangent(pts, x, ctx.k, ctx.radius);
      if (fit.rank < ctx.k)
        rep.reason = "tangent fit rank " + std::to_string(fit.rank) + " below k";
      else
        rep = is_k_tangential(pts, x, fit.basis, topt);
    } catch (const ArgumentError& e) {
      rep.reason = e.what();
    }
    piece.bases[s] = std::move(rep);
  });
  for (const auto& r : piece.bases) {
    if (r.verdict != Verdict::Inconclusive) ++piece.decisive;
    if (r.verdict == Verdict::Tangential) ++piece.tangential;
  }
  piece.pass = piece.decisive == 0 || piece.tangential >= ctx.options.pass_fraction * piece.decisive;
  return piece;
}

}  // namespace

Decomposition sigma_decompose(const std::vector<Vec>& points, int k, const SigmaOptions& options) {
  if (options.pieces < 1) throw ArgumentError("pieces must be >= 1");
  if (options.bases_per_piece < 1) throw ArgumentError("bases per piece must be >= 1");
  Decomposition out;
  const int n = common_dim(points);
  if (points.empty()) {
    out.pass = true;
    out.diagnostics = "empty point set";
    return out;
  }
  if (k < 1 || k > n) throw ArgumentError("k must satisfy 1 <= k <= n");
  const double spacing = median_spacing(points);
  const double unit = spacing > 0 ? spacing : 1.0;
  const double rho = options.neighbourhood.value_or(12 * unit);
  const double radius = options.radius.value_or(16 * unit);
  const PointBatch batch = to_batch(points, n);

  // Local directions.
  std::vector<Basis> local(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    if (k == n) {
      local[i] = Basis::Identity(n, n);
    } else if (k == 1) {
      local[i] = local_line(points, batch, i, rho);
    } else {
      try {
        local[i] = fit_tangent(points, points[i], k, rho).basis;
      } catch (const ArgumentError&) {
        local[i] = fit_tangent(points, points[i], k).basis;
      }
      if (local[i].cols() < k) local[i] = Basis::Identity(n, n).leftCols(k);
    }
  });

  // Greedy grouping against fixed seeds.
  const double join = options.eta / 2;
  std::vector<Basis> seeds;
  std::vector<int> label(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    int best = -1;
    double best_d = kInf;
    for (std::size_t c = 0; c < seeds.size(); ++c) {
      const double d = subspace_distance(seeds[c], local[i]);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    if (best >= 0 && best_d < join) {
      label[i] = best;
    } else {
      label[i] = static_cast<int>(seeds.size());
      seeds.push_back(local[i]);
    }
  }
  std::vector<std::size_t> size(seeds.size(), 0);
  for (int l : label) ++size[l];
  const std::size_t min_size = static_cast<std::size_t>(2 * k + 1);
  std::vector<int> large;
  for (std::size_t c = 0; c < seeds.size(); ++c)
    if (size[c] >= min_size) large.push_back(static_cast<int>(c));
  if (!large.empty()) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (size[label[i]] >= min_size) continue;
      int best = large.front();
      double best_d = kInf;
      for (int c : large) {
        const double d = subspace_distance(seeds[c], local[i]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      label[i] = best;
    }
  }
  std::vector<int> remap(seeds.size(), -1);
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (remap[label[i]] < 0) {
      remap[label[i]] = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[remap[label[i]]].push_back(i);
  }

  PieceContext ctx{points, local, k, n, radius, options};
  std::vector<Piece> pieces;
  for (auto& gm : groups) pieces.push_back(evaluate_piece(ctx, std::move(gm)));

  // Merge pieces whose union is still tangential: first pairs with close
  // directions or a small member, closest directions first.
  const std::size_t small = static_cast<std::size_t>(4 * (2 * k + 1));
  for (bool merged = true; merged && pieces.size() > 1;) {
    merged = false;
    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < pieces.size(); ++a)
      for (std::size_t b = a + 1; b < pieces.size(); ++b) {
        const double d = subspace_distance(pieces[a].direction, pieces[b].direction);
        if (d < options.eta || std::min(pieces[a].members.size(), pieces[b].members.size()) < small)
          pairs.emplace_back(d, a, b);
      }
    std::sort(pairs.begin(), pairs.end());
    for (const auto& [d, a, b] : pairs) {
      std::vector<std::size_t> joint = pieces[a].members;
      joint.insert(joint.end(), pieces[b].members.begin(), pieces[b].members.end());
      std::sort(joint.begin(), joint.end());
      Piece u = evaluate_piece(ctx, std::move(joint));
      if (u.decisive > 0 && u.pass) {
        pieces[a] = std::move(u);
        pieces.erase(pieces.begin() + static_cast<std::ptrdiff_t>(b));
        merged = true;
        break;
      }
    }
  }
  std::sort(pieces.begin(), pieces.end(), [](const Piece& p, const Piece& q) { return p.members.front() < q.members.front(); });
  out.pieces = std::move(pieces);

  std::ostringstream diag;
  out.pass = true;
  if (static_cast<int>(out.pieces.size()) > options.pieces) {
    out.pass = false;
    diag << "needed " << out.pieces.size() << " pieces, limit " << options.pieces << "; ";
  }
  for (std::size_t pi = 0; pi < out.pieces.size(); ++pi) {
    const auto& piece = out.pieces[pi];
    if (piece.decisive == 0) {
      diag << "piece " << pi << " (" << piece.members.size() << " points) too sparse for a verdict; ";
    } else if (!piece.pass) {
      out.pass = false;
      diag << "piece " << pi << " tangential at " << piece.tangential << "/" << piece.decisive << " decisive bases; ";
    }
  }
  out.diagnostics = diag.str();
  return out;
}

std::vector<Vec> parse_points_csv(const std::string& text) {
  std::vector<Vec> pts;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::vector<double> vals;
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        if (pts.empty() && vals.empty()) break;  // header row
        throw ParseError("points CSV: bad number '" + cell + "' on line " + std::to_string(line_no), line_no);
      }
    }
    if (vals.empty()) continue;
    if (vals.size() > static_cast<std::size_t>(kMaxDim)) throw ArgumentError("points CSV: more than 3 coordinates");
    Vec p(static_cast<int>(vals.size()));
    for (std::size_t d = 0; d < vals.size(); ++d) p[static_cast<int>(d)] = vals[d];
    if (!pts.empty() && p.size() != pts[0].size()) throw ArgumentError("points CSV: rows have different lengths");
    pts.push_back(p);
  }
  return pts;
}

std::vector<Vec> load_points_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("points: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_points_csv(ss.str());
}

}  // namespace tangentia::tangency
