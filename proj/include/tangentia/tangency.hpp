#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tangentia/types.hpp"

namespace tangentia::tangency {

enum class Verdict { Tangential, NotTangential, Inconclusive };

std::string to_string(Verdict v);

/// Result of fitting a k-dimensional tangent subspace at a base point.
struct TangentFit {
  Basis basis;      ///< n x rank, orthonormal, sign-normalised
  int rank = 0;     ///< achievable rank (may be below the requested k)
  int requested = 0;
  int neighbours = 0;
};

/// Top-k principal directions of the unit displacements u = (p - x)/|p - x| of the
/// points within `radius` of x, each outer product weighted by 1/|p - x|.
/// Each eigenvector's first non-negligible component is made positive.
TangentFit fit_tangent(const std::vector<Vec>& points, const Vec& x, int k,
                       std::optional<double> radius = std::nullopt);

struct ShellStat {
  int index = 0;  ///< j: the shell is (R 2^-j, R 2^-(j-1)]
  double inner = 0.0;
  double outer = 0.0;
  int population = 0;
  double max_ratio = 0.0;  ///< +inf when a displacement has no component in V
};

struct TangencyOptions {
  double eta = 0.2;
  int shells = 8;
  std::optional<double> radius;  ///< analysis radius R; default 16 x median spacing
  double noise = 0.0;            ///< subtracted from |h_perp| before the ratio is taken
};

struct TangencyReport {
  Vec x;
  Basis basis;
  std::vector<ShellStat> shells;  ///< populated shells, outermost first
  std::vector<int> empty_shells;
  Verdict verdict = Verdict::Inconclusive;
  double eta = 0.2;
  double radius = 0.0;
  double noise = 0.0;
  std::string reason;

  nlohmann::json to_json() const;
};

/// Shell-trend rule for "|h_perp| / |h_V| -> 0":
///   tangential      the three innermost populated shells all have max ratio < eta
///                   and the ratio never grows by more than eta/4 moving inwards;
///   not tangential  three consecutive populated shells have max ratio >= 2 eta;
///   inconclusive    otherwise (including fewer than three populated shells).
TangencyReport is_k_tangential(const std::vector<Vec>& points, const Vec& x, const Basis& v,
                               const TangencyOptions& options = {});

/// Median nearest-neighbour distance of a point set (0 for fewer than 2 points).
double median_spacing(const std::vector<Vec>& points);

struct SigmaOptions {
  int pieces = 8;
  double eta = 0.2;
  double noise = 0.0;
  int bases_per_piece = 16;
  double pass_fraction = 0.9;
  std::optional<double> neighbourhood;  ///< local direction radius; default 12 x spacing
  std::optional<double> radius;         ///< per-base analysis radius; default 16 x spacing
};

struct Piece {
  std::vector<std::size_t> members;  ///< indices into the input
  Basis direction;
  std::vector<TangencyReport> bases;
  int tangential = 0;
  int decisive = 0;  ///< bases with a verdict other than inconclusive
  bool pass = false;
};

struct Decomposition {
  std::vector<Piece> pieces;
  bool pass = false;
  std::string diagnostics;

  nlohmann::json to_json() const;
};

/// Greedy sigma-k decomposition heuristic. Every point receives a local tangent
/// direction (for k = 1 a vote over neighbour directions refined by PCA, for
/// k >= 2 a PCA fit); points are grouped greedily while the sine of the largest
/// principal angle to the group's seed stays below eta/2; groups smaller than
/// 2k + 1 points join the group with the closest direction. Each piece is tested
/// at up to `bases_per_piece` evenly spaced members using only its own points,
/// and passes when at least `pass_fraction` of its decisive bases are tangential.
/// Pieces whose bases are all inconclusive are reported and do not fail the run.
Decomposition sigma_decompose(const std::vector<Vec>& points, int k, const SigmaOptions& options = {});

/// Point cloud CSV: one point per row, `x1,...,xn`; blank lines and `#` comments skipped.
std::vector<Vec> parse_points_csv(const std::string& text);
std::vector<Vec> load_points_csv(const std::string& path);

}  // namespace tangentia::tangency
