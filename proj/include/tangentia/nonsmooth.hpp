#pragma once

// Difference quotients, one-sided directional derivatives, the
// non-differentiability measure tau(W, f, x), the maximal differentiability
// degree gamma(f, x), and grid scans for non-differentiability points.

#include <cstdint>
#include <optional>
#include <vector>

#include "tangentia/funcspace.hpp"
#include "tangentia/semilinear.hpp"
#include "tangentia/types.hpp"

namespace tangentia::nonsmooth {

using funcspace::DirectionalFunction;
using semilinear::SemiLinearMap;
using semilinear::SemiLinearSubspace;

/// Decreasing positive radii.
struct Ladder {
  std::vector<double> radii;

  /// r_j = r0 * 2^-j, j = 0..rungs-1.
  static Ladder geometric(double r0 = 0.5, int rungs = 12);
  void validate() const;
};

/// (f(x+h) - f(x)) / |h|.
double difference_quotient(const DirectionalFunction& f, const Vec& x, const Vec& h);

struct DirectionalDerivative {
  double value = 0.0;    ///< oracle value when available, else the ladder limit
  double numeric = 0.0;  ///< ladder limit (always computed)
  bool from_oracle = false;
  bool converged = true;  ///< false: last three rungs spread over 10 * tol
  std::vector<double> rungs;
};

/// One-sided derivative D_theta f(x) for unit theta. For non-unit h use
/// |h| * D_{h/|h|} f(x); that is the positively homogeneous convention used throughout.
DirectionalDerivative directional_derivative(const DirectionalFunction& f, const Vec& x, const Vec& theta,
                                             const Ladder& ladder = Ladder::geometric(), double tol = 1e-4);

struct TauRung {
  double radius = 0.0;
  double residual = 0.0;
};

struct TauEstimate {
  double value = 0.0;   ///< residual at the smallest rung
  SemiLinearMap map;    ///< minimising linear map at the smallest rung (extended to R^n)
  std::vector<TauRung> ladder;
  int directions = 0;
};

struct TauOptions {
  int directions = 96;
  Ladder ladder = Ladder::geometric();
  std::uint64_t seed = 0;
};

/// tau(W, f, x): per rung r, min over linear L of max over sampled unit w in W of
/// |f(x + r w) - f(x) - r L(w)| / r, solved as a Chebyshev fit. The limsup is
/// approximated by the smallest rung; nothing is extrapolated.
TauEstimate tau(const DirectionalFunction& f, const Vec& x, const SemiLinearSubspace& w,
                const TauOptions& options = {});

struct GammaOptions {
  double tol = 1e-3;
  int candidates_per_dim = 64;
  int b_per_subspace = 32;
  TauOptions tau;
  std::uint64_t seed = 0;
};

struct GammaEstimate {
  int degree = 0;
  Basis witness;               ///< orthonormal basis of V_x (n x degree)
  double worst_residual = 0.0;  ///< max over sampled b of tau(V + <b>^+)
  double tol = 0.0;
  int candidates_tried = 0;
};

/// Largest k such that a sampled k-dimensional V has tau(V + <b>^+) < tol for
/// every sampled b (b = 0 included). Candidates: subspaces orthogonal to the
/// kink normals found by clustering nearby gradients, then a quasi-uniform
/// sweep of the Grassmannian. Among passing V of the winning dimension the
/// smallest worst-b residual wins.
GammaEstimate gamma(const DirectionalFunction& f, const Vec& x, const GammaOptions& options = {});

/// Difference-quotient magnitudes along a ladder, maximised over a fixed set of
/// probe directions (coordinate axes, both signs, plus diagonals).
struct QuotientLadder {
  std::vector<double> radii;
  std::vector<double> max_abs_quotient;
  bool divergent = false;
};

/// `divergent` is set when the last six rungs grow by at least 1.2x per halving,
/// i.e. |D^h| behaves like |h|^-a rather than settling. Functions with a known
/// Lipschitz bound are never divergent.
QuotientLadder quotient_ladder(const DirectionalFunction& f, const Vec& x, const Ladder& ladder);

struct SingularPoint {
  Vec x;
  double tau = 0.0;
  int gamma = 0;
  bool sf_flag = false;
};

struct ScanOptions {
  double tol = 1e-3;
  int directions = 64;
  bool annotate_gamma = true;
  GammaOptions gamma;
};

/// `resolution` counts cells per axis, so the grid has resolution + 1 nodes per
/// axis including both box faces. Flags grid nodes where tau(R^n, f, x) >= tol, probing at half the grid
/// spacing (so flagged nodes lie within half a cell of the non-differentiability
/// locus). Each flag carries gamma at that same probe scale and the Sf verdict.
/// Output is in row-major grid order.
std::vector<SingularPoint> singular_scan(const DirectionalFunction& f, const Box& box, const std::vector<int>& resolution,
                                         const ScanOptions& options = {});

}  // namespace tangentia::nonsmooth
