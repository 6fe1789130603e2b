#pragma once

// Hardy-Littlewood maximal operator M and its restricted version M_lambda,
// best-radii sets, the envelope formula for directional derivatives, and
// runtime audits of the translation and Lipschitz bounds.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tangentia/funcspace.hpp"
#include "tangentia/types.hpp"

namespace tangentia::maxop {

using funcspace::DirectionalFunction;

/// Empirical audit thresholds C_n (n = 1, 2, 3).
struct AuditConstants {
  double c1 = 1.0;
  double c2 = 4.0;
  double c3 = 8.0;

  double for_dim(int n) const;
};

struct RadiusSearch {
  int grid_points = 512;
  double min_radius = 1e-3;      ///< grid floor when lambda is smaller
  std::optional<double> r_max;   ///< default: 10 x support diameter, else 100
  double tie_rel = 1e-8;         ///< relative gap under which two averages tie
  double overflow_guard = 1e12;  ///< averages above this mean M f(x) = infinity
};

enum class RadiusKind { Zero, Finite, Infinity };

struct BestRadius {
  RadiusKind kind = RadiusKind::Finite;
  double r = 0.0;      ///< meaningful for Finite
  double value = 0.0;  ///< average attained at r
};

/// Closed run of radii over which the average stays tied with the maximum.
/// `lo == 0` or `hi == inf` mean the run reaches the conventions at 0 or infinity.
struct RadiusInterval {
  double lo = 0.0;
  double hi = 0.0;
};

struct RadiiSet {
  Vec x;
  double lambda = 0.0;
  double value = 0.0;  ///< M_lambda f(x); +inf on overflow
  bool infinite = false;
  std::vector<BestRadius> radii;           ///< isolated maximisers, by increasing radius (0 first, inf last)
  std::vector<RadiusInterval> plateaus;    ///< tied runs
  std::vector<std::pair<double, double>> trace;  ///< (r, average) for every evaluation, grid first
  double r_max = 0.0;
  std::vector<std::string> warnings;

  bool contains_zero() const;
  bool contains_infinity() const;
  /// Finite radii of the isolated maximisers.
  std::vector<double> finite_radii() const;
};

/// M_lambda f(x) = sup over r >= lambda of the average of |f| on B(x, r),
/// with the r = 0 convention |f(x)| when lambda = 0 and the r = infinity
/// convention scored by the largest-radius average.
RadiiSet maximal(const DirectionalFunction& f, const Vec& x, double lambda, const RadiusSearch& search = {});

/// M_lambda f on grid nodes (row-major, `nodes` per axis), evaluated in parallel.
std::vector<RadiiSet> maximal_field(const DirectionalFunction& f, const Box& box, const std::vector<int>& nodes,
                                    double lambda, const RadiusSearch& search = {});

struct EnvelopeDerivative {
  double value = 0.0;
  RadiiSet radii;
  /// One entry per radius (and sampled plateau radius) considered, in RadiiSet order.
  std::vector<std::pair<std::string, double>> contributions;
};

/// D_theta M_lambda f(x) = sup over best radii r of D_theta |f|_r(x); r = 0
/// contributes D_theta |f|(x) and r = infinity contributes 0. For lambda = 0 the
/// formula is only claimed where f is differentiable at x; that is checked
/// (exact oracle, else tau(R^n) < diff_tol) and PreconditionError is thrown otherwise.
EnvelopeDerivative maximal_directional_derivative(const DirectionalFunction& f, const Vec& x, const Vec& theta,
                                                  double lambda, const RadiusSearch& search = {},
                                                  double diff_tol = 1e-3);

struct BoundReport {
  std::string check;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;  ///< lhs / (|h| u_sup): the empirical constant
  bool pass = false;

  std::string to_json() const;
};

/// sup over 0 < |a| <= radius of |f(x + a) - f(x) - D . a| / |a|, by sampling
/// `shells` radii times a direction set.
double remainder_sup(const DirectionalFunction& f, const Vec& x, const Vec& d, double radius, int shells = 400);

/// |avg_{B(x+h,r)} f - avg_{B(x,r)} f - D . h| against |h| C_n u_sup.
BoundReport check_translation_bound(const DirectionalFunction& f, const Vec& x, const Vec& h, double r, const Vec& d,
                                    double u_sup, const AuditConstants& constants = {});

struct LipschitzAudit {
  double measured = 0.0;  ///< max sampled |M f(x) - M f(y)| / |x - y|
  double sup_value = 0.0;
  double bound = 0.0;     ///< C_n sup M f / lambda
  double ratio = 0.0;
  bool pass = false;
  BoundReport report() const;
};

LipschitzAudit lipschitz_audit(const DirectionalFunction& f, double lambda, const Box& box, int samples,
                               std::uint64_t seed = 0, const RadiusSearch& search = {},
                               const AuditConstants& constants = {});

}  // namespace tangentia::maxop
