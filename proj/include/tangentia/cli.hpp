#pragma once

// Command-line driver. `run` is the whole program minus process plumbing so it
// can be exercised in-process by the tests.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace tangentia::cli {

/// Every knob of one invocation. Defaults depend on the subcommand and equal the
/// library defaults they are forwarded to.
struct ExperimentConfig {
  std::string command;
  std::string function = "tent";
  std::string set;      ///< medial-axis: dist[...] / distpoly[...] / distpoly:path
  std::string points;   ///< tangency: point cloud CSV
  std::vector<double> box = {-3.0, 3.0};  ///< lo,hi (all axes) or lo1,hi1,...,lon,hin
  std::vector<int> res = {512};           ///< cells per axis (one value or one per axis)
  double lambda = 0.0;
  double tol = 1e-3;
  std::vector<double> at;     ///< evaluation point(s), flattened
  std::vector<double> theta;  ///< direction; normalised on use
  std::string subspace = "full";
  bool maximal = false;       ///< dirderiv: differentiate M_lambda f instead of f
  bool gamma = true;          ///< singular-set: annotate gamma
  double t = 1.0;             ///< infconv: Moreau parameter
  double yhalf = 10.0;        ///< infconv: y-box is [-yhalf, yhalf]^n
  int yres = 200;             ///< infconv: cells per y-axis
  bool strict = false;        ///< infconv: boundary minimisers are errors
  int k = 1;
  int pieces = 8;
  double eta = 0.2;
  double noise = 0.0;
  int shells = 8;
  std::string suite = "all";
  std::uint64_t seed = 0;
  std::string out;  ///< output path; stdout when empty

  nlohmann::json to_json() const;
  /// Overwrites the fields present in `j`; unknown keys are an ArgumentError.
  void merge_json(const nlohmann::json& j);
  static ExperimentConfig defaults_for(const std::string& command);
};

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

/// argv without the program name. Exit codes: 0 success, 1 verification
/// failure, 2 usage or input error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tangentia::cli
