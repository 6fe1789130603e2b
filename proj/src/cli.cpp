#include "tangentia/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "tangentia/errors.hpp"
#include "tangentia/function_spec.hpp"
#include "tangentia/maxop.hpp"
#include "tangentia/nonsmooth.hpp"
#include "tangentia/semilinear.hpp"
#include "tangentia/specials.hpp"
#include "tangentia/tangency.hpp"
#include "tangentia/verify.hpp"

namespace tangentia::cli {

namespace {

using funcspace::DirectionalFunction;
using nlohmann::json;

template <class F>
void for_each_field(F&& f, ExperimentConfig& c) {
  f("command", c.command);
  f("function", c.function);
  f("set", c.set);
  f("points", c.points);
  f("box", c.box);
  f("res", c.res);
  f("lambda", c.lambda);
  f("tol", c.tol);
  f("at", c.at);
  f("theta", c.theta);
  f("subspace", c.subspace);
  f("maximal", c.maximal);
  f("gamma", c.gamma);
  f("t", c.t);
  f("yhalf", c.yhalf);
  f("yres", c.yres);
  f("strict", c.strict);
  f("k", c.k);
  f("pieces", c.pieces);
  f("eta", c.eta);
  f("noise", c.noise);
  f("shells", c.shells);
  f("suite", c.suite);
  f("seed", c.seed);
  f("out", c.out);
}

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// --------------------------------------------------------------------------
// Argument interpretation

Box make_box(const std::vector<double>& v, int n) {
  Box b{Vec(n), Vec(n)};
  if (v.size() == 2) {
    for (int d = 0; d < n; ++d) b.lo[d] = v[0], b.hi[d] = v[1];
  } else if (v.size() == static_cast<std::size_t>(2 * n)) {
    for (int d = 0; d < n; ++d) b.lo[d] = v[2 * d], b.hi[d] = v[2 * d + 1];
  } else {
    throw ArgumentError("--box needs lo,hi or " + std::to_string(2 * n) + " numbers");
  }
  for (int d = 0; d < n; ++d)
    if (!(b.lo[d] < b.hi[d])) throw ArgumentError("--box needs lo < hi on every axis");
  return b;
}

std::vector<int> make_res(const std::vector<int>& v, int n) {
  if (v.size() == 1) return std::vector<int>(n, v[0]);
  if (v.size() == static_cast<std::size_t>(n)) return v;
  throw ArgumentError("--res needs one value or one per axis");
}

std::vector<int> node_counts(std::vector<int> cells) {
  for (int& c : cells) {
    if (c < 1) throw ArgumentError("--res must be >= 1");
    ++c;
  }
  return cells;
}

std::vector<Vec> make_points(const std::vector<double>& v, int n, const char* flag) {
  if (v.empty() || v.size() % n != 0)
    throw ArgumentError(std::string(flag) + " needs a multiple of " + std::to_string(n) + " coordinates");
  std::vector<Vec> pts;
  for (std::size_t i = 0; i < v.size(); i += n) {
    Vec p(n);
    for (int d = 0; d < n; ++d) p[d] = v[i + d];
    pts.push_back(p);
  }
  return pts;
}

Vec make_direction(const std::vector<double>& v, int n) {
  if (v.size() != static_cast<std::size_t>(n)) throw ArgumentError("--theta needs " + std::to_string(n) + " components");
  Vec t(n);
  for (int d = 0; d < n; ++d) t[d] = v[d];
  if (!(t.norm() > 0)) throw ArgumentError("--theta must be nonzero");
  return t.normalized();
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (int d = 0; d < v.size(); ++d) a.push_back(v[d]);
  return a;
}

// --------------------------------------------------------------------------
// Output

class Sink {
 public:
  Sink(const ExperimentConfig& cfg, std::ostream& fallback) : cfg_(cfg), fallback_(fallback) {}

  void csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream s;
    s << "# config: " << cfg_.to_json().dump() << "\n";
    for (std::size_t i = 0; i < header.size(); ++i) s << (i ? "," : "") << header[i];
    s << "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) s << (i ? "," : "") << r[i];
      s << "\n";
    }
    emit(s.str());
  }

  void document(const json& result) {
    json doc = {{"config", cfg_.to_json()}, {"result", result}};
    emit(doc.dump(2) + "\n");
  }

 private:
  void emit(const std::string& text) {
    if (cfg_.out.empty()) {
      fallback_ << text;
      return;
    }
    std::ofstream f(cfg_.out, std::ios::binary);
    if (!f) throw ArgumentError("cannot write '" + cfg_.out + "'");
    f << text;
  }

  const ExperimentConfig& cfg_;
  std::ostream& fallback_;
};

std::vector<std::string> coordinate_header(int n, const std::string& prefix = "x") {
  std::vector<std::string> h;
  for (int d = 1; d <= n; ++d) h.push_back(prefix + std::to_string(d));
  return h;
}

void append_point(std::vector<std::string>& row, const Vec& p) {
  for (int d = 0; d < p.size(); ++d) row.push_back(num(p[d]));
}

// --------------------------------------------------------------------------
// Subcommands

int cmd_maximal_field(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  const auto f = funcspec::parse(c.function);
  const int n = f.dim();
  std::vector<Vec> xs;
  std::vector<maxop::RadiiSet> sets;
  if (!c.at.empty()) {
    xs = make_points(c.at, n, "--at");
    sets.resize(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) sets[i] = maxop::maximal(f, xs[i], c.lambda);
  } else {
    sets = maxop::maximal_field(f, make_box(c.box, n), node_counts(make_res(c.res, n)), c.lambda);
  }
  const bool with_d = !c.theta.empty();
  Vec theta;
  if (with_d) theta = make_direction(c.theta, n);
  std::vector<std::vector<std::string>> rows;
  std::size_t widest = 0;
  int skipped = 0;
  for (const auto& s : sets) {
    // Best radii in increasing order; plateaus are written as lo..hi.
    std::vector<std::pair<double, std::string>> radii;
    for (const auto& r : s.radii) {
      const double v = r.kind == maxop::RadiusKind::Zero ? 0.0
                       : r.kind == maxop::RadiusKind::Infinity ? std::numeric_limits<double>::infinity()
                                                               : r.r;
      radii.emplace_back(v, num(v));
    }
    for (const auto& p : s.plateaus) radii.emplace_back(p.lo, num(p.lo) + ".." + num(p.hi));
    std::stable_sort(radii.begin(), radii.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::string> row;
    append_point(row, s.x);
    row.push_back(num(s.value));
    if (with_d) {
      // Grid rows where the envelope formula's hypotheses fail are reported as nan.
      try {
        row.push_back(num(maxop::maximal_directional_derivative(f, s.x, theta, c.lambda).value));
      } catch (const PreconditionError&) {
        row.push_back("nan");
        ++skipped;
      }
    }
    row.push_back(std::to_string(radii.size()));
    for (const auto& r : radii) row.push_back(r.second);
    widest = std::max(widest, radii.size());
    rows.push_back(std::move(row));
  }
  auto header = coordinate_header(n);
  header.push_back("Mf");
  if (with_d) header.push_back("dMf");
  header.push_back("r_best_count");
  for (std::size_t i = 1; i <= widest; ++i) header.push_back("r_best_" + std::to_string(i));
  for (auto& row : rows) row.resize(header.size());
  if (skipped > 0) err << "warning: dMf undefined at " << skipped << " point(s) where f is not differentiable\n";
  Sink(c, out).csv(header, rows);
  return 0;
}

int cmd_dirderiv(const ExperimentConfig& c, std::ostream& out, std::ostream&) {
  const auto f = funcspec::parse(c.function);
  const int n = f.dim();
  const auto xs = make_points(c.at, n, "--at");
  const Vec theta = make_direction(c.theta, n);
  json results = json::array();
  for (const auto& x : xs) {
    if (c.maximal) {
      const auto e = maxop::maximal_directional_derivative(f, x, theta, c.lambda);
      json contrib = json::array();
      for (const auto& [label, v] : e.contributions) contrib.push_back({{"radius", label}, {"derivative", v}});
      results.push_back({{"x", vec_json(x)}, {"value", e.value}, {"contributions", contrib}});
    } else {
      const auto d = nonsmooth::directional_derivative(f, x, theta);
      results.push_back({{"x", vec_json(x)},
                         {"value", d.value},
                         {"numeric", d.numeric},
                         {"from_oracle", d.from_oracle},
                         {"converged", d.converged},
                         {"rungs", d.rungs}});
    }
  }
  Sink(c, out).document(results);
  return 0;
}

int cmd_tau(const ExperimentConfig& c, std::ostream& out, std::ostream&) {
  const auto f = funcspec::parse(c.function);
  const int n = f.dim();
  const auto w = semilinear::SemiLinearSubspace::parse(n, c.subspace);
  nonsmooth::TauOptions opt;
  opt.seed = c.seed;
  json results = json::array();
  for (const auto& x : make_points(c.at, n, "--at")) {
    const auto t = nonsmooth::tau(f, x, w, opt);
    json ladder = json::array();
    for (const auto& r : t.ladder) ladder.push_back({{"radius", r.radius}, {"residual", r.residual}});
    results.push_back({{"x", vec_json(x)},
                       {"subspace", w.describe()},
                       {"tau", t.value},
                       {"directions", t.directions},
                       {"ladder", ladder}});
  }
  Sink(c, out).document(results);
  return 0;
}

int cmd_gamma(const ExperimentConfig& c, std::ostream& out, std::ostream&) {
  const auto f = funcspec::parse(c.function);
  const int n = f.dim();
  nonsmooth::GammaOptions opt;
  opt.tol = c.tol;
  opt.seed = c.seed;
  opt.tau.seed = c.seed;
  json results = json::array();
  for (const auto& x : make_points(c.at, n, "--at")) {
    const auto g = nonsmooth::gamma(f, x, opt);
    json witness = json::array();
    for (int col = 0; col < g.witness.cols(); ++col) witness.push_back(vec_json(g.witness.col(col)));
    results.push_back({{"x", vec_json(x)},
                       {"gamma", g.degree},
                       {"witness", witness},
                       {"worst_residual", g.worst_residual},
                       {"tol", g.tol},
                       {"candidates_tried", g.candidates_tried}});
  }
  Sink(c, out).document(results);
  return 0;
}

int cmd_singular_set(const ExperimentConfig& c, std::ostream& out, std::ostream&) {
  const auto f = funcspec::parse(c.function);
  const int n = f.dim();
  nonsmooth::ScanOptions opt;
  opt.tol = c.tol;
  opt.annotate_gamma = c.gamma;
  opt.gamma.seed = c.seed;
  opt.gamma.tau.seed = c.seed;
  const auto pts = nonsmooth::singular_scan(f, make_box(c.box, n), make_res(c.res, n), opt);
  auto header = coordinate_header(n);
  header.insert(header.end(), {"tau", "gamma", "sf_flag"});
  std::vector<std::vector<std::string>> rows;
  for (const auto& p : pts) {
    std::vector<std::string> row;
    append_point(row, p.x);
    row.insert(row.end(), {num(p.tau), c.gamma ? std::to_string(p.gamma) : "", p.sf_flag ? "1" : "0"});
    rows.push_back(std::move(row));
  }
  Sink(c, out).csv(header, rows);
  return 0;
}

int cmd_medial_axis(const ExperimentConfig& c, std::ostream& out, std::ostream&) {
  if (c.set.empty()) throw ArgumentError("--set is required (dist[...], distpoly[...] or distpoly:path.json)");
  const auto a = funcspec::parse_set(c.set);
  const int n = a.dim();
  const auto pts = specials::medial_scan(a, make_box(c.box, n), make_res(c.res, n));
  auto header = coordinate_header(n);
  header.insert(header.end(), {"dist", "multiplicity"});
  std::vector<std::vector<std::string>> rows;
  for (const auto& m : pts) {
    std::vector<std::string> row;
    append_point(row, m.x);
    row.insert(row.end(), {num(m.distance), std::to_string(m.multiplicity)});
    rows.push_back(std::move(row));
  }
  Sink(c, out).csv(header, rows);
  return 0;
}

int cmd_infconv(const ExperimentConfig& c, std::ostream& out, std::ostream&) {
  const auto u = funcspec::parse(c.function);
  const int n = u.dim();
  const Box ybox{Vec::Constant(n, -c.yhalf), Vec::Constant(n, c.yhalf)};
  const auto coupling = specials::moreau_coupling(c.t);
  std::vector<Vec> xs = !c.at.empty() ? make_points(c.at, n, "--at")
                                      : grid_nodes(make_box(c.box, n), node_counts(make_res(c.res, n)));
  std::vector<specials::InfConvolution> res(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) res[i] = specials::inf_convolution(u, coupling, xs[i], ybox, c.yres, c.strict);
  auto header = coordinate_header(n);
  header.push_back("value");
  for (const auto& h : coordinate_header(n, "y")) header.push_back(h);
  header.insert(header.end(), {"minimizers", "boundary"});
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::vector<std::string> row;
    append_point(row, xs[i]);
    row.push_back(num(res[i].value));
    append_point(row, res[i].minimizers.front());
    row.insert(row.end(), {std::to_string(res[i].minimizers.size()), res[i].boundary ? "1" : "0"});
    rows.push_back(std::move(row));
  }
  Sink(c, out).csv(header, rows);
  return 0;
}

int cmd_tangency(const ExperimentConfig& c, std::ostream& out, std::ostream&) {
  if (c.points.empty()) throw ArgumentError("--points is required");
  const auto pts = tangency::load_points_csv(c.points);
  if (pts.empty()) throw ArgumentError("point file is empty");
  const int n = static_cast<int>(pts[0].size());
  if (!c.at.empty()) {
    json reports = json::array();
    for (const auto& x : make_points(c.at, n, "--at")) {
      tangency::TangencyOptions opt;
      opt.eta = c.eta;
      opt.shells = c.shells;
      opt.noise = c.noise;
      const double radius = 16 * tangency::median_spacing(pts);
      opt.radius = radius;
      const auto fit = tangency::fit_tangent(pts, x, c.k, radius);
      reports.push_back(tangency::is_k_tangential(pts, x, fit.basis, opt).to_json());
    }
    Sink(c, out).document(reports);
    return 0;
  }
  tangency::SigmaOptions opt;
  opt.pieces = c.pieces;
  opt.eta = c.eta;
  opt.noise = c.noise;
  const auto dec = tangency::sigma_decompose(pts, c.k, opt);
  Sink(c, out).document(dec.to_json());
  return 0;
}

int cmd_verify(const ExperimentConfig& c, std::ostream& out, std::ostream&) {
  const auto results = verify::run_suite(c.suite, c.seed);
  bool ok = true;
  json doc = json::array();
  for (const auto& r : results) {
    ok = ok && r.pass;
    out << (r.pass ? "PASS " : "FAIL ") << r.suite << ": " << r.name;
    if (!r.detail.empty()) out << " (" << r.detail << ")";
    out << "\n";
    doc.push_back({{"suite", r.suite}, {"check", r.name}, {"pass", r.pass}, {"detail", r.detail}});
  }
  if (!c.out.empty()) {
    ExperimentConfig copy = c;
    Sink(copy, out).document(doc);
  }
  return ok ? 0 : 1;
}

// --------------------------------------------------------------------------
// Command table

struct Command {
  const char* name;
  const char* help;
  int (*run)(const ExperimentConfig&, std::ostream&, std::ostream&);
};

const Command kCommands[] = {
    {"maximal-field", "Tabulate M_lambda f, its best radii and optionally D_theta M_lambda f", cmd_maximal_field},
    {"dirderiv", "One-sided directional derivative of f (or of M_lambda f with --maximal)", cmd_dirderiv},
    {"tau", "Non-differentiability measure tau(W, f, x)", cmd_tau},
    {"gamma", "Maximal differentiability degree gamma(f, x)", cmd_gamma},
    {"singular-set", "Grid scan for non-differentiability points", cmd_singular_set},
    {"medial-axis", "Nearest-point multiplicity scan of a closed set", cmd_medial_axis},
    {"infconv", "Moreau envelope inf_y u(y) + |x - y|^2 / 2t", cmd_infconv},
    {"tangency", "k-tangentiality report or sigma decomposition of a point cloud", cmd_tangency},
    {"verify", "Run the built-in verification suites", cmd_verify},
};

}  // namespace

ExperimentConfig ExperimentConfig::defaults_for(const std::string& command) {
  ExperimentConfig c;
  c.command = command;
  if (command == "singular-set") {
    c.function = "abs@2";
    c.box = {-1.0, 1.0};
    c.res = {64};
  } else if (command == "medial-axis") {
    c.box = {-1.0, 1.0};
    c.res = {128};
  } else if (command == "infconv") {
    c.function = "abs";
    c.box = {-3.0, 3.0};
    c.res = {60};
  } else if (command == "tangency") {
    c.function.clear();
  }
  return c;
}

json ExperimentConfig::to_json() const {
  json j = json::object();
  ExperimentConfig copy = *this;
  for_each_field([&](const char* key, auto& value) { j[key] = value; }, copy);
  return j;
}

void ExperimentConfig::merge_json(const json& j) {
  if (!j.is_object()) throw ArgumentError("config must be a JSON object");
  std::vector<std::string> known;
  for_each_field([&](const char* key, auto& value) {
    known.push_back(key);
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(value);
    } catch (const json::exception& e) {
      throw ArgumentError(std::string("config key '") + key + "': " + e.what());
    }
  }, *this);
  for (const auto& item : j.items())
    if (std::find(known.begin(), known.end(), item.key()) == known.end())
      throw ArgumentError("unknown config key '" + item.key() + "'");
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) { return a.to_json() == b.to_json(); }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical toolkit for maximal functions, directional derivatives and tangential sets", "tangentia"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  std::vector<ExperimentConfig> configs;
  configs.reserve(std::size(kCommands));
  std::vector<std::string> config_paths(std::size(kCommands));
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < std::size(kCommands); ++i) {
    const auto& cmd = kCommands[i];
    configs.push_back(ExperimentConfig::defaults_for(cmd.name));
    ExperimentConfig& c = configs.back();
    CLI::App* s = app.add_subcommand(cmd.name, cmd.help);
    subs.push_back(s);
    const std::string name = cmd.name;
    s->add_option("--config", config_paths[i], "JSON file whose keys override the flags");
    s->add_option("--out,-o", c.out, "Output file (stdout when omitted)");
    s->add_option("--seed", c.seed, "Random seed");
    if (name == "verify") {
      std::string names;
      for (const auto& n : verify::suite_names()) names += n + ", ";
      s->add_option("--suite", c.suite, "Suite: " + names + "or all");
      continue;
    }
    if (name == "tangency") {
      s->add_option("--points", c.points, "Point cloud CSV (x1,...,xn per row)")->required();
      s->add_option("--k", c.k, "Tangent dimension");
      s->add_option("--pieces", c.pieces, "Maximum number of pieces");
      s->add_option("--eta", c.eta, "Ratio threshold");
      s->add_option("--noise", c.noise, "Noise floor subtracted from normal components");
      s->add_option("--shells", c.shells, "Dyadic shells (with --at)");
      s->add_option("--at", c.at, "Analyse single base points instead of decomposing")->delimiter(',');
      continue;
    }
    if (name == "medial-axis") {
      s->add_option("--set", c.set, "dist[(x,y),...], distpoly[(x,y),...] or distpoly:file.json")->required();
    } else {
      s->add_option("--function,-f", c.function, "Function spec, e.g. tent, abs@2, maxaffine[(1,0),(-1,0)]");
    }
    if (name == "maximal-field" || name == "singular-set" || name == "medial-axis" || name == "infconv") {
      s->add_option("--box", c.box, "lo,hi for every axis or lo1,hi1,...")->delimiter(',');
      s->add_option("--res", c.res, "Cells per axis")->delimiter(',');
    }
    if (name == "maximal-field" || name == "dirderiv") s->add_option("--lambda", c.lambda, "Radius floor lambda");
    if (name != "singular-set" && name != "medial-axis")
      s->add_option("--at", c.at, "Evaluation point(s), coordinates comma separated")->delimiter(',');
    if (name == "maximal-field" || name == "dirderiv")
      s->add_option("--theta", c.theta, "Direction (normalised)")->delimiter(',');
    if (name == "dirderiv") s->add_flag("--maximal", c.maximal, "Differentiate M_lambda f via the envelope formula");
    if (name == "tau") s->add_option("--subspace", c.subspace, "full, 0, or V=[(..)];ray=[(..)]");
    if (name == "gamma" || name == "singular-set") s->add_option("--tol", c.tol, "tau threshold");
    if (name == "singular-set") s->add_flag("!--no-gamma", c.gamma, "Skip the gamma annotation");
    if (name == "infconv") {
      s->add_option("--t", c.t, "Moreau parameter t");
      s->add_option("--yhalf", c.yhalf, "y-box half width");
      s->add_option("--yres", c.yres, "Cells per y-axis");
      s->add_flag("--strict", c.strict, "Fail when a minimiser sits on the y-box boundary");
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    ExperimentConfig& c = configs[i];
    try {
      if (!config_paths[i].empty()) {
        std::ifstream in(config_paths[i]);
        if (!in) throw ArgumentError("cannot open config '" + config_paths[i] + "'");
        json j;
        try {
          j = json::parse(in);
        } catch (const json::parse_error& e) {
          throw ParseError(std::string("config: ") + e.what(), e.byte);
        }
        c.merge_json(j);
        if (c.command != kCommands[i].name)
          throw ArgumentError("config is for '" + c.command + "', not '" + kCommands[i].name + "'");
      }
      return kCommands[i].run(c, out, err);
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      return 2;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return 2;
    }
  }
  err << app.help();
  return 2;
}

}  // namespace tangentia::cli
