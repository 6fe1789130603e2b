#include "tangentia/function_spec.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tangentia/errors.hpp"
#include "tangentia/functions.hpp"

namespace tangentia::funcspec {

namespace {

using funcspace::DirectionalFunction;

constexpr char kUnicodeMinus[] = "\xE2\x88\x92";

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Parser {
 public:
  explicit Parser(std::string text) : s_(std::move(text)) {}

  DirectionalFunction function() {
    skip();
    const std::size_t at = pos_;
    const std::string name = identifier();
    if (name.empty()) fail("expected a function name", at);
    if (name == "grid" || (name == "distpoly" && peek() == ':')) {
      expect(':');
      const std::string path = rest();
      if (path.empty()) fail("expected a path after ':'", pos_);
      if (name == "grid") return funcspace::GridFunction::load_csv(path).as_function();
      return specials::distance_function(specials::ClosedSetModel::polygon_from_json(read_file(path)));
    }
    if (name == "tent") return suffix_dim(functions::tent(), 1, at);
    if (name == "sqrtabs") return suffix_dim(functions::sqrt_abs(), 1, at);
    if (name == "abs") {
      const int n = dimension(1);
      return functions::abs_coordinate(n, 0);
    }
    if (name == "norm") return functions::norm(dimension(1));
    if (name == "sq") {
      const int n = dimension(1);
      Eigen::MatrixXd a = 2 * Eigen::MatrixXd::Identity(n, n);
      return functions::quadratic(a, Vec::Zero(n)).with_label(n == 1 ? "sq" : "sq@" + std::to_string(n));
    }
    if (name == "gauss") {
      const auto args = optional_numbers();
      if (args.size() > 1) fail("gauss takes one parameter", at);
      const double sigma = args.empty() ? 1.0 : args[0];
      if (!(sigma > 0)) fail("gauss width must be positive", at);
      return functions::gaussian(dimension(1), sigma);
    }
    if (name == "const") {
      const auto args = optional_numbers();
      if (args.size() > 1) fail("const takes one parameter", at);
      return functions::constant(dimension(1), args.empty() ? 1.0 : args[0]);
    }
    if (name == "linear") {
      const auto args = optional_numbers();
      if (args.size() < 2 || args.size() > kMaxDim + 1) fail("linear needs 1..3 slopes and an offset", at);
      Vec a(static_cast<int>(args.size() - 1));
      for (int d = 0; d < a.size(); ++d) a[d] = args[d];
      return functions::linear(a, args.back());
    }
    if (name == "maxaffine") {
      const auto rows = tuple_list();
      if (rows.empty()) fail("maxaffine needs at least one (a, c) tuple", at);
      std::vector<Vec> slopes;
      std::vector<double> offsets;
      for (const auto& r : rows) {
        if (r.size() < 2 || r.size() != rows[0].size() || r.size() > kMaxDim + 1)
          fail("maxaffine tuples must all have n slopes and one offset", at);
        Vec a(static_cast<int>(r.size() - 1));
        for (int d = 0; d < a.size(); ++d) a[d] = r[d];
        slopes.push_back(a);
        offsets.push_back(r.back());
      }
      return functions::max_affine(functions::make_affine_family(slopes, offsets));
    }
    if (name == "dist" || name == "distpoly") {
      pos_ = at;
      return specials::distance_function(set());
    }
    if (name == "infconv") {
      expect('(');
      DirectionalFunction u = function();
      std::vector<double> args;
      skip();
      while (peek() == ',') {
        ++pos_;
        args.push_back(number());
        skip();
      }
      expect(')');
      if (args.empty() || args.size() > 3) fail("infconv(u, t[, L[, res]])", at);
      const double t = args[0];
      const double half = args.size() > 1 ? args[1] : 10.0;
      const double res = args.size() > 2 ? args[2] : 200.0;
      if (!(t > 0) || !(half > 0) || res < 2 || res != std::floor(res)) fail("infconv parameters out of range", at);
      const int n = u.dim();
      Box ybox{Vec::Constant(n, -half), Vec::Constant(n, half)};
      return specials::inf_convolution_function(u, specials::moreau_coupling(t), ybox, static_cast<int>(res))
          .with_label(s_.substr(at, pos_ - at));
    }
    fail("unknown function '" + name + "'", at);
  }

  specials::ClosedSetModel set() {
    skip();
    const std::size_t at = pos_;
    const std::string name = identifier();
    if (name == "distpoly" && peek() == ':') {
      ++pos_;
      return specials::ClosedSetModel::polygon_from_json(read_file(rest()));
    }
    if (name != "dist" && name != "distpoly") fail("expected dist[...] or distpoly[...]", at);
    const auto rows = tuple_list();
    std::vector<Vec> pts;
    for (const auto& r : rows) {
      if (r.empty() || r.size() > kMaxDim || r.size() != rows[0].size()) fail("set points must share a dimension 1..3", at);
      Vec p(static_cast<int>(r.size()));
      for (int d = 0; d < p.size(); ++d) p[d] = r[d];
      pts.push_back(p);
    }
    if (pts.empty()) fail("set must be nonempty", at);
    return name == "dist" ? specials::ClosedSetModel::points(pts) : specials::ClosedSetModel::polygon(pts);
  }

  void finish() {
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing text", pos_);
  }

 private:
  [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
    throw ParseError("function spec: " + msg, at);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  char peek() {
    skip();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'", pos_);
    ++pos_;
  }
  std::string identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    return s_.substr(start, pos_ - start);
  }
  std::string rest() {
    std::string r = s_.substr(pos_);
    pos_ = s_.size();
    while (!r.empty() && std::isspace(static_cast<unsigned char>(r.back()))) r.pop_back();
    return r;
  }
  double number() {
    skip();
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || !std::isfinite(v)) fail("expected a number", pos_);
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }
  std::vector<double> optional_numbers() {
    std::vector<double> out;
    if (peek() != '(') return out;
    ++pos_;
    if (peek() == ')') {
      ++pos_;
      return out;
    }
    out.push_back(number());
    while (peek() == ',') {
      ++pos_;
      out.push_back(number());
    }
    expect(')');
    return out;
  }
  std::vector<std::vector<double>> tuple_list() {
    expect('[');
    std::vector<std::vector<double>> rows;
    if (peek() == ']') {
      ++pos_;
      return rows;
    }
    for (;;) {
      if (peek() != '(') fail("expected '('", pos_);
      rows.push_back(optional_numbers());
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      expect(']');
      return rows;
    }
  }
  int dimension(int fallback) {
    if (peek() != '@') return fallback;
    ++pos_;
    const std::size_t at = pos_;
    const double v = number();
    if (v != std::floor(v) || v < 1 || v > kMaxDim) fail("dimension must be 1, 2 or 3", at);
    return static_cast<int>(v);
  }
  DirectionalFunction suffix_dim(DirectionalFunction f, int only, std::size_t at) {
    if (dimension(only) != only) fail("this function is only defined on R^" + std::to_string(only), at);
    return f;
  }

  std::string s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string normalise_minus(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text.compare(i, 3, kUnicodeMinus) == 0) {
      out.push_back('-');
      i += 2;
    } else {
      out.push_back(text[i]);
    }
  }
  return out;
}

funcspace::DirectionalFunction parse(const std::string& text) {
  Parser p(normalise_minus(text));
  auto f = p.function();
  p.finish();
  return f;
}

specials::ClosedSetModel parse_set(const std::string& text) {
  Parser p(normalise_minus(text));
  auto a = p.set();
  p.finish();
  return a;
}

}  // namespace tangentia::funcspec
