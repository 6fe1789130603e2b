#include "tangentia/types.hpp"

#include <cstdio>
#include <algorithm>
#include <limits>

namespace tangentia {

std::string format_point(const Vec& p) {
  std::string s = "(";
  char buf[32];
  for (int d = 0; d < p.size(); ++d) {
    std::snprintf(buf, sizeof buf, "%.12g", p[d]);
    if (d) s += ", ";
    s += buf;
  }
  return s + ")";
}

std::vector<Vec> grid_nodes(const Box& box, const std::vector<int>& res) {
  const int n = box.dim();
  std::size_t total = 1;
  for (int d = 0; d < n; ++d) total *= static_cast<std::size_t>(res[d]);
  std::vector<Vec> nodes;
  nodes.reserve(total);
  std::vector<int> idx(n, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    Vec p(n);
    for (int d = 0; d < n; ++d) {
      const double t = res[d] > 1 ? static_cast<double>(idx[d]) / (res[d] - 1) : 0.5;
      p[d] = box.lo[d] + t * (box.hi[d] - box.lo[d]);
    }
    nodes.push_back(p);
    for (int d = n - 1; d >= 0; --d) {
      if (++idx[d] < res[d]) break;
      idx[d] = 0;
    }
  }
  return nodes;
}

double grid_spacing(const Box& box, const std::vector<int>& res) {
  double h = std::numeric_limits<double>::infinity();
  for (int d = 0; d < box.dim(); ++d)
    if (res[d] > 1) h = std::min(h, (box.hi[d] - box.lo[d]) / (res[d] - 1));
  return h;
}

}  // namespace tangentia
