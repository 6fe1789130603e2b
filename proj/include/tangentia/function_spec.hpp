#pragma once

// Text descriptions of test functions, shared by the command-line driver and
// the verification suites.
//
//   tent                    max(0, 1 - |y|) on R
//   abs, abs@n              |x_1| on R^n
//   norm@n                  |x| on R^n
//   sq, sq@n                |x|^2 on R^n
//   sqrtabs                 sqrt|y| on R
//   gauss(s)@n              exp(-|x|^2 / 2s^2)
//   const(c)@n              constant c
//   linear(a_1,...,a_n,c)   a . x + c
//   maxaffine[(a_1,...,a_n,c), ...]
//   dist[(p), (p), ...]     distance to a finite point set
//   distpoly[(x,y), ...]    distance to a polygon boundary
//   distpoly:path.json      same, vertices read from JSON
//   infconv(u, t[, L[, res]])   Moreau envelope of u with parameter t, y-box [-L, L]^n
//   grid:path.csv           multilinear interpolant of a sampled grid
//
// Numbers accept the Unicode minus sign. Errors are ParseError with a byte position.

#include <string>

#include "tangentia/funcspace.hpp"
#include "tangentia/specials.hpp"

namespace tangentia::funcspec {

funcspace::DirectionalFunction parse(const std::string& text);

/// Closed set described by `dist[...]`, `distpoly[...]` or `distpoly:path`.
specials::ClosedSetModel parse_set(const std::string& text);

/// Replaces U+2212 by '-'.
std::string normalise_minus(const std::string& text);

}  // namespace tangentia::funcspec
