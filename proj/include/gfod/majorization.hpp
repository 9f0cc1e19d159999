// Real-vector majorization toolkit: sorting plus (weak sub)majorization tests
// between vectors of possibly different lengths. Partial sums are compared up
// to the shorter length; full majorization additionally requires equal totals.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "gfod/linalg.hpp"

namespace gfod {

inline RealVec sort_down(RealVec x) {
  std::sort(x.begin(), x.end(), std::greater<double>());
  return x;
}

// True when x is submajorized by y (x prec_w y): every partial sum of x's
// sorted entries is dominated by y's, up to min{len(x), len(y)}.
inline bool submajorizes_weak(const RealVec& x, const RealVec& y, double tol = 1e-9) {
  const RealVec xs = sort_down(x);
  const RealVec ys = sort_down(y);
  const std::size_t m = std::min(xs.size(), ys.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    sx += xs[j];
    sy += ys[j];
    if (sx > sy + tol) return false;
  }
  return true;
}

// True when x is majorized by y (x prec y): x prec_w y and the totals over the
// full lengths agree.
inline bool majorizes(const RealVec& x, const RealVec& y, double tol = 1e-9) {
  if (!submajorizes_weak(x, y, tol)) return false;
  const double tx = std::accumulate(x.begin(), x.end(), 0.0);
  const double ty = std::accumulate(y.begin(), y.end(), 0.0);
  return std::abs(tx - ty) <= tol;
}

// First index j (1-based) where the partial-sum test of x prec_w y fails,
// or 0 when it holds. Used for diagnostic messages.
inline std::size_t first_failing_partial_sum(const RealVec& x, const RealVec& y,
                                             double tol = 1e-9) {
  const RealVec xs = sort_down(x);
  const RealVec ys = sort_down(y);
  const std::size_t m = std::min(xs.size(), ys.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    sx += xs[j];
    sy += ys[j];
    if (sx > sy + tol) return j + 1;
  }
  return 0;
}

}  // namespace gfod
