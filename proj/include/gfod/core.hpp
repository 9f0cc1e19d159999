// Optimal spectrum computation for frame operator distance problems: prefix
// averages, exact piecewise-linear water-filling, co-feasibility tests, the
// recursive block construction, and the assembled optimal vector delta with
// its minimizer spectrum mu = lambda - delta. Handles both k >= d and the
// k < d reduction.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "gfod/linalg.hpp"
#include "gfod/majorization.hpp"
#include "gfod/norms.hpp"

namespace gfod {

// Problem data: target spectrum lambda (length d, non-increasing, >= 0) and
// prescribed squared norms a (length k, non-increasing, > 0).
struct GfodInstance {
  RealVec lambda;
  RealVec a;

  std::size_t d() const { return lambda.size(); }
  std::size_t k() const { return a.size(); }

  void validate() const {
    if (lambda.empty()) throw std::invalid_argument("instance: lambda must be non-empty");
    if (a.empty()) throw std::invalid_argument("instance: a must be non-empty");
    for (std::size_t i = 0; i < lambda.size(); ++i) {
      if (!std::isfinite(lambda[i])) throw std::invalid_argument("instance: non-finite lambda");
      if (lambda[i] < 0.0)
        throw std::invalid_argument("instance: lambda must be entrywise >= 0 (entry " +
                                    std::to_string(i) + " is " + std::to_string(lambda[i]) + ")");
      if (i > 0 && lambda[i] > lambda[i - 1])
        throw std::invalid_argument("instance: lambda must be non-increasing");
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (!std::isfinite(a[i])) throw std::invalid_argument("instance: non-finite a");
      if (!(a[i] > 0.0))
        throw std::invalid_argument("instance: a must be entrywise > 0 (entry " +
                                    std::to_string(i) + " is " + std::to_string(a[i]) + ")");
      if (i > 0 && a[i] > a[i - 1])
        throw std::invalid_argument("instance: a must be non-increasing");
    }
  }
};

// Unsorted data is accepted and sorted internally; the applied permutations
// are reported so results can be traced back to input positions.
// sorted[i] == input[perm[i]].
struct SortedInstance {
  GfodInstance inst;
  std::vector<std::size_t> lambda_perm;
  std::vector<std::size_t> a_perm;
};

inline SortedInstance make_instance_sorted(RealVec lambda, RealVec a) {
  auto sort_perm = [](const RealVec& v) {
    std::vector<std::size_t> perm(v.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::stable_sort(perm.begin(), perm.end(),
                     [&](std::size_t i, std::size_t j) { return v[i] > v[j]; });
    return perm;
  };
  SortedInstance out;
  out.lambda_perm = sort_perm(lambda);
  out.a_perm = sort_perm(a);
  out.inst.lambda.resize(lambda.size());
  out.inst.a.resize(a.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) out.inst.lambda[i] = lambda[out.lambda_perm[i]];
  for (std::size_t i = 0; i < a.size(); ++i) out.inst.a[i] = a[out.a_perm[i]];
  out.inst.validate();
  return out;
}

// Prefix sums of h_i = lambda_i - a_i over i = 1..min{k,d}; the window
// average P(j,r) = (sum_{i=j..r} h_i) / (r - j + 1) is an O(1) query.
class AveragingTable {
 public:
  explicit AveragingTable(const GfodInstance& inst) {
    inst.validate();
    const std::size_t m = std::min(inst.d(), inst.k());
    h_.resize(m);
    prefix_.resize(m + 1, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      h_[i] = inst.lambda[i] - inst.a[i];
      prefix_[i + 1] = prefix_[i] + h_[i];
    }
  }

  std::size_t size() const { return h_.size(); }
  const RealVec& h() const { return h_; }

  // 1-based window [j, r], 1 <= j <= r <= size().
  double P(std::size_t j, std::size_t r) const {
    if (j < 1 || r < j || r > h_.size()) {
      throw std::invalid_argument("AveragingTable::P: window (" + std::to_string(j) + "," +
                                  std::to_string(r) + ") out of range for m=" +
                                  std::to_string(h_.size()));
    }
    return (prefix_[r] - prefix_[j - 1]) / static_cast<double>(r - j + 1);
  }

 private:
  RealVec h_;
  RealVec prefix_;
};

inline AveragingTable averages(const GfodInstance& inst) { return AveragingTable(inst); }

// Solves sum_i (lambda_i - c)^+ = total for the unique c < lambda_tail[0],
// exactly on the piecewise-linear function: breakpoints at the lambda values,
// closed form on the active piece.
inline double waterfill_c(const RealVec& lambda_tail, double total) {
  if (!(total > 0.0)) throw std::invalid_argument("waterfill_c: total must be > 0");
  if (lambda_tail.empty()) throw std::invalid_argument("waterfill_c: empty tail");
  const std::size_t n = lambda_tail.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (lambda_tail[i] < 0.0) throw std::invalid_argument("waterfill_c: negative entry");
    if (i > 0 && lambda_tail[i] > lambda_tail[i - 1])
      throw std::invalid_argument("waterfill_c: tail must be non-increasing");
  }
  // With j active terms the solution is c = (S_j - total)/j, valid on the
  // piece lambda_{j+1} <= c < lambda_j. The lower edge takes a small slack so
  // a solution sitting exactly on a breakpoint cannot fall between pieces.
  double run = 0.0;
  for (std::size_t j = 1; j <= n; ++j) {
    run += lambda_tail[j - 1];
    const double c = (run - total) / static_cast<double>(j);
    const double lo = (j < n) ? lambda_tail[j] : -std::numeric_limits<double>::infinity();
    const double slack = (j < n) ? 1e-12 * (1.0 + std::abs(lo)) : 0.0;
    if (c >= lo - slack && c < lambda_tail[j - 1]) return c;
  }
  throw std::runtime_error("waterfill_c: no piece matched (non-monotone input?)");
}

// Water-fill outcome for a truncation index r: the constant c on the tail
// spectrum past r, the truncated spectrum ((lambda_i - c)^+)_{i > r}, and
// whether the truncated pair is co-feasible.
struct CoFeasibility {
  std::size_t r = 0;
  double c = 0.0;
  bool cofeasible = false;
  RealVec truncated_mu;
};

// Applicable in the k >= d working form (k < d callers reduce first).
// Requires 0 <= r <= d-1 and r < k.
inline CoFeasibility check_cofeasible(const GfodInstance& inst, std::size_t r) {
  inst.validate();
  const std::size_t d = inst.d();
  const std::size_t k = inst.k();
  if (r >= d)
    throw std::invalid_argument("check_cofeasible: r=" + std::to_string(r) +
                                " out of range for d=" + std::to_string(d));
  if (r >= k) throw std::invalid_argument("check_cofeasible: r must be < k");

  const RealVec tail(inst.lambda.begin() + static_cast<std::ptrdiff_t>(r), inst.lambda.end());
  double total = 0.0;
  for (std::size_t i = r; i < k; ++i) total += inst.a[i];

  CoFeasibility out;
  out.r = r;
  out.c = waterfill_c(tail, total);
  out.truncated_mu.resize(tail.size());
  for (std::size_t i = 0; i < tail.size(); ++i) out.truncated_mu[i] = std::max(tail[i] - out.c, 0.0);
  const RealVec a_tail(inst.a.begin() + static_cast<std::ptrdiff_t>(r), inst.a.end());
  const double tol = 1e-9 * (1.0 + tail.front() + total);
  out.cofeasible = out.c < tail.front() && majorizes(a_tail, out.truncated_mu, tol);
  return out;
}

// Head blocks for a truncation index r: s_1 < ... < s_j = r with their window
// averages c_j. Empty for r = 0. Argmin ties within 1e-12*(1+|value|) resolve
// to the largest index.
struct BlockStructure {
  std::vector<std::size_t> s;
  RealVec c;
};

inline BlockStructure block_structure(const GfodInstance& inst, std::size_t r) {
  inst.validate();
  const std::size_t m = std::min(inst.d(), inst.k());
  if (r > m - 1 && r != 0)
    throw std::invalid_argument("block_structure: r=" + std::to_string(r) +
                                " out of range for min{k,d}=" + std::to_string(m));
  BlockStructure out;
  if (r == 0) return out;

  const AveragingTable table(inst);
  std::size_t lo = 0;  // previous block end s_j (0 before the first block)
  while (lo < r) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t l = lo + 1; l <= r; ++l) best = std::min(best, table.P(lo + 1, l));
    const double tie = 1e-12 * (1.0 + std::abs(best));
    std::size_t arg = lo + 1;
    for (std::size_t l = lo + 1; l <= r; ++l) {
      if (table.P(lo + 1, l) <= best + tie) arg = l;
    }
    out.s.push_back(arg);
    out.c.push_back(table.P(lo + 1, arg));
    lo = arg;
  }
  return out;
}

namespace detail {

// Strictness margin for c_{q-1} < c_q checks, per the 1e-12 hybrid rule.
inline double strict_tol(double x, double y) { return 1e-12 * (1.0 + std::abs(x) + std::abs(y)); }

// Signed admissibility margin c_q(r) - c_{q-1}(r); +infinity for r = 0.
inline double admissibility_margin(const GfodInstance& inst, const CoFeasibility& cof,
                                   std::size_t r) {
  if (r == 0) return std::numeric_limits<double>::infinity();
  const BlockStructure blocks = block_structure(inst, r);
  return cof.c - blocks.c.back();
}

}  // namespace detail

// r is admissible when r = 0 or the last head constant sits strictly below
// the tail water-fill constant (margin beyond the 1e-12 strictness tolerance).
// Requires r to be co-feasible.
inline bool is_admissible(const GfodInstance& inst, std::size_t r) {
  const CoFeasibility cof = check_cofeasible(inst, r);
  if (!cof.cofeasible)
    throw std::invalid_argument("is_admissible: index " + std::to_string(r) +
                                " is not co-feasible");
  if (r == 0) return true;
  const double margin = detail::admissibility_margin(inst, cof, r);
  return margin > detail::strict_tol(cof.c, cof.c - margin);
}

// Smallest co-feasible index; the unique admissible one. Throws when no index
// is co-feasible (inputs violating the existence guarantee are reported, never
// silently accepted) or when the minimal index is inadmissible beyond
// tolerance. A margin inside the tolerance is a degenerate instance, not an
// error; callers read the flag off the solved DeltaSolution.
inline std::size_t minimal_cofeasible_index(const GfodInstance& inst) {
  inst.validate();
  if (inst.k() < inst.d())
    throw std::invalid_argument("minimal_cofeasible_index: requires k >= d working form");
  for (std::size_t r = 0; r < inst.d(); ++r) {
    const CoFeasibility cof = check_cofeasible(inst, r);
    if (cof.cofeasible) {
      const double margin = detail::admissibility_margin(inst, cof, r);
      if (margin < -detail::strict_tol(cof.c, cof.c - margin)) {
        throw std::runtime_error("minimal_cofeasible_index: minimal co-feasible index " +
                                 std::to_string(r) +
                                 " is not admissible; input violates the uniqueness guarantee");
      }
      return r;
    }
  }
  throw std::runtime_error(
      "minimal_cofeasible_index: no co-feasible index exists for this instance");
}

struct Reduction {
  GfodInstance reduced;   // lambda truncated to its first k entries
  RealVec tail;           // discarded lambda_{k+1..d}, kept for reassembly
};

inline Reduction reduce_to_k(const GfodInstance& inst) {
  inst.validate();
  if (inst.k() >= inst.d())
    throw std::invalid_argument("reduce_to_k: requires k < d (k=" + std::to_string(inst.k()) +
                                ", d=" + std::to_string(inst.d()) + ")");
  Reduction out;
  out.reduced.lambda.assign(inst.lambda.begin(),
                            inst.lambda.begin() + static_cast<std::ptrdiff_t>(inst.k()));
  out.reduced.a = inst.a;
  out.tail.assign(inst.lambda.begin() + static_cast<std::ptrdiff_t>(inst.k()), inst.lambda.end());
  return out;
}

// Solved block structure: the chosen index r_star = s_{q-1}, block boundaries
// and constants, the optimal vector delta (unordered), and the minimizer
// spectrum mu = lambda - delta.
struct DeltaSolution {
  std::size_t r_star = 0;
  std::size_t q = 0;          // block count
  std::vector<std::size_t> s; // s_1 < ... < s_q (s_0 = 0 implicit)
  RealVec c;                  // c_1 < ... < c_q
  RealVec delta;
  RealVec mu;
  bool kd_mode = false;       // solved through the k < d reduction
  bool degenerate = false;    // c_{q-1} within strictness tolerance of c_q
};

namespace detail {

inline DeltaSolution delta_k_ge_d(const GfodInstance& inst, bool exhaustive_check) {
  const std::size_t d = inst.d();
  const std::size_t r = minimal_cofeasible_index(inst);
  const CoFeasibility cof = check_cofeasible(inst, r);

  DeltaSolution sol;
  sol.r_star = r;
  sol.kd_mode = false;

  if (r == 0) {
    sol.q = 1;
    sol.c = {cof.c};
  } else {
    const BlockStructure blocks = block_structure(inst, r);
    sol.q = blocks.s.size() + 1;
    sol.s = blocks.s;
    sol.c = blocks.c;
    sol.c.push_back(cof.c);
    const double margin = cof.c - blocks.c.back();
    sol.degenerate = margin <= strict_tol(cof.c, blocks.c.back());
  }

  // s_q = last tail index with lambda_i strictly above the water level.
  std::size_t s_q = r + 1;
  for (std::size_t i = r + 1; i <= d; ++i) {
    if (inst.lambda[i - 1] - cof.c > strict_tol(inst.lambda[i - 1], cof.c)) s_q = i;
  }
  sol.s.push_back(s_q);

  sol.delta.resize(d);
  std::size_t lo = 0;
  for (std::size_t j = 0; j + 1 < sol.q; ++j) {
    for (std::size_t i = lo; i < sol.s[j]; ++i) sol.delta[i] = sol.c[j];
    lo = sol.s[j];
  }
  for (std::size_t i = r; i < d; ++i) sol.delta[i] = std::min(inst.lambda[i], cof.c);

  sol.mu.resize(d);
  for (std::size_t i = 0; i < d; ++i) sol.mu[i] = inst.lambda[i] - sol.delta[i];

  if (exhaustive_check) {
    std::vector<std::size_t> winners;
    for (std::size_t cand = 0; cand < d; ++cand) {
      const CoFeasibility c = check_cofeasible(inst, cand);
      if (c.cofeasible && is_admissible(inst, cand)) winners.push_back(cand);
    }
    const bool unique = (winners.size() == 1 && winners.front() == r) ||
                        (winners.empty() && sol.degenerate);
    if (!unique) {
      std::string msg = "delta: co-feasible and admissible index is not unique; found {";
      for (std::size_t w : winners) msg += std::to_string(w) + " ";
      throw std::runtime_error(msg + "} with minimal co-feasible " + std::to_string(r));
    }
  }
  return sol;
}

inline void validate_solution(const GfodInstance& inst, const DeltaSolution& sol) {
  const std::size_t d = inst.d();
  const std::size_t k = inst.k();
  const double tr_lambda = std::accumulate(inst.lambda.begin(), inst.lambda.end(), 0.0);
  const double tr_a = std::accumulate(inst.a.begin(), inst.a.end(), 0.0);
  const double tr_delta = std::accumulate(sol.delta.begin(), sol.delta.end(), 0.0);
  const double scale = 1.0 + std::abs(tr_lambda) + std::abs(tr_a);
  if (std::abs(tr_delta - (tr_lambda - tr_a)) > 1e-9 * scale)
    throw std::runtime_error("delta: trace identity violated, residual " +
                             std::to_string(tr_delta - (tr_lambda - tr_a)));
  for (std::size_t j = 0; j + 1 < sol.c.size(); ++j) {
    // Head constants are strictly increasing; the final gap may be degenerate.
    if (j + 2 < sol.c.size() && !(sol.c[j] < sol.c[j + 1]))
      throw std::runtime_error("delta: head block constants not strictly increasing");
  }
  const double c_q = sol.c.back();
  const std::size_t head = sol.kd_mode ? k : d;
  for (std::size_t i = 0; i < head; ++i) {
    if (sol.delta[i] > std::min(c_q, inst.lambda[i]) + 1e-9)
      throw std::runtime_error("delta: bound delta_i <= min{c_q, lambda_i} violated at " +
                               std::to_string(i));
  }
  for (std::size_t i = 0; i < d; ++i) {
    if (sol.mu[i] < -1e-9) throw std::runtime_error("delta: negative minimizer spectrum entry");
    if (sol.kd_mode && i >= k && std::abs(sol.mu[i]) > 1e-12)
      throw std::runtime_error("delta: mu must vanish beyond k in the k < d mode");
  }
  if (!majorizes(inst.a, sol.mu, 1e-9 * (1.0 + inst.lambda.front() + inst.a.front())))
    throw std::runtime_error("delta: majorization a < lambda - delta violated");
}

}  // namespace detail

// The optimal vector delta(lambda, a) and minimizer spectrum. With
// exhaustive_check, all truncation indexes are scanned and uniqueness of the
// admissible one is asserted.
inline DeltaSolution delta(const GfodInstance& inst, bool exhaustive_check = false) {
  inst.validate();
  DeltaSolution sol;
  if (inst.k() < inst.d()) {
    const Reduction red = reduce_to_k(inst);
    sol = detail::delta_k_ge_d(red.reduced, exhaustive_check);
    sol.kd_mode = true;
    sol.delta.insert(sol.delta.end(), red.tail.begin(), red.tail.end());
    sol.mu.resize(inst.d(), 0.0);
  } else {
    sol = detail::delta_k_ge_d(inst, exhaustive_check);
  }
  detail::validate_solution(inst, sol);
  return sol;
}

// N(D_delta): the value of the norm at the diagonal matrix with diagonal
// delta(inst) -- the global minimum of the distance problem.
inline double global_min_value(const GfodInstance& inst, const UINormSpec& norm) {
  const DeltaSolution sol = delta(inst);
  RealVec s(sol.delta.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::abs(sol.delta[i]);
  return evaluate_from_singulars(norm, std::move(s));
}

}  // namespace gfod
