// Frame families with prescribed squared norms: frame operator assembly,
// constructive Schur-Horn synthesis of a family with prescribed spectrum and
// norms, and assembly of an explicit global minimizer of the distance problem.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "gfod/core.hpp"
#include "gfod/linalg.hpp"
#include "gfod/majorization.hpp"

namespace gfod {

struct FrameFamily {
  std::vector<CVector> vectors;  // k vectors in dimension dim
  RealVec norms_sq;              // prescribed ||g_i||^2
  std::size_t dim = 0;
};

inline FrameFamily make_family(std::vector<CVector> vectors) {
  if (vectors.empty()) throw std::invalid_argument("make_family: needs at least one vector");
  FrameFamily fam;
  fam.dim = vectors.front().size();
  fam.norms_sq.reserve(vectors.size());
  for (const CVector& g : vectors) {
    if (g.size() != fam.dim) throw std::invalid_argument("make_family: dimension mismatch");
    for (const Complex& z : g)
      if (!is_finite(z)) throw std::invalid_argument("make_family: non-finite entry");
    fam.norms_sq.push_back(norm_sq(g));
  }
  fam.vectors = std::move(vectors);
  return fam;
}

inline HermitianMatrix frame_operator(const FrameFamily& fam) {
  return rank_one_sum(fam.vectors, fam.dim);
}

struct SynthesisResult {
  FrameFamily family;
  RealVec achieved_spectrum;      // eigenvalues of frame_operator, non-increasing
  HermitianMatrix frame_operator;
};

namespace detail {

// Real symmetric k x k matrix with spectrum nu (built as a rotation product
// applied to diag(nu)) and diagonal pinched entrywise onto target. Returns the
// accumulated orthogonal factor U with  B = U diag(nu) U^T.
//
// Targets are consumed in non-increasing order; each target a_t pairs the two
// active coordinates whose running values straddle it (nu_m >= a_t >=
// nu_{m+1} in the value ordering), one plane rotation pinching a_t exactly and
// leaving the merged value nu_m + nu_{m+1} - a_t active. The merged value
// stays inside [nu_{m+1}, nu_m], so the active list remains sorted and the
// remaining targets stay majorized by the remaining values; at most k - 1
// rotations run. Active coordinates never couple to each other, which keeps
// every 2x2 working block exactly diagonal.
inline std::vector<double> pinch_diagonal(const RealVec& nu, const RealVec& target) {
  const std::size_t k = nu.size();
  std::vector<double> u(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) u[i * k + i] = 1.0;

  struct Active {
    double value;
    std::size_t coord;
  };
  std::vector<Active> active(k);
  for (std::size_t i = 0; i < k; ++i) active[i] = {nu[i], i};  // sorted: nu is non-increasing

  std::vector<std::size_t> coord_of_target(k);
  for (std::size_t t = 0; t + 1 < k; ++t) {
    const double a_t = target[t];
    const std::size_t n = active.size();
    // Last position whose value still dominates the target.
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (active[i].value >= a_t) pos = i;
    if (pos == n - 1) pos = n - 2;  // a_t at the bottom of the range

    const double vi = active[pos].value;
    const double vj = active[pos + 1].value;
    const std::size_t ci = active[pos].coord;
    const std::size_t cj = active[pos + 1].coord;
    const double span = vi - vj;
    const double cos2 = span > 0.0 ? std::clamp((a_t - vj) / span, 0.0, 1.0) : 1.0;
    const double c = std::sqrt(cos2);
    const double s = std::sqrt(1.0 - cos2);

    // U <- R U with R the (ci, cj) plane rotation [[c, s], [-s, c]]; the
    // (ci, cj) block of B is diag(vi, vj), so coordinate ci lands on a_t.
    for (std::size_t col = 0; col < k; ++col) {
      const double ui = u[ci * k + col];
      const double uj = u[cj * k + col];
      u[ci * k + col] = c * ui + s * uj;
      u[cj * k + col] = -s * ui + c * uj;
    }
    coord_of_target[t] = ci;
    active[pos + 1].value = vi + vj - a_t;
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(pos));
  }
  coord_of_target[k - 1] = active.front().coord;  // forced by the trace

  // Reorder rows so coordinate w carries target w.
  std::vector<double> out(k * k);
  for (std::size_t t = 0; t < k; ++t)
    for (std::size_t col = 0; col < k; ++col) out[t * k + col] = u[coord_of_target[t] * k + col];
  return out;
}

}  // namespace detail

// Builds a family of k vectors with ||g_i||^2 = a_i and frame operator equal
// to diag(mu) in the standard basis. Requires a majorized by mu; when k < d,
// mu may have at most k nonzero entries.
inline SynthesisResult schur_horn_synthesize(const RealVec& mu, const RealVec& a) {
  const std::size_t d = mu.size();
  const std::size_t k = a.size();
  if (d == 0 || k == 0) throw std::invalid_argument("schur_horn_synthesize: empty input");
  double scale = 1.0;
  for (std::size_t i = 0; i < d; ++i) {
    if (mu[i] < -1e-12 * scale)
      throw std::invalid_argument("schur_horn_synthesize: mu must be >= 0");
    if (i > 0 && mu[i] > mu[i - 1] + 1e-12)
      throw std::invalid_argument("schur_horn_synthesize: mu must be non-increasing");
    scale = std::max(scale, std::abs(mu[i]));
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (!(a[i] > 0.0)) throw std::invalid_argument("schur_horn_synthesize: a must be > 0");
    if (i > 0 && a[i] > a[i - 1] + 1e-12)
      throw std::invalid_argument("schur_horn_synthesize: a must be non-increasing");
  }
  const double maj_tol = 1e-9 * (1.0 + mu.front() + a.front());
  if (!majorizes(a, mu, maj_tol)) {
    const std::size_t j = first_failing_partial_sum(a, mu, maj_tol);
    if (j > 0)
      throw std::invalid_argument(
          "schur_horn_synthesize: a is not majorized by mu; partial sum " + std::to_string(j) +
          " fails");
    throw std::invalid_argument("schur_horn_synthesize: a is not majorized by mu; totals differ");
  }
  if (k < d) {
    for (std::size_t i = k; i < d; ++i) {
      if (mu[i] > 1e-10 * scale)
        throw std::invalid_argument(
            "schur_horn_synthesize: with k < d, mu may have at most k nonzero entries");
    }
  }

  // Gram matrix spectrum: mu truncated/padded to length k.
  RealVec nu(k, 0.0);
  for (std::size_t i = 0; i < std::min(d, k); ++i) nu[i] = std::max(mu[i], 0.0);

  const std::vector<double> u = detail::pinch_diagonal(nu, a);

  // Column i of the synthesis matrix: (g_i)_r = sqrt(nu_r) * U[i][r], read off
  // on the first d coordinates (rows beyond d carry nu = 0).
  RealVec root(k);
  for (std::size_t r = 0; r < k; ++r) root[r] = std::sqrt(nu[r]);
  std::vector<CVector> vectors(k, CVector(d, Complex{0.0, 0.0}));
  const std::size_t rows = std::min(d, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t r = 0; r < rows; ++r) {
      vectors[i][r] = Complex(root[r] * u[i * k + r], 0.0);
    }
  }

  SynthesisResult out;
  out.family.vectors = std::move(vectors);
  out.family.norms_sq = a;
  out.family.dim = d;
  out.frame_operator = frame_operator(out.family);
  out.achieved_spectrum = herm_eig(out.frame_operator).eigenvalues;
  return out;
}

// Explicit global minimizer for S and a: eigendecompose S, solve for delta,
// synthesize block by block against mu = lambda - delta in the eigenbasis
// coordinates, and rotate the vectors back through the eigenvectors of S.
// Block-wise synthesis keeps every vector an exact eigenvector of S - S_G.
inline SynthesisResult construct_minimizer(const HermitianMatrix& S, const RealVec& a) {
  const EigDecomposition eig = herm_eig(S);
  const double scale = 1.0 + S.frob_norm();
  RealVec lambda = eig.eigenvalues;
  for (double& x : lambda) {
    if (x < -1e-10 * scale)
      throw std::invalid_argument("construct_minimizer: S is not positive semidefinite");
    x = std::max(x, 0.0);
  }
  GfodInstance inst{lambda, a};
  inst.validate();
  const DeltaSolution sol = delta(inst);

  const std::size_t d = inst.d();
  const std::size_t k = inst.k();
  const std::size_t d_eff = sol.kd_mode ? k : d;  // working dimension of the solve
  const std::size_t r = sol.r_star;

  // Vector and coordinate ranges per block: head blocks pair range
  // [s_{j-1}, s_j) with itself; the tail pairs vectors [r, k) with
  // coordinates [r, d_eff).
  struct Block {
    std::size_t v_lo, v_hi;  // vector index range
    std::size_t c_lo, c_hi;  // eigen-coordinate range
  };
  std::vector<Block> blocks;
  std::size_t lo = 0;
  for (std::size_t j = 0; j + 1 < sol.q; ++j) {
    blocks.push_back({lo, sol.s[j], lo, sol.s[j]});
    lo = sol.s[j];
  }
  blocks.push_back({r, k, r, d_eff});

  std::vector<CVector> coords(k);  // synthesized vectors in eigen-coordinates
  for (const Block& b : blocks) {
    RealVec block_mu(sol.mu.begin() + static_cast<std::ptrdiff_t>(b.c_lo),
                     sol.mu.begin() + static_cast<std::ptrdiff_t>(b.c_hi));
    for (double& x : block_mu) x = std::max(x, 0.0);
    const RealVec block_a(a.begin() + static_cast<std::ptrdiff_t>(b.v_lo),
                          a.begin() + static_cast<std::ptrdiff_t>(b.v_hi));
    const SynthesisResult part = schur_horn_synthesize(block_mu, block_a);
    for (std::size_t i = 0; i < part.family.vectors.size(); ++i) {
      CVector g(d, Complex{0.0, 0.0});
      for (std::size_t rr = 0; rr < part.family.dim; ++rr) g[b.c_lo + rr] = part.family.vectors[i][rr];
      coords[b.v_lo + i] = std::move(g);
    }
  }

  // Rotate back: g_i = V ghat_i with V the eigenvector basis of S.
  std::vector<CVector> vectors(k, CVector(d, Complex{0.0, 0.0}));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      const Complex w = coords[i][c];
      if (w == Complex{0.0, 0.0}) continue;
      for (std::size_t row = 0; row < d; ++row) vectors[i][row] += w * eig.eigenvectors[c][row];
    }
  }

  SynthesisResult out;
  out.family.vectors = std::move(vectors);
  out.family.norms_sq = a;
  out.family.dim = d;
  out.frame_operator = frame_operator(out.family);
  out.achieved_spectrum = herm_eig(out.frame_operator).eigenvalues;
  return out;
}

}  // namespace gfod
