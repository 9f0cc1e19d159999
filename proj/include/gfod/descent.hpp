// Verification harness for the distance problem: Riemannian gradient descent
// on the product of spheres, structural diagnostics of near-critical families,
// and the two explicit objective-decreasing escape curves used to certify that
// block-violating configurations are not local minimizers.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "gfod/frames.hpp"
#include "gfod/linalg.hpp"
#include "gfod/norms.hpp"

namespace gfod {

struct DescentConfig {
  UINormSpec norm = UINormSpec::frobenius();  // SchattenP or Frobenius
  int max_iters = 20000;
  double step_init = 1.0;
  double armijo_c = 1e-4;       // sufficient-decrease fraction, in (0,1)
  double armijo_shrink = 0.5;   // backtracking factor, in (0,1)
  double grad_tol = 1e-8;       // Riemannian gradient norm for convergence
  std::uint64_t seed = 0;

  void validate() const {
    if (norm.kind != NormKind::SchattenP && norm.kind != NormKind::Frobenius)
      throw std::invalid_argument("descent: norm must be SchattenP or Frobenius");
    if (max_iters <= 0 || !(step_init > 0.0)) throw std::invalid_argument("descent: bad budgets");
    if (!(armijo_c > 0.0 && armijo_c < 1.0) || !(armijo_shrink > 0.0 && armijo_shrink < 1.0))
      throw std::invalid_argument("descent: Armijo parameters must lie in (0,1)");
    if (!(grad_tol > 0.0)) throw std::invalid_argument("descent: grad_tol must be > 0");
  }
};

struct DescentReport {
  FrameFamily final_family;
  double final_objective = 0.0;
  RealVec final_spectrum;  // eigenvalues of S - S_G, non-increasing
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
  bool monotone = true;  // objective non-increasing across accepted steps
};

inline double objective(const FrameFamily& G, const HermitianMatrix& S, const UINormSpec& norm) {
  if (G.dim != S.dim()) throw std::invalid_argument("objective: dimension mismatch");
  return evaluate(norm, S - frame_operator(G));
}

// Unconstrained gradient of G -> N(S - S_G): component i is -2 P g_i with
// P the norm gradient at the residual. Exact fits return the zero gradient.
inline std::vector<CVector> euclidean_gradient(const FrameFamily& G, const HermitianMatrix& S,
                                               const UINormSpec& norm) {
  if (G.dim != S.dim()) throw std::invalid_argument("euclidean_gradient: dimension mismatch");
  const HermitianMatrix residual = S - frame_operator(G);
  std::vector<CVector> grad(G.vectors.size());
  if (residual.frob_norm() <= 1e-15 * (1.0 + S.frob_norm())) {
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = CVector(G.dim, Complex{0.0, 0.0});
    return grad;
  }
  const HermitianMatrix p = gradient(norm, residual);
  for (std::size_t i = 0; i < G.vectors.size(); ++i) {
    CVector gi = p.apply(G.vectors[i]);
    for (Complex& z : gi) z *= -2.0;
    grad[i] = std::move(gi);
  }
  return grad;
}

namespace detail {

inline double box_muller(std::mt19937_64& rng) {
  // Fixed transform so seeded runs are reproducible across platforms.
  const double u1 =
      (static_cast<double>(rng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);  // (0,1)
  const double u2 = static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

inline FrameFamily random_family(std::size_t dim, const RealVec& a, std::mt19937_64& rng) {
  std::vector<CVector> vectors(a.size(), CVector(dim));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t r = 0; r < dim; ++r)
      vectors[i][r] = Complex(box_muller(rng), box_muller(rng));
    const double scale = std::sqrt(a[i] / norm_sq(vectors[i]));
    for (Complex& z : vectors[i]) z *= scale;
  }
  FrameFamily fam;
  fam.vectors = std::move(vectors);
  fam.norms_sq = a;
  fam.dim = dim;
  return fam;
}

inline void retract(FrameFamily& fam) {
  for (std::size_t i = 0; i < fam.vectors.size(); ++i) {
    const double scale = std::sqrt(fam.norms_sq[i] / norm_sq(fam.vectors[i]));
    for (Complex& z : fam.vectors[i]) z *= scale;
  }
}

}  // namespace detail

// Projected gradient descent on the product of spheres ||g_i||^2 = a_i:
// Riemannian gradient = Euclidean gradient minus its radial component,
// renormalizing retraction, Armijo backtracking. Deterministic given the seed.
inline DescentReport descend(const HermitianMatrix& S, const RealVec& a,
                             const DescentConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  FrameFamily fam = detail::random_family(S.dim(), a, rng);

  DescentReport report;
  double obj = objective(fam, S, config.norm);
  double alpha = config.step_init;
  int iter = 0;
  bool converged = false;
  double gnorm = 0.0;

  for (; iter < config.max_iters; ++iter) {
    const std::vector<CVector> eg = euclidean_gradient(fam, S, config.norm);
    std::vector<CVector> rg(eg.size());
    double gnorm_sq = 0.0;
    for (std::size_t i = 0; i < eg.size(); ++i) {
      const double radial = inner(eg[i], fam.vectors[i]).real() / fam.norms_sq[i];
      CVector t = eg[i];
      for (std::size_t r = 0; r < t.size(); ++r) t[r] -= radial * fam.vectors[i][r];
      gnorm_sq += norm_sq(t);
      rg[i] = std::move(t);
    }
    gnorm = std::sqrt(gnorm_sq);
    if (gnorm <= config.grad_tol) {
      converged = true;
      break;
    }

    alpha = std::min(alpha * 4.0, 1e6);
    bool accepted = false;
    while (alpha >= 1e-18) {
      FrameFamily trial = fam;
      for (std::size_t i = 0; i < trial.vectors.size(); ++i) {
        for (std::size_t r = 0; r < trial.vectors[i].size(); ++r)
          trial.vectors[i][r] -= alpha * rg[i][r];
      }
      detail::retract(trial);
      const double trial_obj = objective(trial, S, config.norm);
      if (trial_obj <= obj - config.armijo_c * alpha * gnorm_sq) {
        if (trial_obj > obj) report.monotone = false;
        fam = std::move(trial);
        obj = trial_obj;
        accepted = true;
        break;
      }
      alpha *= config.armijo_shrink;
    }
    if (!accepted) break;  // line search stalled; report as non-converged
  }

  report.final_objective = obj;
  report.final_spectrum = herm_eig(S - frame_operator(fam)).eigenvalues;
  report.final_family = std::move(fam);
  report.iterations = iter;
  report.grad_norm = gnorm;
  report.converged = converged;
  return report;
}

// Clustered eigen-structure of a near-critical family: constants c_1 < ... <
// c_p, vector index sets J_j, eigenvalue index sets K_j of the restricted
// residual, and per-vector eigen-residuals.
struct LocalMinStructure {
  RealVec eigenconstants;
  std::vector<std::vector<std::size_t>> J;  // vector indexes per constant
  std::vector<std::vector<std::size_t>> K;  // eigen-coordinate indexes per constant
  RealVec residuals;                        // ||(S - S_G) g_i - c_{j(i)} g_i||
  bool j_consecutive = false;
  bool k_consecutive = false;
  bool block_tiling = false;  // consecutive tiling with J_j = K_j on head blocks
};

inline LocalMinStructure structure_report(const FrameFamily& G, const HermitianMatrix& S,
                                          double cluster_tol = 1e-5) {
  const HermitianMatrix s_g = frame_operator(G);
  const HermitianMatrix residual = S - s_g;
  const std::size_t k = G.vectors.size();

  // Rayleigh quotients <(S - S_G) g_i, g_i> / a_i, clustered by gaps.
  RealVec rho(k);
  for (std::size_t i = 0; i < k; ++i)
    rho[i] = inner(residual.apply(G.vectors[i]), G.vectors[i]).real() / G.norms_sq[i];

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return rho[i] < rho[j]; });

  LocalMinStructure out;
  std::vector<std::size_t> cluster_of(k, 0);
  for (std::size_t pos = 0; pos < k; ++pos) {
    if (pos == 0 || rho[order[pos]] - rho[order[pos - 1]] > cluster_tol) {
      out.J.emplace_back();
      out.eigenconstants.push_back(0.0);
    }
    out.J.back().push_back(order[pos]);
    cluster_of[order[pos]] = out.J.size() - 1;
  }
  for (std::size_t j = 0; j < out.J.size(); ++j) {
    double mean = 0.0;
    for (std::size_t i : out.J[j]) mean += rho[i];
    out.eigenconstants[j] = mean / static_cast<double>(out.J[j].size());
    std::sort(out.J[j].begin(), out.J[j].end());
  }

  out.residuals.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    CVector res = residual.apply(G.vectors[i]);
    const double c = out.eigenconstants[cluster_of[i]];
    for (std::size_t r = 0; r < res.size(); ++r) res[r] -= c * G.vectors[i][r];
    out.residuals[i] = vec_norm(res);
  }

  // K sets: pair lambda(S) and lambda(S_G) in sorted order; assign each index
  // of the support of S_G to the nearest constant.
  const RealVec lambda = herm_eig(S).eigenvalues;
  const RealVec mu = herm_eig(s_g).eigenvalues;
  const double rank_tol = std::max(1e-8, cluster_tol) * (1.0 + s_g.frob_norm());
  std::size_t s_d = 0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu[i] > rank_tol) s_d = i + 1;
  out.K.assign(out.J.size(), {});
  for (std::size_t i = 0; i < s_d; ++i) {
    const double di = lambda[i] - mu[i];
    std::size_t best = 0;
    for (std::size_t j = 1; j < out.eigenconstants.size(); ++j) {
      if (std::abs(di - out.eigenconstants[j]) < std::abs(di - out.eigenconstants[best])) best = j;
    }
    out.K[best].push_back(i);
  }

  auto consecutive = [](const std::vector<std::size_t>& v) {
    for (std::size_t t = 1; t < v.size(); ++t)
      if (v[t] != v[t - 1] + 1) return false;
    return true;
  };
  out.j_consecutive = true;
  out.k_consecutive = true;
  for (const auto& v : out.J) out.j_consecutive = out.j_consecutive && consecutive(v);
  for (const auto& v : out.K) out.k_consecutive = out.k_consecutive && consecutive(v);

  // Tiling check: clusters in ascending constant order tile 0..k-1 (J) and
  // 0..s_d-1 (K) consecutively, with J_j = K_j on every head block.
  out.block_tiling = out.j_consecutive && out.k_consecutive;
  std::size_t expect = 0;
  for (std::size_t j = 0; j < out.J.size() && out.block_tiling; ++j) {
    if (out.J[j].empty() || out.J[j].front() != expect) out.block_tiling = false;
    if (j + 1 < out.J.size() && out.J[j] != out.K[j]) out.block_tiling = false;
    if (j + 1 == out.J.size()) {
      if (out.K[j].empty() || out.K[j].front() != expect) out.block_tiling = false;
      if (out.J[j].back() != G.vectors.size() - 1) out.block_tiling = false;
    }
    if (!out.J[j].empty()) expect = out.J[j].back() + 1;
  }
  return out;
}

using CurveEvaluator = std::function<FrameFamily(double)>;

// Two-vector rotation curve that strictly decreases the objective when the
// family has vectors h, l (0-based) with h in a lower-constant block, l in a
// higher one, and l < h (so a_l >= a_h). The mixing rate gamma is chosen by a
// sign-seeking scan over +/- powers of two on the explicit second-derivative
// quadratic; the most negative value wins.
inline CurveEvaluator escape_swap(const FrameFamily& G, const HermitianMatrix& S, std::size_t h,
                                  std::size_t l) {
  if (h >= G.vectors.size() || l >= G.vectors.size() || h == l)
    throw std::invalid_argument("escape_swap: bad vector indexes");
  if (l >= h) throw std::invalid_argument("escape_swap: requires l < h");
  const HermitianMatrix residual = S - frame_operator(G);
  const CVector& gh = G.vectors[h];
  const CVector& gl = G.vectors[l];
  const double ah = G.norms_sq[h];
  const double al = G.norms_sq[l];

  const double ci = inner(residual.apply(gh), gh).real() / ah;
  const double cr = inner(residual.apply(gl), gl).real() / al;
  const double scale = 1.0 + residual.frob_norm();
  auto eig_residual = [&](const CVector& g, double c) {
    CVector r = residual.apply(g);
    for (std::size_t t = 0; t < r.size(); ++t) r[t] -= c * g[t];
    return vec_norm(r) / vec_norm(g);
  };
  if (eig_residual(gh, ci) > 1e-6 * scale || eig_residual(gl, cr) > 1e-6 * scale)
    throw std::invalid_argument("escape_swap: vectors are not eigenvectors of the residual");
  if (!(ci < cr - 1e-9 * scale))
    throw std::invalid_argument("escape_swap: needs constants c_i < c_r");
  if (std::abs(inner(gh, gl)) > 1e-8 * std::sqrt(ah * al))
    throw std::invalid_argument("escape_swap: vectors must be orthogonal");

  double gamma = 0.0;
  double best = 0.0;
  for (int e = -6; e <= 6; ++e) {
    for (const double sign : {1.0, -1.0}) {
      const double g = sign * std::ldexp(1.0, e);
      const double second = 4.0 * ci * (ah - al * g * g) + 4.0 * (ah + al * g) * (ah + al * g) +
                            4.0 * cr * (al * g * g - ah);
      if (second < best) {
        best = second;
        gamma = g;
      }
    }
  }
  if (gamma == 0.0)
    throw std::invalid_argument("escape_swap: no mixing rate with negative curvature found");

  CVector wh = gh, wl = gl;
  const double nh = vec_norm(gh), nl = vec_norm(gl);
  for (Complex& z : wh) z /= nh;
  for (Complex& z : wl) z /= nl;

  return [G, h, l, wh, wl, nh, nl, gamma](double t) {
    FrameFamily fam = G;
    for (std::size_t r = 0; r < fam.dim; ++r) {
      fam.vectors[h][r] = std::cos(t) * G.vectors[h][r] + std::sin(t) * nh * wl[r];
      fam.vectors[l][r] =
          std::cos(gamma * t) * G.vectors[l][r] + std::sin(gamma * t) * nl * wh[r];
    }
    return fam;
  };
}

namespace detail {

// Simultaneous eigenbasis of S and S_G ordered so both spectra are
// non-increasing; exists exactly when the family is critical with the
// residual-commuting structure. Returns basis columns, lambda and mu.
struct JointBasis {
  std::vector<CVector> basis;
  RealVec lambda;
  RealVec mu;
};

inline JointBasis joint_eigenbasis(const HermitianMatrix& S, const HermitianMatrix& s_g,
                                   double tol) {
  const EigDecomposition eg = herm_eig(s_g);
  const std::size_t d = S.dim();
  std::vector<CVector> basis = eg.eigenvectors;
  RealVec mu = eg.eigenvalues;
  RealVec lambda(d, 0.0);

  // Re-diagonalize S inside each mu-eigenspace, ordering by lambda there.
  std::size_t lo = 0;
  while (lo < d) {
    std::size_t hi = lo + 1;
    while (hi < d && std::abs(mu[hi] - mu[lo]) <= tol * (1.0 + std::abs(mu[lo]))) ++hi;
    const std::size_t n = hi - lo;
    if (n == 1) {
      lambda[lo] = inner(S.apply(basis[lo]), basis[lo]).real();
    } else {
      HermitianMatrix block(n);
      std::vector<CVector> s_cols(n);
      for (std::size_t c = 0; c < n; ++c) s_cols[c] = S.apply(basis[lo + c]);
      std::vector<Complex> raw(n * n);
      for (std::size_t rr = 0; rr < n; ++rr)
        for (std::size_t cc = 0; cc < n; ++cc) raw[rr * n + cc] = inner(s_cols[cc], basis[lo + rr]);
      block = HermitianMatrix::from_entries(n, raw, 1e-7);
      const EigDecomposition sub = herm_eig(block);
      std::vector<CVector> rotated(n, CVector(d, Complex{0.0, 0.0}));
      for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t b = 0; b < n; ++b) {
          const Complex w = sub.eigenvectors[c][b];
          for (std::size_t row = 0; row < d; ++row) rotated[c][row] += w * basis[lo + b][row];
        }
        lambda[lo + c] = sub.eigenvalues[c];
      }
      for (std::size_t c = 0; c < n; ++c) basis[lo + c] = std::move(rotated[c]);
    }
    lo = hi;
  }

  const double scale = 1.0 + S.frob_norm();
  for (std::size_t i = 0; i < d; ++i) {
    CVector res = S.apply(basis[i]);
    for (std::size_t row = 0; row < d; ++row) res[row] -= lambda[i] * basis[i][row];
    if (vec_norm(res) > 1e-6 * scale)
      throw std::invalid_argument("joint_eigenbasis: S and the frame operator do not commute");
    if (i > 0 && lambda[i] > lambda[i - 1] + tol * scale)
      throw std::invalid_argument(
          "joint_eigenbasis: no simultaneously ordered eigenbasis (pattern absent)");
  }
  return {std::move(basis), std::move(lambda), std::move(mu)};
}

}  // namespace detail

// Eigenvalue-transfer curve between eigen-coordinates i and j (0-based in the
// jointly ordered basis) with delta_j > delta_i and j < i: moves spectral mass
// of the frame operator from coordinate j to i while preserving all norms and
// every other eigenvalue. Strictly decreases any strictly convex norm of the
// residual for small t.
inline CurveEvaluator escape_transfer(const FrameFamily& G, const HermitianMatrix& S,
                                      std::size_t i, std::size_t j) {
  const HermitianMatrix s_g = frame_operator(G);
  const detail::JointBasis jb = detail::joint_eigenbasis(S, s_g, 1e-8);
  const std::size_t d = S.dim();
  if (i >= d || j >= d || i == j) throw std::invalid_argument("escape_transfer: bad indexes");
  if (j >= i) throw std::invalid_argument("escape_transfer: requires j < i");

  const double scale = 1.0 + S.frob_norm();
  const double mu_i = jb.mu[i];
  const double mu_j = jb.mu[j];
  const double c_e = jb.lambda[i] - mu_i;
  const double c_r = jb.lambda[j] - mu_j;
  if (mu_i <= 1e-10 * scale || mu_j <= 1e-10 * scale)
    throw std::invalid_argument("escape_transfer: both coordinates must carry spectral mass");
  if (!(c_e < c_r - 1e-9 * scale))
    throw std::invalid_argument("escape_transfer: needs delta_j > delta_i (pattern absent)");

  const CVector vi = jb.basis[i];
  const CVector vj = jb.basis[j];
  for (const CVector& g : G.vectors) {
    // A vector feeding the transfer must carry no v_j component already.
    const double norm = vec_norm(g);
    if (std::abs(inner(g, vi)) > 1e-8 * norm && std::abs(inner(g, vj)) > 1e-8 * norm)
      throw std::invalid_argument(
          "escape_transfer: a vector couples both coordinates (pattern absent)");
  }

  return [G, vi, vj, mu_i, mu_j, d](double t) {
    if (t < 0.0 || t >= 1.0) throw std::invalid_argument("escape_transfer: t must lie in [0,1)");
    if (t == 0.0) return G;
    const double w = std::sqrt(1.0 - t * t);

    // V(t) shrinks the v_i component and feeds it into v_j.
    FrameFamily fam = G;
    for (std::size_t l = 0; l < fam.vectors.size(); ++l) {
      const Complex comp_i = inner(G.vectors[l], vi);
      if (std::abs(comp_i) == 0.0) continue;
      for (std::size_t row = 0; row < d; ++row) {
        fam.vectors[l][row] += (w - 1.0) * comp_i * vi[row] + t * comp_i * vj[row];
      }
    }

    // A(t) on span{v_j, v_i}; continuous eigenvector curve with X(0) = I.
    const double a11 = mu_j + t * t * mu_i;
    const double a12 = t * w * mu_i;
    const double a22 = (1.0 - t * t) * mu_i;
    const double mean = 0.5 * (a11 + a22);
    const double disc = std::sqrt(0.25 * (a11 - a22) * (a11 - a22) + a12 * a12);
    const double lmax = mean + disc;
    double x1 = lmax - a22, x2 = a12;
    if (std::abs(x1) + std::abs(x2) == 0.0) x1 = 1.0;
    const double nrm = std::sqrt(x1 * x1 + x2 * x2);
    x1 /= nrm;
    x2 /= nrm;
    // U(t)^* with columns x1(t), x2(t) = (-x2, x1) embedded at (j, i).
    const double u11 = x1, u12 = -x2, u21 = x2, u22 = x1;
    for (std::size_t l = 0; l < fam.vectors.size(); ++l) {
      const Complex comp_j = inner(fam.vectors[l], vj);
      const Complex comp_i = inner(fam.vectors[l], vi);
      const Complex new_j = u11 * comp_j + u21 * comp_i;  // conj(U)^T row j
      const Complex new_i = u12 * comp_j + u22 * comp_i;
      for (std::size_t row = 0; row < d; ++row) {
        fam.vectors[l][row] += (new_j - comp_j) * vj[row] + (new_i - comp_i) * vi[row];
      }
    }
    return fam;
  };
}

}  // namespace gfod
