// Shared deterministic generators for the test suites: seeded gaussians,
// random Hermitian matrices, Jacobi-product unitaries, sorted spectra, and
// majorization pairs built from T-transform mixing.
#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "gfod/gfod.hpp"

namespace testsupport {

using gfod::Complex;
using gfod::CVector;
using gfod::HermitianMatrix;
using gfod::RealVec;

inline double gauss(std::mt19937_64& rng) {
  const double u1 = (static_cast<double>(rng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  const double u2 = static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
  return lo + (hi - lo) * u;
}

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % n);
}

inline HermitianMatrix random_hermitian(std::size_t d, std::mt19937_64& rng, double scale = 1.0) {
  std::vector<Complex> raw(d * d);
  for (std::size_t i = 0; i < d; ++i) {
    raw[i * d + i] = Complex(scale * gauss(rng), 0.0);
    for (std::size_t j = i + 1; j < d; ++j) {
      const Complex z(scale * gauss(rng), scale * gauss(rng));
      raw[i * d + j] = z;
      raw[j * d + i] = std::conj(z);
    }
  }
  return HermitianMatrix::from_entries(d, raw);
}

// Unitary built from a product of random Jacobi rotations with phases.
inline std::vector<CVector> random_unitary(std::size_t d, std::mt19937_64& rng) {
  std::vector<CVector> cols(d, CVector(d, Complex{0.0, 0.0}));
  for (std::size_t i = 0; i < d; ++i) cols[i][i] = Complex(1.0, 0.0);
  const std::size_t rounds = 3 * d * d;
  for (std::size_t t = 0; t < rounds; ++t) {
    const std::size_t p = uniform_index(rng, d);
    std::size_t q = uniform_index(rng, d);
    if (p == q) q = (q + 1) % d;
    const double theta = uniform(rng, 0.0, 6.283185307179586);
    const double phi = uniform(rng, 0.0, 6.283185307179586);
    const double c = std::cos(theta), s = std::sin(theta);
    const Complex e(std::cos(phi), std::sin(phi));
    for (std::size_t r = 0; r < d; ++r) {
      const Complex xp = cols[p][r], xq = cols[q][r];
      cols[p][r] = c * xp + s * e * xq;
      cols[q][r] = -s * std::conj(e) * xp + c * xq;
    }
  }
  return cols;  // cols[i] is the i-th column
}

inline HermitianMatrix conjugate(const HermitianMatrix& a, const std::vector<CVector>& u) {
  // U A U^* with U given by columns; direct triple product.
  const std::size_t d = a.dim();
  std::vector<Complex> tmp(d * d, Complex{0.0, 0.0});  // tmp = A U^*
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t s = 0; s < d; ++s) {
      Complex acc{0.0, 0.0};
      for (std::size_t j = 0; j < d; ++j) acc += a(i, j) * std::conj(u[j][s]);
      tmp[i * d + s] = acc;
    }
  std::vector<Complex> raw(d * d, Complex{0.0, 0.0});  // raw = U tmp
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t s = 0; s < d; ++s) {
      Complex acc{0.0, 0.0};
      for (std::size_t i = 0; i < d; ++i) acc += u[i][r] * tmp[i * d + s];
      raw[r * d + s] = acc;
    }
  return HermitianMatrix::from_entries(d, raw, 1e-10);
}

inline RealVec random_sorted_nonneg(std::size_t n, std::mt19937_64& rng, double lo = 0.0,
                                    double hi = 5.0) {
  RealVec v(n);
  for (double& x : v) x = uniform(rng, lo, hi);
  return gfod::sort_down(std::move(v));
}

inline RealVec random_sorted_positive(std::size_t n, std::mt19937_64& rng, double lo = 0.2,
                                      double hi = 3.0) {
  return random_sorted_nonneg(n, rng, lo, hi);
}

// Vector majorized by y: y padded/truncated to length k, then repeatedly mixed
// by T-transforms (each preserves majorization).
inline RealVec t_transform_mix(const RealVec& y, std::size_t k, std::mt19937_64& rng,
                               std::size_t rounds = 64) {
  RealVec x(k, 0.0);
  for (std::size_t i = 0; i < std::min(k, y.size()); ++i) x[i] = y[i];
  if (k < 2) return x;
  for (std::size_t t = 0; t < rounds; ++t) {
    const std::size_t i = uniform_index(rng, k);
    std::size_t j = uniform_index(rng, k);
    if (i == j) j = (j + 1) % k;
    const double w = uniform(rng, 0.0, 1.0);
    const double xi = x[i], xj = x[j];
    x[i] = w * xi + (1.0 - w) * xj;
    x[j] = (1.0 - w) * xi + w * xj;
  }
  return gfod::sort_down(std::move(x));
}

// Random instance with lambda of length d and a of length k whose solve is
// well-conditioned (no near-zero optimal delta entries, no degenerate gap).
inline gfod::GfodInstance random_instance(std::size_t d, std::size_t k, std::mt19937_64& rng,
                                          bool conditioned = false) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    gfod::GfodInstance inst{random_sorted_nonneg(d, rng, 0.0, 5.0),
                            random_sorted_positive(k, rng, 0.2, 3.0)};
    if (!conditioned) return inst;
    try {
      const gfod::DeltaSolution sol = gfod::delta(inst);
      double min_abs = 1e99;
      for (double x : sol.delta) min_abs = std::min(min_abs, std::abs(x));
      if (!sol.degenerate && min_abs > 0.05) return inst;
    } catch (const std::exception&) {
    }
  }
  throw std::runtime_error("random_instance: no conditioned instance found");
}

}  // namespace testsupport
