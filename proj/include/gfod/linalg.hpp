// Dense complex linear algebra kernel at desk scale (dimensions <= ~64):
// Hermitian storage, cyclic Jacobi eigendecomposition, singular values,
// rank-one sums. Self-contained, no external dependencies.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace gfod {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;
using RealVec = std::vector<double>;

inline bool is_finite(Complex z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

// <x, y> = sum_i x_i * conj(y_i), linear in the first argument.
inline Complex inner(const CVector& x, const CVector& y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("inner: dimension mismatch (" + std::to_string(x.size()) +
                                " vs " + std::to_string(y.size()) + ")");
  }
  Complex s{0.0, 0.0};
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * std::conj(y[i]);
  return s;
}

inline double norm_sq(const CVector& x) {
  double s = 0.0;
  for (const Complex& z : x) s += std::norm(z);
  return s;
}

inline double vec_norm(const CVector& x) { return std::sqrt(norm_sq(x)); }

// Hermitian matrix with symmetrized dense storage; the (j,i) entry is always
// the conjugate of (i,j) and the diagonal is real.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(std::size_t dim) : dim_(dim), e_(dim * dim, Complex{0.0, 0.0}) {}

  static HermitianMatrix diagonal(const RealVec& d) {
    HermitianMatrix a(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (!std::isfinite(d[i])) throw std::invalid_argument("diagonal: non-finite entry");
      a.e_[i * d.size() + i] = Complex(d[i], 0.0);
    }
    return a;
  }

  // Validates hermiticity to tol*(1 + max|entry|), then stores (A + A*)/2.
  static HermitianMatrix from_entries(std::size_t dim, const std::vector<Complex>& raw,
                                      double tol = 1e-12) {
    if (raw.size() != dim * dim) throw std::invalid_argument("from_entries: bad entry count");
    double scale = 0.0;
    for (const Complex& z : raw) {
      if (!is_finite(z)) throw std::invalid_argument("from_entries: non-finite entry");
      scale = std::max(scale, std::abs(z));
    }
    const double bound = tol * (1.0 + scale);
    HermitianMatrix a(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        const Complex zij = raw[i * dim + j];
        const Complex zji = raw[j * dim + i];
        if (std::abs(zij - std::conj(zji)) > bound) {
          throw std::invalid_argument("from_entries: not Hermitian at (" + std::to_string(i) +
                                      "," + std::to_string(j) + "), defect " +
                                      std::to_string(std::abs(zij - std::conj(zji))));
        }
        Complex sym = 0.5 * (zij + std::conj(zji));
        if (i == j) sym = Complex(sym.real(), 0.0);
        a.e_[i * dim + j] = sym;
        a.e_[j * dim + i] = std::conj(sym);
      }
    }
    return a;
  }

  std::size_t dim() const { return dim_; }
  Complex operator()(std::size_t i, std::size_t j) const { return e_[i * dim_ + j]; }

  double trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) t += e_[i * dim_ + i].real();
    return t;
  }

  double frob_norm() const {
    double s = 0.0;
    for (const Complex& z : e_) s += std::norm(z);
    return std::sqrt(s);
  }

  CVector apply(const CVector& x) const {
    if (x.size() != dim_) throw std::invalid_argument("apply: dimension mismatch");
    CVector y(dim_, Complex{0.0, 0.0});
    for (std::size_t i = 0; i < dim_; ++i) {
      Complex s{0.0, 0.0};
      const Complex* row = e_.data() + i * dim_;
      for (std::size_t j = 0; j < dim_; ++j) s += row[j] * x[j];
      y[i] = s;
    }
    return y;
  }

  HermitianMatrix& operator+=(const HermitianMatrix& b) {
    check_same_dim(b);
    for (std::size_t i = 0; i < e_.size(); ++i) e_[i] += b.e_[i];
    return *this;
  }
  HermitianMatrix& operator-=(const HermitianMatrix& b) {
    check_same_dim(b);
    for (std::size_t i = 0; i < e_.size(); ++i) e_[i] -= b.e_[i];
    return *this;
  }
  HermitianMatrix& operator*=(double t) {
    for (Complex& z : e_) z *= t;
    return *this;
  }
  friend HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b) { return a += b; }
  friend HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b) { return a -= b; }
  friend HermitianMatrix operator*(double t, HermitianMatrix a) { return a *= t; }

  // Adds c * v v^*; used by reconstruction and gradient assembly.
  void add_rank_one(double c, const CVector& v) {
    if (v.size() != dim_) throw std::invalid_argument("add_rank_one: dimension mismatch");
    for (std::size_t i = 0; i < dim_; ++i) {
      for (std::size_t j = 0; j < dim_; ++j) {
        e_[i * dim_ + j] += c * v[i] * std::conj(v[j]);
      }
    }
    for (std::size_t i = 0; i < dim_; ++i) {
      e_[i * dim_ + i] = Complex(e_[i * dim_ + i].real(), 0.0);
    }
  }

 private:
  void check_same_dim(const HermitianMatrix& b) const {
    if (dim_ != b.dim_) throw std::invalid_argument("HermitianMatrix: dimension mismatch");
  }
  std::size_t dim_ = 0;
  std::vector<Complex> e_;
};

struct EigDecomposition {
  RealVec eigenvalues;                // non-increasing
  std::vector<CVector> eigenvectors;  // eigenvectors[i] pairs with eigenvalues[i]; orthonormal
};

namespace detail {

inline double offdiag_norm(const std::vector<Complex>& a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) s += std::norm(a[i * n + j]);
  return std::sqrt(s);
}

}  // namespace detail

// Cyclic Jacobi on the Hermitian matrix with unitary 2x2 rotations.
// Converges when the off-diagonal Frobenius mass drops below 1e-13 * ||A||_F;
// throws after the sweep budget with the residual in the message.
inline EigDecomposition herm_eig(const HermitianMatrix& A, int max_sweeps = 100) {
  const std::size_t n = A.dim();
  std::vector<Complex> a(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] = A(i, j);
  std::vector<Complex> v(n * n, Complex{0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = Complex(1.0, 0.0);

  const double anorm = A.frob_norm();
  const double conv = 1e-13 * anorm;
  bool done = (n <= 1) || detail::offdiag_norm(a, n) <= conv;
  int sweep = 0;
  for (; sweep < max_sweeps && !done; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const Complex apq = a[p * n + q];
        const double m = std::abs(apq);
        const double app = a[p * n + p].real();
        const double aqq = a[q * n + q].real();
        if (m <= 1e-60 * (1.0 + std::abs(app) + std::abs(aqq))) {
          a[p * n + q] = a[q * n + p] = Complex{0.0, 0.0};
          continue;
        }
        const double zeta = (app - aqq) / (2.0 * m);
        const double sign = zeta >= 0.0 ? 1.0 : -1.0;
        const double t = sign / (std::abs(zeta) + std::sqrt(zeta * zeta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const Complex phase = apq / m;  // e^{i arg(apq)}

        // A <- J* A J with J = [[c, -s*phase], [s*conj(phase), c]] on (p, q)
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const Complex arp = a[r * n + p];
          const Complex arq = a[r * n + q];
          a[r * n + p] = c * arp + s * std::conj(phase) * arq;
          a[r * n + q] = -s * phase * arp + c * arq;
          a[p * n + r] = std::conj(a[r * n + p]);
          a[q * n + r] = std::conj(a[r * n + q]);
        }
        a[p * n + p] = Complex(c * c * app + 2.0 * s * c * m + s * s * aqq, 0.0);
        a[q * n + q] = Complex(s * s * app - 2.0 * s * c * m + c * c * aqq, 0.0);
        a[p * n + q] = a[q * n + p] = Complex{0.0, 0.0};

        for (std::size_t r = 0; r < n; ++r) {
          const Complex vrp = v[r * n + p];
          const Complex vrq = v[r * n + q];
          v[r * n + p] = c * vrp + s * std::conj(phase) * vrq;
          v[r * n + q] = -s * phase * vrp + c * vrq;
        }
      }
    }
    done = detail::offdiag_norm(a, n) <= conv;
  }
  if (!done) {
    throw std::runtime_error("herm_eig: no convergence after " + std::to_string(max_sweeps) +
                             " sweeps, off-diagonal residual " +
                             std::to_string(detail::offdiag_norm(a, n)) + " (target " +
                             std::to_string(conv) + ")");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return a[i * n + i].real() > a[j * n + j].real();
  });

  EigDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n);
  for (std::size_t idx = 0; idx < n; ++idx) {
    const std::size_t col = order[idx];
    out.eigenvalues[idx] = a[col * n + col].real();
    CVector vec(n);
    for (std::size_t r = 0; r < n; ++r) vec[r] = v[r * n + col];
    out.eigenvectors[idx] = std::move(vec);
  }
  return out;
}

// sum_i g_i g_i^*; dim must be supplied so the empty sum is well defined.
inline HermitianMatrix rank_one_sum(const std::vector<CVector>& vectors, std::size_t dim) {
  HermitianMatrix s(dim);
  for (const CVector& g : vectors) {
    if (g.size() != dim) throw std::invalid_argument("rank_one_sum: dimension mismatch");
    for (const Complex& z : g)
      if (!is_finite(z)) throw std::invalid_argument("rank_one_sum: non-finite entry");
    s.add_rank_one(1.0, g);
  }
  return s;
}

inline HermitianMatrix rank_one_sum(const std::vector<CVector>& vectors) {
  if (vectors.empty())
    throw std::invalid_argument("rank_one_sum: empty list needs an explicit dimension");
  return rank_one_sum(vectors, vectors.front().size());
}

// s(A) = |eigenvalues|, sorted non-increasing.
inline RealVec singular_values(const HermitianMatrix& A) {
  RealVec s = herm_eig(A).eigenvalues;
  for (double& x : s) x = std::abs(x);
  std::sort(s.begin(), s.end(), std::greater<double>());
  return s;
}

}  // namespace gfod
