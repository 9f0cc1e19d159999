// Unitarily invariant norms on Hermitian matrices, evaluated through singular
// values: Schatten-p, Ky Fan h, spectral, and strictly convex composites
// (Ky Fan + eps*Frobenius, spectral + eps*Frobenius). Gradients are provided
// for the smooth Schatten family.
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include "gfod/linalg.hpp"

namespace gfod {

enum class NormKind { SchattenP, Frobenius, Spectral, KyFan, KyFanPlusFro, SpectralPlusFro };

struct UINormSpec {
  NormKind kind = NormKind::Frobenius;
  double p = 2.0;    // SchattenP exponent, > 1
  int h = 1;         // Ky Fan order, >= 1
  double eps = 0.0;  // Frobenius weight in composites, > 0

  static UINormSpec schatten(double p) {
    if (!(p > 1.0)) throw std::invalid_argument("schatten: requires p > 1");
    UINormSpec n;
    n.kind = NormKind::SchattenP;
    n.p = p;
    return n;
  }
  static UINormSpec frobenius() { return UINormSpec{}; }
  static UINormSpec spectral() {
    UINormSpec n;
    n.kind = NormKind::Spectral;
    return n;
  }
  static UINormSpec ky_fan(int h) {
    if (h < 1) throw std::invalid_argument("ky_fan: requires h >= 1");
    UINormSpec n;
    n.kind = NormKind::KyFan;
    n.h = h;
    return n;
  }
  static UINormSpec ky_fan_plus_fro(int h, double eps) {
    if (h < 1) throw std::invalid_argument("ky_fan_plus_fro: requires h >= 1");
    if (!(eps > 0.0)) throw std::invalid_argument("ky_fan_plus_fro: requires eps > 0");
    UINormSpec n;
    n.kind = NormKind::KyFanPlusFro;
    n.h = h;
    n.eps = eps;
    return n;
  }
  static UINormSpec spectral_plus_fro(double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("spectral_plus_fro: requires eps > 0");
    UINormSpec n;
    n.kind = NormKind::SpectralPlusFro;
    n.eps = eps;
    return n;
  }

  bool strictly_convex() const {
    switch (kind) {
      case NormKind::SchattenP:
      case NormKind::Frobenius:
      case NormKind::KyFanPlusFro:
      case NormKind::SpectralPlusFro:
        return true;
      case NormKind::Spectral:
      case NormKind::KyFan:
        return false;
    }
    return false;
  }

  std::string to_string() const {
    auto num = [](double x) {
      std::string s = std::to_string(x);
      s.erase(s.find_last_not_of('0') + 1);
      if (!s.empty() && s.back() == '.') s.pop_back();
      return s;
    };
    switch (kind) {
      case NormKind::SchattenP:
        return "p" + num(p);
      case NormKind::Frobenius:
        return "fro";
      case NormKind::Spectral:
        return "spec";
      case NormKind::KyFan:
        return "kyfan" + std::to_string(h);
      case NormKind::KyFanPlusFro:
        return "kyfan" + std::to_string(h) + "+fro" + num(eps);
      case NormKind::SpectralPlusFro:
        return "spec+fro" + num(eps);
    }
    return "?";
  }
};

// Compact string form used by the CLI: "fro", "p2", "p1.5", "spec",
// "kyfan3", "kyfan3+fro0.01", "spec+fro1".
inline UINormSpec parse_norm(std::string_view s) {
  auto fail = [&]() -> UINormSpec {
    throw std::invalid_argument("parse_norm: unrecognized norm '" + std::string(s) + "'");
  };
  auto to_double = [&](std::string_view v) {
    try {
      std::size_t pos = 0;
      const double x = std::stod(std::string(v), &pos);
      if (pos != v.size()) fail();
      return x;
    } catch (const std::invalid_argument&) {
      return fail().p;
    } catch (const std::out_of_range&) {
      return fail().p;
    }
  };
  auto to_int = [&](std::string_view v) {
    try {
      std::size_t pos = 0;
      const int x = std::stoi(std::string(v), &pos);
      if (pos != v.size()) fail();
      return x;
    } catch (const std::invalid_argument&) {
      return static_cast<int>(fail().h);
    } catch (const std::out_of_range&) {
      return static_cast<int>(fail().h);
    }
  };

  if (s == "fro") return UINormSpec::frobenius();
  if (s == "spec") return UINormSpec::spectral();
  if (s.rfind("spec+fro", 0) == 0) return UINormSpec::spectral_plus_fro(to_double(s.substr(8)));
  if (s.rfind("kyfan", 0) == 0) {
    const std::string_view rest = s.substr(5);
    const std::size_t plus = rest.find("+fro");
    if (plus == std::string_view::npos) return UINormSpec::ky_fan(to_int(rest));
    return UINormSpec::ky_fan_plus_fro(to_int(rest.substr(0, plus)),
                                       to_double(rest.substr(plus + 4)));
  }
  if (!s.empty() && s.front() == 'p') return UINormSpec::schatten(to_double(s.substr(1)));
  return fail();
}

// Norm value from a singular value list (any order, entries >= 0).
inline double evaluate_from_singulars(const UINormSpec& norm, RealVec s) {
  std::sort(s.begin(), s.end(), std::greater<double>());
  auto fro = [&]() {
    double t = 0.0;
    for (double x : s) t += x * x;
    return std::sqrt(t);
  };
  auto ky_fan = [&](int h) {
    double t = 0.0;
    const std::size_t top = std::min<std::size_t>(s.size(), static_cast<std::size_t>(h));
    for (std::size_t i = 0; i < top; ++i) t += s[i];
    return t;
  };
  switch (norm.kind) {
    case NormKind::SchattenP: {
      double t = 0.0;
      for (double x : s) t += std::pow(x, norm.p);
      return std::pow(t, 1.0 / norm.p);
    }
    case NormKind::Frobenius:
      return fro();
    case NormKind::Spectral:
      return s.empty() ? 0.0 : s.front();
    case NormKind::KyFan:
      return ky_fan(norm.h);
    case NormKind::KyFanPlusFro:
      return ky_fan(norm.h) + norm.eps * fro();
    case NormKind::SpectralPlusFro:
      return (s.empty() ? 0.0 : s.front()) + norm.eps * fro();
  }
  throw std::logic_error("evaluate_from_singulars: bad kind");
}

inline double evaluate(const UINormSpec& norm, const HermitianMatrix& A) {
  if (norm.kind == NormKind::Frobenius) return A.frob_norm();  // no eigensolve needed
  return evaluate_from_singulars(norm, singular_values(A));
}

// Gradient of the Schatten-p norm (p > 1; Frobenius is p = 2) at A != 0:
//   U diag(phi(lambda_i)) U*,  phi(x) = sign(x)|x|^{p-1} / ||A||_p^{p-1}.
// The directional derivative of evaluate at A in direction H is the real
// trace inner product <gradient, H> wherever the spectrum is simple.
inline HermitianMatrix gradient(const UINormSpec& norm, const HermitianMatrix& A) {
  if (norm.kind != NormKind::SchattenP && norm.kind != NormKind::Frobenius) {
    throw std::invalid_argument("gradient: only SchattenP and Frobenius norms are smooth here");
  }
  const double p = norm.kind == NormKind::Frobenius ? 2.0 : norm.p;
  const double anorm = A.frob_norm();
  if (anorm <= 0.0) throw std::invalid_argument("gradient: zero matrix");

  const EigDecomposition eig = herm_eig(A);
  double np = 0.0;
  for (double x : eig.eigenvalues) np += std::pow(std::abs(x), p);
  np = std::pow(np, 1.0 / p);

  HermitianMatrix g(A.dim());
  const double denom = std::pow(np, p - 1.0);
  for (std::size_t i = 0; i < eig.eigenvalues.size(); ++i) {
    const double x = eig.eigenvalues[i];
    if (x == 0.0) continue;  // phi(0) = 0 for p > 1
    const double phi = (x > 0.0 ? 1.0 : -1.0) * std::pow(std::abs(x), p - 1.0) / denom;
    g.add_rank_one(phi, eig.eigenvectors[i]);
  }
  return g;
}

}  // namespace gfod
