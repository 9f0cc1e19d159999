#include <catch2/catch_amalgamated.hpp>

#include "gfod/descent.hpp"
#include "test_support.hpp"

using namespace gfod;

namespace {

const CVector e1{Complex(1, 0), Complex(0, 0)};
const CVector e2{Complex(0, 0), Complex(1, 0)};

DescentConfig verify_config(const UINormSpec& norm, std::uint64_t seed) {
  DescentConfig cfg;
  cfg.norm = norm;
  cfg.seed = seed;
  cfg.grad_tol = 3e-7;
  cfg.max_iters = 200000;
  return cfg;
}

// Ambient finite difference of the objective along a family perturbation.
double objective_fd(const FrameFamily& g, const HermitianMatrix& s, const UINormSpec& norm,
                    const std::vector<CVector>& dir, double step) {
  auto shifted = [&](double t) {
    std::vector<CVector> vecs = g.vectors;
    for (std::size_t i = 0; i < vecs.size(); ++i)
      for (std::size_t r = 0; r < vecs[i].size(); ++r) vecs[i][r] += t * dir[i][r];
    FrameFamily out;
    out.vectors = std::move(vecs);
    out.norms_sq = g.norms_sq;
    out.dim = g.dim;
    return evaluate(norm, s - frame_operator(out));
  };
  return (shifted(step) - shifted(-step)) / (2.0 * step);
}

double real_pairing(const std::vector<CVector>& grad, const std::vector<CVector>& dir) {
  double s = 0.0;
  for (std::size_t i = 0; i < grad.size(); ++i) s += inner(dir[i], grad[i]).real();
  return s;
}

}  // namespace

TEST_CASE("objective values") {
  const HermitianMatrix s31 = HermitianMatrix::diagonal({3, 1});
  CHECK(objective(make_family({e1, e1}), s31, UINormSpec::frobenius()) ==
        Catch::Approx(std::sqrt(2.0)).margin(1e-12));

  // Exact fit: S_G = S.
  CVector g1 = e1, g2 = e2;
  g1[0] *= std::sqrt(3.0);
  CHECK(objective(make_family({g1, g2}), s31, UINormSpec::frobenius()) ==
        Catch::Approx(0.0).margin(1e-12));

  CVector h1 = e1;
  h1[0] *= std::sqrt(2.0);
  CHECK(objective(make_family({h1, e2}), HermitianMatrix::diagonal({1, 0}),
                  UINormSpec::schatten(3)) == Catch::Approx(std::pow(2.0, 1.0 / 3)).margin(1e-12));
}

TEST_CASE("euclidean gradient closed form and finite differences") {
  SECTION("hand-computed single-vector case") {
    const HermitianMatrix s = HermitianMatrix::diagonal({3, 1});
    const FrameFamily g = make_family({e1});
    const auto grad = euclidean_gradient(g, s, UINormSpec::frobenius());
    // Residual diag(2,1): gradient of the norm is X/||X||_F, component
    // -2 (X/||X||) e1 = (-4/sqrt(5), 0).
    CHECK(std::abs(grad[0][0] - Complex(-4.0 / std::sqrt(5.0), 0)) < 1e-12);
    CHECK(std::abs(grad[0][1]) < 1e-15);
  }
  SECTION("exact fit returns the zero gradient") {
    CVector g1 = e1, g2 = e2;
    g1[0] *= std::sqrt(3.0);
    const auto grad = euclidean_gradient(make_family({g1, g2}), HermitianMatrix::diagonal({3, 1}),
                                         UINormSpec::frobenius());
    for (const CVector& v : grad)
      for (const Complex& z : v) CHECK(std::abs(z) == 0.0);
  }
  SECTION("random instances match finite differences in 20 directions") {
    std::mt19937_64 rng(61);
    const HermitianMatrix s = testsupport::conjugate(
        HermitianMatrix::diagonal({4.0, 2.5, 1.0}), testsupport::random_unitary(3, rng));
    const FrameFamily g = gfod::detail::random_family(3, {1.5, 1.0, 0.7, 0.4}, rng);
    for (const UINormSpec& n :
         {UINormSpec::frobenius(), UINormSpec::schatten(1.5), UINormSpec::schatten(3)}) {
      const auto grad = euclidean_gradient(g, s, n);
      for (int t = 0; t < 20; ++t) {
        std::vector<CVector> dir(4, CVector(3));
        for (auto& v : dir)
          for (auto& z : v) z = Complex(testsupport::gauss(rng), testsupport::gauss(rng));
        const double fd = objective_fd(g, s, n, dir, 1e-6);
        const double an = real_pairing(grad, dir);
        REQUIRE(std::abs(fd - an) <= 1e-5 * (1.0 + std::abs(fd)));
      }
    }
  }
}

TEST_CASE("descent reaches the closed-form spectrum on the worked instances") {
  SECTION("S=diag(3,1), a=(1,1), Frobenius") {
    const DescentReport rep =
        descend(HermitianMatrix::diagonal({3, 1}), {1, 1}, verify_config(UINormSpec::frobenius(), 5));
    REQUIRE(rep.converged);
    CHECK(rep.final_spectrum[0] == Catch::Approx(1.0).margin(1e-4));
    CHECK(rep.final_spectrum[1] == Catch::Approx(1.0).margin(1e-4));
    CHECK(rep.monotone);
    for (std::size_t i = 0; i < 2; ++i)
      CHECK(norm_sq(rep.final_family.vectors[i]) == Catch::Approx(1.0).margin(1e-12));
    // The reported objective recomputes from the final family.
    CHECK(rep.final_objective ==
          Catch::Approx(objective(rep.final_family, HermitianMatrix::diagonal({3, 1}),
                                  UINormSpec::frobenius()))
              .margin(1e-12));
  }
  SECTION("S=diag(1,0), a=(2,1), Schatten-1.5") {
    const DescentReport rep = descend(HermitianMatrix::diagonal({1, 0}), {2, 1},
                                      verify_config(UINormSpec::schatten(1.5), 9));
    REQUIRE(rep.converged);
    CHECK(rep.final_spectrum[0] == Catch::Approx(-1.0).margin(1e-4));
    CHECK(rep.final_spectrum[1] == Catch::Approx(-1.0).margin(1e-4));
  }
  SECTION("S=diag(2,2,1,1), a=(3,1,1,1), p in {1.5, 2, 3} agree") {
    const HermitianMatrix s = HermitianMatrix::diagonal({2, 2, 1, 1});
    const RealVec expect{1.0 / 3, 1.0 / 3, 1.0 / 3, -1.0};
    std::vector<RealVec> spectra;
    for (double p : {1.5, 2.0, 3.0}) {
      const UINormSpec n = p == 2.0 ? UINormSpec::frobenius() : UINormSpec::schatten(p);
      const DescentReport rep = descend(s, {3, 1, 1, 1}, verify_config(n, 13));
      REQUIRE(rep.converged);
      for (std::size_t i = 0; i < 4; ++i)
        REQUIRE(rep.final_spectrum[i] == Catch::Approx(expect[i]).margin(1e-4));
      spectra.push_back(rep.final_spectrum);
    }
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(std::abs(spectra[0][i] - spectra[1][i]) < 1e-4);
      CHECK(std::abs(spectra[1][i] - spectra[2][i]) < 1e-4);
    }
  }
}

TEST_CASE("k < d instances match the reduced closed form") {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t d = 2 + testsupport::uniform_index(rng, 4);
    const std::size_t k = 1 + testsupport::uniform_index(rng, d - 1);
    const GfodInstance inst = testsupport::random_instance(d, k, rng, true);
    const HermitianMatrix s = HermitianMatrix::diagonal(inst.lambda);
    const RealVec target = sort_down(delta(inst).delta);
    const DescentReport rep =
        descend(s, inst.a, verify_config(UINormSpec::frobenius(), 1000 + trial));
    REQUIRE(rep.converged);
    for (std::size_t i = 0; i < d; ++i)
      REQUIRE(rep.final_spectrum[i] == Catch::Approx(target[i]).margin(1e-4));
  }
}

TEST_CASE("structure report of the worked minimizers") {
  SECTION("single-block minimizer: all Rayleigh constants cluster at 1") {
    const SynthesisResult res = construct_minimizer(HermitianMatrix::diagonal({3, 1}), {1, 1});
    const LocalMinStructure st =
        structure_report(res.family, HermitianMatrix::diagonal({3, 1}));
    REQUIRE(st.eigenconstants.size() == 1);
    CHECK(st.eigenconstants[0] == Catch::Approx(1.0).margin(1e-9));
    CHECK(st.J[0] == std::vector<std::size_t>{0, 1});
    CHECK(st.K[0] == std::vector<std::size_t>{0});  // rank-one frame operator
    for (double r : st.residuals) CHECK(r <= 1e-7);
    CHECK(st.block_tiling);
  }
  SECTION("two-block instance") {
    const HermitianMatrix s = HermitianMatrix::diagonal({2, 2, 1, 1});
    const SynthesisResult res = construct_minimizer(s, {3, 1, 1, 1});
    const LocalMinStructure st = structure_report(res.family, s);
    REQUIRE(st.eigenconstants.size() == 2);
    CHECK(st.eigenconstants[0] == Catch::Approx(-1.0).margin(1e-9));
    CHECK(st.eigenconstants[1] == Catch::Approx(1.0 / 3).margin(1e-9));
    CHECK(st.J[0] == std::vector<std::size_t>{0});
    CHECK(st.J[1] == std::vector<std::size_t>{1, 2, 3});
    CHECK(st.j_consecutive);
    CHECK(st.k_consecutive);
    CHECK(st.block_tiling);
    for (double r : st.residuals) CHECK(r <= 1e-7);
  }
  SECTION("synthesized minimizers are block-exact on random instances") {
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t d = 2 + testsupport::uniform_index(rng, 4);
      const std::size_t k = d + testsupport::uniform_index(rng, 3);
      const GfodInstance inst = testsupport::random_instance(d, k, rng, true);
      const HermitianMatrix s = HermitianMatrix::diagonal(inst.lambda);
      const SynthesisResult res = construct_minimizer(s, inst.a);
      const LocalMinStructure st = structure_report(res.family, s);
      for (double r : st.residuals) REQUIRE(r <= 1e-7);
      REQUIRE(st.block_tiling);
    }
  }
}

namespace {

// Critical but non-optimal configuration on d = k = 3 with an index-ordering
// violation between the vector blocks: vector 2 carries the low constant while
// vector 0 carries the high one.
struct ViolatingConfig {
  HermitianMatrix S = HermitianMatrix::diagonal({3, 2, 1});
  FrameFamily family;
  ViolatingConfig() {
    CVector g0(3, Complex{0, 0}), g1(3, Complex{0, 0}), g2(3, Complex{0, 0});
    g0[0] = std::sqrt(2.0);  // coordinate 0, constant 3 - 2 = 1
    g1[1] = 1.0;             // coordinate 1, constant 2 - 1 = 1
    g2[2] = 1.0;             // coordinate 2, constant 1 - 1 = 0
    family = make_family({g0, g1, g2});
  }
};

}  // namespace

TEST_CASE("escape_swap strictly improves a violating configuration") {
  const ViolatingConfig cfg;
  // h = 2 sits in the low block (constant 0), l = 0 in the high block
  // (constant 1), l < h.
  const CurveEvaluator curve = escape_swap(cfg.family, cfg.S, 2, 0);

  const FrameFamily at0 = curve(0.0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t r = 0; r < 3; ++r)
      CHECK(std::abs(at0.vectors[i][r] - cfg.family.vectors[i][r]) == 0.0);

  const RealVec base = herm_eig(cfg.S - frame_operator(cfg.family)).eigenvalues;
  const FrameFamily moved = curve(1e-2);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(norm_sq(moved.vectors[i]) ==
          Catch::Approx(cfg.family.norms_sq[i]).margin(1e-12));

  for (const UINormSpec& n : {UINormSpec::frobenius(), UINormSpec::schatten(3)}) {
    const double before = objective(cfg.family, cfg.S, n);
    const double after = objective(moved, cfg.S, n);
    REQUIRE(after < before);
  }

  // Strict majorization improvement with at least one strict partial-sum gap.
  const RealVec spec = herm_eig(cfg.S - frame_operator(moved)).eigenvalues;
  REQUIRE(majorizes(spec, base, 1e-9));
  double strict_gap = 0.0;
  double ps = 0.0, pb = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    ps += spec[i];
    pb += base[i];
    strict_gap = std::max(strict_gap, pb - ps);
  }
  REQUIRE(strict_gap > 1e-7);
}

TEST_CASE("escape_swap rejects non-violating inputs") {
  const SynthesisResult res = construct_minimizer(HermitianMatrix::diagonal({3, 1}), {1, 1});
  // Both vectors share one constant: no c_i < c_r pair exists.
  CHECK_THROWS_AS(escape_swap(res.family, HermitianMatrix::diagonal({3, 1}), 1, 0),
                  std::invalid_argument);
}

TEST_CASE("escape_transfer moves one eigenvalue pair and descends") {
  // lambda = (5, 2, 1), mu = (3, 2, 1): delta = (2, 0, 0), so the K-blocks are
  // out of order (high constant at coordinate 0, low at 1 and 2).
  const HermitianMatrix S = HermitianMatrix::diagonal({5, 2, 1});
  CVector g0(3, Complex{0, 0}), g1(3, Complex{0, 0}), g2(3, Complex{0, 0});
  g0[0] = std::sqrt(3.0);
  g1[1] = std::sqrt(2.0);
  g2[2] = 1.0;
  const FrameFamily fam = make_family({g0, g1, g2});

  const CurveEvaluator curve = escape_transfer(fam, S, 1, 0);

  SECTION("anchored at t = 0") {
    const FrameFamily at0 = curve(0.0);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t r = 0; r < 3; ++r)
        CHECK(std::abs(at0.vectors[i][r] - fam.vectors[i][r]) == 0.0);
  }
  SECTION("norms preserved and untouched eigenvalues fixed") {
    const RealVec mu0 = herm_eig(frame_operator(fam)).eigenvalues;
    for (double t : {1e-3, 1e-2, 0.1}) {
      const FrameFamily moved = curve(t);
      for (std::size_t i = 0; i < 3; ++i)
        REQUIRE(norm_sq(moved.vectors[i]) == Catch::Approx(fam.norms_sq[i]).margin(1e-12));
      const RealVec mu_t = herm_eig(frame_operator(moved)).eigenvalues;
      // Transfer grows the top eigenvalue and shrinks the donor; the third is
      // untouched. Here mu = (3, 2, 1) -> (3 + E, 2 - E, 1).
      const double e_t = mu_t[0] - 3.0;
      REQUIRE(e_t > 0.0);
      REQUIRE(mu_t[1] == Catch::Approx(2.0 - e_t).margin(1e-9));
      REQUIRE(mu_t[2] == Catch::Approx(mu0[2]).margin(1e-9));
    }
  }
  SECTION("objective strictly decreases under strictly convex norms") {
    for (const UINormSpec& n : {UINormSpec::frobenius(), UINormSpec::schatten(3),
                                UINormSpec::schatten(1.5)}) {
      const double before = objective(fam, S, n);
      for (double t : {1e-3, 1e-2}) REQUIRE(objective(curve(t), S, n) < before);
    }
  }
  SECTION("transfer amount increases with t") {
    const double e1v = herm_eig(frame_operator(curve(1e-2))).eigenvalues[0] - 3.0;
    const double e2v = herm_eig(frame_operator(curve(5e-2))).eigenvalues[0] - 3.0;
    REQUIRE(e2v > e1v);
  }
}

TEST_CASE("escape_transfer rejects the ordered configuration") {
  const HermitianMatrix S = HermitianMatrix::diagonal({5, 2, 1});
  const SynthesisResult res = construct_minimizer(S, {3, 2, 1});
  // The optimal family has consecutive K-blocks; no (i, j) violation exists.
  bool any = false;
  for (std::size_t i = 1; i < 3 && !any; ++i)
    for (std::size_t j = 0; j < i && !any; ++j) {
      try {
        escape_transfer(res.family, S, i, j);
        any = true;
      } catch (const std::invalid_argument&) {
      }
    }
  CHECK_FALSE(any);
}

TEST_CASE("norm independence over random instances (sampled)") {
  std::mt19937_64 rng(73);
  for (int trial = 0; trial < 4; ++trial) {
    const std::size_t d = 2 + testsupport::uniform_index(rng, 3);
    const std::size_t k = d + testsupport::uniform_index(rng, 3);
    const GfodInstance inst = testsupport::random_instance(d, k, rng, true);
    const HermitianMatrix s = HermitianMatrix::diagonal(inst.lambda);
    const RealVec target = sort_down(delta(inst).delta);
    for (double p : {1.5, 2.0, 3.0}) {
      const UINormSpec n = p == 2.0 ? UINormSpec::frobenius() : UINormSpec::schatten(p);
      const DescentReport rep = descend(s, inst.a, verify_config(n, 77 + trial));
      REQUIRE(rep.converged);
      for (std::size_t i = 0; i < d; ++i)
        REQUIRE(rep.final_spectrum[i] == Catch::Approx(target[i]).margin(1e-4));
    }
  }
}
