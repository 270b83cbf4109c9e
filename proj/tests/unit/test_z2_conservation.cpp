#include "oracles.hpp"
#include "permdyn/symmetric_dynamics.hpp"
#include "permdyn/z2_conservation.hpp"

#include <gtest/gtest.h>

using namespace permdyn;

namespace {

Vec ket(int d, int i) {
  Vec v = Vec::Zero(d);
  v[i] = 1.0;
  return v;
}

Vec plus() { return Vec::Constant(2, 1.0 / std::sqrt(2.0)); }

// Σ_σ h_σ P(σ) with h_{σ^{-1}} = conj(h_σ): a random Hermitian SU(d)-invariant H.
Mat random_invariant_hamiltonian(int n, int d, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  SymmetricHamiltonian h(n, d);
  for (const auto& p : all_permutations(n)) {
    auto inv = p.inverse();
    if (inv < p) continue;
    if (inv == p) {
      h.add(p, Schedule::constant(g(rng)));
    } else {
      cplx c{g(rng), g(rng)};
      h.add(p, Schedule::constant(c));
      h.add(inv, Schedule::constant(std::conj(c)));
    }
  }
  return hamiltonian_matrix(h, 0.0);
}

Mat word_matrix(int n, int d, const std::vector<PermutationWord>& words) {
  Index dim = ipow(d, n);
  Mat m = Mat::Zero(dim, dim);
  for (const auto& w : words) m += oracle::permutation_matrix(n, d, w);
  return m;
}

}  // namespace

TEST(FSgn, AllZeroStateVanishes) {
  for (int n = 2; n <= 5; ++n)
    for (int d = 2; d <= 3; ++d) EXPECT_NEAR(f_sgn(basis_state(d, std::vector<int>(n, 0))), 0.0, 1e-15);
  // one site: only the identity term
  EXPECT_NEAR(f_sgn(basis_state(3, {0})), 1.0, 1e-15);
}

TEST(FSgn, ThreeQubitProductMatchesDeterminantOracle) {
  std::vector<Vec> f{ket(2, 0), ket(2, 1), plus()};
  Mat g(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g(i, j) = std::pow(f[i].dot(f[j]), 2);
  const double expect = oracle::det3(g).real() / 6.0;
  EXPECT_NEAR(expect, 1.0 / 12.0, 1e-15);
  StateVector s(3, 2, oracle::product(f));
  EXPECT_NEAR(f_sgn(s), expect, 1e-12);
  EXPECT_NEAR(f_sgn_product(f), expect, 1e-12);
}

TEST(FSgn, ProductFormulaEdgeCases) {
  EXPECT_NEAR(f_sgn_product({ket(3, 0), ket(3, 1), ket(3, 2)}), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(f_sgn_product({ket(4, 2), ket(4, 1)}), 0.5, 1e-15);
  auto rng = make_rng(21);
  Vec a = random_complex_gaussian(3, rng).normalized(), b = random_complex_gaussian(3, rng).normalized();
  EXPECT_NEAR(f_sgn_product({a, b, a}), 0.0, 1e-12);
  EXPECT_THROW(f_sgn_product({Vec::Ones(2)}), PreconditionError);
}

TEST(FSgn, FourQubitStatesVanish) {
  auto rng = make_rng(22);
  for (int k = 0; k < 100; ++k) EXPECT_NEAR(f_sgn(random_state(4, 2, rng)), 0.0, 1e-12);
}

TEST(FSgn, InvariantUnderPermutationsAndRotations) {
  auto rng = make_rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 3 + trial % 3, d = 2 + trial % 2;
    auto s = random_state(n, d, rng);
    double f0 = f_sgn(s);
    EXPECT_NEAR(f_sgn(apply_permutation(s, random_permutation(n, rng))), f0, 1e-10);
    EXPECT_NEAR(f_sgn(apply_tensor_power(s, haar_unitary(d, rng))), f0, 1e-10);
  }
}

TEST(FSgn, VanishesOnSwapEigenstates) {
  auto rng = make_rng(24);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 3 + trial % 2, d = 3;
    auto s = random_state(n, d, rng);
    auto p = apply_permutation(s, PermutationWord::transposition(n, 1, n));
    for (double sgn : {1.0, -1.0}) {
      StateVector t(n, d, s.amps + sgn * p.amps);
      EXPECT_NEAR(f_sgn(t.normalized()), 0.0, 1e-10);
    }
  }
}

TEST(FSgn, MatchesProductFormulaOnRandomProducts) {
  auto rng = make_rng(25);
  for (int trial = 0; trial < 40; ++trial) {
    int n = 2 + trial % 4, d = 2 + trial % 3;
    std::vector<Vec> f;
    for (int i = 0; i < n; ++i) f.push_back(random_complex_gaussian(d, rng).normalized());
    StateVector s(n, d, oracle::product(f));
    EXPECT_NEAR(f_sgn(s), f_sgn_product(f), 1e-10);
    EXPECT_NEAR(f_sgn_product_complex(f).imag(), 0.0, 1e-10);
  }
}

TEST(FSgn, RangeOnRandomStates) {
  auto rng = make_rng(26);
  for (int trial = 0; trial < 60; ++trial) {
    int n = 1 + trial % 6, d = 2 + trial % 3;
    if (ipow(d, n) > 5000) continue;
    double f = f_sgn(random_state(n, d, rng));
    EXPECT_GE(f, -1e-12);
    EXPECT_LE(f, 1.0 + 1e-10);
  }
}

TEST(FSgn, Errors) {
  EXPECT_THROW(f_sgn(StateVector(2, 2)), PreconditionError);
  EXPECT_THROW(f_sgn(basis_state(2, std::vector<int>(11, 0))), ResourceError);
}

// f_sgn stays put under random 2-local dynamics.
TEST(FSgn, ConservedUnderTwoLocalEvolution) {
  auto rng = make_rng(27);
  const std::vector<std::pair<int, int>> sizes{{3, 2}, {3, 3}, {4, 3}, {5, 2}, {5, 3}, {6, 2}, {6, 3}};
  for (int trial = 0; trial < 50; ++trial) {
    auto [n, d] = sizes[trial % sizes.size()];
    SymmetricHamiltonian h(n, d);
    h.terms = random_two_local_terms(n, 1000 + trial);
    auto s = random_state(n, d, rng);
    EvolutionConfig cfg;
    cfg.dt = 0.7;
    cfg.t_final = 3.5;
    Probe p{"fsgn", [](const StateVector& st, double) { return f_sgn(st); }};
    auto col = evolve(s, h, cfg, {p}).column("fsgn");
    for (double v : col) EXPECT_NEAR(v, col.front(), 1e-7) << "n=" << n << " d=" << d;
  }
}

TEST(KProjector, Ranks) {
  EXPECT_EQ(build_k_projector(3, 2).rank(), 4);
  EXPECT_EQ(build_k_projector(4, 2).rank(), 1);
  EXPECT_EQ(build_k_projector(5, 2).rank(), 0);
  for (int n : {3, 4, 5}) {
    Eigen::SelfAdjointEigenSolver<Mat> es(build_k_projector(n, 2).dense());
    int count = 0;
    for (Index i = 0; i < es.eigenvalues().size(); ++i) count += es.eigenvalues()[i] > 0.5;
    EXPECT_EQ(count, build_k_projector(n, 2).rank());
  }
  EXPECT_LT(build_k_projector(5, 2).dense().norm(), 1e-12);
}

TEST(KProjector, RegroupedIsAntisymmetrizer) {
  // Pairing each site's two copies turns K into the antisymmetrizer on (C^{d^2})^{⊗n}.
  for (auto [n, d] : std::vector<std::pair<int, int>>{{3, 2}, {2, 3}}) {
    Mat k = build_k_projector(n, d).dense();
    const Index dn = ipow(d, n), dd = d * d;
    auto regroup = [&](Index idx) {
      Index x = idx / dn, y = idx % dn, out = 0;
      for (int i = n - 1; i >= 0; --i) {
        Index w = ipow(d, i);
        out = out * dd + ((x / w) % d) * d + (y / w) % d;
      }
      return out;
    };
    Mat r = Mat::Zero(k.rows(), k.cols());
    for (Index i = 0; i < k.rows(); ++i)
      for (Index j = 0; j < k.cols(); ++j) r(regroup(i), regroup(j)) = k(i, j);
    Mat anti = Mat::Zero(k.rows(), k.cols());
    for (const auto& w : all_permutations(n)) anti += double(w.sign()) * oracle::permutation_matrix(n, static_cast<int>(dd), w);
    anti /= static_cast<double>(factorial(n));
    EXPECT_LT((r - anti).norm(), 1e-12);
  }
}

TEST(KProjector, ProjectorIdentities) {
  auto rng = make_rng(28);
  for (auto [n, d] : std::vector<std::pair<int, int>>{{2, 2}, {3, 2}, {2, 3}, {4, 2}}) {
    KProjector kp(n, d);
    Mat k = kp.dense();
    EXPECT_LT((k - k.adjoint()).norm(), 1e-10);
    EXPECT_LT((k * k - k).norm(), 1e-10);
    for (int t = 0; t < 5; ++t) {
      auto w = random_permutation(n, rng);
      Mat p = oracle::permutation_matrix(n, d, w);
      EXPECT_LT((k * oracle::kron(p, p) - double(w.sign()) * k).norm(), 1e-10);
    }
    Vec v = random_complex_gaussian(k.rows(), rng);
    EXPECT_LT((kp.apply(v) - k * v).norm(), 1e-10);
  }
}

TEST(KProjector, PairExpectation) {
  KProjector k(3, 2);
  auto zero = basis_state(2, {0, 0, 0});
  EXPECT_LT(k_expectation_pair(k, zero, zero).norm(), 1e-15);
  StateVector s(3, 2, oracle::product({ket(2, 0), ket(2, 1), plus()}));
  EXPECT_NEAR(k_expectation_pair(k, s, s).squaredNorm(), 1.0 / 12.0, 1e-12);

  auto rng = make_rng(29);
  auto a = random_state(3, 2, rng), b = random_state(3, 2, rng);
  SymmetricHamiltonian h(3, 2);
  h.terms = random_two_local_terms(3, 4);
  h.add(std::vector<PermutationWord>{PermutationWord::transposition(3, 1, 2), PermutationWord::transposition(3, 2, 3)},
        Schedule::constant(0.5));
  h.add(std::vector<PermutationWord>{PermutationWord::transposition(3, 2, 3), PermutationWord::transposition(3, 1, 2)},
        Schedule::constant(0.5));
  // cancels the shift so no relative phase builds up between the copies
  h.add(PermutationWord::identity(3), Schedule::constant(0.5));
  EvolutionConfig cfg;
  cfg.dt = 1.3;
  cfg.t_final = 1.3;
  auto a1 = evolve(a, h, cfg, {}).final_state, b1 = evolve(b, h, cfg, {}).final_state;
  EXPECT_LT((k_expectation_pair(k, a1, b1) - k_expectation_pair(k, a, b)).norm(), 1e-8);
  EXPECT_THROW(k_expectation_pair(k, a, random_state(2, 2, rng)), DimensionError);
}

TEST(Z2Criterion, QubitThreeCycleIdentity) {
  const int n = 3, d = 2;
  auto t12 = PermutationWord::transposition(n, 1, 2), t23 = PermutationWord::transposition(n, 2, 3),
       t13 = PermutationWord::transposition(n, 1, 3);
  Mat lhs = Mat::Identity(8, 8) + word_matrix(n, d, {t12 * t23, t23 * t12});
  Mat rhs = word_matrix(n, d, {t12, t23, t13});
  EXPECT_LT((lhs - rhs).norm(), 1e-12);

  Mat h = word_matrix(n, d, {t12 * t23, t23 * t12});
  auto c = z2_criterion(h, n, d, true);
  EXPECT_TRUE(c.satisfied);
  ASSERT_TRUE(c.shift.has_value());
  EXPECT_NEAR(*c.shift, -1.0, 1e-10);
  EXPECT_FALSE(z2_criterion(h, n, d, false).satisfied);
}

TEST(Z2Criterion, QutritCases) {
  const int n = 6, d = 3;
  auto t12 = PermutationWord::transposition(n, 1, 2), t23 = PermutationWord::transposition(n, 2, 3);
  Mat three = hamiltonian_matrix(
      [&] {
        SymmetricHamiltonian h(n, d);
        h.add(t12 * t23, Schedule::constant(1.0));
        h.add(t23 * t12, Schedule::constant(1.0));
        return h;
      }(),
      0.0);
  EXPECT_FALSE(z2_criterion(three, n, d, true).satisfied);

  SymmetricHamiltonian four(n, d);
  four.add(PermutationWord::cycle(n, {1, 2, 3, 4}), Schedule::constant(1.0));
  four.add(PermutationWord::cycle(n, {4, 3, 2, 1}), Schedule::constant(1.0));
  EXPECT_TRUE(z2_criterion(hamiltonian_matrix(four, 0.0), n, d, true).satisfied);

  // the d=2 identity has no qutrit counterpart
  const int m = 3;
  auto s12 = PermutationWord::transposition(m, 1, 2), s23 = PermutationWord::transposition(m, 2, 3),
       s13 = PermutationWord::transposition(m, 1, 3);
  Mat diff = Mat::Identity(27, 27) + word_matrix(m, 3, {s12 * s23, s23 * s12}) - word_matrix(m, 3, {s12, s23, s13});
  EXPECT_GT(diff.norm(), 0.1);
}

TEST(Z2Criterion, RejectsNonInvariant) {
  auto rng = make_rng(30);
  Mat h = oracle::random_hermitian(8, rng);
  EXPECT_THROW(z2_criterion(h, 3, 2, true), PreconditionError);
  EXPECT_THROW(z2_criterion(Mat::Identity(4, 4), 3, 2, true), DimensionError);
}

TEST(Z2Decompose, SingleTransposition) {
  const int n = 3, d = 3;
  auto t12 = PermutationWord::transposition(n, 1, 2);
  auto z = z2_decompose(oracle::swap_matrix(n, d, 1, 2), n, d);
  EXPECT_NEAR(z.shift, 0.0, 1e-9);
  EXPECT_LT(z.residual, 1e-8);
  for (std::size_t k = 0; k < z.perms.size(); ++k)
    EXPECT_NEAR(std::abs(z.coefficients[k] - cplx(z.perms[k] == t12 ? 1.0 : 0.0)), 0.0, 1e-9);
}

TEST(Z2Decompose, CommutatorIsImaginaryOnEvenPermutations) {
  const int n = 3, d = 3;
  Mat p12 = oracle::swap_matrix(n, d, 1, 2), p23 = oracle::swap_matrix(n, d, 2, 3);
  Mat h = I_UNIT * (p12 * p23 - p23 * p12);
  auto z = z2_decompose(h, n, d);
  EXPECT_LT(z.residual, 1e-8);
  for (std::size_t k = 0; k < z.perms.size(); ++k) {
    if (z.perms[k].sign() == 1) EXPECT_NEAR(z.coefficients[k].real(), 0.0, 1e-10);
    else EXPECT_NEAR(std::abs(z.coefficients[k]), 0.0, 1e-9);
  }
}

TEST(Z2Decompose, QubitThreeCycleOnTranspositions) {
  const int n = 3, d = 2;
  auto t12 = PermutationWord::transposition(n, 1, 2), t23 = PermutationWord::transposition(n, 2, 3);
  auto z = z2_decompose(word_matrix(n, d, {t12 * t23, t23 * t12}), n, d);
  EXPECT_NEAR(z.shift, -1.0, 1e-9);
  EXPECT_LT(z.residual, 1e-8);
  for (std::size_t k = 0; k < z.perms.size(); ++k) {
    bool transposition = z.perms[k].transpositions().size() == 1;
    EXPECT_NEAR(std::abs(z.coefficients[k] - cplx(transposition ? 1.0 : 0.0)), 0.0, 1e-9);
  }
}

TEST(Z2Decompose, RandomEligibleBeyondSquare) {
  auto rng = make_rng(31);
  for (int k = 0; k < 20; ++k) {
    Mat h = random_invariant_hamiltonian(5, 2, rng);
    auto z = z2_decompose(h, 5, 2);
    EXPECT_LT(z.residual, 1e-8);
    Mat recon = z.shift * Mat::Identity(32, 32);
    for (std::size_t j = 0; j < z.perms.size(); ++j) {
      EXPECT_NEAR(std::abs(z.coefficients[j] + double(z.perms[j].sign()) * std::conj(z.coefficients[j])), 0.0,
                  1e-10);
      recon += z.coefficients[j] * oracle::permutation_matrix(5, 2, z.perms[j]);
    }
    EXPECT_LT((recon - h).norm(), 1e-8);
  }
}

TEST(Z2Decompose, FailsWhenCriterionFails) {
  const int n = 3, d = 3;
  auto t12 = PermutationWord::transposition(n, 1, 2), t23 = PermutationWord::transposition(n, 2, 3);
  EXPECT_THROW(z2_decompose(word_matrix(n, d, {t12 * t23, t23 * t12}), n, d), NoDecompositionError);
}
