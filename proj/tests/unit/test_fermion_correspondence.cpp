#include "oracles.hpp"
#include "permdyn/experiment.hpp"
#include "permdyn/fermion_correspondence.hpp"

#include <gtest/gtest.h>

using namespace permdyn;

namespace {

Mat hermitian_part(const Mat& m) { return 0.5 * (m + m.adjoint()); }

// Fock image c†_{σ(L)} ... c†_{σ(1)}|vac> built from Jordan–Wigner matrices.
Vec jw_image(int n, const std::vector<int>& targets) {
  Vec v = Vec::Zero(Index{1} << n);
  v[0] = 1.0;
  for (int t : targets) v = oracle::jw_creation(n, t) * v;
  return v;
}

// P(σ)[(|1>∧...∧|L>) ⊗ |0...0>] on the qudit side.
StateVector spanning_vector(int n, int d, int L, const PermutationWord& sigma) {
  return apply_permutation(wedge_state(d, L, n - L), sigma);
}

std::vector<Gate> random_circuit(int n, int gates, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> site(1, n);
  std::uniform_real_distribution<double> ang(-M_PI, M_PI);
  std::vector<Gate> out;
  while (static_cast<int>(out.size()) < gates) {
    int a = site(rng), b = site(rng);
    if (a != b) out.push_back({a, b, ang(rng)});
  }
  return out;
}

// Random state inside H_comp with weight on every particle number.
StateVector random_comp_state(const CompSubspaceBasis& b, std::mt19937_64& rng) {
  Vec c = random_complex_gaussian(b.dim(), rng).normalized();
  return StateVector(b.n(), b.d(), b.dense_basis() * c);
}

}  // namespace

TEST(FermionicSwap, TwoModes) {
  Mat p = fermionic_swap_matrix(2, 1, 2);
  // basis |00>, |mode1>, |mode2>, |11>
  Mat expect = Mat::Zero(4, 4);
  expect(0, 0) = 1.0;
  expect(1, 2) = expect(2, 1) = 1.0;
  // the doubly occupied state picks up -1 from the anticommutator
  expect(3, 3) = -1.0;
  EXPECT_LT((p - expect).norm(), 1e-15);
}

TEST(FermionicSwap, OperatorIdentities) {
  for (int n = 2; n <= 8; ++n)
    for (int a = 1; a <= n; ++a)
      for (int b = a + 1; b <= n; ++b) {
        Mat p = fermionic_swap_matrix(n, a, b);
        EXPECT_NEAR(std::abs(p(0, 0) - 1.0), 0.0, 1e-15);
        EXPECT_NEAR(p.col(0).norm(), 1.0, 1e-15);
        if (n <= 5) {
          EXPECT_LT((p - p.adjoint()).norm(), 1e-12);
          EXPECT_LT((p * p - Mat::Identity(p.rows(), p.cols())).norm(), 1e-12);
        }
      }
}

TEST(FermionicSwap, ConjugatesCreationOperators) {
  for (int n = 2; n <= 6; ++n)
    for (int a = 1; a <= n; ++a)
      for (int b = a + 1; b <= n; ++b) {
        Mat p = fermionic_swap_matrix(n, a, b);
        auto sigma = PermutationWord::transposition(n, a, b);
        for (int j = 1; j <= n; ++j)
          EXPECT_LT((p * creation_matrix(n, j) * p.adjoint() - creation_matrix(n, sigma.image1(j))).norm(), 1e-12);
      }
}

TEST(FermionicSwap, CreationMatchesJordanWigner) {
  for (int n = 1; n <= 5; ++n)
    for (int j = 1; j <= n; ++j) EXPECT_LT((creation_matrix(n, j) - oracle::jw_creation(n, j)).norm(), 1e-15);
  // anticommutation
  Mat c1 = creation_matrix(3, 1), c3 = creation_matrix(3, 3);
  EXPECT_LT((c1 * c3 + c3 * c1).norm(), 1e-15);
  EXPECT_LT((c1 * c1.adjoint() + c1.adjoint() * c1 - Mat::Identity(8, 8)).norm(), 1e-15);
}

TEST(FermionicSwap, VectorApplierMatchesMatrix) {
  auto rng = make_rng(41);
  for (int n = 2; n <= 6; ++n) {
    FockVector f(n);
    f.amps = random_complex_gaussian(f.amps.size(), rng);
    auto sigma = random_permutation(n, rng);
    Mat p = Mat::Identity(f.amps.size(), f.amps.size());
    for (auto [a, b] : sigma.transpositions()) p = p * fermionic_swap_matrix(n, std::min(a, b), std::max(a, b));
    EXPECT_LT((apply_fermionic_permutation(f, sigma).amps - p * f.amps).norm(), 1e-12);
  }
}

TEST(FermionicSwap, BogoliubovCoefficients) {
  const int n = 4;
  for (double theta : {0.3, 1.1, -2.0})
    for (auto [a, b] : std::vector<std::pair<int, int>>{{1, 2}, {2, 4}}) {
      Mat pf = fermionic_swap_matrix(n, a, b);
      Index dim = pf.rows();
      // e^{iθ(P^f - I)} = e^{-iθ}(cos θ + i sin θ P^f)
      Mat g = std::exp(-I_UNIT * theta) * (std::cos(theta) * Mat::Identity(dim, dim) + I_UNIT * std::sin(theta) * pf);
      auto sigma = PermutationWord::transposition(n, a, b);
      for (int j = 1; j <= n; ++j) {
        Mat lhs = g * creation_matrix(n, j) * g.adjoint();
        Mat rhs = std::exp(-I_UNIT * theta) * (std::cos(theta) * creation_matrix(n, j) +
                                               I_UNIT * std::sin(theta) * creation_matrix(n, sigma.image1(j)));
        EXPECT_LT((lhs - rhs).norm(), 1e-12);
      }
    }
}

TEST(SingleParticleSwap, Basics) {
  Mat e = single_particle_swap(2, 1, 2);
  Mat x = Mat::Zero(2, 2);
  x(0, 1) = x(1, 0) = 1.0;
  EXPECT_EQ((e - x).norm(), 0.0);
  for (int n = 2; n <= 6; ++n)
    for (int a = 1; a <= n; ++a)
      for (int b = a + 1; b <= n; ++b) {
        Mat m = single_particle_swap(n, a, b);
        EXPECT_LT((m * Vec::Ones(n) - Vec::Ones(n)).norm(), 1e-15);
        EXPECT_LT((m * m - Mat::Identity(n, n)).norm(), 1e-15);
        EXPECT_LT((m - m.adjoint()).norm(), 1e-15);
      }
}

TEST(CompBasis, Dimensions) {
  for (int n = 1; n <= 6; ++n) EXPECT_EQ(build_comp_basis(n, 2).dim(), 1 + n);
  EXPECT_EQ(build_comp_basis(6, 3).dim(), 22);
  for (auto [n, d] : std::vector<std::pair<int, int>>{{4, 3}, {5, 3}, {5, 4}, {3, 4}}) {
    Index expect = 0;
    for (int L = 0; L <= std::min(n, d - 1); ++L) expect += binomial(n, L);
    auto b = build_comp_basis(n, d);
    EXPECT_EQ(b.dim(), expect);
    Mat q = b.dense_basis();
    EXPECT_LT((q.adjoint() * q - Mat::Identity(b.dim(), b.dim())).norm(), 1e-12);
  }
  EXPECT_THROW(build_comp_basis(13, 2), ResourceError);
  EXPECT_THROW(build_comp_basis(4, 5), ResourceError);
}

TEST(CompBasis, GramMatricesAgree) {
  auto rng = make_rng(42);
  for (auto [n, d] : std::vector<std::pair<int, int>>{{4, 3}, {5, 3}, {6, 3}}) {
    auto basis = build_comp_basis(n, d);
    std::vector<Vec> q, f;
    for (int L = 0; L <= d - 1; ++L)
      for (int k = 0; k < 25; ++k) {
        auto sigma = random_permutation(n, rng);
        q.push_back(spanning_vector(n, d, L, sigma).amps);
        std::vector<int> targets;
        for (int i = 1; i <= L; ++i) targets.push_back(sigma.image1(i));
        f.push_back(jw_image(n, targets));
      }
    double worst = 0;
    for (std::size_t i = 0; i < q.size(); ++i)
      for (std::size_t j = 0; j < q.size(); ++j) worst = std::max(worst, std::abs(q[i].dot(q[j]) - f[i].dot(f[j])));
    EXPECT_LT(worst, 1e-10) << n << "," << d;
    // U^f maps each spanning vector to its Fock image
    for (std::size_t i = 0; i < q.size(); ++i)
      EXPECT_LT((basis.to_fock(StateVector(n, d, q[i])).amps - f[i]).norm(), 1e-10);
  }
}

TEST(CompBasis, ProjectorCommutesWithPermutations) {
  auto rng = make_rng(43);
  auto basis = build_comp_basis(5, 3);
  for (int k = 0; k < 10; ++k) {
    auto s = random_state(5, 3, rng);
    auto sigma = random_permutation(5, rng);
    auto lhs = apply_permutation(basis.project(s), sigma);
    auto rhs = basis.project(apply_permutation(s, sigma));
    EXPECT_LT((lhs.amps - rhs.amps).norm(), 1e-12);
  }
}

TEST(CompBasis, IntertwinesPermutations) {
  auto rng = make_rng(44);
  for (auto [n, d] : std::vector<std::pair<int, int>>{{4, 3}, {5, 3}, {4, 4}}) {
    auto basis = build_comp_basis(n, d);
    for (int k = 0; k < 10; ++k) {
      auto s = random_state(n, d, rng);
      auto sigma = random_permutation(n, rng);
      auto lhs = basis.to_fock(apply_permutation(basis.project(s), sigma));
      auto rhs = apply_fermionic_permutation(basis.to_fock(s), sigma);
      EXPECT_LT((lhs.amps - rhs.amps).norm(), 1e-10);
    }
  }
}

TEST(Omega, SingleParticleState) {
  auto rng = make_rng(45);
  const int n = 5, d = 3;
  Vec psi = random_complex_gaussian(n, rng).normalized();
  StateVector s(n, d);
  for (int j = 0; j < n; ++j) {
    std::vector<int> digits(n, 0);
    digits[j] = 1;
    s.amps[basis_index(d, digits)] = psi[j];
  }
  auto basis = build_comp_basis(n, d);
  Mat expect = psi * psi.adjoint();
  for (auto be : {OmegaBackend::Qudit, OmegaBackend::Fermionic})
    EXPECT_LT((omega_map(basis, s, be).omega - expect).norm(), 1e-12);
}

TEST(Omega, SixQutritExample) {
  auto basis = build_comp_basis(6, 3);
  auto om = omega_map(basis, named_state("fig3"));
  Mat rho(3, 3);
  rho << 2, -1, -1, -1, 2, -1, -1, -1, 2;
  rho /= 6.0;
  Mat expect = Mat::Zero(6, 6);
  expect.topLeftCorner(3, 3) = 2.0 * rho;
  EXPECT_LT((om.omega - expect).norm(), 1e-10);
  EXPECT_NEAR(om.trace(), 2.0, 1e-10);
  EXPECT_NEAR(renyi_invariant(om, 1), 2.0, 1e-10);
  Eigen::SelfAdjointEigenSolver<Mat> es(rho);
  EXPECT_NEAR(es.eigenvalues()[0], 0.0, 1e-10);
  EXPECT_NEAR(es.eigenvalues()[1], 0.5, 1e-10);
  EXPECT_NEAR(es.eigenvalues()[2], 0.5, 1e-10);
}

TEST(Omega, ZeroParticleState) {
  auto basis = build_comp_basis(4, 3);
  auto om = omega_map(basis, basis_state(3, {0, 0, 0, 0}));
  EXPECT_EQ(om.omega.norm(), 0.0);
  for (int l = 1; l <= 3; ++l) EXPECT_EQ(renyi_invariant(om, l), 0.0);
  EXPECT_EQ(omega_purity(om), 0.0);
}

TEST(Omega, BackendsAgreeAndArePositive) {
  auto rng = make_rng(46);
  for (auto [n, d] : std::vector<std::pair<int, int>>{{4, 3}, {5, 3}, {6, 3}, {5, 4}, {6, 2}}) {
    auto basis = build_comp_basis(n, d);
    for (int k = 0; k < 5; ++k) {
      auto s = k % 2 ? random_state(n, d, rng) : random_comp_state(basis, rng);
      Mat q = omega_map(basis, s, OmegaBackend::Qudit).omega;
      Mat f = omega_map(basis, s, OmegaBackend::Fermionic).omega;
      EXPECT_LT((q - f).cwiseAbs().maxCoeff(), 1e-9);
      EXPECT_LT((q - q.adjoint()).norm(), 1e-12);
      Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(q));
      EXPECT_GT(es.eigenvalues().minCoeff(), -1e-10);
    }
  }
}

TEST(Omega, EnsembleErrors) {
  auto basis = build_comp_basis(3, 3);
  auto s = basis_state(3, {1, 0, 0});
  EXPECT_THROW(omega_map(basis, Ensemble{{-0.5, s}, {1.5, s}}), PreconditionError);
  EXPECT_THROW(omega_map(basis, Ensemble{{0.5, s}}), PreconditionError);
  EXPECT_THROW(omega_map(basis, basis_state(3, {0, 0})), DimensionError);
}

TEST(Renyi, PurityFormulaOnGrid) {
  auto basis = build_comp_basis(6, 3);
  auto rng = make_rng(47);
  std::uniform_real_distribution<double> phi(0, 2 * M_PI);
  for (int k = 0; k <= 20; ++k) {
    double theta = M_PI * k / 20.0;
    auto om = omega_map(basis, psi_theta_phi(theta, phi(rng)));
    EXPECT_NEAR(omega_purity(om), (3 + std::cos(2 * theta)) / 8.0, 1e-9) << theta;
  }
  EXPECT_NEAR(omega_purity(omega_map(basis, psi_theta_phi(0, 0))), 0.5, 1e-12);
}

// The l=2 value at θ is shared exactly by θ and π−θ on a grid.
TEST(Renyi, ForbiddenSuperpositionOrbits) {
  auto basis = build_comp_basis(6, 3);
  std::vector<double> grid, value;
  for (int k = 0; k <= 24; ++k) {
    grid.push_back(M_PI * k / 24.0);
    value.push_back(omega_purity(omega_map(basis, psi_theta_phi(grid.back(), 0.4))));
  }
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (std::size_t j = 0; j < grid.size(); ++j) {
      bool same_orbit = i == j || i + j == grid.size() - 1;
      if (same_orbit) EXPECT_NEAR(value[i], value[j], 1e-10);
      else EXPECT_GT(std::abs(value[i] - value[j]), 1e-6);
    }
}

TEST(Renyi, RotatedInvariants) {
  auto basis = build_comp_basis(6, 3);
  auto s = named_state("fig3");
  for (int l = 1; l <= 3; ++l)
    EXPECT_NEAR(rotated_renyi(basis, s, Mat::Identity(3, 3), l), renyi_invariant(omega_map(basis, s), l), 1e-12);

  // swap labels 1 and 2, keep the vacuum label
  Mat relabel = Mat::Zero(3, 3);
  relabel(0, 0) = relabel(1, 2) = relabel(2, 1) = 1.0;
  EXPECT_NEAR(rotated_renyi(basis, s, relabel, 2), renyi_invariant(omega_map(basis, s), 2), 1e-10);
  EXPECT_THROW(rotated_renyi(basis, s, 2.0 * Mat::Identity(3, 3), 2), PreconditionError);

  auto rng = make_rng(48);
  for (int k = 0; k < 10; ++k) {
    Mat u = haar_unitary(3, rng);
    auto psi = random_state(6, 3, rng);
    auto out = run_circuit(psi, random_circuit(6, 20, rng));
    for (int l = 1; l <= 3; ++l) EXPECT_NEAR(rotated_renyi(basis, out, u, l), rotated_renyi(basis, psi, u, l), 1e-8);
  }
}

TEST(Covariance, RandomCases) {
  auto rng = make_rng(49);
  std::uniform_real_distribution<double> ang(-M_PI, M_PI);
  const std::vector<std::pair<int, int>> sizes{{3, 3}, {4, 3}, {5, 3}, {4, 2}, {4, 4}};
  std::vector<CompSubspaceBasis> bases;
  for (auto [n, d] : sizes) bases.push_back(build_comp_basis(n, d));
  for (int k = 0; k < 100; ++k) {
    const auto& b = bases[k % bases.size()];
    std::uniform_int_distribution<int> site(1, b.n());
    int a = site(rng), c = site(rng);
    if (a == c) c = a % b.n() + 1;
    auto s = k % 3 ? random_comp_state(b, rng) : random_state(b.n(), b.d(), rng);
    EXPECT_LT(covariance_check(b, Ensemble{{1.0, s}}, a, c, ang(rng)), 1e-9);
    EXPECT_EQ(covariance_check(b, Ensemble{{1.0, s}}, a, c, 0.0), 0.0);
  }
  const auto& b = bases[2];
  Ensemble mix{{0.2, random_state(5, 3, rng)}, {0.5, random_comp_state(b, rng)}, {0.3, random_state(5, 3, rng)}};
  EXPECT_LT(covariance_check(b, mix, 2, 5, M_PI / 2), 1e-9);
  EXPECT_LT(covariance_check(b, mix, 1, 4, 0.77), 1e-9);
}

TEST(LieClosure, SingleParticleGroupIsUnMinusOne) {
  for (int n = 3; n <= 6; ++n) EXPECT_EQ(lie_closure_dimension(single_particle_generators(n)), (n - 1) * (n - 1));
  auto rng = make_rng(50);
  Mat h = oracle::random_hermitian(4, rng);
  EXPECT_EQ(lie_closure_dimension({I_UNIT * h}), 1);
  EXPECT_THROW(lie_closure_dimension({h}), PreconditionError);
  EXPECT_THROW(lie_closure_dimension({Mat::Zero(65, 65)}), ResourceError);
}

TEST(WedgeSector, Equivalence) {
  EXPECT_TRUE(wedge_sector_equivalence(3, 1));
  EXPECT_TRUE(wedge_sector_equivalence(4, 2));
  EXPECT_TRUE(wedge_sector_equivalence(6, 3));
  EXPECT_TRUE(wedge_sector_equivalence(4, 0));
  EXPECT_THROW(wedge_sector_equivalence(4, 5), DimensionError);
}

// Tr Ω^l conserved under 2-local circuits.
TEST(Renyi, ConservedUnderTwoLocalCircuits) {
  auto rng = make_rng(51);
  std::uniform_int_distribution<int> len(1, 40);
  for (auto [n, d] : std::vector<std::pair<int, int>>{{4, 3}, {5, 3}, {6, 3}, {5, 4}}) {
    auto basis = build_comp_basis(n, d);
    for (int k = 0; k < 30; ++k) {
      auto s = random_state(n, d, rng);
      auto out = run_circuit(s, random_circuit(n, len(rng), rng));
      auto before = omega_map(basis, s), after = omega_map(basis, out);
      for (int l = 1; l <= 3; ++l)
        EXPECT_NEAR(renyi_invariant(after, l), renyi_invariant(before, l), 1e-8) << n << "," << d << " l=" << l;
    }
  }
}
