#pragma once

#include "permdyn/core.hpp"
#include "permdyn/fermion_correspondence.hpp"
#include "permdyn/permutation.hpp"
#include "permdyn/qudit_state.hpp"
#include "permdyn/schur_weyl.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace permdyn {

enum class EnsembleKind { TwoLocalCircuits, HaarInvariant, PermutationTwirl };

inline std::string ensemble_name(EnsembleKind k) {
  switch (k) {
    case EnsembleKind::TwoLocalCircuits: return "two_local_circuits";
    case EnsembleKind::HaarInvariant: return "haar_invariant";
    case EnsembleKind::PermutationTwirl: return "permutation_twirl";
  }
  return "?";
}

inline EnsembleKind parse_ensemble(const std::string& s) {
  if (s == "two_local_circuits") return EnsembleKind::TwoLocalCircuits;
  if (s == "haar_invariant") return EnsembleKind::HaarInvariant;
  if (s == "permutation_twirl") return EnsembleKind::PermutationTwirl;
  throw PreconditionError("unknown ensemble '" + s + "'");
}

struct EnsembleSpec {
  EnsembleKind ensemble = EnsembleKind::TwoLocalCircuits;
  int circuit_depth = 200;
  int sample_count = 4000;
  std::uint64_t seed = 1;
  int batches = 10;
  int num_w = 20;  // two-design test only

  void validate() const {
    if (sample_count < 1) throw PreconditionError("sample_count must be >= 1");
    if (circuit_depth < 0) throw PreconditionError("circuit_depth must be >= 0");
    if (batches < 10) throw PreconditionError("need at least 10 batches");
    if (sample_count < batches) throw PreconditionError("fewer samples than batches");
    if (num_w < 2) throw PreconditionError("num_w must be >= 2");
  }
};

struct TwoLocalCircuit {
  std::vector<Gate> gates;
  double global_phase = 0.0;  // cancels in every V·V† estimator
};

// Sample k of the stream seeded by spec.seed.
inline TwoLocalCircuit sample_two_local(int n, const EnsembleSpec& spec, std::uint64_t sample_index) {
  if (n < 2) throw DimensionError("two-local circuits need n >= 2");
  auto rng = make_rng(spec.seed, sample_index);
  std::uniform_int_distribution<int> site(1, n), other(1, n - 1);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  TwoLocalCircuit c;
  c.global_phase = angle(rng);
  for (int g = 0; g < spec.circuit_depth; ++g) {
    int a = site(rng);
    int b = other(rng);
    if (b >= a) ++b;
    c.gates.push_back({a, b, angle(rng)});
  }
  return c;
}

struct Verdict {
  std::string name;
  double statistic = 0;
  double threshold = 0;
  bool passed = false;
  std::string rule;
};

struct MomentReport {
  std::string test;
  int n = 0;
  int d = 0;
  EnsembleSpec spec;
  std::vector<std::pair<std::string, double>> estimates;
  std::vector<std::pair<std::string, double>> standard_errors;
  std::vector<Verdict> verdicts;
  std::string status = "ok";
  std::string note;

  bool passed() const {
    for (const auto& v : verdicts)
      if (!v.passed) return false;
    return true;
  }
  double estimate(const std::string& k) const {
    for (const auto& [name, v] : estimates)
      if (name == k) return v;
    throw NotPresentError("no estimate named " + k);
  }
  const Verdict& verdict(const std::string& k) const {
    for (const auto& v : verdicts)
      if (v.name == k) return v;
    throw NotPresentError("no verdict named " + k);
  }
};

namespace detail {

// Batch means and the standard error of their average.
struct BatchStats {
  double mean = 0;
  double se = 0;
};

inline BatchStats batch_stats(const std::vector<double>& xs, int batches) {
  const std::size_t per = xs.size() / batches;
  std::vector<double> means(batches, 0.0);
  for (int b = 0; b < batches; ++b) {
    for (std::size_t i = b * per; i < (b + 1) * per; ++i) means[b] += xs[i];
    means[b] /= static_cast<double>(per);
  }
  BatchStats s;
  for (double m : means) s.mean += m;
  s.mean /= batches;
  double ss = 0;
  for (double m : means) ss += (m - s.mean) * (m - s.mean);
  s.se = std::sqrt(ss / (batches * (batches - 1.0)));
  return s;
}

inline double sample_std(const std::vector<double>& xs) {
  double m = 0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double ss = 0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / (xs.size() - 1.0));
}

inline Mat permutation_twirl(const Mat& a, int n, int d) {
  Mat t = Mat::Zero(a.rows(), a.cols());
  PermIndexer ix(n, d);
  PermutationEnumerator e(n);
  const Index dim = a.rows();
  std::vector<Index> map(dim);
  do {
    ix.set(e.images());
    for (Index x = 0; x < dim; ++x) map[x] = ix(x);
    for (Index y = 0; y < dim; ++y)
      for (Index x = 0; x < dim; ++x) t(map[x], map[y]) += a(x, y);
  } while (e.next());
  return t / static_cast<double>(factorial(n));
}

inline Mat sample_unitary(int n, int d, const EnsembleSpec& spec, std::uint64_t k) {
  switch (spec.ensemble) {
    case EnsembleKind::TwoLocalCircuits:
      return dense_matrix_of_circuit(n, d, sample_two_local(n, spec, k).gates);
    case EnsembleKind::HaarInvariant: {
      auto rng = make_rng(spec.seed, k);
      return haar_invariant_unitary(n, d, rng).dense();
    }
    case EnsembleKind::PermutationTwirl: {
      auto rng = make_rng(spec.seed, k);
      return permutation_matrix(n, d, random_permutation(n, rng));
    }
  }
  return {};
}

inline Vec apply_sample(int n, int d, const EnsembleSpec& spec, std::uint64_t k, const Vec& x) {
  if (spec.ensemble == EnsembleKind::TwoLocalCircuits) {
    StateVector s(n, d, x);
    for (const auto& g : sample_two_local(n, spec, k).gates) s = apply_swap_exponential(s, g.a, g.b, g.theta);
    return s.amps;
  }
  if (spec.ensemble == EnsembleKind::HaarInvariant) {
    auto rng = make_rng(spec.seed, k);
    return haar_invariant_unitary(n, d, rng).apply(x);
  }
  auto rng = make_rng(spec.seed, k);
  return apply_permutation(StateVector(n, d, x), random_permutation(n, rng)).amps;
}

}  // namespace detail

// Monte Carlo E[V A V†] against the exact permutation twirl (1/n!) Σ P A P†.
inline MomentReport one_design_test(int n, int d, const Mat& a, const EnsembleSpec& spec) {
  spec.validate();
  const Index dim = ipow(d, n);
  require_dense(dim, "one_design_test");
  require_perm_budget(n, "one_design_test");
  if (a.rows() != dim || a.cols() != dim) throw DimensionError("operator does not match d^n");
  if ((a - a.adjoint()).norm() > 1e-10 * std::max(1.0, a.norm())) throw PreconditionError("operator is not Hermitian");

  const Mat exact = detail::permutation_twirl(a, n, d);
  const int nb = spec.batches;
  const Index per = spec.sample_count / nb;
  std::vector<Mat> batch(nb, Mat::Zero(dim, dim));
  parallel_chunks(nb, [&](int, Index lo, Index hi) {
    for (Index b = lo; b < hi; ++b) {
      for (Index k = b * per; k < (b + 1) * per; ++k) {
        Mat v = detail::sample_unitary(n, d, spec, static_cast<std::uint64_t>(k));
        batch[b] += v * a * v.adjoint();
      }
      batch[b] /= static_cast<double>(per);
    }
  });
  Mat mean = Mat::Zero(dim, dim);
  for (const auto& m : batch) mean += m;
  mean /= static_cast<double>(nb);
  double ss = 0;
  for (const auto& m : batch) ss += (m - mean).squaredNorm();
  const double se = std::sqrt(ss / (nb * (nb - 1.0)));
  const double dist = (mean - exact).norm();

  MomentReport r;
  r.test = "one_design";
  r.n = n;
  r.d = d;
  r.spec = spec;
  r.estimates = {{"frobenius_distance", dist}, {"twirl_norm", exact.norm()}, {"mc_norm", mean.norm()}};
  r.standard_errors = {{"frobenius_distance", se}};
  // The floor keeps exactly invariant inputs (se = 0) from failing on rounding.
  const double thr = 5.0 * se + 1e-10;
  r.verdicts.push_back({"distance_within_5se", dist, thr, dist < thr, "distance < 5*se + 1e-10"});
  r.status = r.passed() ? "ok" : "failed";
  return r;
}

// Tr(Ω[ψ]²), unnormalized Ω.
inline double omega_square_trace(const CompSubspaceBasis& basis, const Vec& x) {
  return renyi_invariant(omega_map(basis, StateVector(basis.n(), basis.d(), x)), 2);
}

inline StateVector design_fixture(int n, int d, std::uint64_t seed) {
  if (d >= 3 && n >= d) {
    StateVector s = singlet_state(d);
    if (n > d) s = tensor(s, basis_state(d, std::vector<int>(n - d, 0)));
    return s;
  }
  auto rng = make_rng(seed, 0x77);
  return random_state(n, d, rng);
}

// f(W) = Tr(Ω[Wψ]²) for W ~ haar_invariant. Under two-local V, E_V f(VW) = f(W)
// exactly; the Monte Carlo on three W checks that shortcut. Under Haar-invariant
// V the per-W estimates must agree within 3 s.e.
inline MomentReport two_design_violation_test(int n, int d, const EnsembleSpec& spec) {
  spec.validate();
  const Index dim = ipow(d, n);
  require_dense(dim, "two_design_violation_test");
  CompSubspaceBasis basis(n, d);
  const StateVector psi = design_fixture(n, d, spec.seed);
  const int K = spec.num_w;
  const int spot = std::min(3, K);
  const double floor_se = 1e-9;

  std::vector<Vec> ws(K);
  std::vector<double> f(K);
  for (int k = 0; k < K; ++k) {
    auto rng = make_rng(spec.seed ^ 0x5eedULL, static_cast<std::uint64_t>(k));
    ws[k] = haar_invariant_unitary(n, d, rng).apply(psi.amps);
    f[k] = omega_square_trace(basis, ws[k]);
  }

  // Spot checks of E_{V~2loc} f(VW) = f(W).
  EnsembleSpec loc = spec;
  loc.ensemble = EnsembleKind::TwoLocalCircuits;
  std::vector<double> spot_dev(spot), spot_se(spot);
  for (int k = 0; k < spot; ++k) {
    std::vector<double> xs(spec.sample_count);
    loc.seed = spec.seed + 1000003ULL * (k + 1);
    parallel_chunks(spec.sample_count, [&](int, Index lo, Index hi) {
      for (Index s = lo; s < hi; ++s)
        xs[s] = omega_square_trace(basis, detail::apply_sample(n, d, loc, static_cast<std::uint64_t>(s), ws[k]));
    });
    auto st = detail::batch_stats(xs, spec.batches);
    spot_dev[k] = std::abs(st.mean - f[k]);
    spot_se[k] = st.se;
  }

  // Haar branch. Only Π_comp of the state enters Ω, so work in Schur
  // coordinates and map straight to comp-basis coefficients.
  auto sb = schur_basis(n, d);
  const Mat cbasis = basis.dense_basis();
  const Mat to_comp = cbasis.adjoint() * sb->columns;
  std::vector<double> m(K), s(K);
  for (int k = 0; k < K; ++k) {
    std::vector<double> xs(spec.sample_count);
    const Vec y = sb->columns.adjoint() * ws[k];
    const std::uint64_t seed_k = spec.seed + 7919ULL * (k + 1);
    parallel_chunks(spec.sample_count, [&](int, Index lo, Index hi) {
      for (Index j = lo; j < hi; ++j) {
        auto rng = make_rng(seed_k, static_cast<std::uint64_t>(j));
        Vec pc = cbasis * (to_comp * haar_invariant_unitary(n, d, rng).apply_blocks(y));
        xs[j] = renyi_invariant(SingleParticleRDM{detail::omega_qudit(pc, n, d)}, 2);
      }
    });
    auto st = detail::batch_stats(xs, spec.batches);
    m[k] = st.mean;
    s[k] = st.se;
  }

  double spot_rms = 0, haar_rms = 0, spot_worst = 0;
  for (int k = 0; k < spot; ++k) {
    spot_rms += spot_se[k] * spot_se[k];
    spot_worst = std::max(spot_worst, spot_dev[k] - 3.0 * spot_se[k]);
  }
  spot_rms = std::sqrt(spot_rms / spot);
  for (double v : s) haar_rms += v * v;
  haar_rms = std::sqrt(haar_rms / K);

  const double spread_loc = detail::sample_std(f);
  const double se_loc = std::max(spot_rms, floor_se);
  const double spread_haar = detail::sample_std(m);
  const double se_haar = std::max(haar_rms, floor_se);

  MomentReport r;
  r.test = "two_design_violation";
  r.n = n;
  r.d = d;
  r.spec = spec;
  r.estimates = {{"f_min", *std::min_element(f.begin(), f.end())},
                 {"f_max", *std::max_element(f.begin(), f.end())},
                 {"spread_two_local", spread_loc},
                 {"spread_haar", spread_haar}};
  r.standard_errors = {{"spread_two_local", se_loc}, {"spread_haar", se_haar}};
  r.verdicts.push_back({"spot_check_conservation", spot_worst, 1e-9, spot_worst < 1e-9,
                        "|MC mean - f(W)| < 3*se + 1e-9 on spot-checked W"});
  r.verdicts.push_back({"haar_w_independent", spread_haar, 3.0 * se_haar, spread_haar <= 3.0 * se_haar,
                        "std over W of Haar estimates <= 3*rms se"});
  if (d >= 3) {
    r.verdicts.push_back({"two_local_w_dependent", spread_loc, 10.0 * se_loc, spread_loc > 10.0 * se_loc,
                          "std over W of f(W) > 10*max(se, 1e-9)"});
  } else {
    r.status = "no violation expected";
    r.verdicts.push_back({"two_local_w_independent", spread_loc, 3.0 * se_loc, spread_loc <= 3.0 * se_loc,
                          "std over W of f(W) <= 3*max(se, 1e-9)"});
  }
  r.note = "thresholds are engineering choices; standard errors floored at 1e-9";
  if (!r.passed()) r.status = "failed";
  return r;
}

}  // namespace permdyn
