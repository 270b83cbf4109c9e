#pragma once

#include "permdyn/core.hpp"
#include "permdyn/permutation.hpp"
#include "permdyn/qudit_state.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace permdyn {

using Mask = std::uint32_t;

// Fock vector over n modes; index = occupation bitmask, mode 1 = least
// significant bit. Basis vector for occupied modes i1 < ... < iL is
// c†_{iL} ... c†_{i1}|vac>.
struct FockVector {
  int n = 0;
  Vec amps;

  FockVector() = default;
  explicit FockVector(int n_) : n(n_) {
    if (n_ < 1 || n_ > 24) throw DimensionError("Fock space needs 1 <= n <= 24");
    amps = Vec::Zero(Index{1} << n_);
  }
  static FockVector vacuum(int n) {
    FockVector f(n);
    f.amps[0] = 1.0;
    return f;
  }
};

namespace fock {

inline int bits_above(Mask m, int mode0) { return std::popcount(m >> (mode0 + 1)); }

// c†_j |m>, j 1-indexed; nullopt when occupied.
inline std::optional<std::pair<Mask, int>> create(Mask m, int j) {
  Mask bit = Mask{1} << (j - 1);
  if (m & bit) return std::nullopt;
  return std::make_pair(m | bit, bits_above(m, j - 1) % 2 ? -1 : 1);
}

inline std::optional<std::pair<Mask, int>> annihilate(Mask m, int j) {
  Mask bit = Mask{1} << (j - 1);
  if (!(m & bit)) return std::nullopt;
  return std::make_pair(m & ~bit, bits_above(m, j - 1) % 2 ? -1 : 1);
}

// c†_{t_L} ... c†_{t_1}|vac>, returned as (mask, sign); sign 0 if a mode repeats.
inline std::pair<Mask, int> create_sequence(const std::vector<int>& modes_applied_first_to_last) {
  Mask m = 0;
  int s = 1;
  for (int j : modes_applied_first_to_last) {
    auto r = create(m, j);
    if (!r) return {0, 0};
    m = r->first;
    s *= r->second;
  }
  return {m, s};
}

}  // namespace fock

inline Mat creation_matrix(int n, int j) {
  Index dim = Index{1} << n;
  require_dense(dim, "creation_matrix");
  if (j < 1 || j > n) throw DimensionError("mode outside 1..n");
  Mat c = Mat::Zero(dim, dim);
  for (Mask m = 0; m < static_cast<Mask>(dim); ++m)
    if (auto r = fock::create(m, j)) c(r->first, m) = r->second;
  return c;
}

inline Mat annihilation_matrix(int n, int j) { return creation_matrix(n, j).adjoint(); }

// P^f_ab = I − (c†_a − c†_b)(c_a − c_b).
inline Mat fermionic_swap_matrix(int n, int a, int b) {
  check_pair(n, a, b);
  Index dim = Index{1} << n;
  require_dense(dim, "fermionic_swap_matrix");
  Mat ca = creation_matrix(n, a), cb = creation_matrix(n, b);
  return Mat::Identity(dim, dim) - (ca - cb) * (ca - cb).adjoint();
}

// Same operator applied to a vector through the bitmask sign rule.
inline FockVector apply_fermionic_swap(const FockVector& f, int a, int b) {
  check_pair(f.n, a, b);
  FockVector out = f;
  for (Mask m = 0; m < static_cast<Mask>(f.amps.size()); ++m) {
    cplx v = f.amps[m];
    if (v == cplx(0)) continue;
    for (int src : {a, b}) {
      auto r1 = fock::annihilate(m, src);
      if (!r1) continue;
      double s1 = src == a ? 1.0 : -1.0;
      for (int dst : {a, b}) {
        auto r2 = fock::create(r1->first, dst);
        if (!r2) continue;
        double s2 = dst == a ? 1.0 : -1.0;
        out.amps[r2->first] -= s1 * s2 * r1->second * r2->second * v;
      }
    }
  }
  return out;
}

// P^f(σ) through the transposition factorization of σ.
inline FockVector apply_fermionic_permutation(const FockVector& f, const PermutationWord& sigma) {
  FockVector cur = f;
  auto ts = sigma.transpositions();
  for (auto it = ts.rbegin(); it != ts.rend(); ++it)
    cur = apply_fermionic_swap(cur, std::min(it->first, it->second), std::max(it->first, it->second));
  return cur;
}

// E_ab = I − (|a> − |b>)(<a| − <b|).
inline Mat single_particle_swap(int n, int a, int b) {
  check_pair(n, a, b);
  Mat e = Mat::Identity(n, n);
  e(a - 1, a - 1) = 0;
  e(b - 1, b - 1) = 0;
  e(a - 1, b - 1) = 1;
  e(b - 1, a - 1) = 1;
  return e;
}

// ---- ℋ_comp --------------------------------------------------------------

using SparseAmp = std::vector<std::pair<Index, cplx>>;  // sorted by index

namespace detail {

inline cplx sparse_dot(const SparseAmp& a, const SparseAmp& b) {  // <a|b>
  cplx s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first < b[j].first) ++i;
    else if (a[i].first > b[j].first) ++j;
    else s += std::conj(a[i++].second) * b[j++].second;
  }
  return s;
}

inline SparseAmp sparse_axpy(const SparseAmp& x, cplx alpha, const SparseAmp& y) {  // x + alpha y
  std::map<Index, cplx> acc;
  for (const auto& [i, v] : x) acc[i] += v;
  for (const auto& [i, v] : y) acc[i] += alpha * v;
  SparseAmp out;
  for (const auto& [i, v] : acc)
    if (std::abs(v) > 1e-15) out.emplace_back(i, v);
  return out;
}

inline double sparse_norm(const SparseAmp& a) {
  double s = 0;
  for (const auto& kv : a) s += std::norm(kv.second);
  return std::sqrt(s);
}

// P(σ)[(∧_{m=1}^L |m>) ⊗ |0>^{n−L}] where σ sends sites 1..L to targets t_1..t_L.
inline SparseAmp permuted_wedge(int n, int d, const std::vector<int>& targets) {
  const int L = static_cast<int>(targets.size());
  std::map<Index, cplx> acc;
  double amp = 1.0 / std::sqrt(static_cast<double>(factorial(L)));
  if (L == 0) return {{0, 1.0}};
  PermutationEnumerator e(L);
  do {
    std::vector<int> digits(n, 0);
    for (int i = 0; i < L; ++i) digits[targets[i] - 1] = e.images()[i] + 1;
    acc[basis_index(d, digits)] += e.sign() * amp;
  } while (e.next());
  return SparseAmp(acc.begin(), acc.end());
}

}  // namespace detail

// Orthonormal basis of ℋ_comp with the isometry U^f onto Fock sectors L ≤ min(n, d−1).
class CompSubspaceBasis {
 public:
  struct Element {
    int L;
    SparseAmp qudit;                 // basis vector on (C^d)^{⊗n}
    std::vector<std::pair<Mask, cplx>> fock;  // its Fock image
  };

  CompSubspaceBasis(int n, int d) : n_(n), d_(d) {
    if (n < 1 || n > 12 || d < 2 || d > 4) throw ResourceError("comp basis budget is n <= 12, 2 <= d <= 4");
    const int lmax = std::min(n, d - 1);
    for (int L = 0; L <= lmax; ++L) {
      // Distinct images of P(σ)Φ_L depend only on (σ(1), ..., σ(L)); visit those
      // tuples in the order they first occur when σ runs lexicographically.
      std::vector<int> tuple;
      std::vector<bool> used(n + 1, false);
      visit(L, tuple, used);
    }
  }

  int n() const { return n_; }
  int d() const { return d_; }
  Index dim() const { return static_cast<Index>(elems_.size()); }
  const std::vector<Element>& elements() const { return elems_; }

  Vec coefficients(const StateVector& s) const {
    check(s);
    Vec c(dim());
    for (Index k = 0; k < dim(); ++k) {
      cplx acc = 0.0;
      for (const auto& [i, v] : elems_[k].qudit) acc += std::conj(v) * s.amps[i];
      c[k] = acc;
    }
    return c;
  }

  StateVector project(const StateVector& s) const {
    Vec c = coefficients(s);
    StateVector out(n_, d_);
    for (Index k = 0; k < dim(); ++k)
      for (const auto& [i, v] : elems_[k].qudit) out.amps[i] += c[k] * v;
    return out;
  }

  // U^f Π_comp |ψ>.
  FockVector to_fock(const StateVector& s) const {
    Vec c = coefficients(s);
    FockVector f(n_);
    for (Index k = 0; k < dim(); ++k)
      for (const auto& [m, v] : elems_[k].fock) f.amps[m] += c[k] * v;
    return f;
  }

  Mat dense_basis() const {
    Mat b = Mat::Zero(ipow(d_, n_), dim());
    for (Index k = 0; k < dim(); ++k)
      for (const auto& [i, v] : elems_[k].qudit) b(i, k) = v;
    return b;
  }

 private:
  void check(const StateVector& s) const {
    if (s.n != n_ || s.d != d_) throw DimensionError("state does not match the comp basis (n, d)");
  }

  void visit(int L, std::vector<int>& tuple, std::vector<bool>& used) {
    if (static_cast<int>(tuple.size()) == L) {
      add_candidate(L, tuple);
      return;
    }
    for (int s = 1; s <= n_; ++s) {
      if (used[s]) continue;
      used[s] = true;
      tuple.push_back(s);
      visit(L, tuple, used);
      tuple.pop_back();
      used[s] = false;
    }
  }

  void add_candidate(int L, const std::vector<int>& targets) {
    SparseAmp v = detail::permuted_wedge(n_, d_, targets);
    // Fock image c†_{σ(L)} ... c†_{σ(1)}|vac>: σ(1) is applied first.
    auto [mask, sign] = fock::create_sequence(targets);
    std::map<Mask, cplx> f{{mask, static_cast<double>(sign)}};
    // Gram-Schmidt, twice, carrying the Fock image along.
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& e : elems_) {
        if (e.L != L) continue;  // different particle numbers are orthogonal
        cplx ov = detail::sparse_dot(e.qudit, v);
        if (std::abs(ov) < 1e-14) continue;
        v = detail::sparse_axpy(v, -ov, e.qudit);
        for (const auto& [m, a] : e.fock) f[m] -= ov * a;
      }
    }
    double r = detail::sparse_norm(v);
    if (r < 1e-9) return;
    Element el;
    el.L = L;
    for (auto& kv : v) el.qudit.emplace_back(kv.first, kv.second / r);
    for (const auto& [m, a] : f)
      if (std::abs(a) > 1e-14) el.fock.emplace_back(m, a / r);
    elems_.push_back(std::move(el));
  }

  int n_, d_;
  std::vector<Element> elems_;
};

inline CompSubspaceBasis build_comp_basis(int n, int d) { return CompSubspaceBasis(n, d); }

// ---- Ω map -------------------------------------------------------------

struct SingleParticleRDM {
  Mat omega;
  double trace() const { return omega.trace().real(); }
};

enum class OmegaBackend { Qudit, Fermionic };

using Ensemble = std::vector<std::pair<double, StateVector>>;

inline void validate_ensemble(const Ensemble& ens) {
  if (ens.empty()) throw PreconditionError("empty ensemble");
  double total = 0;
  for (const auto& [w, s] : ens) {
    if (w < 0) throw PreconditionError("negative ensemble weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw PreconditionError("ensemble weights must sum to 1");
}

namespace detail {

// Ω_ij = <ψ_c|P_ij Q_ij|ψ_c>, Ω_ii = <ψ_c|(I − |0><0|)_i|ψ_c>, ψ_c = Π_comp ψ.
inline Mat omega_qudit(const Vec& pc, int n, int d) {
  Mat om = Mat::Zero(n, n);
  const Index dim = pc.size();
  std::vector<Index> w(n);
  for (int i = 0; i < n; ++i) w[i] = ipow(d, n - 1 - i);
  for (Index x = 0; x < dim; ++x) {
    cplx v = pc[x];
    if (v == cplx(0)) continue;
    for (int i = 0; i < n; ++i) {
      Index di = (x / w[i]) % d;
      if (di == 0) continue;
      om(i, i) += std::norm(v);
      for (int j = 0; j < n; ++j) {
        if (j == i || (x / w[j]) % d != 0) continue;
        Index y = x - di * w[i] + di * w[j];  // P_ij moves the label from i to j
        om(i, j) += std::conj(pc[y]) * v;
      }
    }
  }
  return om;
}

// Ω_ij = <Ψ|c†_j c_i|Ψ>.
inline Mat omega_fock(const FockVector& f) {
  const int n = f.n;
  Mat om = Mat::Zero(n, n);
  for (Mask m = 0; m < static_cast<Mask>(f.amps.size()); ++m) {
    cplx v = f.amps[m];
    if (v == cplx(0)) continue;
    for (int i = 1; i <= n; ++i) {
      auto r1 = fock::annihilate(m, i);
      if (!r1) continue;
      for (int j = 1; j <= n; ++j) {
        auto r2 = fock::create(r1->first, j);
        if (!r2) continue;
        om(i - 1, j - 1) += std::conj(f.amps[r2->first]) * static_cast<double>(r1->second * r2->second) * v;
      }
    }
  }
  return om;
}

}  // namespace detail

inline SingleParticleRDM omega_map(const CompSubspaceBasis& basis, const Ensemble& ens,
                                   OmegaBackend backend = OmegaBackend::Qudit) {
  validate_ensemble(ens);
  SingleParticleRDM out{Mat::Zero(basis.n(), basis.n())};
  for (const auto& [w, s] : ens) {
    if (w == 0) continue;
    if (backend == OmegaBackend::Qudit)
      out.omega += w * detail::omega_qudit(basis.project(s).amps, basis.n(), basis.d());
    else
      out.omega += w * detail::omega_fock(basis.to_fock(s));
  }
  return out;
}

inline SingleParticleRDM omega_map(const CompSubspaceBasis& basis, const StateVector& s,
                                   OmegaBackend backend = OmegaBackend::Qudit) {
  return omega_map(basis, Ensemble{{1.0, s}}, backend);
}

// Tr(Ω^l) after Hermitization.
inline double renyi_invariant(const SingleParticleRDM& r, int l) {
  if (l < 1) throw PreconditionError("Rényi order must be >= 1");
  Mat h = 0.5 * (r.omega + r.omega.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
  double s = 0;
  for (Index i = 0; i < es.eigenvalues().size(); ++i) s += std::pow(es.eigenvalues()[i], l);
  return s;
}

// Tr ω² with ω = Ω / Tr Ω.
inline double omega_purity(const SingleParticleRDM& r) {
  double t = r.trace();
  if (std::abs(t) < 1e-14) return 0.0;
  return renyi_invariant(r, 2) / (t * t);
}

inline double rotated_renyi(const CompSubspaceBasis& basis, const StateVector& s, const Mat& u, int l) {
  if (!is_unitary(u)) throw PreconditionError("rotation is not unitary");
  return renyi_invariant(omega_map(basis, apply_tensor_power(s, u)), l);
}

// ‖Ω[e^{iθP_ab} ρ e^{−iθP_ab}] − e^{iθE_ab} Ω[ρ] e^{−iθE_ab}‖_F.
inline double covariance_check(const CompSubspaceBasis& basis, const Ensemble& ens, int a, int b, double theta) {
  Ensemble moved;
  for (const auto& [w, s] : ens) moved.push_back({w, apply_swap_exponential(s, a, b, theta)});
  Mat lhs = omega_map(basis, moved).omega;
  Mat e = single_particle_swap(basis.n(), a, b);
  Mat g = std::cos(theta) * Mat::Identity(basis.n(), basis.n()) + I_UNIT * std::sin(theta) * e;
  Mat rhs = g * omega_map(basis, ens).omega * g.adjoint();
  return (lhs - rhs).norm();
}

// ---- Lie closure ---------------------------------------------------------

inline int lie_closure_dimension(const std::vector<Mat>& gens, double tol = 1e-9) {
  if (gens.empty()) return 0;
  const Index m = gens[0].rows();
  if (m > 64) throw ResourceError("lie_closure_dimension supports m <= 64");
  for (const auto& g : gens) {
    if (g.rows() != m || g.cols() != m) throw DimensionError("generators differ in size");
    if ((g + g.adjoint()).norm() > 1e-10 * std::max(1.0, g.norm()))
      throw PreconditionError("generator is not anti-Hermitian");
  }
  auto flat = [m](const Mat& a) {
    RVec v(2 * m * m);
    for (Index j = 0; j < m; ++j)
      for (Index i = 0; i < m; ++i) {
        v[2 * (j * m + i)] = a(i, j).real();
        v[2 * (j * m + i) + 1] = a(i, j).imag();
      }
    return v;
  };
  std::vector<RVec> basis;
  std::vector<Mat> mats;
  auto try_add = [&](const Mat& a) {
    RVec v = flat(a);
    double n0 = v.norm();
    if (n0 < tol) return;
    v /= n0;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) v -= b.dot(v) * b;
    double r = v.norm();
    if (r < tol) return;
    v /= r;
    basis.push_back(v);
    Mat back(m, m);
    for (Index j = 0; j < m; ++j)
      for (Index i = 0; i < m; ++i) back(i, j) = cplx(v[2 * (j * m + i)], v[2 * (j * m + i) + 1]);
    mats.push_back(back);
  };
  for (const auto& g : gens) try_add(g);
  for (std::size_t i = 0; i < mats.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) {
      Mat c = mats[i] * mats[j] - mats[j] * mats[i];
      try_add(c);
    }
  return static_cast<int>(basis.size());
}

inline std::vector<Mat> single_particle_generators(int n) {
  std::vector<Mat> g;
  for (int a = 1; a <= n; ++a)
    for (int b = a + 1; b <= n; ++b)
      g.push_back(I_UNIT * (single_particle_swap(n, a, b) - Mat::Identity(n, n)));
  return g;
}

// ---- Wedge-sector equivalence ------------------------------------------

namespace detail {

inline std::vector<Mask> sector_masks(int n, int L) {
  std::vector<Mask> out;
  for (Mask m = 0; m < (Mask{1} << n); ++m)
    if (std::popcount(m) == L) out.push_back(m);
  return out;
}

inline bool same_spectrum(const Mat& a, const Mat& b, double tol) {
  Eigen::ComplexEigenSolver<Mat> ea(a, false), eb(b, false);
  std::vector<cplx> va(ea.eigenvalues().data(), ea.eigenvalues().data() + a.rows());
  std::vector<cplx> vb(eb.eigenvalues().data(), eb.eigenvalues().data() + b.rows());
  if (va.size() != vb.size()) return false;
  std::vector<bool> used(vb.size(), false);
  for (const auto& x : va) {
    std::size_t best = vb.size();
    double bd = 1e300;
    for (std::size_t k = 0; k < vb.size(); ++k)
      if (!used[k] && std::abs(x - vb[k]) < bd) {
        bd = std::abs(x - vb[k]);
        best = k;
      }
    if (best == vb.size() || bd > tol) return false;
    used[best] = true;
  }
  return true;
}

}  // namespace detail

// L-particle block of e^{iθ(P^f_ab − I)} in the canonical Fock basis.
inline Mat fermionic_gate_sector(int n, int L, int a, int b, double theta) {
  auto masks = detail::sector_masks(n, L);
  std::map<Mask, Index> pos;
  for (std::size_t k = 0; k < masks.size(); ++k) pos[masks[k]] = static_cast<Index>(k);
  const Index dim = static_cast<Index>(masks.size());
  Mat p = Mat::Zero(dim, dim);
  for (Index c = 0; c < dim; ++c) {
    // Apply P^f to one basis vector using the defining formula on bitmasks.
    Mask m = masks[c];
    p(c, c) += 1.0;
    for (int src : {a, b}) {
      auto r1 = fock::annihilate(m, src);
      if (!r1) continue;
      double s1 = src == a ? 1.0 : -1.0;
      for (int dst : {a, b}) {
        auto r2 = fock::create(r1->first, dst);
        if (!r2) continue;
        double s2 = dst == a ? 1.0 : -1.0;
        p(pos.at(r2->first), c) -= s1 * s2 * r1->second * r2->second;
      }
    }
  }
  return std::exp(-I_UNIT * theta) * (std::cos(theta) * Mat::Identity(dim, dim) + I_UNIT * std::sin(theta) * p);
}

// Antisymmetric-subspace block of G^{⊗L}: entries are L×L minors det G[S, T].
inline Mat wedge_power_sector(const Mat& g, int L) {
  const int n = static_cast<int>(g.rows());
  auto masks = detail::sector_masks(n, L);
  const Index dim = static_cast<Index>(masks.size());
  auto members = [n](Mask m) {
    std::vector<int> v;
    for (int i = 0; i < n; ++i)
      if (m >> i & 1) v.push_back(i);
    return v;
  };
  Mat out(dim, dim);
  for (Index r = 0; r < dim; ++r) {
    auto s = members(masks[r]);
    for (Index c = 0; c < dim; ++c) {
      auto t = members(masks[c]);
      Mat minor(L, L);
      for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j) minor(i, j) = g(s[i], t[j]);
      out(r, c) = L == 0 ? cplx(1.0) : minor.determinant();
    }
  }
  return out;
}

inline bool wedge_sector_equivalence(int n, int L, std::uint64_t seed = 11) {
  if (n < 2 || n > 20) throw DimensionError("wedge_sector_equivalence needs 2 <= n <= 20");
  if (L < 0 || L > n) throw DimensionError("L outside 0..n");
  if (L == 0) return true;
  if (binomial(n, L) > 4096) throw ResourceError("sector dimension exceeds 4096");
  if (binomial(n, L) != binomial(n - 1, L) + binomial(n - 1, L - 1)) return false;
  auto rng = make_rng(seed, 0x77);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
  std::uniform_int_distribution<int> site(1, n);
  for (int trial = 0; trial < 5; ++trial) {
    double theta = ang(rng);
    int a = site(rng), b = site(rng);
    while (b == a) b = site(rng);
    if (a > b) std::swap(a, b);
    Mat fermi = fermionic_gate_sector(n, L, a, b, theta);
    Mat e = single_particle_swap(n, a, b);
    Mat g = std::exp(-I_UNIT * theta) * (std::cos(theta) * Mat::Identity(n, n) + I_UNIT * std::sin(theta) * e);
    Mat wedge = wedge_power_sector(g, L);
    if (!detail::same_spectrum(fermi, wedge, 1e-9)) return false;
  }
  return true;
}

}  // namespace permdyn
