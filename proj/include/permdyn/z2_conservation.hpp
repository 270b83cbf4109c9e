#pragma once

#include "permdyn/core.hpp"
#include "permdyn/permutation.hpp"
#include "permdyn/qudit_state.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace permdyn {

namespace detail {

// Σ_σ sgn(σ) <a|P(σ)|b> <c|P(σ)|e>, lexicographic order, split over workers
// in contiguous blocks of the enumeration.
inline cplx signed_pair_sum(int n, int d, const Vec& a, const Vec& b, const Vec& c, const Vec& e) {
  const Index total = factorial(n);
  const int workers = worker_count(total);
  std::vector<cplx> partial(workers, 0.0);
  parallel_chunks(total, [&](int w, Index lo, Index hi) {
    PermutationEnumerator en(n);
    for (Index k = 0; k < lo; ++k) en.next();
    PermIndexer ix(n, d);
    cplx acc = 0.0;
    for (Index k = lo; k < hi; ++k) {
      ix.set(en.images());
      cplx x = permutation_overlap(ix, a, b);
      cplx y = (&a == &c && &b == &e) ? x : permutation_overlap(ix, c, e);
      acc += static_cast<double>(en.sign()) * x * y;
      en.next();
    }
    partial[w] = acc;
  });
  cplx sum = 0.0;
  for (const auto& p : partial) sum += p;
  return sum;
}

}  // namespace detail

// f_sgn(ψ) = (1/n!) Σ_σ sgn(σ) <ψ|P(σ)|ψ>^2.
inline double f_sgn(const StateVector& s) {
  require_perm_budget(s.n, "f_sgn");
  if (std::abs(s.norm() - 1.0) > 1e-6) throw PreconditionError("f_sgn needs a normalized state");
  cplx sum = detail::signed_pair_sum(s.n, s.d, s.amps, s.amps, s.amps, s.amps) /
             static_cast<double>(factorial(s.n));
  if (std::abs(sum.imag()) > 1e-10) throw ConsistencyError("f_sgn has a non-negligible imaginary part");
  return sum.real();
}

// det(<φ_i|φ_j>^2) / n! for a product state ⊗φ_i.
inline double f_sgn_product(const std::vector<Vec>& factors) {
  const Index n = static_cast<Index>(factors.size());
  if (n == 0) throw DimensionError("need at least one factor");
  Mat g(n, n);
  for (Index i = 0; i < n; ++i) {
    if (std::abs(factors[i].norm() - 1.0) > 1e-10) throw PreconditionError("factors must be unit vectors");
    for (Index j = 0; j < n; ++j) {
      cplx o = factors[i].dot(factors[j]);
      g(i, j) = o * o;
    }
  }
  cplx det = g.determinant();
  // Complex overlaps can leave an imaginary part here; callers compare the
  // real part against f_sgn and report any mismatch.
  return det.real() / static_cast<double>(factorial(static_cast<int>(n)));
}

inline cplx f_sgn_product_complex(const std::vector<Vec>& factors) {
  const Index n = static_cast<Index>(factors.size());
  Mat g(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      cplx o = factors[i].dot(factors[j]);
      g(i, j) = o * o;
    }
  return g.determinant() / static_cast<double>(factorial(static_cast<int>(n)));
}

// (1/n!) Σ sgn(σ) <ψ|P(σ)Π|ψ><ψ|P(σ)|ψ> with phi = Π ψ supplied by the caller.
inline double f_sgn_with(const StateVector& s, const Vec& phi) {
  require_perm_budget(s.n, "f_sgn_with");
  cplx sum = detail::signed_pair_sum(s.n, s.d, s.amps, phi, s.amps, s.amps) /
             static_cast<double>(factorial(s.n));
  return sum.real();
}

// K = (1/n!) Σ sgn(σ) P(σ)⊗P(σ) on two copies. Vectors on the doubled space use
// index i1 * d^n + i2.
class KProjector {
 public:
  KProjector(int n, int d) : n_(n), d_(d) {
    require_perm_budget(n, "KProjector");
    if (n < 1 || d < 1) throw DimensionError("KProjector needs n, d >= 1");
  }

  int n() const { return n_; }
  int d() const { return d_; }
  Index pair_dim() const { return ipow(d_, 2 * n_); }

  Mat dense() const {
    Index dn = ipow(d_, n_), dim = dn * dn;
    require_dense(dim, "KProjector::dense");
    Mat k = Mat::Zero(dim, dim);
    double w = 1.0 / static_cast<double>(factorial(n_));
    PermutationEnumerator e(n_);
    do {
      auto m = permutation_index_map(n_, d_, e.word());
      for (Index i1 = 0; i1 < dn; ++i1)
        for (Index i2 = 0; i2 < dn; ++i2) k(m[i1] * dn + m[i2], i1 * dn + i2) += e.sign() * w;
    } while (e.next());
    return k;
  }

  Vec apply(const Vec& v) const {
    Index dn = ipow(d_, n_);
    if (v.size() != dn * dn) throw DimensionError("vector is not on the doubled space");
    Vec out = Vec::Zero(v.size());
    double w = 1.0 / static_cast<double>(factorial(n_));
    PermutationEnumerator e(n_);
    do {
      auto m = permutation_index_map(n_, d_, e.word());
      double s = e.sign() * w;
      for (Index i1 = 0; i1 < dn; ++i1)
        for (Index i2 = 0; i2 < dn; ++i2) out[m[i1] * dn + m[i2]] += s * v[i1 * dn + i2];
    } while (e.next());
    return out;
  }

  // Rank of K: the antisymmetric part of n copies of C^{d^2}.
  Index rank() const { return binomial(d_ * d_, n_); }

  // Orthonormal basis of range(K), as sparse vectors. Each basis vector is the
  // normalized antisymmetrization of n distinct pair labels (a_k, b_k).
  struct SparseVec {
    std::vector<Index> idx;
    std::vector<double> val;
  };

  std::vector<SparseVec> range_basis() const {
    std::vector<SparseVec> out;
    const int labels = d_ * d_;
    if (n_ > labels) return out;
    Index dn = ipow(d_, n_);
    double amp = 1.0 / std::sqrt(static_cast<double>(factorial(n_)));
    std::vector<int> combo(n_);
    std::iota(combo.begin(), combo.end(), 0);
    while (true) {
      SparseVec sv;
      PermutationEnumerator e(n_);
      do {
        Index ia = 0, ib = 0;
        for (int i = 0; i < n_; ++i) {
          int lab = combo[e.images()[i]];
          ia = ia * d_ + lab / d_;
          ib = ib * d_ + lab % d_;
        }
        sv.idx.push_back(ia * dn + ib);
        sv.val.push_back(e.sign() * amp);
      } while (e.next());
      out.push_back(std::move(sv));
      int k = n_ - 1;
      while (k >= 0 && combo[k] == labels - n_ + k) --k;
      if (k < 0) break;
      ++combo[k];
      for (int j = k + 1; j < n_; ++j) combo[j] = combo[j - 1] + 1;
    }
    return out;
  }

 private:
  int n_, d_;
};

inline KProjector build_k_projector(int n, int d) { return KProjector(n, d); }

// K(ψ1 ⊗ ψ2).
inline Vec k_expectation_pair(const KProjector& k, const StateVector& a, const StateVector& b) {
  check_same_shape(a, b);
  if (a.n != k.n() || a.d != k.d()) throw DimensionError("states do not match the projector");
  Vec v(a.dim() * b.dim());
  for (Index i = 0; i < a.dim(); ++i) v.segment(i * b.dim(), b.dim()) = a.amps[i] * b.amps;
  return k.apply(v);
}

// Largest ‖[H, U^{⊗n}]‖ over a few Haar-random U ∈ SU(d).
inline double su_invariance_residual(const Mat& h, int n, int d, int samples = 3, std::uint64_t seed = 17) {
  auto rng = make_rng(seed, 0x5u);
  double worst = 0;
  for (int s = 0; s < samples; ++s) {
    Mat u = haar_special_unitary(d, rng);
    Mat uh(h.rows(), h.cols()), hu(h.rows(), h.cols());
    for (Index c = 0; c < h.cols(); ++c) {
      StateVector col(n, d, h.col(c));
      uh.col(c) = apply_tensor_power(col, u).amps;
    }
    // H U^{⊗n} = (U^{⊗n}^† H^†)^† = (U^{†⊗n} H)^† for Hermitian H.
    Mat ud = u.adjoint();
    for (Index c = 0; c < h.cols(); ++c) {
      StateVector col(n, d, h.col(c));
      hu.col(c) = apply_tensor_power(col, ud).amps;
    }
    worst = std::max(worst, (uh - hu.adjoint()).norm());
  }
  return worst;
}

struct Z2Criterion {
  bool satisfied = false;
  std::optional<double> shift;
  double residual = 0.0;
};

// Tests K(H⊗I + I⊗H) = 2αK (α = 0 unless allow_shift) through the range of K:
// with {w_S} an orthonormal basis of range(K), the Frobenius residual is
// sqrt(Σ_S ‖(M − 2α) w_S‖²), M = H⊗I + I⊗H.
inline Z2Criterion z2_criterion(const Mat& h, int n, int d, bool allow_shift) {
  Index dn = ipow(d, n);
  if (h.rows() != dn || h.cols() != dn) throw DimensionError("H has the wrong dimension for (n, d)");
  if ((h - h.adjoint()).norm() > 1e-10 * std::max(1.0, h.norm())) throw PreconditionError("H is not Hermitian");
  if (su_invariance_residual(h, n, d) > 1e-8 * std::max(1.0, h.norm()))
    throw PreconditionError("H does not commute with U^{⊗n}");
  KProjector k(n, d);
  auto basis = k.range_basis();
  Z2Criterion out;
  if (basis.empty()) {
    out.satisfied = true;
    if (allow_shift) out.shift = 0.0;
    return out;
  }
  Vec buf = Vec::Zero(dn * dn);
  auto apply_m = [&](const KProjector::SparseVec& w) {
    buf.setZero();
    for (std::size_t k2 = 0; k2 < w.idx.size(); ++k2) {
      Index i1 = w.idx[k2] / dn, i2 = w.idx[k2] % dn;
      double v = w.val[k2];
      for (Index r = 0; r < dn; ++r) {
        buf[r * dn + i2] += h(r, i1) * v;
        buf[i1 * dn + r] += h(r, i2) * v;
      }
    }
  };
  double alpha = 0.0;
  if (allow_shift) {
    double acc = 0;
    for (const auto& w : basis) {
      apply_m(w);
      for (std::size_t j = 0; j < w.idx.size(); ++j) acc += w.val[j] * buf[w.idx[j]].real();
    }
    alpha = acc / (2.0 * static_cast<double>(basis.size()));
  }
  double res2 = 0;
  for (const auto& w : basis) {
    apply_m(w);
    for (std::size_t j = 0; j < w.idx.size(); ++j) buf[w.idx[j]] -= 2.0 * alpha * w.val[j];
    res2 += buf.squaredNorm();
  }
  out.residual = std::sqrt(res2);
  out.satisfied = out.residual < 1e-8;
  if (allow_shift) out.shift = alpha;
  return out;
}

struct Z2Decomposition {
  int n = 0;
  std::vector<PermutationWord> perms;  // lexicographic order
  std::vector<cplx> coefficients;      // h_σ
  double shift = 0.0;                  // α
  double residual = 0.0;               // ‖Σ h_σ P(σ) + α I − H‖_F
  Z2Criterion criterion;
};

// Solves Σ_σ h_σ P(σ) + α I = H with h_σ real for odd σ and imaginary for even σ
// (the fixed points of h_σ ↦ −sgn(σ) h*_σ), in the least-squares, minimum-norm sense.
inline Z2Decomposition z2_decompose(const Mat& h, int n, int d) {
  require_perm_budget(n, "z2_decompose");
  Index dn = ipow(d, n);
  require_dense(dn, "z2_decompose");
  Z2Decomposition out;
  out.n = n;
  out.criterion = z2_criterion(h, n, d, true);
  if (!out.criterion.satisfied)
    throw NoDecompositionError("Z2 criterion fails (residual " + std::to_string(out.criterion.residual) + ")");

  out.perms = all_permutations(n);
  const Index np = static_cast<Index>(out.perms.size());
  std::vector<std::vector<Index>> maps;
  std::vector<cplx> phase;  // h_σ = phase_σ · x_σ
  maps.reserve(np);
  for (const auto& p : out.perms) {
    maps.push_back(permutation_index_map(n, d, p));
    phase.push_back(p.sign() < 0 ? cplx(1.0) : I_UNIT);
  }
  // Columns: x_σ (np of them) then α. Gram entries via Tr(P(τ)^† P(σ)) = d^{#cycles(τ^{-1}σ)}.
  const Index cols = np + 1;
  RMat g = RMat::Zero(cols, cols);
  RVec rhs = RVec::Zero(cols);
  auto trace_perm = [&](const PermutationWord& p) { return std::pow(static_cast<double>(d), static_cast<double>(p.cycle_type().size())); };
  for (Index a = 0; a < np; ++a) {
    PermutationWord inv = out.perms[a].inverse();
    for (Index b = a; b < np; ++b) {
      double tr = trace_perm(inv * out.perms[b]);
      double v = (std::conj(phase[a]) * phase[b] * tr).real();
      g(a, b) = g(b, a) = v;
    }
    double tr_id = trace_perm(inv);
    g(a, np) = g(np, a) = (std::conj(phase[a]) * tr_id).real();
    // Tr(P(σ)^† H) = Σ_x conj(P(σ)(m(x), x)) H(m(x), x).
    cplx t = 0.0;
    for (Index x = 0; x < dn; ++x) t += h(maps[a][x], x);
    rhs[a] = (std::conj(phase[a]) * t).real();
  }
  g(np, np) = static_cast<double>(dn);
  rhs[np] = h.trace().real();

  Eigen::SelfAdjointEigenSolver<RMat> es(g);
  double top = es.eigenvalues().cwiseAbs().maxCoeff();
  RVec coeff = es.eigenvectors().transpose() * rhs;
  for (Index i = 0; i < cols; ++i) {
    double ev = es.eigenvalues()[i];
    coeff[i] = std::abs(ev) > 1e-10 * top ? coeff[i] / ev : 0.0;
  }
  RVec x = es.eigenvectors() * coeff;

  out.coefficients.resize(np);
  Mat recon = Mat::Zero(dn, dn);
  for (Index a = 0; a < np; ++a) {
    out.coefficients[a] = phase[a] * x[a];
    for (Index y = 0; y < dn; ++y) recon(maps[a][y], y) += out.coefficients[a];
  }
  out.shift = x[np];
  recon.diagonal().array() += out.shift;
  out.residual = (recon - h).norm();
  if (out.residual >= 1e-8)
    throw NoDecompositionError("least-squares reconstruction residual " + std::to_string(out.residual));
  return out;
}

}  // namespace permdyn
