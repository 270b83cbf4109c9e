#pragma once

#include "permdyn/core.hpp"
#include "permdyn/permutation.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace permdyn {

// State on (C^d)^{⊗n}. Basis index: site 1 is the most significant base-d digit.
struct StateVector {
  int n = 0;
  int d = 0;
  Vec amps;

  StateVector() = default;
  StateVector(int n_, int d_) : n(n_), d(d_) {
    if (n_ < 1 || d_ < 1) throw DimensionError("state needs n >= 1 and d >= 1");
    Index dim = ipow(d_, n_);
    if (dim > limits().state_cap)
      throw ResourceError("state dimension " + std::to_string(dim) + " exceeds state cap");
    amps = Vec::Zero(dim);
  }
  StateVector(int n_, int d_, Vec a) : StateVector(n_, d_) {
    if (a.size() != amps.size()) throw DimensionError("amplitude vector has wrong length");
    amps = std::move(a);
  }

  Index dim() const { return amps.size(); }
  double norm() const { return amps.norm(); }
  StateVector normalized() const {
    StateVector s = *this;
    double nr = s.norm();
    if (nr == 0) throw PreconditionError("cannot normalize the zero vector");
    s.amps /= nr;
    return s;
  }
  cplx inner(const StateVector& o) const { return amps.dot(o.amps); }  // <this|o>
};

inline void check_same_shape(const StateVector& a, const StateVector& b) {
  if (a.n != b.n || a.d != b.d) throw DimensionError("states have different (n, d)");
}

inline Index basis_index(int d, const std::vector<int>& digits) {
  Index x = 0;
  for (int m : digits) {
    if (m < 0 || m >= d) throw DimensionError("basis label outside 0..d-1");
    x = x * d + m;
  }
  return x;
}

inline std::vector<int> basis_digits(int n, int d, Index x) {
  std::vector<int> digits(n);
  for (int i = n - 1; i >= 0; --i) {
    digits[i] = static_cast<int>(x % d);
    x /= d;
  }
  return digits;
}

inline StateVector basis_state(int d, const std::vector<int>& digits) {
  StateVector s(static_cast<int>(digits.size()), d);
  s.amps[basis_index(d, digits)] = 1.0;
  return s;
}

// Index map x -> index of P(σ)|x>, evaluated through two half-tables so the
// per-index cost is one addition.
class PermIndexer {
 public:
  PermIndexer(int n, int d) : n_(n), d_(d), nhi_(n / 2) {
    dlo_ = ipow(d, n - nhi_);
    dhi_ = ipow(d, nhi_);
    weight_.resize(n);
    for (int j = 0; j < n; ++j) weight_[j] = ipow(d, n - 1 - j);
    hi_.resize(dhi_);
    lo_.resize(dlo_);
  }

  void set(const std::vector<int>& img) {
    // Content at site i moves to site img[i].
    fill(hi_, 0, nhi_, img);
    fill(lo_, nhi_, n_, img);
  }

  Index operator()(Index x) const { return hi_[x / dlo_] + lo_[x % dlo_]; }
  Index dlo() const { return dlo_; }
  Index dhi() const { return dhi_; }
  const std::vector<Index>& hi() const { return hi_; }
  const std::vector<Index>& lo() const { return lo_; }

 private:
  void fill(std::vector<Index>& table, int first, int last, const std::vector<int>& img) {
    int count = last - first;
    Index size = ipow(d_, count);
    std::vector<int> dig(count, 0);
    for (Index x = 0; x < size; ++x) {
      Index v = 0;
      for (int k = 0; k < count; ++k) v += dig[k] * weight_[img[first + k]];
      table[x] = v;
      for (int k = count - 1; k >= 0; --k) {
        if (++dig[k] < d_) break;
        dig[k] = 0;
      }
    }
  }

  int n_, d_, nhi_;
  Index dlo_, dhi_;
  std::vector<Index> weight_, hi_, lo_;
};

inline std::vector<Index> permutation_index_map(int n, int d, const PermutationWord& sigma) {
  if (sigma.n() != n) throw DimensionError("permutation size differs from site count");
  PermIndexer ix(n, d);
  ix.set(sigma.images());
  Index dim = ipow(d, n);
  std::vector<Index> map(dim);
  for (Index x = 0; x < dim; ++x) map[x] = ix(x);
  return map;
}

inline StateVector apply_permutation(const StateVector& s, const PermutationWord& sigma) {
  if (sigma.n() != s.n) throw DimensionError("permutation size differs from state site count");
  PermIndexer ix(s.n, s.d);
  ix.set(sigma.images());
  StateVector out(s.n, s.d);
  const Index dlo = ix.dlo();
  for (Index h = 0; h < ix.dhi(); ++h) {
    const Index base = ix.hi()[h];
    for (Index l = 0; l < dlo; ++l) out.amps[base + ix.lo()[l]] = s.amps[h * dlo + l];
  }
  return out;
}

// <a|P(σ)|b> using a prepared indexer. Hot loop: plain real arithmetic so the
// compiler does not route through the NaN-safe complex multiply.
inline cplx permutation_overlap(const PermIndexer& ix, const Vec& a, const Vec& b) {
  const double* pa = reinterpret_cast<const double*>(a.data());
  const double* pb = reinterpret_cast<const double*>(b.data());
  const Index dlo = ix.dlo();
  const Index* lo = ix.lo().data();
  double re = 0, im = 0;
  for (Index h = 0; h < ix.dhi(); ++h) {
    const Index base = ix.hi()[h];
    const double* src = pb + 2 * h * dlo;
    for (Index l = 0; l < dlo; ++l) {
      const double* dst = pa + 2 * (base + lo[l]);
      // conj(a[y]) * b[x]
      re += dst[0] * src[2 * l] + dst[1] * src[2 * l + 1];
      im += dst[0] * src[2 * l + 1] - dst[1] * src[2 * l];
    }
  }
  return {re, im};
}

inline cplx permutation_expectation(const StateVector& s, const PermutationWord& sigma) {
  PermIndexer ix(s.n, s.d);
  ix.set(sigma.images());
  return permutation_overlap(ix, s.amps, s.amps);
}

inline void check_pair(int n, int a, int b) {
  if (a < 1 || a > n || b < 1 || b > n)
    throw DimensionError("gate site outside 1.." + std::to_string(n));
  if (a == b) throw InvalidGateError("swap exponential needs a != b");
}

// Index map of the transposition (a b), 1-indexed sites.
inline std::vector<Index> swap_index_map(int n, int d, int a, int b) {
  check_pair(n, a, b);
  Index dim = ipow(d, n);
  Index wa = ipow(d, n - a), wb = ipow(d, n - b);
  std::vector<Index> map(dim);
  for (Index x = 0; x < dim; ++x) {
    Index da = (x / wa) % d, db = (x / wb) % d;
    map[x] = x + (db - da) * wa + (da - db) * wb;
  }
  return map;
}

// e^{iθ P_ab} = cos θ I + i sin θ P_ab.
inline StateVector apply_swap_exponential(const StateVector& s, int a, int b, double theta) {
  check_pair(s.n, a, b);
  const Index dim = s.dim();
  const Index wa = ipow(s.d, s.n - a), wb = ipow(s.d, s.n - b);
  const cplx c = std::cos(theta), is = I_UNIT * std::sin(theta);
  StateVector out(s.n, s.d);
  for (Index x = 0; x < dim; ++x) {
    Index da = (x / wa) % s.d, db = (x / wb) % s.d;
    Index y = x + (db - da) * wa + (da - db) * wb;
    out.amps[x] = c * s.amps[x] + is * s.amps[y];
  }
  return out;
}

// U applied on every site.
inline StateVector apply_tensor_power(const StateVector& s, const Mat& u) {
  if (u.rows() != s.d || u.cols() != s.d) throw DimensionError("single-qudit operator has wrong size");
  Vec cur = s.amps, nxt(s.dim());
  const Index dim = s.dim();
  for (int site = 0; site < s.n; ++site) {
    Index w = ipow(s.d, s.n - 1 - site);
    nxt.setZero();
    for (Index x = 0; x < dim; ++x) {
      int dig = static_cast<int>((x / w) % s.d);
      Index base = x - dig * w;
      cplx v = cur[x];
      if (v == cplx(0)) continue;
      for (int r = 0; r < s.d; ++r) nxt[base + r * w] += u(r, dig) * v;
    }
    std::swap(cur, nxt);
  }
  return StateVector(s.n, s.d, cur);
}

inline StateVector tensor(const StateVector& a, const StateVector& b) {
  if (a.d != b.d) throw DimensionError("tensor product of different local dimensions");
  StateVector out(a.n + b.n, a.d);
  for (Index i = 0; i < a.dim(); ++i)
    out.amps.segment(i * b.dim(), b.dim()) = a.amps[i] * b.amps;
  return out;
}

inline StateVector product_state(const std::vector<Vec>& factors) {
  if (factors.empty()) throw DimensionError("product state needs at least one factor");
  int d = static_cast<int>(factors[0].size());
  StateVector s(1, d, factors[0]);
  for (std::size_t k = 1; k < factors.size(); ++k) {
    if (factors[k].size() != d) throw DimensionError("product factors differ in dimension");
    s = tensor(s, StateVector(1, d, factors[k]));
  }
  return s;
}

// (1/√L!) Σ_π sgn(π) |l_{π(1)} ... l_{π(L)}>, labels distinct.
inline StateVector wedge_block(int d, const std::vector<int>& labels) {
  int L = static_cast<int>(labels.size());
  if (L == 0) throw DimensionError("wedge block needs at least one label");
  if (L > d) throw PreconditionError("cannot antisymmetrize more than d labels");
  for (int i = 0; i < L; ++i) {
    if (labels[i] < 0 || labels[i] >= d) throw DimensionError("wedge label outside 0..d-1");
    for (int j = 0; j < i; ++j)
      if (labels[i] == labels[j]) throw PreconditionError("repeated wedge label gives the zero vector");
  }
  StateVector s(L, d);
  double amp = 1.0 / std::sqrt(static_cast<double>(factorial(L)));
  PermutationEnumerator e(L);
  std::vector<int> digits(L);
  do {
    for (int i = 0; i < L; ++i) digits[i] = labels[e.images()[i]];
    s.amps[basis_index(d, digits)] += e.sign() * amp;
  } while (e.next());
  return s;
}

// (|1> ∧ ... ∧ |L>) ⊗ |0>^{⊗tail}.
inline StateVector wedge_state(int d, int L, int tail) {
  if (L < 0 || tail < 0 || L + tail < 1) throw DimensionError("wedge_state needs L + tail >= 1");
  if (L > d) throw PreconditionError("antisymmetrization impossible: L > d");
  if (L > d - 1) throw PreconditionError("labels 1..L need L <= d - 1");
  std::vector<int> zeros(tail, 0);
  if (L == 0) return basis_state(d, zeros);
  std::vector<int> labels(L);
  std::iota(labels.begin(), labels.end(), 1);
  StateVector w = wedge_block(d, labels);
  return tail ? tensor(w, basis_state(d, zeros)) : w;
}

// |0> ∧ |1> ∧ ... ∧ |d-1>, the totally antisymmetric state of d qudits.
inline StateVector singlet_state(int d) {
  std::vector<int> labels(d);
  std::iota(labels.begin(), labels.end(), 0);
  return wedge_block(d, labels);
}

// Tensor product of wedge blocks, e.g. {{0,1,2},{0,1},{0}}.
inline StateVector wedge_blocks(int d, const std::vector<std::vector<int>>& blocks) {
  if (blocks.empty()) throw DimensionError("need at least one block");
  StateVector s = wedge_block(d, blocks[0]);
  for (std::size_t k = 1; k < blocks.size(); ++k) s = tensor(s, wedge_block(d, blocks[k]));
  return s;
}

inline StateVector random_state(int n, int d, std::mt19937_64& rng) {
  StateVector s(n, d);
  s.amps = random_complex_gaussian(s.dim(), rng);
  s.amps.normalize();
  return s;
}

inline Mat permutation_matrix(int n, int d, const PermutationWord& sigma) {
  Index dim = ipow(d, n);
  require_dense(dim, "permutation_matrix");
  auto map = permutation_index_map(n, d, sigma);
  Mat m = Mat::Zero(dim, dim);
  for (Index x = 0; x < dim; ++x) m(map[x], x) = 1.0;
  return m;
}

struct Gate {
  int a = 1;
  int b = 2;
  double theta = 0.0;
};

// Applies e^{iθP_ab} to the rows of m (i.e. returns G m).
inline void left_apply_gate(Mat& m, int n, int d, const Gate& g) {
  auto map = swap_index_map(n, d, g.a, g.b);
  const cplx c = std::cos(g.theta), is = I_UNIT * std::sin(g.theta);
  Mat out(m.rows(), m.cols());
  for (Index x = 0; x < m.rows(); ++x) out.row(x) = c * m.row(x) + is * m.row(map[x]);
  m.swap(out);
}

inline Mat dense_matrix_of_circuit(int n, int d, const std::vector<Gate>& gates) {
  Index dim = ipow(d, n);
  require_dense(dim, "dense_matrix_of_circuit");
  Mat u = Mat::Identity(dim, dim);
  for (const auto& g : gates) left_apply_gate(u, n, d, g);
  return u;
}

}  // namespace permdyn
