#pragma once

#include "permdyn/core.hpp"
#include "permdyn/permutation.hpp"
#include "permdyn/qudit_state.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace permdyn {

using YoungDiagram = std::vector<int>;

inline std::string diagram_string(const YoungDiagram& l) {
  std::string s = "(";
  for (std::size_t i = 0; i < l.size(); ++i) s += (i ? "," : "") + std::to_string(l[i]);
  return s + ")";
}

inline void validate_diagram(const YoungDiagram& l, int n) {
  int sum = 0;
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (l[i] <= 0) throw DimensionError("partition parts must be positive");
    if (i && l[i] > l[i - 1]) throw DimensionError("partition parts must be weakly decreasing");
    sum += l[i];
  }
  if (sum != n) throw DimensionError("partition " + diagram_string(l) + " does not sum to n");
}

// Partitions of n with at most max_rows rows, in reverse lexicographic order
// ((n) first).
inline std::vector<YoungDiagram> partitions(int n, int max_rows) {
  std::vector<YoungDiagram> out;
  YoungDiagram cur;
  auto rec = [&](auto&& self, int remaining, int cap) -> void {
    if (remaining == 0) {
      out.push_back(cur);
      return;
    }
    if (static_cast<int>(cur.size()) == max_rows) return;
    for (int p = std::min(remaining, cap); p >= 1; --p) {
      cur.push_back(p);
      self(self, remaining - p, p);
      cur.pop_back();
    }
  };
  rec(rec, n, n);
  return out;
}

inline std::vector<int> hook_lengths(const YoungDiagram& l) {
  std::vector<int> h;
  for (std::size_t i = 0; i < l.size(); ++i)
    for (int j = 0; j < l[i]; ++j) {
      int arm = l[i] - j - 1;
      int leg = 0;
      for (std::size_t k = i + 1; k < l.size() && l[k] > j; ++k) ++leg;
      h.push_back(arm + leg + 1);
    }
  return h;
}

// m_λ = n! / Π hooks.
inline Index sn_irrep_dim(const YoungDiagram& l) {
  int n = std::accumulate(l.begin(), l.end(), 0);
  Index num = factorial(n), den = 1;
  for (int h : hook_lengths(l)) den *= h;
  return num / den;
}

// d_λ = Π (d + content) / Π hooks.
inline Index su_irrep_dim(const YoungDiagram& l, int d) {
  __int128 num = 1, den = 1;
  for (std::size_t i = 0; i < l.size(); ++i)
    for (int j = 0; j < l[i]; ++j) num *= (d + j - static_cast<int>(i));
  for (int h : hook_lengths(l)) den *= h;
  return static_cast<Index>(num / den);
}

inline int content_sum(const YoungDiagram& l) {
  int s = 0;
  for (std::size_t i = 0; i < l.size(); ++i)
    for (int j = 0; j < l[i]; ++j) s += j - static_cast<int>(i);
  return s;
}

// Murnaghan–Nakayama on beta-sets, memoized on (partition, remaining cycle type).
class CharacterTable {
 public:
  long long operator()(const YoungDiagram& l, const std::vector<int>& cycle_type) {
    int n = std::accumulate(l.begin(), l.end(), 0);
    int m = std::accumulate(cycle_type.begin(), cycle_type.end(), 0);
    validate_diagram(l, n);
    if (n != m) throw DimensionError("partition and cycle type have different sizes");
    for (int c : cycle_type)
      if (c <= 0) throw DimensionError("cycle lengths must be positive");
    std::vector<int> mu = cycle_type;
    std::sort(mu.begin(), mu.end(), std::greater<int>());
    std::lock_guard<std::mutex> g(mu_);
    return eval(l, mu, 0);
  }

 private:
  long long eval(const YoungDiagram& l, const std::vector<int>& mu, std::size_t pos) {
    if (pos == mu.size()) return l.empty() ? 1 : 0;
    auto key = std::make_pair(l, std::vector<int>(mu.begin() + static_cast<long>(pos), mu.end()));
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    const int k = mu[pos];
    const int len = static_cast<int>(l.size());
    std::vector<int> beta(len);
    for (int i = 0; i < len; ++i) beta[i] = l[i] + (len - 1 - i);
    long long total = 0;
    for (int i = 0; i < len; ++i) {
      int target = beta[i] - k;
      if (target < 0 || std::find(beta.begin(), beta.end(), target) != beta.end()) continue;
      int between = 0;
      for (int b : beta)
        if (b > target && b < beta[i]) ++between;
      std::vector<int> nb = beta;
      nb[i] = target;
      std::sort(nb.begin(), nb.end(), std::greater<int>());
      YoungDiagram nl;
      for (int r = 0; r < len; ++r) {
        int part = nb[r] - (len - 1 - r);
        if (part > 0) nl.push_back(part);
      }
      long long sub = eval(nl, mu, pos + 1);
      total += (between % 2 ? -1 : 1) * sub;
    }
    memo_[key] = total;
    return total;
  }

  std::mutex mu_;
  std::map<std::pair<YoungDiagram, std::vector<int>>, long long> memo_;
};

inline CharacterTable& character_table() {
  static CharacterTable t;
  return t;
}

inline long long character(const YoungDiagram& l, const std::vector<int>& cycle_type) {
  return character_table()(l, cycle_type);
}

// Π_λ|v> = (m_λ/n!) Σ_σ χ_λ(σ) P(σ)|v>, matrix-free.
inline Vec apply_isotypic_projector(const YoungDiagram& l, const StateVector& s) {
  validate_diagram(l, s.n);
  require_perm_budget(s.n, "apply_isotypic_projector");
  const double pref = static_cast<double>(sn_irrep_dim(l)) / static_cast<double>(factorial(s.n));
  Vec out = Vec::Zero(s.dim());
  std::map<std::vector<int>, double> chi;
  PermIndexer ix(s.n, s.d);
  PermutationEnumerator e(s.n);
  do {
    auto w = e.word();
    auto ct = w.cycle_type();
    auto it = chi.find(ct);
    if (it == chi.end()) it = chi.emplace(ct, static_cast<double>(character(l, ct))).first;
    if (it->second == 0) continue;
    const double c = pref * it->second;
    ix.set(e.images());
    for (Index h = 0; h < ix.dhi(); ++h)
      for (Index lo = 0; lo < ix.dlo(); ++lo) out[ix.hi()[h] + ix.lo()[lo]] += c * s.amps[h * ix.dlo() + lo];
  } while (e.next());
  return out;
}

inline Mat isotypic_projector(const YoungDiagram& l, int n, int d) {
  validate_diagram(l, n);
  require_perm_budget(n, "isotypic_projector");
  const Index dim = ipow(d, n);
  require_dense(dim, "isotypic_projector");
  const double pref = static_cast<double>(sn_irrep_dim(l)) / static_cast<double>(factorial(n));
  Mat p = Mat::Zero(dim, dim);
  std::map<std::vector<int>, double> chi;
  PermIndexer ix(n, d);
  PermutationEnumerator e(n);
  do {
    auto ct = e.word().cycle_type();
    auto it = chi.find(ct);
    if (it == chi.end()) it = chi.emplace(ct, static_cast<double>(character(l, ct))).first;
    if (it->second == 0) continue;
    ix.set(e.images());
    for (Index x = 0; x < dim; ++x) p(ix(x), x) += pref * it->second;
  } while (e.next());
  return p;
}

// Generalized Gell-Mann matrices, Tr(T^a T^b) = 2δ^{ab}: symmetric pairs,
// antisymmetric pairs, then diagonal.
inline std::vector<Mat> gell_mann(int d) {
  std::vector<Mat> out;
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k) {
      Mat t = Mat::Zero(d, d);
      t(j, k) = t(k, j) = 1.0;
      out.push_back(t);
    }
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k) {
      Mat t = Mat::Zero(d, d);
      t(j, k) = -I_UNIT;
      t(k, j) = I_UNIT;
      out.push_back(t);
    }
  for (int l = 1; l < d; ++l) {
    Mat t = Mat::Zero(d, d);
    double f = std::sqrt(2.0 / (l * (l + 1.0)));
    for (int j = 0; j < l; ++j) t(j, j) = f;
    t(l, l) = -l * f;
    out.push_back(t);
  }
  return out;
}

// Σ_i T_i applied to the rows of m (T_i = T on site i).
inline Mat apply_site_sum(const Mat& m, const Mat& t, int n, int d) {
  const Index dim = m.rows();
  Mat out = Mat::Zero(dim, m.cols());
  for (int site = 0; site < n; ++site) {
    Index w = ipow(d, n - 1 - site);
    for (Index x = 0; x < dim; ++x) {
      int dig = static_cast<int>((x / w) % d);
      Index base = x - dig * w;
      for (int r = 0; r < d; ++r) {
        cplx c = t(r, dig);
        if (c != cplx(0)) out.row(base + r * w) += c * m.row(x);
      }
    }
  }
  return out;
}

// C₂ = ½ Σ_a (Σ_i T_i^a)².
inline Mat casimir_matrix(int n, int d) {
  const Index dim = ipow(d, n);
  require_dense(dim, "casimir_matrix");
  Mat c = Mat::Zero(dim, dim);
  Mat id = Mat::Identity(dim, dim);
  for (const auto& t : gell_mann(d)) {
    Mat s = apply_site_sum(id, t, n, d);
    c += 0.5 * apply_site_sum(s, t, n, d);
  }
  return c;
}

// Z = Σ_{r≠s} P_rs.
inline Mat z_matrix(int n, int d) {
  const Index dim = ipow(d, n);
  require_dense(dim, "z_matrix");
  Mat z = Mat::Zero(dim, dim);
  for (int r = 1; r <= n; ++r)
    for (int s = r + 1; s <= n; ++s) {
      auto map = swap_index_map(n, d, r, s);
      for (Index x = 0; x < dim; ++x) z(map[x], x) += 2.0;
    }
  return z;
}

// Closed forms from the diagram: z_λ = 2 Σ contents, c_λ = z_λ − n(n−d²)/d.
inline double z_eigenvalue(const YoungDiagram& l) { return 2.0 * content_sum(l); }
inline double casimir_eigenvalue(const YoungDiagram& l, int d) {
  double n = std::accumulate(l.begin(), l.end(), 0);
  return z_eigenvalue(l) - n * (n - static_cast<double>(d) * d) / d;
}

struct Sector {
  YoungDiagram lambda;
  Index m = 0;      // S_n irrep dimension
  Index dsu = 0;    // SU(d) irrep dimension
  double c = 0;     // Casimir eigenvalue
  double z = 0;     // Z eigenvalue
  double b = 0;     // χ_λ(transposition)/m_λ
};

struct SectorTable {
  int n = 0;
  int d = 0;
  std::vector<Sector> sectors;

  const Sector& find(const YoungDiagram& l) const {
    for (const auto& s : sectors)
      if (s.lambda == l) return s;
    throw NotPresentError("diagram " + diagram_string(l) + " is not present for this (n, d)");
  }
};

inline SectorTable build_sector_table(int n, int d) {
  if (n < 1 || d < 1) throw DimensionError("need n, d >= 1");
  SectorTable t{n, d, {}};
  std::vector<int> transposition_class{2};
  for (int i = 2; i < n; ++i) transposition_class.push_back(1);
  for (const auto& l : partitions(n, d)) {
    Sector s;
    s.lambda = l;
    s.m = sn_irrep_dim(l);
    s.dsu = su_irrep_dim(l, d);
    s.z = z_eigenvalue(l);
    s.c = casimir_eigenvalue(l, d);
    s.b = n >= 2 ? static_cast<double>(character(l, transposition_class)) / static_cast<double>(s.m) : 1.0;
    t.sectors.push_back(s);
  }
  return t;
}

enum class BMethod { Casimir, TraceRatio, Character };

inline double b_lambda(const YoungDiagram& l, int n, int d, BMethod method) {
  validate_diagram(l, n);
  if (static_cast<int>(l.size()) > d)
    throw NotPresentError("diagram " + diagram_string(l) + " has more than d rows");
  if (n < 2) throw DimensionError("b_lambda needs n >= 2");
  const double nn = n;
  switch (method) {
    case BMethod::Character: {
      std::vector<int> cls{2};
      for (int i = 2; i < n; ++i) cls.push_back(1);
      return static_cast<double>(character(l, cls)) / static_cast<double>(sn_irrep_dim(l));
    }
    case BMethod::TraceRatio: {
      Mat p = isotypic_projector(l, n, d);
      auto map = swap_index_map(n, d, 1, 2);
      cplx tr = 0.0;
      for (Index x = 0; x < p.rows(); ++x) tr += p(map[x], x);
      return tr.real() / p.trace().real();
    }
    case BMethod::Casimir: {
      Mat p = isotypic_projector(l, n, d);
      Mat c2 = casimir_matrix(n, d);
      double c = (c2.transpose().cwiseProduct(p)).sum().real() / p.trace().real();
      return (d * c + nn * (nn - static_cast<double>(d) * d)) / (d * nn * (nn - 1));
    }
  }
  return 0.0;
}

struct CenterMembership {
  bool member = false;
  double alpha = 0;
  double beta = 0;
  double residual = 0;
};

// Least-squares fit h_λ ≈ α + β b_λ over the diagrams of the table.
inline CenterMembership center_membership(const SectorTable& t, const std::map<YoungDiagram, double>& h) {
  const Index k = static_cast<Index>(t.sectors.size());
  RMat a(k, 2);
  RVec y(k);
  for (Index i = 0; i < k; ++i) {
    const auto& s = t.sectors[i];
    auto it = h.find(s.lambda);
    if (it == h.end()) throw PreconditionError("h is missing diagram " + diagram_string(s.lambda));
    a(i, 0) = 1.0;
    a(i, 1) = s.b;
    y[i] = it->second;
  }
  Eigen::CompleteOrthogonalDecomposition<RMat> cod(a);
  RVec x = cod.solve(y);
  CenterMembership out;
  out.alpha = x[0];
  out.beta = x[1];
  out.residual = (a * x - y).norm();
  out.member = out.residual < 1e-9;
  return out;
}

// ---- Schur basis and Haar-random SU(d)-invariant unitaries ---------------

// Orthonormal basis adapted to ⊕_λ Q_λ ⊗ M_λ. For each λ the columns are
// u_a ⊗ e_k with index a·m_λ + k.
struct SchurBasis {
  int n = 0;
  int d = 0;
  SectorTable table;
  std::vector<Index> offset;  // first column of each sector
  Mat columns;                // d^n × d^n, unitary
};

namespace detail {

inline Vec projector_on_basis_vector(const YoungDiagram& l, int n, int d, Index x,
                                     const std::vector<std::pair<std::vector<int>, double>>& perms) {
  Vec out = Vec::Zero(ipow(d, n));
  auto digits = basis_digits(n, d, x);
  std::vector<Index> w(n);
  for (int j = 0; j < n; ++j) w[j] = ipow(d, n - 1 - j);
  for (const auto& [img, c] : perms) {
    Index y = 0;
    for (int i = 0; i < n; ++i) y += digits[i] * w[img[i]];
    out[y] += c;
  }
  (void)l;
  return out;
}

// Σ_sites |i><j| on every site (label j -> i).
inline Vec apply_label_shift(const Vec& v, int n, int d, int i, int j) {
  Vec out = Vec::Zero(v.size());
  for (int site = 0; site < n; ++site) {
    Index w = ipow(d, n - 1 - site);
    for (Index x = 0; x < v.size(); ++x) {
      if ((x / w) % d != j || v[x] == cplx(0)) continue;
      out[x + (i - j) * w] += v[x];
    }
  }
  return out;
}

struct Recipe {
  int parent;
  int i, j;
  std::vector<cplx> proj;  // coefficients on earlier u_c
  double norm;
};

inline void gram_schmidt_into(std::vector<Vec>& basis, Vec v, double tol, std::vector<cplx>* coeffs = nullptr) {
  if (coeffs) coeffs->assign(basis.size(), 0.0);
  for (int pass = 0; pass < 2; ++pass)
    for (std::size_t c = 0; c < basis.size(); ++c) {
      cplx ov = basis[c].dot(v);
      v -= ov * basis[c];
      if (coeffs) (*coeffs)[c] += ov;
    }
  double r = v.norm();
  if (r > tol) basis.push_back(v / r);
}

}  // namespace detail

inline SchurBasis build_schur_basis(int n, int d) {
  const Index dim = ipow(d, n);
  require_dense(dim, "build_schur_basis");
  require_perm_budget(n, "build_schur_basis");
  SchurBasis sb;
  sb.n = n;
  sb.d = d;
  sb.table = build_sector_table(n, d);
  sb.columns = Mat::Zero(dim, dim);
  Index col = 0;
  for (const auto& sec : sb.table.sectors) {
    const auto& l = sec.lambda;
    sb.offset.push_back(col);
    const double pref = static_cast<double>(sec.m) / static_cast<double>(factorial(n));
    std::vector<std::pair<std::vector<int>, double>> perms;
    {
      PermutationEnumerator e(n);
      do {
        double chi = static_cast<double>(character(l, e.word().cycle_type()));
        if (chi != 0) perms.emplace_back(e.images(), pref * chi);
      } while (e.next());
    }
    // Multiplicity space: Π_λ applied to the basis strings of weight λ.
    std::vector<int> digits;
    for (std::size_t r = 0; r < l.size(); ++r)
      for (int k = 0; k < l[r]; ++k) digits.push_back(static_cast<int>(r));
    std::vector<Vec> mvecs;
    do {
      Vec v = detail::projector_on_basis_vector(l, n, d, basis_index(d, digits), perms);
      detail::gram_schmidt_into(mvecs, v, 1e-8);
    } while (static_cast<Index>(mvecs.size()) < sec.m && std::next_permutation(digits.begin(), digits.end()));
    if (static_cast<Index>(mvecs.size()) != sec.m)
      throw ConsistencyError("multiplicity space of " + diagram_string(l) + " has the wrong dimension");

    // SU(d) factor: label-raising words applied to the weight-λ vector.
    std::vector<Vec> q{mvecs[0]};
    std::vector<detail::Recipe> recipes;
    for (std::size_t a = 0; a < q.size() && static_cast<Index>(q.size()) < sec.dsu; ++a)
      for (int j = 0; j < d && static_cast<Index>(q.size()) < sec.dsu; ++j)
        for (int i = j + 1; i < d && static_cast<Index>(q.size()) < sec.dsu; ++i) {
          Vec cand = detail::apply_label_shift(q[a], n, d, i, j);
          std::vector<cplx> coeffs(q.size(), 0.0);
          for (int pass = 0; pass < 2; ++pass)
            for (std::size_t c = 0; c < q.size(); ++c) {
              cplx ov = q[c].dot(cand);
              cand -= ov * q[c];
              coeffs[c] += ov;
            }
          double r = cand.norm();
          if (r > 1e-8) {
            q.push_back(cand / r);
            recipes.push_back({static_cast<int>(a), i, j, coeffs, r});
          }
        }
    if (static_cast<Index>(q.size()) != sec.dsu)
      throw ConsistencyError("SU(d) factor of " + diagram_string(l) + " has the wrong dimension");

    // Replay the same linear recipe on every multiplicity vector.
    for (Index k = 0; k < sec.m; ++k) {
      std::vector<Vec> u{mvecs[k]};
      for (const auto& rc : recipes) {
        Vec v = detail::apply_label_shift(u[rc.parent], n, d, rc.i, rc.j);
        for (std::size_t c = 0; c < rc.proj.size(); ++c) v -= rc.proj[c] * u[c];
        u.push_back(v / rc.norm);
      }
      for (Index a = 0; a < sec.dsu; ++a) sb.columns.col(col + a * sec.m + k) = u[a];
    }
    col += sec.dsu * sec.m;
  }
  if (col != dim) throw ConsistencyError("Schur basis does not span the full space");
  return sb;
}

inline std::shared_ptr<const SchurBasis> schur_basis(int n, int d) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const SchurBasis>> cache;
  std::lock_guard<std::mutex> g(mu);
  auto& slot = cache[{n, d}];
  if (!slot) slot = std::make_shared<const SchurBasis>(build_schur_basis(n, d));
  return slot;
}

// V = Σ_λ B_λ (I_{d_λ} ⊗ v_λ) B_λ^†.
class InvariantUnitary {
 public:
  InvariantUnitary(std::shared_ptr<const SchurBasis> sb, std::vector<Mat> blocks)
      : sb_(std::move(sb)), blocks_(std::move(blocks)) {}

  const std::vector<Mat>& blocks() const { return blocks_; }

  const SchurBasis& basis() const { return *sb_; }

  // Action in Schur-basis coordinates.
  Vec apply_blocks(const Vec& y) const {
    Vec z(y.size());
    for (std::size_t s = 0; s < blocks_.size(); ++s) {
      const auto& sec = sb_->table.sectors[s];
      Index off = sb_->offset[s];
      for (Index a = 0; a < sec.dsu; ++a) z.segment(off + a * sec.m, sec.m) = blocks_[s] * y.segment(off + a * sec.m, sec.m);
    }
    return z;
  }

  Vec apply(const Vec& x) const { return sb_->columns * apply_blocks(sb_->columns.adjoint() * x); }

  StateVector apply(const StateVector& s) const { return StateVector(s.n, s.d, apply(s.amps)); }

  Mat dense() const {
    const Index dim = sb_->columns.rows();
    Mat mid = Mat::Zero(dim, dim);
    for (std::size_t s = 0; s < blocks_.size(); ++s) {
      const auto& sec = sb_->table.sectors[s];
      Index off = sb_->offset[s];
      for (Index a = 0; a < sec.dsu; ++a) mid.block(off + a * sec.m, off + a * sec.m, sec.m, sec.m) = blocks_[s];
    }
    return sb_->columns * mid * sb_->columns.adjoint();
  }

 private:
  std::shared_ptr<const SchurBasis> sb_;
  std::vector<Mat> blocks_;
};

inline InvariantUnitary haar_invariant_unitary(int n, int d, std::mt19937_64& rng) {
  auto sb = schur_basis(n, d);
  std::vector<Mat> blocks;
  for (const auto& sec : sb->table.sectors) blocks.push_back(haar_unitary(sec.m, rng));
  return InvariantUnitary(sb, std::move(blocks));
}

inline InvariantUnitary haar_invariant_unitary(int n, int d, std::uint64_t seed) {
  auto rng = make_rng(seed, 0x4a);
  return haar_invariant_unitary(n, d, rng);
}

}  // namespace permdyn
