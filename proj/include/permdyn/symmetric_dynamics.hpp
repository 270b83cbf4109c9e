#pragma once

#include "permdyn/core.hpp"
#include "permdyn/permutation.hpp"
#include "permdyn/qudit_state.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

namespace permdyn {

// Piecewise-constant coefficient: value_k holds on [t_k, t_{k+1}); zero before t_0.
struct Schedule {
  std::vector<std::pair<double, cplx>> breakpoints;

  static Schedule constant(cplx value, double t_on = 0.0,
                           double t_off = std::numeric_limits<double>::infinity()) {
    Schedule s;
    s.breakpoints.push_back({t_on, value});
    if (std::isfinite(t_off)) s.breakpoints.push_back({t_off, 0.0});
    return s;
  }

  cplx at(double t) const {
    cplx v = 0.0;
    for (const auto& [tk, vk] : breakpoints) {
      if (tk <= t) v = vk;
      else break;
    }
    return v;
  }

  void validate() const {
    for (std::size_t k = 1; k < breakpoints.size(); ++k)
      if (!(breakpoints[k].first > breakpoints[k - 1].first))
        throw PreconditionError("schedule breakpoints must be strictly increasing");
  }
};

// One Hamiltonian term: schedule(t) · P(w_1) P(w_2) ... P(w_k).
struct Term {
  Schedule schedule;
  std::vector<PermutationWord> word;

  PermutationWord product(int n) const {
    PermutationWord p = PermutationWord::identity(n);
    for (const auto& w : word) p = p * w;
    return p;
  }
};

struct SymmetricHamiltonian {
  int n = 0;
  int d = 0;
  std::vector<Term> terms;

  SymmetricHamiltonian() = default;
  SymmetricHamiltonian(int n_, int d_) : n(n_), d(d_) {}

  void add(const PermutationWord& w, const Schedule& s) { terms.push_back({s, {w}}); }
  void add(const std::vector<PermutationWord>& w, const Schedule& s) { terms.push_back({s, w}); }

  void validate() const {
    for (const auto& t : terms) {
      t.schedule.validate();
      for (const auto& w : t.word)
        if (w.n() != n) throw DimensionError("term permutation size differs from n");
    }
  }

  // Sorted breakpoints of all schedules.
  std::vector<double> breakpoints() const {
    std::vector<double> b;
    for (const auto& t : terms)
      for (const auto& bp : t.schedule.breakpoints) b.push_back(bp.first);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
  }

  // Coefficients aggregated by permutation at time t.
  std::map<PermutationWord, cplx> coefficients_at(double t) const {
    std::map<PermutationWord, cplx> c;
    for (const auto& term : terms) {
      cplx v = term.schedule.at(t);
      if (v == cplx(0)) continue;
      c[term.product(n)] += v;
    }
    return c;
  }

  // h_σ = conj(h_{σ^{-1}}) for every σ.
  bool symbolically_hermitian_at(double t, double tol = 1e-12) const {
    auto c = coefficients_at(t);
    for (const auto& [p, v] : c) {
      auto it = c.find(p.inverse());
      cplx w = it == c.end() ? cplx(0) : it->second;
      if (std::abs(v - std::conj(w)) > tol * std::max(1.0, std::abs(v))) return false;
    }
    return true;
  }
};

// Σ_i c_i P(σ_i), prepared as index maps for matrix-free application.
class PermutationOperator {
 public:
  PermutationOperator(int n, int d, const std::map<PermutationWord, cplx>& coeffs) : n_(n), d_(d) {
    for (const auto& [p, c] : coeffs) {
      if (c == cplx(0)) continue;
      coeff_.push_back(c);
      maps_.push_back(permutation_index_map(n, d, p));
    }
  }

  bool empty() const { return coeff_.empty(); }

  void apply(const Vec& in, Vec& out) const {
    out.setZero(in.size());
    for (std::size_t k = 0; k < coeff_.size(); ++k) {
      const cplx c = coeff_[k];
      const auto& m = maps_[k];
      for (Index x = 0; x < in.size(); ++x) out[m[x]] += c * in[x];
    }
  }

  Mat dense() const {
    Index dim = ipow(d_, n_);
    require_dense(dim, "PermutationOperator::dense");
    Mat h = Mat::Zero(dim, dim);
    for (std::size_t k = 0; k < coeff_.size(); ++k)
      for (Index x = 0; x < dim; ++x) h(maps_[k][x], x) += coeff_[k];
    return h;
  }

 private:
  int n_, d_;
  std::vector<cplx> coeff_;
  std::vector<std::vector<Index>> maps_;
};

inline Mat hamiltonian_matrix(const SymmetricHamiltonian& h, double t) {
  require_dense(ipow(h.d, h.n), "hamiltonian_matrix");
  return PermutationOperator(h.n, h.d, h.coefficients_at(t)).dense();
}

inline StateVector run_circuit(const StateVector& s, const std::vector<Gate>& gates) {
  StateVector cur = s;
  for (const auto& g : gates) cur = apply_swap_exponential(cur, g.a, g.b, g.theta);
  return cur;
}

inline std::vector<Gate> inverse_circuit(const std::vector<Gate>& gates) {
  std::vector<Gate> inv(gates.rbegin(), gates.rend());
  for (auto& g : inv) g.theta = -g.theta;
  return inv;
}

enum class Integrator { ExactStep, RK4 };

struct EvolutionConfig {
  Integrator integrator = Integrator::ExactStep;
  double dt = 1e-3;
  double t_final = 0.0;
  int record_stride = 1;
  bool renormalize = false;

  void validate() const {
    if (!(dt > 0)) throw PreconditionError("dt must be positive");
    if (record_stride < 1) throw PreconditionError("record_stride must be >= 1");
    if (t_final < 0) throw PreconditionError("t_final must be >= 0");
  }
};

struct Probe {
  std::string name;
  std::function<double(const StateVector&, double)> fn;
};

struct TimeSeries {
  std::vector<std::string> names;
  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  StateVector final_state;

  std::vector<double> column(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw PreconditionError("no probe column named " + name);
    std::size_t k = static_cast<std::size_t>(it - names.begin());
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[k]);
    return out;
  }

  void write_csv(std::ostream& os) const {
    char buf[64];
    os << 't';
    for (const auto& nm : names) os << ',' << nm;
    os << '\n';
    for (std::size_t i = 0; i < times.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", times[i]);
      os << buf;
      for (double v : rows[i]) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << ',' << buf;
      }
      os << '\n';
    }
  }
};

namespace detail {

// Constant-Hamiltonian intervals [start, end) covering [0, t_final].
struct Piece {
  double start, end;
};

inline std::vector<Piece> pieces(const SymmetricHamiltonian& h, double t_final) {
  std::vector<double> cuts{0.0};
  for (double b : h.breakpoints())
    if (b > 0.0 && b < t_final) cuts.push_back(b);
  cuts.push_back(std::max(t_final, 0.0));
  std::vector<Piece> out;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) out.push_back({cuts[k], cuts[k + 1]});
  if (out.empty()) out.push_back({0.0, 0.0});
  return out;
}

class Propagator {
 public:
  Propagator(const SymmetricHamiltonian& h, const EvolutionConfig& cfg)
      : h_(h), cfg_(cfg), pieces_(pieces(h, cfg.t_final)) {
    Index dim = ipow(h.d, h.n);
    if (cfg.integrator == Integrator::ExactStep) require_dense(dim, "exact_step evolution");
    eig_.resize(pieces_.size());
    ops_.resize(pieces_.size());
  }

  // Advances psi from t0 to t1 (t0 <= t1).
  void advance(Vec& psi, double t0, double t1) {
    double t = t0;
    while (t < t1 - 1e-13) {
      std::size_t k = piece_index(t);
      double stop = k + 1 == pieces_.size() ? t1 : std::min(t1, pieces_[k].end);
      if (cfg_.integrator == Integrator::ExactStep) exact(psi, k, stop - t);
      else rk4(psi, k, t, stop);
      t = stop;
    }
  }

 private:
  std::size_t piece_index(double t) const {
    for (std::size_t k = 0; k < pieces_.size(); ++k)
      if (t < pieces_[k].end - 1e-13) return k;
    return pieces_.size() - 1;
  }

  void check_hermitian(std::size_t k) {
    double t = pieces_[k].start;
    if (ipow(h_.d, h_.n) <= limits().dense_cap) {
      Mat m = hamiltonian_matrix(h_, t);
      if ((m - m.adjoint()).norm() > 1e-12 * std::max(1.0, m.norm()))
        throw ModeError("Hamiltonian is not Hermitian at t = " + std::to_string(t));
    } else if (!h_.symbolically_hermitian_at(t)) {
      throw ModeError("Hamiltonian is not Hermitian at t = " + std::to_string(t));
    }
  }

  void exact(Vec& psi, std::size_t k, double tau) {
    if (!eig_[k]) {
      check_hermitian(k);
      Mat m = hamiltonian_matrix(h_, pieces_[k].start);
      eig_[k] = std::make_unique<Eigen::SelfAdjointEigenSolver<Mat>>(m);
    }
    const auto& es = *eig_[k];
    Vec c = es.eigenvectors().adjoint() * psi;
    for (Index i = 0; i < c.size(); ++i) c[i] *= std::exp(-I_UNIT * es.eigenvalues()[i] * tau);
    psi = es.eigenvectors() * c;
  }

  void rk4(Vec& psi, std::size_t k, double t0, double t1) {
    if (!ops_[k]) {
      check_hermitian(k);
      ops_[k] = std::make_unique<PermutationOperator>(h_.n, h_.d, h_.coefficients_at(pieces_[k].start));
    }
    const auto& op = *ops_[k];
    Vec k1, k2, k3, k4, tmp;
    double t = t0;
    while (t < t1 - 1e-13) {
      double hstep = std::min(cfg_.dt, t1 - t);
      op.apply(psi, k1);
      k1 *= -I_UNIT;
      tmp = psi + 0.5 * hstep * k1;
      op.apply(tmp, k2);
      k2 *= -I_UNIT;
      tmp = psi + 0.5 * hstep * k2;
      op.apply(tmp, k3);
      k3 *= -I_UNIT;
      tmp = psi + hstep * k3;
      op.apply(tmp, k4);
      k4 *= -I_UNIT;
      psi += (hstep / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (cfg_.renormalize) psi.normalize();
      t += hstep;
    }
  }

  const SymmetricHamiltonian& h_;
  const EvolutionConfig& cfg_;
  std::vector<Piece> pieces_;
  std::vector<std::unique_ptr<Eigen::SelfAdjointEigenSolver<Mat>>> eig_;
  std::vector<std::unique_ptr<PermutationOperator>> ops_;
};

}  // namespace detail

inline std::vector<double> record_times(const EvolutionConfig& cfg) {
  double step = cfg.dt * cfg.record_stride;
  auto count = static_cast<Index>(std::floor(cfg.t_final / step + 1e-9));
  std::vector<double> ts;
  for (Index k = 0; k <= count; ++k) ts.push_back(static_cast<double>(k) * step);
  if (ts.back() < cfg.t_final - 1e-12) ts.push_back(cfg.t_final);
  return ts;
}

inline TimeSeries evolve(const StateVector& s, const SymmetricHamiltonian& h, const EvolutionConfig& cfg,
                         const std::vector<Probe>& probes) {
  cfg.validate();
  h.validate();
  if (h.n != s.n || h.d != s.d) throw DimensionError("Hamiltonian and state differ in (n, d)");
  TimeSeries ts;
  for (const auto& p : probes) ts.names.push_back(p.name);
  detail::Propagator prop(h, cfg);
  StateVector cur = s;
  double t_prev = 0.0;
  for (double t : record_times(cfg)) {
    prop.advance(cur.amps, t_prev, t);
    t_prev = t;
    ts.times.push_back(t);
    std::vector<double> row;
    row.reserve(probes.size());
    for (const auto& p : probes) row.push_back(p.fn(cur, t));
    ts.rows.push_back(std::move(row));
  }
  ts.final_state = cur;
  return ts;
}

// ---- Standard Hamiltonians -------------------------------------------------

// Σ_{i<j} h_ij P_ij with h_ij i.i.d. uniform in [-1, 1], active on [t_on, t_off).
inline std::vector<Term> random_two_local_terms(int n, std::uint64_t seed, double t_on = 0.0,
                                                double t_off = std::numeric_limits<double>::infinity()) {
  auto rng = make_rng(seed, 0x2a);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Term> out;
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j)
      out.push_back({Schedule::constant(u(rng), t_on, t_off), {PermutationWord::transposition(n, i, j)}});
  return out;
}

// Σ_i P_{i,i+1} with periodic wrap.
inline std::vector<Term> ring_terms(int n, double coupling = 1.0, double t_on = 0.0,
                                    double t_off = std::numeric_limits<double>::infinity()) {
  std::vector<Term> out;
  for (int i = 1; i <= n; ++i) {
    int j = i % n + 1;
    if (n == 2 && i == 2) break;  // the pair (1,2) once for two sites
    out.push_back({Schedule::constant(coupling, t_on, t_off),
                   {PermutationWord::transposition(n, std::min(i, j), std::max(i, j))}});
  }
  return out;
}

inline Probe norm_probe() {
  return {"norm", [](const StateVector& s, double) { return s.norm(); }};
}

inline Probe energy_probe(const SymmetricHamiltonian& h) {
  auto ops = std::make_shared<std::map<double, std::shared_ptr<PermutationOperator>>>();
  auto bps = std::make_shared<std::vector<double>>(h.breakpoints());
  return {"energy", [h, ops, bps](const StateVector& s, double t) {
            // Key on the active piece so each operator is prepared once.
            double key = -std::numeric_limits<double>::infinity();
            for (double b : *bps)
              if (b <= t) key = b;
            auto it = ops->find(key);
            if (it == ops->end())
              it = ops->emplace(key, std::make_shared<PermutationOperator>(h.n, h.d, h.coefficients_at(t))).first;
            Vec hv;
            it->second->apply(s.amps, hv);
            return s.amps.dot(hv).real();
          }};
}

}  // namespace permdyn
