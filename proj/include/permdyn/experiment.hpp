#pragma once

#include "permdyn/core.hpp"
#include "permdyn/fermion_correspondence.hpp"
#include "permdyn/io.hpp"
#include "permdyn/schur_weyl.hpp"
#include "permdyn/symmetric_dynamics.hpp"
#include "permdyn/z2_conservation.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace permdyn {

// ---- named states ----------------------------------------------------------

// (cos θ/2) (0∧1∧2)⊗|000> + e^{iφ} (sin θ/2) |000>⊗(0∧1∧2), six qutrits.
inline StateVector psi_theta_phi(double theta, double phi) {
  StateVector s = wedge_blocks(3, {{0, 1, 2}, {0}, {0}, {0}});
  StateVector t = wedge_blocks(3, {{0}, {0}, {0}, {0, 1, 2}});
  StateVector out(6, 3);
  out.amps = std::cos(theta / 2) * s.amps + std::exp(I_UNIT * phi) * std::sin(theta / 2) * t.amps;
  return out;
}

inline std::vector<std::string> named_states() {
  return {"singlet3x0", "fig2", "fig3", "zero:<n>:<d>", "psi:<theta>:<phi>"};
}

// singlet3x0 / fig3: (0∧1∧2)⊗|000>; fig2: (0∧1∧2)⊗(0∧1)⊗|0>.
inline StateVector named_state(const std::string& name) {
  if (name == "singlet3x0" || name == "fig3") return wedge_blocks(3, {{0, 1, 2}, {0}, {0}, {0}});
  if (name == "fig2") return wedge_blocks(3, {{0, 1, 2}, {0, 1}, {0}});
  auto parts = std::vector<std::string>{};
  {
    std::stringstream ss(name);
    std::string p;
    while (std::getline(ss, p, ':')) parts.push_back(p);
  }
  try {
    if (parts.size() == 3 && parts[0] == "zero") {
      int n = std::stoi(parts[1]), d = std::stoi(parts[2]);
      return basis_state(d, std::vector<int>(n, 0));
    }
    if (parts.size() == 3 && parts[0] == "psi") return psi_theta_phi(std::stod(parts[1]), std::stod(parts[2]));
  } catch (const std::logic_error&) {
    throw PreconditionError("malformed state name '" + name + "'");
  }
  throw PreconditionError("unknown state name '" + name + "'");
}

// {"name": ...} | {"blocks": [[...]...], "d": d} | inline state JSON | {"random": seed, "n", "d"}
inline StateVector state_from_config(const json& j) {
  if (j.is_string()) return named_state(j.get<std::string>());
  if (!j.is_object()) throw PreconditionError("initial_state must be a string or an object");
  if (j.contains("name")) return named_state(j.at("name").get<std::string>());
  if (j.contains("blocks")) return wedge_blocks(j.at("d").get<int>(), j.at("blocks").get<std::vector<std::vector<int>>>());
  if (j.contains("random")) {
    auto rng = make_rng(j.at("random").get<std::uint64_t>(), 0x51);
    return random_state(j.at("n").get<int>(), j.at("d").get<int>(), rng);
  }
  if (j.contains("amps")) return state_from_json(j);
  throw PreconditionError("initial_state needs name, blocks, random or amps");
}

// ---- probes ----------------------------------------------------------------

inline std::vector<std::string> probe_names() {
  return {"fsgn", "purity", "renyi2", "renyi3", "trace_omega", "norm", "energy", "fsgn_sector:<diagram>"};
}

inline YoungDiagram parse_diagram(const std::string& s) {
  YoungDiagram l;
  std::string body = s;
  if (!body.empty() && body.front() == '(') body.erase(0, 1);
  if (!body.empty() && body.back() == ')') body.pop_back();
  std::stringstream ss(body);
  std::string p;
  try {
    while (std::getline(ss, p, ',')) l.push_back(std::stoi(p));
  } catch (const std::logic_error&) {
    throw PreconditionError("malformed diagram '" + s + "'");
  }
  if (l.empty()) throw PreconditionError("empty diagram");
  return l;
}

inline Probe make_probe(const std::string& name, int n, int d, const SymmetricHamiltonian& h) {
  if (name == "fsgn") return {name, [](const StateVector& s, double) { return f_sgn(s); }};
  if (name == "norm") return norm_probe();
  if (name == "energy") return energy_probe(h);
  if (name == "purity" || name == "renyi2" || name == "renyi3" || name == "trace_omega") {
    auto basis = std::make_shared<CompSubspaceBasis>(n, d);
    return {name, [basis, name](const StateVector& s, double) {
              auto om = omega_map(*basis, s);
              if (name == "purity") return omega_purity(om);
              if (name == "renyi2") return renyi_invariant(om, 2);
              if (name == "renyi3") return renyi_invariant(om, 3);
              return om.trace();
            }};
  }
  const std::string prefix = "fsgn_sector:";
  if (name.rfind(prefix, 0) == 0) {
    YoungDiagram l = parse_diagram(name.substr(prefix.size()));
    validate_diagram(l, n);
    if (static_cast<int>(l.size()) > d) throw NotPresentError("diagram has more than d rows");
    // <ψψ|K(Π_λ⊗I)|ψψ>.
    return {name, [l](const StateVector& s, double) { return f_sgn_with(s, apply_isotypic_projector(l, s)); }};
  }
  throw PreconditionError("unknown probe '" + name + "'");
}

// ---- experiment config -----------------------------------------------------

struct VerifyWindow {
  std::string probe;
  double t_start = 0;
  double t_end = 0;
  double tolerance = 1e-7;
  std::optional<double> value;  // expected constant; default is the first value in the window
};

struct ExperimentConfig {
  int n = 0;
  int d = 0;
  StateVector initial;
  SymmetricHamiltonian hamiltonian;
  std::vector<std::pair<double, double>> phases;
  std::vector<std::string> probes;
  EvolutionConfig evolution;
  std::string output;
  std::uint64_t seed = 0;
  std::vector<VerifyWindow> verify;
};

namespace detail {

inline void add_phase_terms(ExperimentConfig& c, const json& terms, double t0, double t1) {
  const int n = c.n;
  for (const auto& t : terms) {
    if (t.contains("random_two_local")) {
      const auto& r = t.at("random_two_local");
      std::uint64_t seed = c.seed;
      double scale = 1.0;
      if (r.is_object()) {
        if (r.contains("seed")) seed = r.at("seed").get<std::uint64_t>();
        if (r.contains("scale")) scale = r.at("scale").get<double>();
      }
      for (auto term : random_two_local_terms(n, seed, t0, t1)) {
        for (auto& bp : term.schedule.breakpoints) bp.second *= scale;
        c.hamiltonian.terms.push_back(term);
      }
    } else if (t.contains("ring")) {
      const auto& r = t.at("ring");
      double coupling = r.is_object() && r.contains("coupling") ? r.at("coupling").get<double>() : 1.0;
      for (auto term : ring_terms(n, coupling, t0, t1)) c.hamiltonian.terms.push_back(term);
    } else {
      cplx coeff = t.contains("coefficient") ? complex_from_json(t.at("coefficient")) : cplx(1.0);
      Term term;
      term.schedule = Schedule::constant(coeff, t0, t1);
      if (t.contains("pairs")) {
        auto p = t.at("pairs").get<std::vector<int>>();
        if (p.size() != 2) throw PreconditionError("pairs must be [i, j]");
        check_pair(n, p[0], p[1]);
        term.word.push_back(PermutationWord::transposition(n, p[0], p[1]));
      } else if (t.contains("word")) {
        term.word.push_back(word_from_json(n, t.at("word")));
      } else {
        throw PreconditionError("unrecognized term " + t.dump());
      }
      c.hamiltonian.terms.push_back(term);
    }
  }
}

}  // namespace detail

inline ExperimentConfig parse_experiment(const json& j) {
  ExperimentConfig c;
  const auto& sys = j.at("system");
  c.n = sys.at("n").get<int>();
  c.d = sys.at("d").get<int>();
  c.seed = j.value("seed", std::uint64_t{0});
  c.initial = state_from_config(j.at("initial_state"));
  if (c.initial.n != c.n || c.initial.d != c.d) throw DimensionError("initial_state does not match system {n, d}");
  c.hamiltonian = SymmetricHamiltonian(c.n, c.d);

  double t_prev = 0.0;
  const json phases = j.value("hamiltonian_phases", json::array());
  for (std::size_t k = 0; k < phases.size(); ++k) {
    const auto& ph = phases[k];
    double t0 = ph.at("t_start").get<double>(), t1 = ph.at("t_end").get<double>();
    if (!(t1 > t0)) throw PreconditionError("phase needs t_end > t_start");
    if (std::abs(t0 - t_prev) > 1e-12) throw PreconditionError("phases must be contiguous, starting at t = 0");
    t_prev = t1;
    c.phases.push_back({t0, t1});
    // The last phase stays on at t_end so probes there see its Hamiltonian.
    double off = k + 1 == phases.size() ? std::numeric_limits<double>::infinity() : t1;
    detail::add_phase_terms(c, ph.at("terms"), t0, off);
  }
  c.hamiltonian.validate();

  for (const auto& p : j.value("probes", json::array())) c.probes.push_back(p.get<std::string>());
  const json integ = j.value("integrator", json::object());
  std::string method = integ.value("method", std::string("exact_step"));
  if (method == "exact_step") c.evolution.integrator = Integrator::ExactStep;
  else if (method == "rk4") c.evolution.integrator = Integrator::RK4;
  else throw PreconditionError("unknown integrator '" + method + "'");
  c.evolution.dt = integ.value("dt", 1e-3);
  c.evolution.record_stride = integ.value("record_stride", 1);
  c.evolution.renormalize = integ.value("renormalize", false);
  c.evolution.t_final = j.value("t_final", t_prev);
  c.evolution.validate();
  c.output = j.value("output", std::string());

  for (const auto& v : j.value("verify", json::array())) {
    VerifyWindow w;
    w.probe = v.at("probe").get<std::string>();
    w.t_start = v.at("t_start").get<double>();
    w.t_end = v.at("t_end").get<double>();
    w.tolerance = v.value("tolerance", 1e-7);
    if (v.contains("value")) w.value = v.at("value").get<double>();
    if (std::find(c.probes.begin(), c.probes.end(), w.probe) == c.probes.end())
      throw PreconditionError("verify refers to probe '" + w.probe + "' which is not recorded");
    c.verify.push_back(w);
  }
  return c;
}

inline ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw PreconditionError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    return parse_experiment(j);
  } catch (const json::exception& e) {
    throw PreconditionError(std::string("invalid config: ") + e.what());
  }
}

inline TimeSeries run_experiment(const ExperimentConfig& c) {
  std::vector<Probe> probes;
  for (const auto& p : c.probes) probes.push_back(make_probe(p, c.n, c.d, c.hamiltonian));
  return evolve(c.initial, c.hamiltonian, c.evolution, probes);
}

struct VerifyResult {
  std::string probe;
  double t_start, t_end, reference, max_deviation, tolerance;
  bool passed;
};

// Each window asserts the probe stays constant (within tolerance) over [t_start, t_end].
inline std::vector<VerifyResult> verify_experiment(const ExperimentConfig& c, const TimeSeries& ts) {
  std::vector<VerifyResult> out;
  for (const auto& w : c.verify) {
    auto col = ts.column(w.probe);
    std::optional<double> ref = w.value;
    double dev = 0;
    for (std::size_t i = 0; i < ts.times.size(); ++i) {
      double t = ts.times[i];
      if (t < w.t_start - 1e-12 || t > w.t_end + 1e-12) continue;
      if (!ref) ref = col[i];
      dev = std::max(dev, std::abs(col[i] - *ref));
    }
    if (!ref) throw PreconditionError("verify window for " + w.probe + " contains no recorded times");
    out.push_back({w.probe, w.t_start, w.t_end, *ref, dev, w.tolerance, dev <= w.tolerance});
  }
  return out;
}

}  // namespace permdyn
