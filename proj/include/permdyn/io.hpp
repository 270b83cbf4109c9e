#pragma once

#include "permdyn/core.hpp"
#include "permdyn/fermion_correspondence.hpp"
#include "permdyn/qudit_state.hpp"
#include "permdyn/random_ensembles.hpp"
#include "permdyn/schur_weyl.hpp"
#include "permdyn/symmetric_dynamics.hpp"
#include "permdyn/z2_conservation.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace permdyn {

using json = nlohmann::ordered_json;

inline json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

// Accepts a bare number or [re, im].
inline cplx complex_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw PreconditionError("expected a number or [re, im], got " + j.dump());
}

inline json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Index j = 0; j < m.cols(); ++j) r.push_back(complex_to_json(m(i, j)));
    rows.push_back(r);
  }
  return rows;
}

inline json state_to_json(const StateVector& s) {
  json amps = json::array();
  for (Index i = 0; i < s.dim(); ++i) amps.push_back(complex_to_json(s.amps[i]));
  return {{"n", s.n}, {"d", s.d}, {"amps", amps}};
}

inline StateVector state_from_json(const json& j) {
  if (!j.contains("n") || !j.contains("d") || !j.contains("amps"))
    throw PreconditionError("state JSON needs n, d and amps");
  StateVector s(j.at("n").get<int>(), j.at("d").get<int>());
  const auto& a = j.at("amps");
  if (!a.is_array() || static_cast<Index>(a.size()) != s.dim())
    throw DimensionError("amps must have d^n entries");
  for (Index i = 0; i < s.dim(); ++i) s.amps[i] = complex_from_json(a[i]);
  return s;
}

inline json omega_to_json(const SingleParticleRDM& r) {
  return {{"n", r.omega.rows()}, {"matrix", matrix_to_json(r.omega)}};
}

inline json z2_to_json(const Z2Criterion& c) {
  json j{{"satisfied", c.satisfied}, {"shift", nullptr}, {"residual", c.residual}};
  if (c.shift) j["shift"] = *c.shift;
  return j;
}

inline json z2_to_json(const Z2Decomposition& z) {
  json coeffs = json::array();
  for (std::size_t k = 0; k < z.perms.size(); ++k) {
    if (std::abs(z.coefficients[k]) < 1e-12) continue;
    coeffs.push_back({{"perm", z.perms[k].images1()}, {"value", complex_to_json(z.coefficients[k])}});
  }
  return {{"satisfied", true}, {"shift", z.shift}, {"residual", z.residual}, {"coefficients", coeffs}};
}

inline json sectors_to_json(const SectorTable& t) {
  json rows = json::array();
  Index total = 0;
  for (const auto& s : t.sectors) {
    rows.push_back({{"diagram", s.lambda}, {"m", s.m}, {"d", s.dsu}, {"c", s.c}, {"z", s.z}, {"b", s.b}});
    total += s.m * s.dsu;
  }
  return {{"n", t.n}, {"d", t.d}, {"sectors", rows}, {"total_dimension", total}};
}

inline json moment_report_to_json(const MomentReport& r) {
  json est = json::object(), se = json::object(), verdicts = json::array();
  for (const auto& [k, v] : r.estimates) est[k] = v;
  for (const auto& [k, v] : r.standard_errors) se[k] = v;
  for (const auto& v : r.verdicts)
    verdicts.push_back({{"name", v.name}, {"statistic", v.statistic}, {"threshold", v.threshold},
                        {"passed", v.passed}, {"rule", v.rule}});
  return {{"test", r.test},
          {"n", r.n},
          {"d", r.d},
          {"spec",
           {{"ensemble", ensemble_name(r.spec.ensemble)},
            {"circuit_depth", r.spec.circuit_depth},
            {"sample_count", r.spec.sample_count},
            {"batches", r.spec.batches},
            {"seed", r.spec.seed}}},
          {"estimates", est},
          {"standard_errors", se},
          {"verdicts", verdicts},
          {"status", r.status},
          {"passed", r.passed()},
          {"note", r.note}};
}

// word: [[cycle], [cycle], ...], 1-based sites, product in listed order.
inline PermutationWord word_from_json(int n, const json& j) {
  if (!j.is_array()) throw PreconditionError("word must be a list of cycles");
  std::vector<std::vector<int>> cycles;
  for (const auto& c : j) {
    if (!c.is_array()) throw PreconditionError("each cycle must be a list of sites");
    cycles.push_back(c.get<std::vector<int>>());
  }
  return PermutationWord::from_cycles(n, cycles);
}

inline json word_to_json(const PermutationWord& w) {
  // Cycle notation of a single permutation.
  json out = json::array();
  std::vector<bool> seen(w.n(), false);
  for (int i = 0; i < w.n(); ++i) {
    if (seen[i] || w(i) == i) continue;
    json c = json::array();
    for (int k = i; !seen[k]; k = w(k)) {
      seen[k] = true;
      c.push_back(k + 1);
    }
    out.push_back(c);
  }
  return out;
}

inline Schedule schedule_from_json(const json& j) {
  Schedule s;
  for (const auto& bp : j) {
    if (!bp.is_array() || bp.size() != 2) throw PreconditionError("schedule entries are [t, value]");
    s.breakpoints.push_back({bp[0].get<double>(), complex_from_json(bp[1])});
  }
  s.validate();
  return s;
}

inline json hamiltonian_to_json(const SymmetricHamiltonian& h) {
  json terms = json::array();
  for (const auto& t : h.terms) {
    json sched = json::array();
    for (const auto& [tk, v] : t.schedule.breakpoints)
      sched.push_back({tk, v.imag() == 0 ? json(v.real()) : complex_to_json(v)});
    json term;
    auto p = t.product(h.n);
    auto tr = p.transpositions();
    if (tr.size() == 1) term["pairs"] = {tr[0].first, tr[0].second};
    else term["word"] = word_to_json(p);
    term["schedule"] = sched;
    terms.push_back(term);
  }
  return {{"n", h.n}, {"d", h.d}, {"terms", terms}};
}

inline SymmetricHamiltonian hamiltonian_from_json(const json& j) {
  SymmetricHamiltonian h(j.at("n").get<int>(), j.at("d").get<int>());
  for (const auto& t : j.at("terms")) {
    Term term;
    term.schedule = schedule_from_json(t.at("schedule"));
    if (t.contains("pairs")) {
      auto p = t.at("pairs").get<std::vector<int>>();
      if (p.size() != 2) throw PreconditionError("pairs must be [i, j]");
      check_pair(h.n, p[0], p[1]);
      term.word.push_back(PermutationWord::transposition(h.n, p[0], p[1]));
    } else if (t.contains("word")) {
      term.word.push_back(word_from_json(h.n, t.at("word")));
    } else {
      throw PreconditionError("term needs 'pairs' or 'word'");
    }
    h.terms.push_back(term);
  }
  h.validate();
  return h;
}

}  // namespace permdyn
