#include "permdyn/permdyn.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>

using namespace permdyn;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void emit_error(const std::string& kind, const std::string& msg) {
  std::cerr << json{{"error", kind}, {"message", msg}}.dump() << '\n';
}

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

StateVector load_state(const std::string& name, const std::string& file) {
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) throw UsageError("cannot open state file " + file);
    return state_from_json(json::parse(in));
  }
  if (name.empty()) throw UsageError("need --state or --state-file");
  return named_state(name);
}

Mat design_operator(const std::string& kind, int n, int d, std::uint64_t seed) {
  const Index dim = ipow(d, n);
  require_dense(dim, "design operator");
  if (kind == "flip") {
    // |0...0><0...01| + h.c.
    Mat a = Mat::Zero(dim, dim);
    a(0, 1) = a(1, 0) = 1.0;
    return a;
  }
  if (kind == "random") {
    auto rng = make_rng(seed, 0xa0);
    Mat g(dim, dim);
    for (Index j = 0; j < dim; ++j) g.col(j) = random_complex_gaussian(dim, rng);
    return 0.5 * (g + g.adjoint());
  }
  if (kind == "identity") return Mat::Identity(dim, dim);
  throw UsageError("unknown --operator '" + kind + "' (flip, random, identity)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and analysis of SU(d)-invariant qudit dynamics"};
  app.require_subcommand(1);
  app.fallthrough();  // --threads / --seed may follow the subcommand
  int threads = 1;
  std::uint64_t seed = 0;
  bool seed_given = false;
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "random seed");

  // evolve
  auto* evolve = app.add_subcommand("evolve", "run a config-driven time evolution, CSV out");
  std::string config_path, out_path;
  bool verify = false;
  evolve->add_option("--config", config_path, "experiment JSON")->required();
  evolve->add_option("--out", out_path, "CSV path (default: config output, else stdout)");
  evolve->add_flag("--verify", verify, "check the config's conservation windows; exit 1 on violation");

  // fsgn
  auto* fsgn = app.add_subcommand("fsgn", "f_sgn of a state");
  std::string state_name, state_file;
  fsgn->add_option("--state", state_name, "named state");
  fsgn->add_option("--state-file", state_file, "state JSON");

  // omega
  auto* omega = app.add_subcommand("omega", "single-particle matrix of a state");
  std::string backend = "qudit";
  omega->add_option("--state", state_name, "named state");
  omega->add_option("--state-file", state_file, "state JSON");
  omega->add_option("--backend", backend, "qudit or fermionic")->check(CLI::IsMember({"qudit", "fermionic"}));

  // state
  auto* state = app.add_subcommand("state", "export a named state as JSON");
  state->add_option("--state", state_name, "named state")->required();

  // sectors
  auto* sectors = app.add_subcommand("sectors", "Schur-Weyl sector table");
  int n = 0, d = 0;
  sectors->add_option("--n", n, "sites")->required()->check(CLI::PositiveNumber);
  sectors->add_option("--d", d, "local dimension")->required()->check(CLI::PositiveNumber);

  // design-test
  auto* design = app.add_subcommand("design-test", "one-design check or two-design violation test");
  std::string which = "two", ensemble = "two_local_circuits", op_kind = "flip";
  int depth = 200, samples = 4000, batches = 10, num_w = 20;
  design->add_option("--test", which, "one or two")->check(CLI::IsMember({"one", "two"}));
  design->add_option("--n", n, "sites")->required()->check(CLI::PositiveNumber);
  design->add_option("--d", d, "local dimension")->required()->check(CLI::PositiveNumber);
  design->add_option("--ensemble", ensemble, "two_local_circuits, haar_invariant, permutation_twirl");
  design->add_option("--depth", depth, "circuit depth");
  design->add_option("--samples", samples, "sample count");
  design->add_option("--batches", batches, "batches for standard errors");
  design->add_option("--num-w", num_w, "number of W for the two-design test");
  design->add_option("--operator", op_kind, "one-design operator: flip, random, identity");
  design->add_flag("--verify", verify, "exit 1 if any verdict fails");

  // lie-dim
  auto* liedim = app.add_subcommand("lie-dim", "dimension of a generated Lie algebra");
  bool single_particle = false;
  liedim->add_flag("--single-particle", single_particle, "generators i(E_ab - I)")->required();
  liedim->add_option("--n", n, "modes")->required()->check(CLI::Range(2, 64));

  // z2
  auto* z2 = app.add_subcommand("z2", "Z2 criterion and decomposition of a Hamiltonian");
  std::string ham_path;
  double at_time = 0.0;
  bool decompose = false;
  z2->add_option("--hamiltonian", ham_path, "Hamiltonian JSON")->required();
  z2->add_option("--t", at_time, "evaluation time");
  z2->add_flag("--decompose", decompose, "also solve for the coefficients");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("usage", e.what());
    return 2;
  }
  seed_given = seed_opt->count() > 0;
  limits().threads = threads;

  try {
    if (*evolve) {
      std::ifstream in(config_path);
      if (!in) throw UsageError("cannot open config " + config_path);
      json j;
      try {
        j = json::parse(in);
      } catch (const json::exception& e) {
        throw UsageError(std::string("config is not valid JSON: ") + e.what());
      }
      if (seed_given) j["seed"] = seed;
      ExperimentConfig cfg;
      try {
        cfg = parse_experiment(j);
      } catch (const json::exception& e) {
        throw UsageError(std::string("invalid config: ") + e.what());
      }
      TimeSeries ts = run_experiment(cfg);
      std::string path = out_path.empty() ? cfg.output : out_path;
      if (path.empty() || path == "-") {
        ts.write_csv(std::cout);
      } else {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw UsageError("cannot write " + path);
        ts.write_csv(out);
      }
      if (verify) {
        bool ok = true;
        for (const auto& r : verify_experiment(cfg, ts)) {
          std::cerr << json{{"probe", r.probe},          {"t_start", r.t_start},
                            {"t_end", r.t_end},          {"reference", r.reference},
                            {"max_deviation", r.max_deviation}, {"tolerance", r.tolerance},
                            {"passed", r.passed}}
                           .dump()
                    << '\n';
          ok = ok && r.passed;
        }
        return ok ? 0 : 1;
      }
      return 0;
    }
    if (*fsgn) {
      StateVector s = load_state(state_name, state_file);
      print_json({{"n", s.n}, {"d", s.d}, {"fsgn", f_sgn(s)}});
      return 0;
    }
    if (*omega) {
      StateVector s = load_state(state_name, state_file);
      CompSubspaceBasis basis(s.n, s.d);
      auto om = omega_map(basis, s, backend == "fermionic" ? OmegaBackend::Fermionic : OmegaBackend::Qudit);
      json j = omega_to_json(om);
      j["trace"] = om.trace();
      j["purity"] = omega_purity(om);
      print_json(j);
      return 0;
    }
    if (*state) {
      print_json(state_to_json(named_state(state_name)));
      return 0;
    }
    if (*sectors) {
      print_json(sectors_to_json(build_sector_table(n, d)));
      return 0;
    }
    if (*design) {
      EnsembleSpec spec;
      spec.ensemble = parse_ensemble(ensemble);
      spec.circuit_depth = depth;
      spec.sample_count = samples;
      spec.batches = batches;
      spec.num_w = num_w;
      spec.seed = seed_given ? seed : 1;
      MomentReport r = which == "one" ? one_design_test(n, d, design_operator(op_kind, n, d, spec.seed), spec)
                                      : two_design_violation_test(n, d, spec);
      print_json(moment_report_to_json(r));
      return verify && !r.passed() ? 1 : 0;
    }
    if (*liedim) {
      print_json({{"n", n}, {"generators", "i(E_ab - I)"}, {"dimension", lie_closure_dimension(single_particle_generators(n))}});
      return 0;
    }
    if (*z2) {
      std::ifstream in(ham_path);
      if (!in) throw UsageError("cannot open " + ham_path);
      SymmetricHamiltonian h = hamiltonian_from_json(json::parse(in));
      Mat hm = hamiltonian_matrix(h, at_time);
      json j = decompose ? z2_to_json(z2_decompose(hm, h.n, h.d)) : z2_to_json(z2_criterion(hm, h.n, h.d, true));
      print_json(j);
      return 0;
    }
  } catch (const UsageError& e) {
    emit_error("usage", e.what());
    return 2;
  } catch (const json::exception& e) {
    emit_error("usage", e.what());
    return 2;
  } catch (const NoDecompositionError& e) {
    emit_error("no_decomposition", e.what());
    return 1;
  } catch (const Error& e) {
    emit_error("invalid_argument", e.what());
    return 2;
  }
  return 0;
}
