// Quench-simulation CLI: evolves an initial spin-boson state under the Rabi
// Hamiltonian and writes a trajectory CSV plus a JSON run manifest.

#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rabi/rabi.hpp"

namespace {

rabi::InitialStateSpec parse_initial_flag(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  rabi::InitialStateSpec spec;
  auto spin_of = [](const std::string& s) {
    if (s == "up") return true;
    if (s == "down") return false;
    throw CLI::ValidationError("--initial", "spin must be up|down");
  };
  try {
    if (parts.size() == 3 && parts[0] == "fock") {
      spec.kind = rabi::InitialStateSpec::Kind::FOCK;
      spec.n = std::stoi(parts[1]);
      spec.spin_up = spin_of(parts[2]);
    } else if (parts.size() == 4 && parts[0] == "coherent") {
      spec.kind = rabi::InitialStateSpec::Kind::COHERENT;
      spec.re = std::stod(parts[1]);
      spec.im = std::stod(parts[2]);
      spec.spin_up = spin_of(parts[3]);
    } else if (parts.size() == 4 && parts[0] == "spin") {
      spec.kind = rabi::InitialStateSpec::Kind::SPIN_SUPERPOSITION;
      spec.n = std::stoi(parts[1]);
      spec.theta = std::stod(parts[2]);
      spec.phi = std::stod(parts[3]);
    } else {
      throw CLI::ValidationError(
          "--initial", "expected fock:n:spin | coherent:re:im:spin | spin:n:theta:phi");
    }
  } catch (const std::invalid_argument&) {
    throw CLI::ValidationError("--initial", "malformed numbers in '" + text + "'");
  }
  return spec;
}

int run_all(const std::vector<rabi::RunConfig>& configs) {
  std::vector<std::future<rabi::RunSummary>> futures;
  futures.reserve(configs.size());
  for (const auto& cfg : configs)
    futures.push_back(std::async(std::launch::async, [&cfg] { return rabi::run(cfg); }));
  int status = 0;
  for (size_t i = 0; i < configs.size(); ++i) {
    try {
      const rabi::RunSummary s = futures[i].get();
      std::cout << "wrote " << configs[i].outputs.csv << " (" << s.samples
                << " samples, dt=" << s.dt << ", max_norm_drift=" << s.max_norm_drift
                << ")\n";
    } catch (const std::exception& e) {
      nlohmann::json err{{"error", e.what()}, {"output", configs[i].outputs.csv}};
      std::cerr << err.dump() << "\n";
      status = 1;
    }
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum Rabi model quench simulator (coherent-state recurrence engine)"};

  std::string config_path, output_path, manifest_path, trace_path, preset, initial_text,
      sweep_text;
  double delta = 0, omega = 0, lambda = 0, t_final = 0, dt = 0, prune_eps = 0,
         norm_ceiling = 0, remainder_tol = 0;
  int j_max = 0, n_max = 0, m_max = 0, deg_max = 0, record_every = 0;
  bool oracle_check = false;

  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--output", output_path, "trajectory CSV path");
  app.add_option("--manifest", manifest_path, "JSON run-manifest path");
  app.add_option("--trace", trace_path, "per-order recurrence trace (JSON lines)");
  app.add_option("--preset", preset, "coupling regime: weak|ultrastrong|deep_strong");
  app.add_option("--initial", initial_text,
                 "initial state: fock:n:spin | coherent:re:im:spin | spin:n:theta:phi");
  app.add_option("--sweep", sweep_text, "one-parameter sweep: field=start:stop:count");
  auto* f_delta = app.add_option("--delta", delta, "atomic transition frequency");
  auto* f_omega = app.add_option("--omega", omega, "cavity mode frequency");
  auto* f_lambda = app.add_option("--lambda", lambda, "coupling strength");
  auto* f_tfinal = app.add_option("--t-final", t_final, "evolution time");
  auto* f_dt = app.add_option("--dt", dt, "time step (0 = auto from the norm bound)");
  auto* f_jmax = app.add_option("--j-max", j_max, "Taylor order per step");
  auto* f_nmax = app.add_option("--n-max", n_max, "Fock cutoff");
  auto* f_mmax = app.add_option("--m-max", m_max, "kernel-sum cap for point-mass terms");
  auto* f_degmax = app.add_option("--deg-max", deg_max, "polynomial degree cap");
  auto* f_prune = app.add_option("--prune-eps", prune_eps, "relative pruning threshold");
  auto* f_record = app.add_option("--record-every", record_every, "steps between samples");
  auto* f_ceiling = app.add_option("--norm-ceiling", norm_ceiling, "norm-drift abort level");
  auto* f_remtol = app.add_option("--remainder-tol", remainder_tol,
                                  "per-step series remainder bound");
  app.add_flag("--oracle-check", oracle_check,
               "record the residual against exact eigendecomposition propagation");

  CLI11_PARSE(app, argc, argv);

  try {
    rabi::RunConfig cfg;
    bool lambda_explicit = false;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw std::runtime_error("cannot read config file '" + config_path + "'");
      std::stringstream buf;
      buf << in.rdbuf();
      cfg = rabi::parse_config(buf.str());
      lambda_explicit = nlohmann::json::parse(buf.str()).contains("lambda");
    }

    if (f_delta->count()) cfg.params.delta = delta;
    if (f_omega->count()) cfg.params.omega = omega;
    if (f_lambda->count()) {
      cfg.params.lambda = lambda;
      lambda_explicit = true;
    }
    if (!preset.empty()) cfg.preset = preset;
    if (!cfg.preset.empty() && !lambda_explicit)
      cfg.params.lambda = rabi::preset_g(cfg.preset) * cfg.params.omega;

    if (!initial_text.empty()) cfg.initial = parse_initial_flag(initial_text);
    if (f_tfinal->count()) cfg.evolution.t_final = t_final;
    if (f_dt->count()) cfg.evolution.dt = dt;
    if (f_jmax->count()) cfg.evolution.j_max = j_max;
    if (f_nmax->count()) cfg.evolution.n_max = n_max;
    if (f_mmax->count()) cfg.evolution.policy.m_max = m_max;
    if (f_degmax->count()) cfg.evolution.policy.deg_max = deg_max;
    if (f_prune->count()) cfg.evolution.policy.prune_eps = prune_eps;
    if (f_record->count()) cfg.evolution.record_every = record_every;
    if (f_ceiling->count()) cfg.evolution.norm_drift_ceiling = norm_ceiling;
    if (f_remtol->count()) cfg.evolution.remainder_tol = remainder_tol;
    if (oracle_check) cfg.evolution.oracle_check = true;
    if (!output_path.empty()) cfg.outputs.csv = output_path;
    if (!manifest_path.empty()) cfg.outputs.manifest = manifest_path;
    if (!trace_path.empty()) cfg.outputs.trace = trace_path;

    std::vector<rabi::RunConfig> configs;
    if (!sweep_text.empty()) {
      configs = rabi::expand_sweep(cfg, rabi::parse_sweep(sweep_text));
    } else {
      configs.push_back(cfg);
    }
    return run_all(configs);
  } catch (const std::exception& e) {
    nlohmann::json err{{"error", e.what()}};
    std::cerr << err.dump() << "\n";
    return 1;
  }
}
