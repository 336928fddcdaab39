#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rabi/evolution.hpp"
#include "rabi/model.hpp"
#include "rabi/observables.hpp"

namespace rabi {

inline constexpr const char* kLibraryVersion = "0.1.0";

struct InitialStateSpec {
  enum class Kind { FOCK, COHERENT, SPIN_SUPERPOSITION };
  Kind kind = Kind::FOCK;
  int n = 0;            // fock / spin_superposition photon number
  bool spin_up = true;  // fock / coherent spin
  double re = 0, im = 0;          // coherent amplitude
  double theta = 0, phi = 0;      // spin_superposition Bloch angles
};

struct OutputSpec {
  std::string csv = "trajectory.csv";
  std::string manifest = "manifest.json";
  std::string trace;  // per-order JSONL trace; empty = disabled
};

struct RunConfig {
  ModelParams params;
  InitialStateSpec initial;
  EvolutionConfig evolution;
  OutputSpec outputs;
  std::string preset;  // "", "weak", "ultrastrong", "deep_strong"
};

// Regime presets: repo conventions g = 1e-3 / 0.1 / 2 for weak / ultrastrong /
// deep strong coupling; a preset fills lambda = g*omega only when lambda was not
// given explicitly.
inline double preset_g(const std::string& name) {
  if (name == "weak") return 1e-3;
  if (name == "ultrastrong") return 0.1;
  if (name == "deep_strong") return 2.0;
  throw std::invalid_argument("preset: unknown name '" + name +
                              "' (expected weak|ultrastrong|deep_strong)");
}

inline SpinorFockState build_initial_state(const InitialStateSpec& spec, int n_max) {
  SpinorFockState s(n_max);
  switch (spec.kind) {
    case InitialStateSpec::Kind::FOCK: {
      if (spec.n < 0 || spec.n > n_max)
        throw std::invalid_argument("initial.n: outside [0, n_max]");
      (spec.spin_up ? s.up : s.down)[spec.n] = 1.0;
      break;
    }
    case InitialStateSpec::Kind::COHERENT: {
      (spec.spin_up ? s.up : s.down) = coherent_amplitudes({spec.re, spec.im}, n_max);
      break;
    }
    case InitialStateSpec::Kind::SPIN_SUPERPOSITION: {
      if (spec.n < 0 || spec.n > n_max)
        throw std::invalid_argument("initial.n: outside [0, n_max]");
      s.up[spec.n] = std::cos(spec.theta / 2);
      s.down[spec.n] = std::exp(Complex(0, spec.phi)) * std::sin(spec.theta / 2);
      break;
    }
  }
  return s;
}

namespace detail {

using nlohmann::json;

inline void require_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) known = true;
    if (!known)
      throw std::invalid_argument("config: unknown key '" + path + it.key() + "'");
  }
}

inline double get_number(const json& obj, const char* key, double fallback,
                         const std::string& path) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number())
    throw std::invalid_argument("config: field '" + path + key + "' must be a number");
  return obj[key].get<double>();
}

inline int get_int(const json& obj, const char* key, int fallback, const std::string& path) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer())
    throw std::invalid_argument("config: field '" + path + key + "' must be an integer");
  return obj[key].get<int>();
}

inline bool get_bool(const json& obj, const char* key, bool fallback,
                     const std::string& path) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean())
    throw std::invalid_argument("config: field '" + path + key + "' must be a boolean");
  return obj[key].get<bool>();
}

inline std::string get_string(const json& obj, const char* key, const std::string& fallback,
                              const std::string& path) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string())
    throw std::invalid_argument("config: field '" + path + key + "' must be a string");
  return obj[key].get<std::string>();
}

inline InitialStateSpec parse_initial(const json& obj) {
  InitialStateSpec spec;
  if (!obj.is_object()) throw std::invalid_argument("config: 'initial' must be an object");
  const std::string type = get_string(obj, "type", "fock", "initial.");
  auto spin_of = [&](const json& o) {
    const std::string s = get_string(o, "spin", "up", "initial.");
    if (s != "up" && s != "down")
      throw std::invalid_argument("config: field 'initial.spin' must be 'up' or 'down'");
    return s == "up";
  };
  if (type == "fock") {
    require_keys(obj, {"type", "n", "spin"}, "initial.");
    spec.kind = InitialStateSpec::Kind::FOCK;
    spec.n = get_int(obj, "n", 0, "initial.");
    spec.spin_up = spin_of(obj);
  } else if (type == "coherent") {
    require_keys(obj, {"type", "re", "im", "spin"}, "initial.");
    spec.kind = InitialStateSpec::Kind::COHERENT;
    spec.re = get_number(obj, "re", 0, "initial.");
    spec.im = get_number(obj, "im", 0, "initial.");
    spec.spin_up = spin_of(obj);
  } else if (type == "spin_superposition") {
    require_keys(obj, {"type", "n", "theta", "phi"}, "initial.");
    spec.kind = InitialStateSpec::Kind::SPIN_SUPERPOSITION;
    spec.n = get_int(obj, "n", 0, "initial.");
    spec.theta = get_number(obj, "theta", 0, "initial.");
    spec.phi = get_number(obj, "phi", 0, "initial.");
  } else {
    throw std::invalid_argument(
        "config: field 'initial.type' must be fock|coherent|spin_superposition");
  }
  if (spec.n < 0) throw std::invalid_argument("config: field 'initial.n' must be >= 0");
  return spec;
}

}  // namespace detail

// Strict parse of the JSON run configuration: defaults filled, unknown keys
// rejected with their path, invariant violations reported with the field name.
inline RunConfig parse_config(const std::string& text) {
  using detail::json;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (!root.is_object()) throw std::invalid_argument("config: top level must be an object");
  detail::require_keys(root, {"preset", "delta", "omega", "lambda", "initial", "evolution",
                              "output"},
                       "");
  RunConfig cfg;
  cfg.preset = detail::get_string(root, "preset", "", "");
  cfg.params.delta = detail::get_number(root, "delta", 1.0, "");
  cfg.params.omega = detail::get_number(root, "omega", 1.0, "");
  if (root.contains("lambda")) {
    cfg.params.lambda = detail::get_number(root, "lambda", 0.5, "");
  } else if (!cfg.preset.empty()) {
    cfg.params.lambda = preset_g(cfg.preset) * cfg.params.omega;
  }
  if (!cfg.preset.empty()) preset_g(cfg.preset);  // validate the name even if unused
  if (!(cfg.params.omega > 0))
    throw std::invalid_argument("config: field 'omega' must be positive");
  if (!(cfg.params.delta >= 0))
    throw std::invalid_argument("config: field 'delta' must be non-negative");

  if (root.contains("initial")) cfg.initial = detail::parse_initial(root["initial"]);

  if (root.contains("evolution")) {
    const json& e = root["evolution"];
    if (!e.is_object()) throw std::invalid_argument("config: 'evolution' must be an object");
    detail::require_keys(e,
                         {"t_final", "dt", "j_max", "n_max", "m_max", "deg_max", "prune_eps",
                          "record_every", "oracle_check", "norm_drift_ceiling",
                          "remainder_tol"},
                         "evolution.");
    auto& ev = cfg.evolution;
    ev.t_final = detail::get_number(e, "t_final", ev.t_final, "evolution.");
    ev.dt = detail::get_number(e, "dt", ev.dt, "evolution.");
    ev.j_max = detail::get_int(e, "j_max", ev.j_max, "evolution.");
    ev.n_max = detail::get_int(e, "n_max", ev.n_max, "evolution.");
    ev.policy.m_max = detail::get_int(e, "m_max", ev.policy.m_max, "evolution.");
    ev.policy.deg_max = detail::get_int(e, "deg_max", ev.policy.deg_max, "evolution.");
    ev.policy.prune_eps =
        detail::get_number(e, "prune_eps", ev.policy.prune_eps, "evolution.");
    ev.record_every = detail::get_int(e, "record_every", ev.record_every, "evolution.");
    ev.oracle_check = detail::get_bool(e, "oracle_check", ev.oracle_check, "evolution.");
    ev.norm_drift_ceiling =
        detail::get_number(e, "norm_drift_ceiling", ev.norm_drift_ceiling, "evolution.");
    ev.remainder_tol =
        detail::get_number(e, "remainder_tol", ev.remainder_tol, "evolution.");
  }
  if (!(cfg.evolution.t_final >= 0))
    throw std::invalid_argument("config: field 'evolution.t_final' must be >= 0");
  cfg.evolution.policy.validate();

  if (root.contains("output")) {
    const json& o = root["output"];
    if (!o.is_object()) throw std::invalid_argument("config: 'output' must be an object");
    detail::require_keys(o, {"csv", "manifest", "trace"}, "output.");
    cfg.outputs.csv = detail::get_string(o, "csv", cfg.outputs.csv, "output.");
    cfg.outputs.manifest = detail::get_string(o, "manifest", cfg.outputs.manifest, "output.");
    cfg.outputs.trace = detail::get_string(o, "trace", cfg.outputs.trace, "output.");
  }
  return cfg;
}

inline nlohmann::json initial_to_json(const InitialStateSpec& s) {
  using nlohmann::json;
  switch (s.kind) {
    case InitialStateSpec::Kind::FOCK:
      return json{{"type", "fock"}, {"n", s.n}, {"spin", s.spin_up ? "up" : "down"}};
    case InitialStateSpec::Kind::COHERENT:
      return json{{"type", "coherent"},
                  {"re", s.re},
                  {"im", s.im},
                  {"spin", s.spin_up ? "up" : "down"}};
    default:
      return json{{"type", "spin_superposition"},
                  {"n", s.n},
                  {"theta", s.theta},
                  {"phi", s.phi}};
  }
}

// Full resolved configuration; parse_config of this JSON yields an equivalent run.
inline nlohmann::json config_to_json(const RunConfig& cfg) {
  using nlohmann::json;
  json j{{"delta", cfg.params.delta},
         {"omega", cfg.params.omega},
         {"lambda", cfg.params.lambda},
         {"initial", initial_to_json(cfg.initial)},
         {"evolution",
          json{{"t_final", cfg.evolution.t_final},
               {"dt", cfg.evolution.dt},
               {"j_max", cfg.evolution.j_max},
               {"n_max", cfg.evolution.n_max},
               {"m_max", cfg.evolution.policy.m_max},
               {"deg_max", cfg.evolution.policy.deg_max},
               {"prune_eps", cfg.evolution.policy.prune_eps},
               {"record_every", cfg.evolution.record_every},
               {"oracle_check", cfg.evolution.oracle_check},
               {"norm_drift_ceiling", cfg.evolution.norm_drift_ceiling},
               {"remainder_tol", cfg.evolution.remainder_tol}}},
         {"output", json{{"csv", cfg.outputs.csv},
                         {"manifest", cfg.outputs.manifest},
                         {"trace", cfg.outputs.trace}}}};
  if (!cfg.preset.empty()) j["preset"] = cfg.preset;
  return j;
}

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_header(bool with_oracle) {
  std::string h = "t,norm2,sigma_z,sigma_x,photon_n,parity,fidelity_initial";
  if (with_oracle) h += ",oracle_residual";
  return h + "\n";
}

inline std::string csv_row(const ObservableRecord& r) {
  std::string s = format_g17(r.t) + "," + format_g17(r.norm2) + "," + format_g17(r.sigma_z) +
                  "," + format_g17(r.sigma_x) + "," + format_g17(r.photon_n) + "," +
                  format_g17(r.parity) + "," + format_g17(r.fidelity_initial);
  if (r.oracle_residual) s += "," + format_g17(*r.oracle_residual);
  return s + "\n";
}

struct RunSummary {
  int samples = 0;
  double dt = 0;
  double max_norm_drift = 0;
  double total_pruned_mass = 0;
  std::optional<double> max_oracle_residual;
};

// Execute a configured run: evolve, write the trajectory CSV, the JSON manifest
// (resolved config + diagnostics), and the optional per-order JSONL trace.
// Deterministic for a fixed config. Engine errors propagate as exceptions.
inline RunSummary run(const RunConfig& cfg_in) {
  RunConfig cfg = cfg_in;
  cfg.params.validate();
  const SpinorFockState initial = build_initial_state(cfg.initial, cfg.evolution.n_max);
  const bool trace_on = !cfg.outputs.trace.empty();
  const Trajectory traj = evolve(initial, cfg.params, cfg.evolution, trace_on);
  cfg.evolution = cfg.evolution.resolved(cfg.params);  // manifest shows the dt used

  RunSummary sum;
  sum.samples = static_cast<int>(traj.times.size());
  sum.dt = cfg.evolution.dt;
  sum.total_pruned_mass = traj.total_pruned_mass;

  std::ofstream csv(cfg.outputs.csv);
  if (!csv) throw std::runtime_error("cannot open output file '" + cfg.outputs.csv + "'");
  csv << csv_header(cfg.evolution.oracle_check);
  const double norm2_0 = traj.norms.empty() ? 1.0 : traj.norms.front();
  for (int i = 0; i < sum.samples; ++i) {
    ObservableRecord rec = expect_all(traj.states[i], initial, traj.times[i]);
    if (cfg.evolution.oracle_check) {
      rec.oracle_residual = traj.oracle_residuals[i];
      if (!sum.max_oracle_residual || *rec.oracle_residual > *sum.max_oracle_residual)
        sum.max_oracle_residual = *rec.oracle_residual;
    }
    sum.max_norm_drift = std::max(sum.max_norm_drift, std::abs(rec.norm2 - norm2_0));
    csv << csv_row(rec);
  }
  csv.close();

  if (trace_on) {
    std::ofstream trace(cfg.outputs.trace);
    if (!trace)
      throw std::runtime_error("cannot open trace file '" + cfg.outputs.trace + "'");
    for (const StepDiag& d : traj.diagnostics) {
      nlohmann::json line{{"step", d.step}, {"t", d.t},
                          {"pruned_mass_total", d.pruned_mass_total}};
      auto orders = nlohmann::json::array();
      for (const OrderDiag& od : d.orders) {
        nlohmann::json jo{{"order", od.order},
                          {"delta_terms", od.delta_terms},
                          {"poly_terms", od.poly_terms},
                          {"max_degree", od.max_degree},
                          {"pruned_mass", od.pruned_mass}};
        if (!std::isnan(od.oracle_residual)) jo["oracle_residual"] = od.oracle_residual;
        orders.push_back(std::move(jo));
      }
      line["orders"] = std::move(orders);
      trace << line.dump() << "\n";
    }
  }

  nlohmann::json manifest{
      {"config", config_to_json(cfg)},
      {"library_version", kLibraryVersion},
      {"diagnostics",
       nlohmann::json{{"samples", sum.samples},
                      {"dt", sum.dt},
                      {"max_norm_drift", sum.max_norm_drift},
                      {"total_pruned_mass", sum.total_pruned_mass},
                      {"max_oracle_residual", sum.max_oracle_residual
                                                  ? nlohmann::json(*sum.max_oracle_residual)
                                                  : nlohmann::json(nullptr)}}}};
  std::ofstream mf(cfg.outputs.manifest);
  if (!mf)
    throw std::runtime_error("cannot open manifest file '" + cfg.outputs.manifest + "'");
  mf << manifest.dump(2) << "\n";
  return sum;
}

// One-parameter sweep: field=start:stop:count over delta|omega|lambda|g|t_final.
struct SweepSpec {
  std::string field;
  double start = 0, stop = 0;
  int count = 1;
};

inline SweepSpec parse_sweep(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("sweep: expected field=start:stop:count");
  SweepSpec s;
  s.field = text.substr(0, eq);
  if (s.field != "delta" && s.field != "omega" && s.field != "lambda" && s.field != "g" &&
      s.field != "t_final")
    throw std::invalid_argument("sweep: unknown field '" + s.field +
                                "' (expected delta|omega|lambda|g|t_final)");
  const std::string rest = text.substr(eq + 1);
  const auto c1 = rest.find(':');
  const auto c2 = rest.find(':', c1 == std::string::npos ? c1 : c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    throw std::invalid_argument("sweep: expected field=start:stop:count");
  try {
    s.start = std::stod(rest.substr(0, c1));
    s.stop = std::stod(rest.substr(c1 + 1, c2 - c1 - 1));
    s.count = std::stoi(rest.substr(c2 + 1));
  } catch (const std::exception&) {
    throw std::invalid_argument("sweep: malformed numbers in '" + text + "'");
  }
  if (s.count < 1) throw std::invalid_argument("sweep: count must be >= 1");
  return s;
}

inline std::string indexed_path(const std::string& path, int index) {
  char suffix[16];
  std::snprintf(suffix, sizeof suffix, "_%03d", index);
  const auto dot = path.rfind('.');
  const auto slash = path.rfind('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return path + suffix;
  return path.substr(0, dot) + suffix + path.substr(dot);
}

inline std::vector<RunConfig> expand_sweep(const RunConfig& base, const SweepSpec& sweep) {
  std::vector<RunConfig> out;
  out.reserve(sweep.count);
  for (int i = 0; i < sweep.count; ++i) {
    RunConfig c = base;
    const double v = sweep.count == 1
                         ? sweep.start
                         : sweep.start + (sweep.stop - sweep.start) * i / (sweep.count - 1);
    if (sweep.field == "delta") c.params.delta = v;
    else if (sweep.field == "omega") c.params.omega = v;
    else if (sweep.field == "lambda") c.params.lambda = v;
    else if (sweep.field == "g") c.params.lambda = v * c.params.omega;
    else c.evolution.t_final = v;
    c.outputs.csv = indexed_path(base.outputs.csv, i);
    c.outputs.manifest = indexed_path(base.outputs.manifest, i);
    if (!base.outputs.trace.empty()) c.outputs.trace = indexed_path(base.outputs.trace, i);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace rabi
