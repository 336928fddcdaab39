#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "helpers.hpp"
#include "rabi/rabi.hpp"

using namespace rabi;
using Catch::Approx;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("parse_config: defaults from an empty document", "[cli-io]") {
  auto cfg = parse_config("{}");
  CHECK(cfg.params.delta == 1.0);
  CHECK(cfg.params.omega == 1.0);
  CHECK(cfg.params.lambda == 0.5);
  CHECK(cfg.initial.kind == InitialStateSpec::Kind::FOCK);
  CHECK(cfg.initial.n == 0);
  CHECK(cfg.initial.spin_up);
  CHECK(cfg.evolution.t_final == 10.0);
  CHECK(cfg.evolution.dt == 0.0);
  CHECK(cfg.evolution.j_max == 10);
  CHECK(cfg.evolution.n_max == 64);
  CHECK(cfg.evolution.policy.m_max == 16);
  CHECK(cfg.evolution.policy.prune_eps == 1e-14);
  CHECK_FALSE(cfg.evolution.oracle_check);
  CHECK(cfg.outputs.csv == "trajectory.csv");
  CHECK(cfg.preset.empty());
}

TEST_CASE("parse_config: presets fill lambda only when absent", "[cli-io]") {
  auto weak = parse_config(R"({"preset": "weak", "omega": 2.0})");
  CHECK(weak.params.lambda == Approx(2e-3));
  auto ultra = parse_config(R"({"preset": "ultrastrong"})");
  CHECK(ultra.params.lambda == Approx(0.1));
  auto deep = parse_config(R"({"preset": "deep_strong"})");
  CHECK(deep.params.lambda == Approx(2.0));

  auto pinned = parse_config(R"({"preset": "deep_strong", "lambda": 0.25})");
  CHECK(pinned.params.lambda == 0.25);
  CHECK(pinned.preset == "deep_strong");

  CHECK_THROWS_WITH(parse_config(R"({"preset": "medium"})"),
                    Catch::Matchers::ContainsSubstring("preset"));
}

TEST_CASE("parse_config: field errors carry the field name", "[cli-io]") {
  CHECK_THROWS_WITH(parse_config(R"({"omega": -1.0})"),
                    Catch::Matchers::ContainsSubstring("omega"));
  CHECK_THROWS_WITH(parse_config(R"({"delta": -0.5})"),
                    Catch::Matchers::ContainsSubstring("delta"));
  CHECK_THROWS_WITH(parse_config(R"({"frequency": 1.0})"),
                    Catch::Matchers::ContainsSubstring("frequency"));
  CHECK_THROWS_WITH(parse_config(R"({"evolution": {"stepsize": 0.1}})"),
                    Catch::Matchers::ContainsSubstring("evolution.stepsize"));
  CHECK_THROWS_WITH(parse_config(R"({"initial": {"type": "squeezed"}})"),
                    Catch::Matchers::ContainsSubstring("initial.type"));
  CHECK_THROWS_WITH(parse_config(R"({"initial": {"type": "fock", "n": -2}})"),
                    Catch::Matchers::ContainsSubstring("initial.n"));
  CHECK_THROWS_WITH(parse_config(R"({"evolution": {"j_max": "big"}})"),
                    Catch::Matchers::ContainsSubstring("evolution.j_max"));
  CHECK_THROWS_WITH(parse_config(R"({"evolution": {"m_max": 20, "deg_max": 30}})"),
                    Catch::Matchers::ContainsSubstring("deg_max"));
  CHECK_THROWS_AS(parse_config("not json"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("[1,2]"), std::invalid_argument);
}

TEST_CASE("parse_config: full document round-trips through config_to_json", "[cli-io]") {
  const std::string doc = R"({
    "delta": 0.8, "omega": 1.2, "lambda": 0.3,
    "initial": {"type": "coherent", "re": 1.5, "im": -0.25, "spin": "down"},
    "evolution": {"t_final": 5.0, "dt": 0.01, "j_max": 8, "n_max": 32,
                  "m_max": 12, "deg_max": 80, "prune_eps": 1e-13,
                  "record_every": 4, "oracle_check": true},
    "output": {"csv": "a.csv", "manifest": "a.json", "trace": "a.jsonl"}
  })";
  auto cfg = parse_config(doc);
  CHECK(cfg.initial.kind == InitialStateSpec::Kind::COHERENT);
  CHECK(cfg.initial.re == 1.5);
  CHECK_FALSE(cfg.initial.spin_up);
  CHECK(cfg.evolution.policy.deg_max == 80);
  CHECK(cfg.evolution.oracle_check);

  auto cfg2 = parse_config(config_to_json(cfg).dump());
  CHECK(config_to_json(cfg2) == config_to_json(cfg));
}

TEST_CASE("build_initial_state: kinds and bounds", "[cli-io]") {
  InitialStateSpec fock;
  fock.kind = InitialStateSpec::Kind::FOCK;
  fock.n = 3;
  fock.spin_up = false;
  auto s = build_initial_state(fock, 8);
  CHECK(s.down[3] == Complex(1.0));
  CHECK(s.norm2() == Approx(1.0));
  fock.n = 9;
  CHECK_THROWS_AS(build_initial_state(fock, 8), std::invalid_argument);

  InitialStateSpec coh;
  coh.kind = InitialStateSpec::Kind::COHERENT;
  coh.re = 2.0;
  auto sc = build_initial_state(coh, 64);
  auto rec = expect_all(sc, sc);
  CHECK(rec.photon_n == Approx(4.0).epsilon(1e-10));

  InitialStateSpec sup;
  sup.kind = InitialStateSpec::Kind::SPIN_SUPERPOSITION;
  sup.theta = std::numbers::pi / 2;
  sup.phi = 0.0;
  auto sx = build_initial_state(sup, 8);
  auto rx = expect_all(sx, sx);
  CHECK(rx.sigma_x == Approx(1.0));
  CHECK(rx.sigma_z == Approx(0.0).margin(1e-15));
}

TEST_CASE("format_g17: shortest-faithful round trip", "[cli-io]") {
  for (double v : {1.0 / 3.0, 1e-14, 942.477796076938, -0.0625, 2.0 / 7.0, 1e300}) {
    const std::string s = format_g17(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(csv_header(false) == "t,norm2,sigma_z,sigma_x,photon_n,parity,fidelity_initial\n");
  CHECK(csv_header(true) ==
        "t,norm2,sigma_z,sigma_x,photon_n,parity,fidelity_initial,oracle_residual\n");
}

TEST_CASE("run: decoupled quench writes a constant-sigma_z trajectory", "[cli-io]") {
  RunConfig cfg;
  cfg.params = {1.0, 1.0, 0.0};
  cfg.evolution.t_final = 2.0;
  cfg.evolution.n_max = 8;
  cfg.evolution.record_every = 5;
  cfg.outputs.csv = "cli_t1.csv";
  cfg.outputs.manifest = "cli_t1_manifest.json";
  auto sum = run(cfg);
  CHECK(sum.samples > 2);
  CHECK(sum.max_norm_drift < 1e-10);

  std::ifstream in(cfg.outputs.csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,norm2,sigma_z,sigma_x,photon_n,parity,fidelity_initial");
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::istringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::strtod(cell.c_str(), nullptr));
    REQUIRE(vals.size() == 7);
    CHECK(std::abs(vals[2] - 1.0) < 1e-10);  // sigma_z frozen at lambda = 0
    CHECK(std::abs(vals[5] - 1.0) < 1e-10);  // parity frozen too
  }
  CHECK(rows == sum.samples);
}

TEST_CASE("run: reruns are byte-identical and the manifest round-trips", "[cli-io]") {
  RunConfig cfg;
  cfg.params = {1.0, 1.0, 0.5};
  cfg.evolution.t_final = 1.0;
  cfg.evolution.n_max = 16;
  cfg.evolution.record_every = 3;
  cfg.evolution.oracle_check = true;
  cfg.outputs.csv = "cli_t2a.csv";
  cfg.outputs.manifest = "cli_t2a_manifest.json";
  auto sum1 = run(cfg);
  RunConfig cfg2 = cfg;
  cfg2.outputs.csv = "cli_t2b.csv";
  cfg2.outputs.manifest = "cli_t2b_manifest.json";
  run(cfg2);
  CHECK(slurp("cli_t2a.csv") == slurp("cli_t2b.csv"));

  REQUIRE(sum1.max_oracle_residual.has_value());
  CHECK(*sum1.max_oracle_residual < 1e-8);

  auto manifest = nlohmann::json::parse(slurp("cli_t2a_manifest.json"));
  REQUIRE(manifest.contains("config"));
  REQUIRE(manifest.contains("diagnostics"));
  CHECK(manifest["library_version"] == kLibraryVersion);
  CHECK(manifest["diagnostics"]["samples"].get<int>() == sum1.samples);
  CHECK(manifest["diagnostics"]["dt"].get<double>() == sum1.dt);
  CHECK(manifest["diagnostics"]["max_oracle_residual"].get<double>() ==
        *sum1.max_oracle_residual);

  // the embedded config is directly re-runnable and equivalent
  auto cfg3 = parse_config(manifest["config"].dump());
  CHECK(cfg3.params.lambda == cfg.params.lambda);
  CHECK(cfg3.evolution.dt == sum1.dt);  // resolved dt was recorded
  CHECK(config_to_json(cfg3) == manifest["config"]);

  // CSV carries the oracle_residual column
  std::ifstream in("cli_t2a.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "t,norm2,sigma_z,sigma_x,photon_n,parity,fidelity_initial,oracle_residual");
}

TEST_CASE("run: per-order trace lines are well-formed", "[cli-io]") {
  RunConfig cfg;
  cfg.params = {1.0, 1.0, 0.5};
  cfg.evolution.t_final = 0.2;
  cfg.evolution.n_max = 8;
  cfg.outputs.csv = "cli_t3.csv";
  cfg.outputs.manifest = "cli_t3_manifest.json";
  cfg.outputs.trace = "cli_t3_trace.jsonl";
  auto sum = run(cfg);
  std::ifstream in(cfg.outputs.trace);
  REQUIRE(in.good());
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    auto j = nlohmann::json::parse(line);
    CHECK(j.contains("step"));
    CHECK(j.contains("orders"));
    if (j["step"].get<int>() > 0) {
      REQUIRE(!j["orders"].empty());
      CHECK(j["orders"][0]["order"].get<int>() == 0);
      CHECK(j["orders"].size() == 2 * (10 + 1));  // both chains, j_max = 10
    }
    ++lines;
  }
  CHECK(lines == sum.samples);
}

TEST_CASE("sweep: parsing and expansion", "[cli-io]") {
  auto s = parse_sweep("lambda=0:1:5");
  CHECK(s.field == "lambda");
  CHECK(s.count == 5);

  RunConfig base;
  base.outputs.csv = "results/out.csv";
  base.outputs.manifest = "results/out_manifest.json";
  auto runs = expand_sweep(base, s);
  REQUIRE(runs.size() == 5);
  CHECK(runs[0].params.lambda == 0.0);
  CHECK(runs[1].params.lambda == 0.25);
  CHECK(runs[4].params.lambda == 1.0);
  CHECK(runs[0].outputs.csv == "results/out_000.csv");
  CHECK(runs[4].outputs.csv == "results/out_004.csv");
  CHECK(runs[2].outputs.manifest == "results/out_manifest_002.json");

  auto g = parse_sweep("g=0.1:0.3:3");
  RunConfig b2;
  b2.params.omega = 2.0;
  auto runs2 = expand_sweep(b2, g);
  CHECK(runs2[0].params.lambda == Approx(0.2));
  CHECK(runs2[2].params.lambda == Approx(0.6));

  auto single = expand_sweep(base, parse_sweep("t_final=7:9:1"));
  REQUIRE(single.size() == 1);
  CHECK(single[0].evolution.t_final == 7.0);

  CHECK_THROWS_AS(parse_sweep("lambda=0:1:0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_sweep("mass=0:1:3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_sweep("lambda=0:1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_sweep("lambda 0:1:2"), std::invalid_argument);

  CHECK(indexed_path("out", 3) == "out_003");
  CHECK(indexed_path("dir.v2/out", 0) == "dir.v2/out_000");
}
