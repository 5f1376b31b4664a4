#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "lambshift/sweep.hpp"
#include "lambshift/version.hpp"

using namespace lambshift;
namespace fs = std::filesystem;

namespace {

// small fast device: four Duffing levels, three photon states, drive well
// detuned from every transition
const char* kTinyConfig = R"({
  "device": {
    "duffing": {"omega_ge_ghz": 5.0, "anharm_mhz": 200.0},
    "n_q": 4, "n_r": 3,
    "resonator_ghz": 4.0, "coupling_ghz": 0.2
  },
  "drive_frequencies_ghz": [4.3],
  "amplitude_grid_ghz": {"list": [0.0, 0.02, 0.04]},
  "variants": ["full"],
  "observables": ["lamb", "pull", "chi", "anharm", "zeta", "did", "coupling"],
  "output": {"stem": "tiny", "formats": ["csv", "json"]}
})";

// the same device at two drive frequencies: two sweep pairs, so a second
// worker is actually admitted when one is offered
const char* kTinyTwoConfig = R"({
  "device": {
    "duffing": {"omega_ge_ghz": 5.0, "anharm_mhz": 200.0},
    "n_q": 4, "n_r": 3,
    "resonator_ghz": 4.0, "coupling_ghz": 0.2
  },
  "drive_frequencies_ghz": [4.3, 4.45],
  "amplitude_grid_ghz": {"list": [0.0, 0.02]},
  "variants": ["full"],
  "observables": ["lamb", "pull", "chi"],
  "output": {"stem": "tiny2", "formats": ["csv"]}
})";

fs::path temp_root() {
  static fs::path root = [] {
    fs::path p = fs::temp_directory_path() / "lambshift_cli_tests";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

fs::path write_file(const std::string& name, const std::string& text) {
  fs::path p = temp_root() / name;
  std::ofstream out(p, std::ios::binary);
  out << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int run_cli(const std::string& args, const std::string& env_prefix = "") {
  const std::string log = (temp_root() / "last_run.log").string();
  std::string cmd = env_prefix + (env_prefix.empty() ? "" : " ") + LAMBSHIFT_CLI_PATH " " + args +
                    " >" + log + " 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string last_log() { return slurp(temp_root() / "last_run.log"); }

}  // namespace

TEST_CASE("config parsing fills defaults") {
  SweepConfig cfg = parse_config(R"({
    "drive_frequencies_ghz": [4.2],
    "amplitude_grid_ghz": {"start": 0.0, "stop": 0.5, "points": 6}
  })");
  CHECK(cfg.device.n_q == 6);
  CHECK(cfg.device.n_r == 6);
  CHECK(cfg.device.resonator_freq == doctest::Approx(4.335));
  CHECK(cfg.device.coupling_g == doctest::Approx(0.248));
  CHECK(cfg.device.transmon_levels[1] == doctest::Approx(5.869));
  CHECK(cfg.amplitudes.size() == 6);
  CHECK(cfg.amplitudes.front() == 0.0);
  CHECK(cfg.amplitudes.back() == doctest::Approx(0.5));
  CHECK(cfg.variants == std::vector<Variant>{Variant::Full});
  CHECK(cfg.observables == kKnownObservables);
  CHECK(cfg.solver.prop.steps_per_period == 256);
  CHECK(cfg.solver.k_max == 10);
  CHECK(cfg.output.stem == "sweep");
  CHECK(cfg.output.formats == std::vector<std::string>{"csv", "json"});
}

TEST_CASE("config parsing round trip of explicit values") {
  SweepConfig cfg = parse_config(kTinyConfig);
  CHECK(cfg.device.n_q == 4);
  CHECK(cfg.device.n_r == 3);
  CHECK(cfg.device.transmon_levels[3] == doctest::Approx(14.4));
  CHECK(cfg.device.anharmonicity() == doctest::Approx(-0.2));
  CHECK(cfg.drive_frequencies == std::vector<double>{4.3});
  CHECK(cfg.amplitudes == std::vector<double>{0.0, 0.02, 0.04});
  CHECK(cfg.output.stem == "tiny");
}

TEST_CASE("unknown keys are rejected at every level") {
  auto rejected = [](const std::string& text) {
    CHECK_THROWS_AS(parse_config(text), ConfigError);
  };
  rejected(R"({"drive_frequencies_ghz": [4.2],
               "amplitude_grid_ghz": {"list": [0.0]}, "bogus": 1})");
  rejected(R"({"device": {"bogus": 1}, "drive_frequencies_ghz": [4.2],
               "amplitude_grid_ghz": {"list": [0.0]}})");
  rejected(R"({"device": {"duffing": {"omega_ge_ghz": 5.0, "anharm_mhz": 200, "bogus": 1}},
               "drive_frequencies_ghz": [4.2], "amplitude_grid_ghz": {"list": [0.0]}})");
  rejected(R"({"drive_frequencies_ghz": [4.2],
               "amplitude_grid_ghz": {"list": [0.0], "bogus": 1}})");
  rejected(R"({"drive_frequencies_ghz": [4.2], "amplitude_grid_ghz": {"list": [0.0]},
               "decoherence": {"bogus": 1}})");
  rejected(R"({"drive_frequencies_ghz": [4.2], "amplitude_grid_ghz": {"list": [0.0]},
               "solver": {"bogus": 1}})");
  rejected(R"({"drive_frequencies_ghz": [4.2], "amplitude_grid_ghz": {"list": [0.0]},
               "output": {"bogus": 1}})");
}

TEST_CASE("config validation failures") {
  auto rejected = [](const std::string& text) {
    CHECK_THROWS_AS(parse_config(text), ConfigError);
  };
  rejected("not json at all");
  rejected(R"([1, 2, 3])");
  // missing required keys
  rejected(R"({"drive_frequencies_ghz": [4.2]})");
  rejected(R"({"amplitude_grid_ghz": {"list": [0.0]}})");
  // the grid must start at zero and increase
  rejected(R"({"drive_frequencies_ghz": [4.2], "amplitude_grid_ghz": {"list": [0.1, 0.2]}})");
  rejected(R"({"drive_frequencies_ghz": [4.2], "amplitude_grid_ghz": {"list": [0.0, 0.2, 0.1]}})");
  rejected(R"({"drive_frequencies_ghz": [4.2], "amplitude_grid_ghz": {"list": []}})");
  // list and start/stop/points are exclusive
  rejected(R"({"drive_frequencies_ghz": [4.2],
               "amplitude_grid_ghz": {"list": [0.0], "start": 0.0, "stop": 1.0, "points": 2}})");
  // device sources are exclusive
  rejected(R"({"device": {"transmon_transitions_ghz": [5.9],
                          "duffing": {"omega_ge_ghz": 5.0, "anharm_mhz": 200}},
               "drive_frequencies_ghz": [4.2], "amplitude_grid_ghz": {"list": [0.0]}})");
  // unknown names
  rejected(R"({"drive_frequencies_ghz": [4.2], "amplitude_grid_ghz": {"list": [0.0]},
               "variants": ["bogus"]})");
  rejected(R"({"drive_frequencies_ghz": [4.2], "amplitude_grid_ghz": {"list": [0.0]},
               "observables": ["bogus"]})");
  // eta needs four transmon levels
  rejected(R"({"device": {"duffing": {"omega_ge_ghz": 5.0, "anharm_mhz": 200}, "n_q": 2},
               "drive_frequencies_ghz": [4.2], "amplitude_grid_ghz": {"list": [0.0]},
               "observables": ["eta"]})");
  // malformed solver and output settings
  rejected(R"({"drive_frequencies_ghz": [4.2], "amplitude_grid_ghz": {"list": [0.0]},
               "solver": {"steps_per_period": 2}})");
  rejected(R"({"drive_frequencies_ghz": [4.2], "amplitude_grid_ghz": {"list": [0.0]},
               "solver": {"overlap_threshold": 1.5}})");
  rejected(R"({"drive_frequencies_ghz": [4.2], "amplitude_grid_ghz": {"list": [0.0]},
               "output": {"stem": "a/b"}})");
  rejected(R"({"drive_frequencies_ghz": [4.2], "amplitude_grid_ghz": {"list": [0.0]},
               "output": {"formats": ["xml"]}})");
}

TEST_CASE("sweep output is deterministic and worker-count independent") {
  SweepConfig cfg = parse_config(R"({
    "device": {
      "duffing": {"omega_ge_ghz": 5.0, "anharm_mhz": 200.0},
      "n_q": 4, "n_r": 3,
      "resonator_ghz": 4.0, "coupling_ghz": 0.2
    },
    "drive_frequencies_ghz": [4.3, 4.4],
    "amplitude_grid_ghz": {"list": [0.0, 0.02, 0.04]},
    "variants": ["full", "no_resonator"],
    "observables": ["lamb", "pull", "chi", "did"]
  })");

  SweepResult first = run_sweep(cfg, 1);
  SweepResult again = run_sweep(cfg, 1);
  CHECK(to_csv(first) == to_csv(again));
  CHECK(to_json(first) == to_json(again));

  SweepResult parallel = run_sweep(cfg, 4);
  CHECK(parallel.workers_used == 4);
  CHECK(to_csv(first) == to_csv(parallel));
  CHECK(to_json(first) == to_json(parallel));

  // rows come out in total (f_d, amplitude, variant) order
  REQUIRE(first.rows.size() == 12);
  for (size_t i = 1; i < first.rows.size(); ++i) {
    const SweepRow& a = first.rows[i - 1];
    const SweepRow& b = first.rows[i];
    const bool ordered = a.f_d < b.f_d ||
                         (a.f_d == b.f_d && a.amplitude < b.amplitude) ||
                         (a.f_d == b.f_d && a.amplitude == b.amplitude &&
                          static_cast<int>(a.variant) < static_cast<int>(b.variant));
    CHECK(ordered);
  }
}

TEST_CASE("sweep fills observables and serializes them") {
  SweepConfig cfg = parse_config(kTinyConfig);
  SweepResult result = run_sweep(cfg, 1);
  REQUIRE(result.rows.size() == 3);
  for (const SweepRow& row : result.rows) {
    INFO("row error: ", row.error);
    CHECK(row.error.empty());
    REQUIRE(row.obs.lamb_ge.has_value());
    REQUIRE(row.obs.pull.has_value());
    REQUIRE(row.obs.chi.has_value());
    CHECK(row.g_static_ge_abs.has_value());
    CHECK(row.dispersive_ok);
  }
  // zero-drive row: DLC off, unit zeta ratio, zero dephasing
  CHECK(*result.rows[0].dlc_g_abs < 1e-10);
  CHECK(*result.rows[0].obs.zeta_ratio == doctest::Approx(1.0));
  CHECK(*result.rows[0].did_mhz == 0.0);
  CHECK(*result.rows[2].did_mhz > 0.0);

  const std::string csv = to_csv(result);
  CHECK(csv.rfind("# schema lambshift-output-v1\n", 0) == 0);
  CHECK(csv.find("f_d_ghz,amplitude_ghz,variant,") != std::string::npos);

  nlohmann::json parsed = nlohmann::json::parse(to_json(result));
  CHECK(parsed["schema"] == kSchemaVersion);
  CHECK(parsed["generator_version"] == kVersion);
  CHECK(parsed["rows"].size() == 3);
  CHECK(parsed["rows"][0]["variant"] == "full");
  CHECK(parsed["rows"][0].count("error") == 0);
  CHECK(parsed["config"]["observables"].size() == 7);
}

TEST_CASE("stark ratios ride along each row of an eta sweep") {
  SweepConfig cfg = parse_config(R"({
    "device": {
      "duffing": {"omega_ge_ghz": 5.0, "anharm_mhz": 200.0},
      "n_q": 4, "n_r": 2,
      "resonator_ghz": 4.0, "coupling_ghz": 0.2
    },
    "drive_frequencies_ghz": [4.3],
    "amplitude_grid_ghz": {"list": [0.0, 0.05]},
    "variants": ["no_resonator"],
    "observables": ["eta"]
  })");
  SweepResult result = run_sweep(cfg, 1);
  REQUIRE(result.rows.size() == 2);
  for (const SweepRow& row : result.rows) {
    INFO("row error: ", row.error);
    CHECK(row.error.empty());
    REQUIRE(row.eta.has_value());
    CHECK(row.eta->quad_residual < 0.01);
    CHECK(row.eta->window_max <= 0.25);
    CHECK(row.eta->grid.size() >= 8);
    // without a resonator the vacuum source is the dressing itself
    CHECK(row.eta->eta_ef0 == row.eta->eta_ef);
    CHECK(row.eta->eta_ed0 == row.eta->eta_ed);
  }
}

TEST_CASE("write_outputs writes each requested format once") {
  SweepConfig cfg = parse_config(kTinyConfig);
  cfg.output.formats = {"csv", "csv", "json"};
  SweepResult result = run_sweep(cfg, 1);
  const fs::path dir = temp_root() / "write_outputs";
  auto written = write_outputs(result, dir);
  REQUIRE(written.size() == 2);
  CHECK(written[0].filename() == "tiny.csv");
  CHECK(written[1].filename() == "tiny.json");
  CHECK(slurp(written[0]) == to_csv(result));
  CHECK(slurp(written[1]) == to_json(result));
}

TEST_CASE("shipped sweep configs parse and validate") {
  const fs::path dir = LAMBSHIFT_CONFIG_DIR;
  REQUIRE(fs::exists(dir));
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    INFO("config: ", entry.path().string());
    CHECK_NOTHROW(load_config(entry.path()));
    ++seen;
  }
  CHECK(seen >= 7);
}

TEST_CASE("cli run produces deterministic outputs and honors overrides") {
  const fs::path cfg = write_file("tiny.json", kTinyConfig);
  const fs::path out1 = temp_root() / "out1";
  const fs::path out2 = temp_root() / "out2";

  CHECK(run_cli("run " + cfg.string() + " --outdir " + out1.string()) == 0);
  CHECK(run_cli("run " + cfg.string() + " --workers 2 --outdir " + out2.string()) == 0);
  CHECK(slurp(out1 / "tiny.csv") == slurp(out2 / "tiny.csv"));
  CHECK(slurp(out1 / "tiny.json") == slurp(out2 / "tiny.json"));
  CHECK(slurp(out1 / "tiny.csv").rfind("# schema lambshift-output-v1\n", 0) == 0);

  // environment overrides: outdir and worker count (a two-pair config so a
  // second worker is actually admitted)
  const fs::path cfg2 = write_file("tiny2.json", kTinyTwoConfig);
  const fs::path out3 = temp_root() / "out3";
  const fs::path out4 = temp_root() / "out4";
  CHECK(run_cli("run " + cfg2.string() + " --workers 1 --outdir " + out3.string()) == 0);
  CHECK(last_log().find("1 workers") != std::string::npos);
  CHECK(run_cli("run " + cfg2.string(),
                "LAMBSHIFT_OUTDIR=" + out4.string() + " LAMBSHIFT_WORKERS=2") == 0);
  CHECK(last_log().find("2 workers") != std::string::npos);
  CHECK(slurp(out4 / "tiny2.csv") == slurp(out3 / "tiny2.csv"));

  // a flag beats the environment
  const fs::path out5 = temp_root() / "out5";
  CHECK(run_cli("run " + cfg2.string() + " --workers 1 --outdir " + out5.string(),
                "LAMBSHIFT_WORKERS=7") == 0);
  CHECK(last_log().find("1 workers") != std::string::npos);

  CHECK(run_cli("run " + cfg.string(), "LAMBSHIFT_WORKERS=zero") == 1);
}

TEST_CASE("cli reports config problems with exit one") {
  CHECK(run_cli("run " + (temp_root() / "missing.json").string()) == 1);
  const fs::path bad = write_file("bad.json", "{ not json");
  CHECK(run_cli("run " + bad.string()) == 1);
  CHECK(run_cli("run " + bad.string() + " --bogus-flag") == 1);
  CHECK(run_cli("") == 1);          // a subcommand is required
  CHECK(run_cli("bogus-subcommand") == 1);
}

TEST_CASE("cli reports solver failures with exit two") {
  // a two-level transmon driven exactly on its transition cannot be tracked
  // from the undriven seed: the dressing breaks and the rows carry errors
  const fs::path cfg = write_file("resonant.json", R"({
    "device": {"duffing": {"omega_ge_ghz": 5.0, "anharm_mhz": 200.0}, "n_q": 2, "n_r": 2,
               "resonator_ghz": 4.0, "coupling_ghz": 0.2},
    "drive_frequencies_ghz": [5.0],
    "amplitude_grid_ghz": {"list": [0.0, 0.05]},
    "variants": ["no_resonator"],
    "observables": ["coupling"],
    "output": {"stem": "resonant"}
  })");
  CHECK(run_cli("run " + cfg.string() + " --outdir " + (temp_root() / "out_res").string()) == 2);
  const std::string csv = slurp(temp_root() / "out_res" / "resonant.csv");
  CHECK(csv.find("could not be tracked") != std::string::npos);
}

TEST_CASE("cli documentation subcommands") {
  CHECK(run_cli("variants") == 0);
  std::string text = last_log();
  CHECK(text.find("full") != std::string::npos);
  CHECK(text.find("no_resonator") != std::string::npos);
  CHECK(text.find("static_plus_dlc") != std::string::npos);

  CHECK(run_cli("schema") == 0);
  text = last_log();
  CHECK(text.find(kSchemaVersion) != std::string::npos);
  CHECK(text.find("lamb_{ge,gf,gd,ef}_mhz") != std::string::npos);
  CHECK(text.find("did_mhz") != std::string::npos);

  CHECK(run_cli("--version") == 0);
  CHECK(last_log().find(kVersion) != std::string::npos);
}

TEST_CASE("cli validation gate passes strict and fails the loose control") {
  CHECK(run_cli("validate") == 0);
  std::string text = last_log();
  CHECK(text.find("0 failed") != std::string::npos);

  CHECK(run_cli("validate --debug-loose-tol") == 3);
  text = last_log();
  CHECK(text.find("FAIL") != std::string::npos);
}
