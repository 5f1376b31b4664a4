#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lambshift/sweep.hpp"
#include "lambshift/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitSolver = 2;
constexpr int kExitValidation = 3;

std::optional<std::string> env_value(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

int resolve_workers(std::optional<int> flag) {
  if (flag) {
    if (*flag < 1) throw lambshift::ConfigError("--workers must be at least 1");
    return *flag;
  }
  if (auto env = env_value("LAMBSHIFT_WORKERS")) {
    try {
      size_t used = 0;
      const int n = std::stoi(*env, &used);
      if (used != env->size() || n < 1) throw std::invalid_argument("");
      return n;
    } catch (const std::exception&) {
      throw lambshift::ConfigError("LAMBSHIFT_WORKERS must be a positive integer, got '" + *env +
                                   "'");
    }
  }
  return 1;
}

std::string resolve_outdir(const std::optional<std::string>& flag, const std::string& cfg_dir) {
  if (flag) return *flag;
  if (auto env = env_value("LAMBSHIFT_OUTDIR")) return *env;
  return cfg_dir;
}

int cmd_run(const std::string& config_path, std::optional<int> workers_flag,
            const std::optional<std::string>& outdir_flag) {
  const lambshift::SweepConfig cfg = lambshift::load_config(config_path);
  const int workers = resolve_workers(workers_flag);
  const std::string outdir = resolve_outdir(outdir_flag, cfg.output.dir);

  const lambshift::SweepResult result = lambshift::run_sweep(cfg, workers);
  const auto written = lambshift::write_outputs(result, outdir);

  int errors = 0, warnings = 0;
  for (const lambshift::SweepRow& row : result.rows) {
    if (!row.error.empty()) ++errors;
    if (row.obs.tie_flagged || row.did_near_resonator || !row.obs.broken_labels.empty() ||
        !row.dispersive_ok)
      ++warnings;
  }
  std::printf("%zu rows (%d workers), %d with errors, %d with warning flags\n",
              result.rows.size(), result.workers_used, errors, warnings);
  for (const auto& path : written) std::printf("wrote %s\n", path.string().c_str());
  return errors > 0 ? kExitSolver : kExitOk;
}

int cmd_validate(bool loose) {
  lambshift::ValidationOptions opt;
  opt.loose_integrator = loose;
  const auto rows = lambshift::run_validation_suite(opt);

  std::printf("%-28s %-36s %14s %14s %12s %10s %s\n", "scenario", "quantity", "main", "oracle",
              "deviation", "tolerance", "status");
  int failed = 0;
  for (const lambshift::OracleRow& row : rows) {
    if (!row.pass) ++failed;
    std::printf("%-28s %-36s %14.6g %14.6g %12.3g %9.2g%s %s\n", row.scenario.c_str(),
                row.quantity.c_str(), row.main_value, row.oracle_value, row.deviation,
                row.tolerance, row.relative ? "r" : " ", row.pass ? "pass" : "FAIL");
  }
  std::printf("%zu checks, %d failed%s\n", rows.size(), failed,
              loose ? " (deliberately loosened integrator)" : "");
  return failed == 0 ? kExitOk : kExitValidation;
}

int cmd_variants() {
  std::printf("full             driven transmon coupled to the resonator\n");
  std::printf("no_resonator     driven transmon alone (dressing and Stark ratios only)\n");
  std::printf("static_plus_dlc  effective model: static renormalized coupling plus the\n");
  std::printf("                 drive-induced longitudinal coupling, resonator kept\n");
  return kExitOk;
}

int cmd_schema() {
  std::printf("schema %s\n\n", lambshift::kSchemaVersion);
  std::printf("CSV: first line '# schema %s', then a header row. Absolute\n",
              lambshift::kSchemaVersion);
  std::printf("frequencies are GHz; shifts, nonlinearities and rates are MHz.\n\n");
  std::printf("columns:\n");
  std::printf("  f_d_ghz amplitude_ghz variant        sweep point\n");
  std::printf("  omega_{ge,ef,gf,gd}_ghz              dressed transmon-only transitions\n");
  std::printf("  omega_{ge0,ef0,gf0,gd0}_ghz          transitions with the resonator in vacuum\n");
  std::printf("  omega_r_{g,e}_ghz                    resonator frequency over transmon g / e\n");
  std::printf("  lamb_{ge,gf,gd,ef}_mhz               resonator-induced shift, vacuum minus bare\n");
  std::printf("  pull_mhz chi_mhz anharm0_mhz         resonator pull, cross-nonlinearity,\n");
  std::printf("                                       vacuum anharmonicity\n");
  std::printf("  zeta zeta_ratio chi_scaled_mhz       nonlinearity parameter, its ratio to the\n");
  std::printf("                                       zero-drive value, constant-coupling chi\n");
  std::printf("  chi_singular                         zeta denominator within 1e-6 GHz of zero\n");
  std::printf("  eta_{ef0,ed0,ef,ed}                  Stark-shift ratios (vacuum, transmon-only)\n");
  std::printf("  did_mhz linewidth_mhz                drive-induced dephasing and two-tone FWHM\n");
  std::printf("  did_near_resonator                   drive within ten resonator linewidths\n");
  std::printf("  g_static_ge_abs_ghz                  |static renormalized ge coupling|\n");
  std::printf("  dlc_{g,e}_abs_ghz                    |drive-induced longitudinal coupling|\n");
  std::printf("  offclass_max_ghz                     largest dropped coupling class\n");
  std::printf("  dispersive_ok tie_flagged            diagnostic flags\n");
  std::printf("  broken_labels error                  lost branches; per-point failure text\n\n");
  std::printf("JSON: object with schema, generator_version, config, rows; row keys match\n");
  std::printf("the CSV columns and absent values are omitted.\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Floquet sweeps of a driven transmon-resonator system"};
  app.set_version_flag("--version", lambshift::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::optional<int> workers;
  std::optional<std::string> outdir;
  CLI::App* run = app.add_subcommand("run", "run the sweep described by a JSON config");
  run->add_option("config", config_path, "path to the sweep config")->required();
  run->add_option("--workers", workers,
                  "parallel workers over (drive frequency, variant) pairs; overrides "
                  "LAMBSHIFT_WORKERS; default 1");
  run->add_option("--outdir", outdir, "output directory; overrides LAMBSHIFT_OUTDIR, then the "
                                      "config's output.dir");

  bool loose = false;
  CLI::App* validate = app.add_subcommand("validate", "cross-check the solver against oracles");
  validate->add_flag("--debug-loose-tol", loose,
                     "negative control: coarsen the integrator so cross-method checks must fail");

  CLI::App* variants = app.add_subcommand("variants", "list the model variants");
  CLI::App* schema = app.add_subcommand("schema", "describe the output schema");

  try {
    app.parse(argc, argv);
    if (run->parsed()) return cmd_run(config_path, workers, outdir);
    if (validate->parsed()) return cmd_validate(loose);
    if (variants->parsed()) return cmd_variants();
    if (schema->parsed()) return cmd_schema();
    return kExitConfig;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  } catch (const lambshift::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const lambshift::SolverError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return kExitSolver;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolver;
  }
}
