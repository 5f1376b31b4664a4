#pragma once

#include "lambshift/config.hpp"

namespace lambshift {

struct SweepRow {
  double f_d = 0.0;
  double amplitude = 0.0;
  Variant variant = Variant::Full;

  ObservableSet obs;
  std::optional<StarkRatios> eta;  // per-(f_d, variant) ratios, echoed on each row
  std::optional<double> did_mhz;
  std::optional<double> linewidth_mhz;
  bool did_near_resonator = false;

  // renormalized-coupling observables (transmon dressing at this amplitude)
  std::optional<double> g_static_ge_abs, dlc_g_abs, dlc_e_abs, offclass_max;

  bool dispersive_ok = true;
  std::string error;  // per-point solver failure, recorded while the run continues
};

struct SweepResult {
  std::vector<SweepRow> rows;  // sorted by (f_d, amplitude, variant)
  SweepConfig config;
  int workers_used = 1;
};

SweepResult run_sweep(const SweepConfig& cfg, int workers);

std::string to_csv(const SweepResult& result);
std::string to_json(const SweepResult& result);

// writes <stem>.csv / <stem>.json under outdir per the config's formats;
// returns the paths written
std::vector<std::filesystem::path> write_outputs(const SweepResult& result,
                                                 const std::filesystem::path& outdir);

}  // namespace lambshift
