#include "lambshift/sweep.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>
#include <omp.h>

#include "lambshift/version.hpp"

namespace lambshift {

namespace {

// all rows of one (drive frequency, variant) pair share trackers, a
// zero-amplitude baseline, and the per-pair Stark ratios
void run_pair(const SweepConfig& cfg, double f_d, Variant variant,
              std::vector<SweepRow>& rows) {
  const DeviceSpec& dev = cfg.device;
  const bool want_obs = cfg.has_observable("lamb") || cfg.has_observable("pull") ||
                        cfg.has_observable("chi") || cfg.has_observable("anharm") ||
                        cfg.has_observable("zeta") || cfg.has_observable("did");
  const bool want_coupling = cfg.has_observable("coupling");
  const bool want_eta = cfg.has_observable("eta");
  const bool want_did = cfg.has_observable("did") && variant != Variant::NoResonator;

  std::optional<StarkRatios> eta;
  std::string eta_error;
  if (want_eta) {
    try {
      eta = stark_ratios(dev, f_d, variant, cfg.solver);
    } catch (const std::exception& e) {
      eta_error = std::string("eta: ") + e.what();
    }
  }

  // trackers are built lazily so a config that only wants eta or the
  // coupling observables never pays for the joint-system sweep
  std::unique_ptr<TransmonDressing> dressing;
  std::unique_ptr<BranchTracker> transmon_tracker, joint_tracker;
  std::vector<int> transmon_labels, joint_labels;
  if (want_coupling || variant == Variant::StaticPlusDlcOnly)
    dressing = std::make_unique<TransmonDressing>(dev, f_d, cfg.solver);
  if (want_obs) {
    for (int level = 0; level < std::min(dev.n_q, 4); ++level) transmon_labels.push_back(level);
    transmon_tracker = std::make_unique<BranchTracker>(
        [dev, f_d](double a) {
          return build_joint(dev, DriveSpec{f_d, a}, Variant::NoResonator);
        },
        transmon_labels, cfg.solver);
    if (variant != Variant::NoResonator) {
      joint_labels = observable_joint_labels(dev.n_q, dev.n_r);
      HamiltonianFamily family;
      if (variant == Variant::Full) {
        family = [dev, f_d](double a) {
          return build_joint(dev, DriveSpec{f_d, a}, Variant::Full);
        };
      } else {
        TransmonDressing* d = dressing.get();
        family = [d, dev, f_d](double a) {
          return assemble_effective(d->at(a), dev, f_d, true);
        };
      }
      joint_tracker = std::make_unique<BranchTracker>(family, joint_labels, cfg.solver);
    }
  }

  const BranchTracker::State empty_joint;
  std::optional<ObservableSet> baseline;
  for (size_t i = 0; i < cfg.amplitudes.size(); ++i) {
    const double amp = cfg.amplitudes[i];
    SweepRow& row = rows[i];
    row.f_d = f_d;
    row.amplitude = amp;
    row.variant = variant;
    row.eta = eta;
    row.error = eta_error;
    const DriveSpec drive{f_d, amp};
    row.dispersive_ok = drive.dispersive_ok(dev);
    try {
      if (want_obs) {
        const BranchTracker::State& transmon = transmon_tracker->state_at(amp);
        const BranchTracker::State& joint =
            joint_tracker ? joint_tracker->state_at(amp) : empty_joint;
        row.obs = observables(joint, joint_labels, transmon, transmon_labels, dev, drive);
        if (!baseline && amp == 0.0) baseline = row.obs;
        if (baseline) fill_against_baseline(row.obs, *baseline);
      }
      if (want_coupling) {
        const TransmonDressing::Dressed& d = dressing->at(amp);
        row.g_static_ge_abs = std::abs(d.coupling.static_elem(0, 1));
        row.dlc_g_abs = std::abs(d.coupling.dlc(0));
        row.dlc_e_abs = std::abs(d.coupling.dlc(1));
        row.offclass_max = d.coupling.offclass_max;
      }
      if (want_did) {
        const DidResult did = did_rate(row.obs, drive, cfg.decoherence);
        row.did_mhz = did.rate;
        row.did_near_resonator = did.near_resonator;
        row.linewidth_mhz = linewidth(cfg.decoherence, did.rate);
      }
    } catch (const std::exception& e) {
      if (!row.error.empty()) row.error += "; ";
      row.error += e.what();
    }
  }
}

}  // namespace

SweepResult run_sweep(const SweepConfig& cfg, int workers) {
  cfg.validate();
  if (workers < 1) throw ConfigError("the worker count must be at least 1");

  struct Pair {
    double f_d;
    Variant variant;
  };
  std::vector<Pair> pairs;
  for (double f_d : cfg.drive_frequencies)
    for (Variant v : cfg.variants) pairs.push_back({f_d, v});

  const size_t n_amp = cfg.amplitudes.size();
  SweepResult result;
  result.config = cfg;
  result.workers_used = std::min<int>(workers, static_cast<int>(pairs.size()));
  result.rows.resize(pairs.size() * n_amp);

  const int n_pairs = static_cast<int>(pairs.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(result.workers_used)
  for (int p = 0; p < n_pairs; ++p) {
    std::vector<SweepRow> rows(n_amp);
    try {
      run_pair(cfg, pairs[p].f_d, pairs[p].variant, rows);
    } catch (const std::exception& e) {
      // a pair-level failure (tracker construction, assembly) marks every row
      for (size_t i = 0; i < n_amp; ++i) {
        rows[i].f_d = pairs[p].f_d;
        rows[i].amplitude = cfg.amplitudes[i];
        rows[i].variant = pairs[p].variant;
        if (rows[i].error.empty()) rows[i].error = e.what();
      }
    }
    for (size_t i = 0; i < n_amp; ++i) result.rows[p * n_amp + i] = std::move(rows[i]);
  }

  std::sort(result.rows.begin(), result.rows.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.f_d != b.f_d) return a.f_d < b.f_d;
    if (a.amplitude != b.amplitude) return a.amplitude < b.amplitude;
    return static_cast<int>(a.variant) < static_cast<int>(b.variant);
  });
  return result;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string fmt_mhz(const std::optional<double>& v) { return v ? fmt(*v * 1e3) : ""; }
std::string fmt_ghz(const std::optional<double>& v) { return v ? fmt(*v) : ""; }
std::string fmt_plain(const std::optional<double>& v) { return v ? fmt(*v) : ""; }

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string broken_list(const std::vector<int>& labels) {
  std::string out;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(labels[i]);
  }
  return out;
}

}  // namespace

std::string to_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "# schema " << kSchemaVersion << "\n";
  out << "f_d_ghz,amplitude_ghz,variant,"
         "omega_ge_ghz,omega_ef_ghz,omega_gf_ghz,omega_gd_ghz,"
         "omega_ge0_ghz,omega_ef0_ghz,omega_gf0_ghz,omega_gd0_ghz,"
         "omega_r_g_ghz,omega_r_e_ghz,"
         "lamb_ge_mhz,lamb_gf_mhz,lamb_gd_mhz,lamb_ef_mhz,"
         "pull_mhz,chi_mhz,anharm0_mhz,zeta,zeta_ratio,chi_scaled_mhz,chi_singular,"
         "eta_ef0,eta_ed0,eta_ef,eta_ed,"
         "did_mhz,linewidth_mhz,did_near_resonator,"
         "g_static_ge_abs_ghz,dlc_g_abs_ghz,dlc_e_abs_ghz,offclass_max_ghz,"
         "dispersive_ok,tie_flagged,broken_labels,error\n";
  for (const SweepRow& row : result.rows) {
    const ObservableSet& o = row.obs;
    out << fmt(row.f_d) << ',' << fmt(row.amplitude) << ',' << variant_name(row.variant) << ','
        << fmt_ghz(o.omega_ge) << ',' << fmt_ghz(o.omega_ef) << ',' << fmt_ghz(o.omega_gf) << ','
        << fmt_ghz(o.omega_gd) << ',' << fmt_ghz(o.omega_ge0) << ',' << fmt_ghz(o.omega_ef0)
        << ',' << fmt_ghz(o.omega_gf0) << ',' << fmt_ghz(o.omega_gd0) << ','
        << fmt_ghz(o.omega_r_g) << ',' << fmt_ghz(o.omega_r_e) << ',' << fmt_mhz(o.lamb_ge)
        << ',' << fmt_mhz(o.lamb_gf) << ',' << fmt_mhz(o.lamb_gd) << ',' << fmt_mhz(o.lamb_ef)
        << ',' << fmt_mhz(o.pull) << ',' << fmt_mhz(o.chi) << ',' << fmt_mhz(o.anharm0) << ','
        << fmt_plain(o.zeta) << ',' << fmt_plain(o.zeta_ratio) << ',' << fmt_mhz(o.chi_scaled)
        << ',' << (o.chi_singular ? "true" : "false") << ','
        << (row.eta ? fmt(row.eta->eta_ef0) : "") << ','
        << (row.eta ? fmt(row.eta->eta_ed0) : "") << ','
        << (row.eta ? fmt(row.eta->eta_ef) : "") << ','
        << (row.eta ? fmt(row.eta->eta_ed) : "") << ',' << fmt_plain(row.did_mhz) << ','
        << fmt_plain(row.linewidth_mhz) << ',' << (row.did_near_resonator ? "true" : "false")
        << ',' << fmt_ghz(row.g_static_ge_abs) << ',' << fmt_ghz(row.dlc_g_abs) << ','
        << fmt_ghz(row.dlc_e_abs) << ',' << fmt_ghz(row.offclass_max) << ','
        << (row.dispersive_ok ? "true" : "false") << ',' << (o.tie_flagged ? "true" : "false")
        << ',' << broken_list(o.broken_labels) << ',' << csv_escape(row.error) << '\n';
  }
  return out.str();
}

namespace {

using ojson = nlohmann::ordered_json;

void put_mhz(ojson& obj, const char* key, const std::optional<double>& v) {
  if (v) obj[key] = *v * 1e3;
}

void put(ojson& obj, const char* key, const std::optional<double>& v) {
  if (v) obj[key] = *v;
}

}  // namespace

std::string to_json(const SweepResult& result) {
  ojson root;
  root["schema"] = kSchemaVersion;
  root["generator_version"] = kVersion;

  ojson cfg_echo;
  cfg_echo["drive_frequencies_ghz"] = result.config.drive_frequencies;
  cfg_echo["amplitudes_ghz"] = result.config.amplitudes;
  ojson variants = ojson::array();
  for (Variant v : result.config.variants) variants.push_back(variant_name(v));
  cfg_echo["variants"] = variants;
  cfg_echo["observables"] = result.config.observables;
  root["config"] = cfg_echo;

  ojson rows = ojson::array();
  for (const SweepRow& row : result.rows) {
    const ObservableSet& o = row.obs;
    ojson r;
    r["f_d_ghz"] = row.f_d;
    r["amplitude_ghz"] = row.amplitude;
    r["variant"] = variant_name(row.variant);
    put(r, "omega_ge_ghz", o.omega_ge);
    put(r, "omega_ef_ghz", o.omega_ef);
    put(r, "omega_gf_ghz", o.omega_gf);
    put(r, "omega_gd_ghz", o.omega_gd);
    put(r, "omega_ge0_ghz", o.omega_ge0);
    put(r, "omega_ef0_ghz", o.omega_ef0);
    put(r, "omega_gf0_ghz", o.omega_gf0);
    put(r, "omega_gd0_ghz", o.omega_gd0);
    put(r, "omega_r_g_ghz", o.omega_r_g);
    put(r, "omega_r_e_ghz", o.omega_r_e);
    put_mhz(r, "lamb_ge_mhz", o.lamb_ge);
    put_mhz(r, "lamb_gf_mhz", o.lamb_gf);
    put_mhz(r, "lamb_gd_mhz", o.lamb_gd);
    put_mhz(r, "lamb_ef_mhz", o.lamb_ef);
    put_mhz(r, "pull_mhz", o.pull);
    put_mhz(r, "chi_mhz", o.chi);
    put_mhz(r, "anharm0_mhz", o.anharm0);
    put(r, "zeta", o.zeta);
    put(r, "zeta_ratio", o.zeta_ratio);
    put_mhz(r, "chi_scaled_mhz", o.chi_scaled);
    if (o.chi_singular) r["chi_singular"] = true;
    if (row.eta) {
      r["eta_ef0"] = row.eta->eta_ef0;
      r["eta_ed0"] = row.eta->eta_ed0;
      r["eta_ef"] = row.eta->eta_ef;
      r["eta_ed"] = row.eta->eta_ed;
      r["eta_window_max_ghz"] = row.eta->window_max;
      r["eta_quad_residual"] = row.eta->quad_residual;
    }
    put(r, "did_mhz", row.did_mhz);
    put(r, "linewidth_mhz", row.linewidth_mhz);
    if (row.did_near_resonator) r["did_near_resonator"] = true;
    put(r, "g_static_ge_abs_ghz", row.g_static_ge_abs);
    put(r, "dlc_g_abs_ghz", row.dlc_g_abs);
    put(r, "dlc_e_abs_ghz", row.dlc_e_abs);
    put(r, "offclass_max_ghz", row.offclass_max);
    r["dispersive_ok"] = row.dispersive_ok;
    if (o.tie_flagged) r["tie_flagged"] = true;
    if (!o.broken_labels.empty()) r["broken_labels"] = o.broken_labels;
    if (!row.error.empty()) r["error"] = row.error;
    rows.push_back(std::move(r));
  }
  root["rows"] = rows;
  return root.dump(2) + "\n";
}

std::vector<std::filesystem::path> write_outputs(const SweepResult& result,
                                                 const std::filesystem::path& outdir) {
  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + outdir.string() + "'");

  std::vector<std::filesystem::path> written;
  for (const std::string& format : result.config.output.formats) {
    if (std::find_if(written.begin(), written.end(), [&](const auto& p) {
          return p.extension() == "." + format;
        }) != written.end())
      continue;
    const std::filesystem::path path = outdir / (result.config.output.stem + "." + format);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << (format == "csv" ? to_csv(result) : to_json(result));
    written.push_back(path);
  }
  return written;
}

}  // namespace lambshift
