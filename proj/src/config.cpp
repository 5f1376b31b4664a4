#include "lambshift/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace lambshift {

const std::vector<std::string> kKnownObservables = {"lamb", "pull", "chi",    "anharm",
                                                    "zeta", "eta",  "did",    "coupling"};

bool SweepConfig::has_observable(const std::string& name) const {
  return std::find(observables.begin(), observables.end(), name) != observables.end();
}

void SweepConfig::validate() const {
  device.validate();
  decoherence.validate();

  if (drive_frequencies.empty()) throw ConfigError("at least one drive frequency is required");
  for (double f : drive_frequencies)
    if (f <= 0.0) throw ConfigError("drive frequencies must be positive");

  if (amplitudes.empty()) throw ConfigError("the amplitude grid is empty");
  if (amplitudes.front() != 0.0)
    throw ConfigError("the amplitude grid must start at 0 (the zero-drive baseline row)");
  for (size_t i = 1; i < amplitudes.size(); ++i)
    if (amplitudes[i] <= amplitudes[i - 1])
      throw ConfigError("the amplitude grid must be strictly increasing");

  if (variants.empty()) throw ConfigError("at least one model variant is required");
  if (observables.empty()) throw ConfigError("at least one observable is required");
  for (const std::string& name : observables)
    if (std::find(kKnownObservables.begin(), kKnownObservables.end(), name) ==
        kKnownObservables.end())
      throw ConfigError("unknown observable '" + name + "'");
  if (has_observable("eta") && device.n_q < 4)
    throw ConfigError(
        "the eta observable needs at least four transmon levels; a two-level truncation leaves "
        "the Stark ratios undefined");

  if (solver.prop.steps_per_period < 4)
    throw ConfigError("steps_per_period must be at least 4");
  if (solver.prop.tol <= 0.0) throw ConfigError("the propagator tolerance must be positive");
  if (solver.k_max < 1) throw ConfigError("the harmonic cutoff must be at least 1");
  if (solver.fourier_samples < 2) throw ConfigError("fourier_samples must be at least 2");
  if (solver.fourier_steps_per_sample < 1)
    throw ConfigError("fourier_steps_per_sample must be at least 1");
  if (solver.min_step <= 0.0 || solver.max_step < solver.min_step)
    throw ConfigError("tracking steps must satisfy 0 < min_step <= max_step");
  if (solver.overlap_threshold <= 0.0 || solver.overlap_threshold > 1.0)
    throw ConfigError("the overlap threshold must lie in (0, 1]");
  if (solver.tie_window < 0.0) throw ConfigError("the tie window must be non-negative");

  if (output.stem.empty() || output.stem.find('/') != std::string::npos)
    throw ConfigError("the output stem must be a plain file name");
  if (output.formats.empty()) throw ConfigError("at least one output format is required");
  for (const std::string& fmt : output.formats)
    if (fmt != "csv" && fmt != "json")
      throw ConfigError("unknown output format '" + fmt + "' (expected csv or json)");
}

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* k) { return it.key() == k; }) == allowed.end())
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

const json& expect(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(where + " is missing the required key '" + key + "'");
  return *it;
}

double as_number(const json& v, const std::string& what) {
  if (!v.is_number()) throw ConfigError(what + " must be a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& what) {
  if (!v.is_number_integer()) throw ConfigError(what + " must be an integer");
  return v.get<int>();
}

std::vector<double> as_number_list(const json& v, const std::string& what) {
  if (!v.is_array() || v.empty()) throw ConfigError(what + " must be a non-empty array of numbers");
  std::vector<double> out;
  for (const json& x : v) out.push_back(as_number(x, what + " entries"));
  return out;
}

DeviceSpec parse_device(const json& j) {
  reject_unknown(j, "device",
                 {"transmon_transitions_ghz", "transmon_levels_ghz", "duffing", "resonator_ghz",
                  "coupling_ghz", "n_q", "n_r"});
  const int sources = j.count("transmon_transitions_ghz") + j.count("transmon_levels_ghz") +
                      j.count("duffing");
  if (sources > 1)
    throw ConfigError(
        "device accepts only one of transmon_transitions_ghz, transmon_levels_ghz, duffing");

  DeviceSpec dev;
  dev.n_r = j.count("n_r") ? as_int(j.at("n_r"), "n_r") : 6;
  dev.resonator_freq =
      j.count("resonator_ghz") ? as_number(j.at("resonator_ghz"), "resonator_ghz") : 4.335;
  dev.coupling_g = j.count("coupling_ghz") ? as_number(j.at("coupling_ghz"), "coupling_ghz") : 0.248;

  if (j.count("transmon_levels_ghz")) {
    dev.transmon_levels = as_number_list(j.at("transmon_levels_ghz"), "transmon_levels_ghz");
    dev.n_q = j.count("n_q") ? as_int(j.at("n_q"), "n_q")
                             : static_cast<int>(dev.transmon_levels.size());
  } else {
    dev.n_q = j.count("n_q") ? as_int(j.at("n_q"), "n_q") : 6;
    if (j.count("duffing")) {
      const json& d = j.at("duffing");
      reject_unknown(d, "device.duffing", {"omega_ge_ghz", "anharm_mhz"});
      dev.transmon_levels =
          duffing_levels(as_number(expect(d, "omega_ge_ghz", "device.duffing"), "omega_ge_ghz"),
                         as_number(expect(d, "anharm_mhz", "device.duffing"), "anharm_mhz") * 1e-3,
                         dev.n_q);
    } else {
      std::vector<double> transitions = {5.869, 5.708, 5.539};
      if (j.count("transmon_transitions_ghz"))
        transitions = as_number_list(j.at("transmon_transitions_ghz"), "transmon_transitions_ghz");
      dev.transmon_levels =
          levels_from_transitions(transitions, dev.n_q, &dev.levels_extrapolated);
    }
  }
  return dev;
}

std::vector<double> parse_amplitudes(const json& j) {
  reject_unknown(j, "amplitude_grid_ghz", {"start", "stop", "points", "list"});
  if (j.count("list")) {
    if (j.size() != 1)
      throw ConfigError("amplitude_grid_ghz accepts either a list or start/stop/points, not both");
    return as_number_list(j.at("list"), "amplitude_grid_ghz.list");
  }
  const double start = as_number(expect(j, "start", "amplitude_grid_ghz"), "start");
  const double stop = as_number(expect(j, "stop", "amplitude_grid_ghz"), "stop");
  const int points = as_int(expect(j, "points", "amplitude_grid_ghz"), "points");
  if (points < 1) throw ConfigError("amplitude_grid_ghz.points must be at least 1");
  if (stop < start) throw ConfigError("amplitude_grid_ghz.stop must not be below start");
  std::vector<double> grid;
  for (int i = 0; i < points; ++i)
    grid.push_back(points == 1 ? start : start + (stop - start) * i / (points - 1));
  return grid;
}

}  // namespace

SweepConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(root, "the config",
                 {"device", "drive_frequencies_ghz", "amplitude_grid_ghz", "variants",
                  "observables", "decoherence", "solver", "output"});

  SweepConfig cfg;
  cfg.device = root.count("device") ? parse_device(root.at("device")) : default_device();
  cfg.drive_frequencies = as_number_list(
      expect(root, "drive_frequencies_ghz", "the config"), "drive_frequencies_ghz");
  cfg.amplitudes = parse_amplitudes(expect(root, "amplitude_grid_ghz", "the config"));

  if (root.count("variants")) {
    const json& v = root.at("variants");
    if (!v.is_array() || v.empty())
      throw ConfigError("variants must be a non-empty array of names");
    for (const json& name : v) {
      if (!name.is_string()) throw ConfigError("variants entries must be strings");
      auto variant = variant_from_name(name.get<std::string>());
      if (!variant)
        throw ConfigError("unknown variant '" + name.get<std::string>() +
                          "' (expected full, no_resonator, or static_plus_dlc)");
      cfg.variants.push_back(*variant);
    }
  } else {
    cfg.variants = {Variant::Full};
  }

  if (root.count("observables")) {
    const json& v = root.at("observables");
    if (!v.is_array() || v.empty())
      throw ConfigError("observables must be a non-empty array of names");
    for (const json& name : v) {
      if (!name.is_string()) throw ConfigError("observables entries must be strings");
      cfg.observables.push_back(name.get<std::string>());
    }
  } else {
    cfg.observables = kKnownObservables;
  }

  if (root.count("decoherence")) {
    const json& d = root.at("decoherence");
    reject_unknown(d, "decoherence",
                   {"gamma1_q_mhz", "gamma_phi_q_mhz", "gamma1_r_mhz", "gamma1_r_scale"});
    if (d.count("gamma1_q_mhz"))
      cfg.decoherence.gamma1_q = as_number(d.at("gamma1_q_mhz"), "gamma1_q_mhz");
    if (d.count("gamma_phi_q_mhz"))
      cfg.decoherence.gamma_phi_q = as_number(d.at("gamma_phi_q_mhz"), "gamma_phi_q_mhz");
    if (d.count("gamma1_r_mhz"))
      cfg.decoherence.gamma1_r_at_res = as_number(d.at("gamma1_r_mhz"), "gamma1_r_mhz");
    if (d.count("gamma1_r_scale"))
      cfg.decoherence.gamma1_r_scale = as_number(d.at("gamma1_r_scale"), "gamma1_r_scale");
  }

  if (root.count("solver")) {
    const json& s = root.at("solver");
    reject_unknown(s, "solver",
                   {"steps_per_period", "tol", "k_max", "fourier_samples",
                    "fourier_steps_per_sample", "overlap_threshold", "min_step_ghz",
                    "max_step_ghz", "tie_window"});
    if (s.count("steps_per_period"))
      cfg.solver.prop.steps_per_period = as_int(s.at("steps_per_period"), "steps_per_period");
    if (s.count("tol")) cfg.solver.prop.tol = as_number(s.at("tol"), "tol");
    if (s.count("k_max")) cfg.solver.k_max = as_int(s.at("k_max"), "k_max");
    if (s.count("fourier_samples"))
      cfg.solver.fourier_samples = as_int(s.at("fourier_samples"), "fourier_samples");
    if (s.count("fourier_steps_per_sample"))
      cfg.solver.fourier_steps_per_sample =
          as_int(s.at("fourier_steps_per_sample"), "fourier_steps_per_sample");
    if (s.count("overlap_threshold"))
      cfg.solver.overlap_threshold = as_number(s.at("overlap_threshold"), "overlap_threshold");
    if (s.count("min_step_ghz")) cfg.solver.min_step = as_number(s.at("min_step_ghz"), "min_step_ghz");
    if (s.count("max_step_ghz")) cfg.solver.max_step = as_number(s.at("max_step_ghz"), "max_step_ghz");
    if (s.count("tie_window")) cfg.solver.tie_window = as_number(s.at("tie_window"), "tie_window");
  }

  if (root.count("output")) {
    const json& o = root.at("output");
    reject_unknown(o, "output", {"stem", "formats", "dir"});
    if (o.count("stem")) {
      if (!o.at("stem").is_string()) throw ConfigError("output.stem must be a string");
      cfg.output.stem = o.at("stem").get<std::string>();
    }
    if (o.count("dir")) {
      if (!o.at("dir").is_string()) throw ConfigError("output.dir must be a string");
      cfg.output.dir = o.at("dir").get<std::string>();
    }
    if (o.count("formats")) {
      const json& f = o.at("formats");
      if (!f.is_array() || f.empty())
        throw ConfigError("output.formats must be a non-empty array");
      cfg.output.formats.clear();
      for (const json& fmt : f) {
        if (!fmt.is_string()) throw ConfigError("output.formats entries must be strings");
        cfg.output.formats.push_back(fmt.get<std::string>());
      }
    }
  }

  cfg.validate();
  return cfg;
}

SweepConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file '" + file.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace lambshift
