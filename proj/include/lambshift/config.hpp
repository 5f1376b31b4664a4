#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lambshift/oracle.hpp"

namespace lambshift {

struct OutputSpec {
  std::string stem = "sweep";
  std::vector<std::string> formats = {"csv", "json"};
  std::string dir = ".";
};

// names accepted in the "observables" config list
extern const std::vector<std::string> kKnownObservables;

struct SweepConfig {
  DeviceSpec device;
  std::vector<double> drive_frequencies;  // GHz
  std::vector<double> amplitudes;         // GHz, ascending, starting at 0
  std::vector<Variant> variants;
  std::vector<std::string> observables;
  DecoherenceParams decoherence;
  SolverSettings solver;
  OutputSpec output;

  bool has_observable(const std::string& name) const;
  void validate() const;  // throws ConfigError
};

// strict parse: unknown keys anywhere are rejected
SweepConfig parse_config(const std::string& json_text);
SweepConfig load_config(const std::filesystem::path& file);

}  // namespace lambshift
