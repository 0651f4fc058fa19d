#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "ecsim/acquisition.hpp"
#include "ecsim/forward_model.hpp"
#include "ecsim/imaging.hpp"

namespace ecsim {

enum class AcquisitionMode { Standard, Hadamard };

/// Fully validated scenario: the paper setup is the all-defaults config.
struct ScenarioConfig {
  InclusionModel inclusion;
  PolarizationData polarization;
  SensorArray array;

  std::optional<double> sigma_n;       // exactly one of these two is set
  std::optional<double> target_ratio;  // sigma1(A0) / sigma_n
  std::uint64_t seed = 1;
  AcquisitionMode acquisition = AcquisitionMode::Hadamard;

  double delta = 0.05;
  int trials = 1000;

  SearchGrid grid;
  int music_rank = 3;

  std::string out_dir = "out";

  nlohmann::json canonical;  // defaults filled in; hashed into output headers
  std::uint64_t hash() const;

  /// Noise level: sigma_n directly, or sigma1(A0) / target_ratio.
  double resolve_sigma_n(double sigma1_a0) const;
};

/// Scenario with every default (the reference experiment).
ScenarioConfig default_config();

/// Parses and validates; reports every violated invariant at once.
/// Unknown keys and type mismatches are schema errors naming the field.
ScenarioConfig parse_config(const nlohmann::json& j);

/// Reads a JSON config file. Missing fields fall back to defaults.
ScenarioConfig load_config(const std::string& path);

}  // namespace ecsim
