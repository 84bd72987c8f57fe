#ifndef VSTRESS_CONFIG_HPP
#define VSTRESS_CONFIG_HPP

#include <filesystem>
#include <optional>
#include <string>

#include "vstress/indices.hpp"
#include "vstress/solar.hpp"

namespace vstress::cli {

/// Run-time knobs. Every fixed constant of the index formulas and the
/// clustering scan is surfaced here; CLI flags override file values.
struct PipelineConfig {
  std::optional<std::filesystem::path> villages;
  std::optional<std::filesystem::path> surfaces;
  std::optional<std::filesystem::path> crops;
  std::optional<std::filesystem::path> raster_manifest;
  std::filesystem::path out_dir = "out";

  double slope_threshold = indices::kDefaultSlopeThresholdDeg;
  double srei_threshold = indices::kDefaultSreiThreshold;
  indices::WalkabilityWeights wi_weights;
  solar::SolarParams solar;

  int k_min = 2;
  int k_max = 16;
  int chosen_k = 4;
};

/// Key = value lines, '#' comments. Relative paths resolve against the config
/// file's directory. Unknown keys are errors.
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace vstress::cli

#endif
