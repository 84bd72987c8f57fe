#ifndef VSTRESS_PIPELINE_HPP
#define VSTRESS_PIPELINE_HPP

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "vstress/classify.hpp"
#include "vstress/config.hpp"
#include "vstress/indices.hpp"

namespace vstress::cli {

std::vector<indices::VillageIndices> load_villages(const std::filesystem::path& path);
std::map<std::string, indices::SurfaceComposition> load_surfaces(
    const std::filesystem::path& path);
std::map<std::string, indices::CropSystem> load_crops(const std::filesystem::path& path);

struct RasterEntry {
  std::filesystem::path dem;
  std::filesystem::path mask;
};
std::map<std::string, RasterEntry> load_raster_manifest(const std::filesystem::path& path);

/// village_id -> cluster label from an assignment CSV.
std::map<std::string, int> load_assignment(const std::filesystem::path& path);

/// Fill missing indices from rasters/surfaces/crops; values already present
/// in villages.csv pass through. Missing inputs name the village and index.
std::vector<indices::VillageIndices> resolve_indices(const PipelineConfig& cfg);

classify::StressMatrix load_stress_table(const PipelineConfig& cfg);

// Subcommand bodies; they throw on failure (the CLI maps exceptions to exit
// codes) and return the paths they wrote.
std::vector<std::filesystem::path> cmd_indices(const PipelineConfig& cfg);
std::vector<std::filesystem::path> cmd_correlate(const PipelineConfig& cfg);
std::vector<std::filesystem::path> cmd_lda(const PipelineConfig& cfg);
std::vector<std::filesystem::path> cmd_cluster(const PipelineConfig& cfg);
std::vector<std::filesystem::path> cmd_compare(const PipelineConfig& cfg,
                                               const std::filesystem::path& labels_a,
                                               const std::filesystem::path& labels_b);
std::vector<std::filesystem::path> cmd_pipeline(const PipelineConfig& cfg);

/// Recompute every numeric cell of the emitted Table-2-shaped outputs from
/// the emitted per-village CSV; throws ValidationError on any mismatch.
/// Returns the number of checked cells.
std::size_t cmd_audit(const PipelineConfig& cfg);

}  // namespace vstress::cli

#endif
