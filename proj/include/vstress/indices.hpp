#ifndef VSTRESS_INDICES_HPP
#define VSTRESS_INDICES_HPP

#include <optional>
#include <string>
#include <vector>

#include "vstress/raster.hpp"

namespace vstress::classify {
struct StressMatrix;
}

namespace vstress::indices {

enum class AdminCategory { ADV, SCV };

std::string to_string(AdminCategory c);
AdminCategory admin_from_string(const std::string& s);

/// Road-surface shares; must sum to 1 within 1e-9.
struct SurfaceComposition {
  double paved_share = 0.0;
  double hardened_share = 0.0;
  double rough_share = 0.0;
};

/// Surface-quality weights for the walkability score.
struct WalkabilityWeights {
  double paved = 1.0;
  double hardened = 0.6;
  double rough = 0.3;
};

struct CropComponent {
  double labor_weight = 0.0;  // 1.0 manual cash crop, 0.6 orchard, 0.3 mechanized
  double area_share = 0.0;
};

struct CropSystem {
  std::vector<CropComponent> components;  // area shares sum to 1 within 1e-9
  double temporal_concentration = 0.0;    // peak-window share of field labor, [0,1]
  double labor_share = 0.0;               // agricultural workers / labor force, [0,1]
};

struct VillageIndices {
  std::string id;
  std::string name;
  AdminCategory admin = AdminCategory::ADV;
  std::optional<double> sgi;
  std::optional<double> srei;
  std::optional<double> wi;
  std::optional<double> aii;
};

constexpr double kDefaultSlopeThresholdDeg = 4.8;
constexpr double kDefaultSreiThreshold = 20000.0;  // kJ/m^2/day

/// Fraction of village area with slope strictly above the threshold.
double compute_sgi(const raster::RasterGrid& slope, const raster::ZoneMask& mask,
                   double threshold_deg = kDefaultSlopeThresholdDeg);

/// Fraction of village area with daily insolation strictly above the threshold.
double compute_srei(const raster::RasterGrid& insolation, const raster::ZoneMask& mask,
                    double threshold = kDefaultSreiThreshold);

/// Surface-weighted walkability score; [0.3, 1.0] under the default weights.
double compute_wi(const SurfaceComposition& comp,
                  const WalkabilityWeights& weights = WalkabilityWeights{});

/// Multiplicative composite: (sum of labor_weight * area_share)
/// * temporal_concentration * labor_share.
double compute_aii(const CropSystem& crop);

/// Order records by id into the n x 4 stress table [SGI, SREI, WI, AII].
/// Requires >= 2 records, unique ids, and all four indices present.
classify::StressMatrix assemble_stress_table(const std::vector<VillageIndices>& records);

}  // namespace vstress::indices

#endif
