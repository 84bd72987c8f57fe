#include "vstress/indices.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "vstress/classify.hpp"
#include "vstress/error.hpp"

namespace vstress::indices {

namespace {
constexpr double kShareTolerance = 1e-9;
}

std::string to_string(AdminCategory c) {
  return c == AdminCategory::ADV ? "ADV" : "SCV";
}

AdminCategory admin_from_string(const std::string& s) {
  if (s == "ADV")
    return AdminCategory::ADV;
  if (s == "SCV")
    return AdminCategory::SCV;
  throw ValidationError("unknown admin category: '" + s + "' (expected ADV or SCV)");
}

double compute_sgi(const raster::RasterGrid& slope, const raster::ZoneMask& mask,
                   double threshold_deg) {
  return raster::zone_fraction_above(slope, mask, threshold_deg);
}

double compute_srei(const raster::RasterGrid& insolation, const raster::ZoneMask& mask,
                    double threshold) {
  return raster::zone_fraction_above(insolation, mask, threshold);
}

double compute_wi(const SurfaceComposition& comp, const WalkabilityWeights& weights) {
  for (double s : {comp.paved_share, comp.hardened_share, comp.rough_share})
    if (s < 0.0 || s > 1.0)
      throw ValidationError("surface share out of range [0, 1]");
  double total = comp.paved_share + comp.hardened_share + comp.rough_share;
  if (std::abs(total - 1.0) > kShareTolerance)
    throw ValidationError("surface shares must sum to 1");
  return comp.paved_share * weights.paved + comp.hardened_share * weights.hardened +
         comp.rough_share * weights.rough;
}

double compute_aii(const CropSystem& crop) {
  if (crop.components.empty())
    throw ValidationError("crop system has no components");
  double area_total = 0.0;
  double weighted = 0.0;
  for (const CropComponent& c : crop.components) {
    bool known_weight = std::abs(c.labor_weight - 1.0) < kShareTolerance ||
                        std::abs(c.labor_weight - 0.6) < kShareTolerance ||
                        std::abs(c.labor_weight - 0.3) < kShareTolerance;
    if (!known_weight)
      throw ValidationError("crop labor weight must be 1.0, 0.6 or 0.3");
    if (c.area_share < 0.0 || c.area_share > 1.0)
      throw ValidationError("crop area share out of range [0, 1]");
    area_total += c.area_share;
    weighted += c.labor_weight * c.area_share;
  }
  if (std::abs(area_total - 1.0) > kShareTolerance)
    throw ValidationError("crop area shares must sum to 1");
  if (crop.temporal_concentration < 0.0 || crop.temporal_concentration > 1.0)
    throw ValidationError("temporal_concentration out of range [0, 1]");
  if (crop.labor_share < 0.0 || crop.labor_share > 1.0)
    throw ValidationError("labor_share out of range [0, 1]");
  return weighted * crop.temporal_concentration * crop.labor_share;
}

classify::StressMatrix assemble_stress_table(const std::vector<VillageIndices>& records) {
  if (records.size() < 2)
    throw ValidationError("stress table needs at least 2 villages");

  std::set<std::string> seen;
  for (const auto& r : records) {
    if (!seen.insert(r.id).second)
      throw ValidationError("duplicate village id: " + r.id);
  }

  std::vector<const VillageIndices*> ordered;
  ordered.reserve(records.size());
  for (const auto& r : records)
    ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(),
            [](const VillageIndices* a, const VillageIndices* b) { return a->id < b->id; });

  classify::StressMatrix m;
  m.data.resize(static_cast<Eigen::Index>(ordered.size()), 4);
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    const VillageIndices& v = *ordered[i];
    const std::array<std::pair<const char*, const std::optional<double>*>, 4> cols = {
        std::pair{"SGI", &v.sgi}, std::pair{"SREI", &v.srei}, std::pair{"WI", &v.wi},
        std::pair{"AII", &v.aii}};
    for (std::size_t j = 0; j < 4; ++j) {
      const auto& [label, value] = cols[j];
      if (!value->has_value())
        throw ValidationError(std::string("missing index ") + label + " for village " + v.id);
      if (!std::isfinite(**value))
        throw ValidationError(std::string("non-finite ") + label + " for village " + v.id);
      m.data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = **value;
    }
    if (*v.sgi < 0.0 || *v.sgi > 1.0 || *v.srei < 0.0 || *v.srei > 1.0 || *v.aii < 0.0 ||
        *v.aii > 1.0)
      throw ValidationError("index out of range [0, 1] for village " + v.id);
    if (*v.wi < 0.3 || *v.wi > 1.0)
      throw ValidationError("WI out of range [0.3, 1.0] for village " + v.id);
    m.ids.push_back(v.id);
    m.names.push_back(v.name);
    m.admin.push_back(v.admin);
  }
  return m;
}

}  // namespace vstress::indices
