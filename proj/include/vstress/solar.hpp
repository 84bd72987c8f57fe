#ifndef VSTRESS_SOLAR_HPP
#define VSTRESS_SOLAR_HPP

#include <vector>

#include "vstress/raster.hpp"

namespace vstress::solar {

/// Clear-sky daily insolation model. The beam irradiance is split into a
/// direct share (1 - diffuse_fraction) received when the sun clears the
/// local horizon, and an isotropic diffuse share weighted by the sky view
/// factor. Threshold *fractions* are the downstream product, so ordering
/// fidelity across cells matters more than absolute radiometry; every
/// parameter is configurable.
struct SolarParams {
  double latitude_deg = 35.5;
  int day_of_year = 172;                      // June solstice by default
  double direct_normal_irradiance = 3600.0;   // kJ/m^2/h (~1 kW/m^2)
  double diffuse_fraction = 0.3;
  int horizon_directions = 32;
  double time_step_hours = 0.5;
};

struct SunPosition {
  double elevation_deg;
  double azimuth_deg;  // degrees from north, clockwise
};

/// Declination/hour-angle model at local solar time.
SunPosition sun_position(double latitude_deg, int day_of_year, double solar_hour);

/// Horizon elevation angles (degrees, >= 0) for one cell, one entry per
/// direction: azimuth d * 360/directions from north, clockwise. Computed by
/// marching whole-cell steps and taking the maximum elevation angle.
std::vector<double> horizon_angles(const raster::RasterGrid& dem, int row, int col,
                                   int directions);

/// Daily insolation (kJ/m^2/day) per cell: time-step integration of direct
/// beam on the slope/aspect-tilted surface (occluded by per-direction horizon
/// angles) plus isotropic diffuse on the unobstructed sky fraction.
/// Deterministic for fixed inputs.
raster::RasterGrid daily_insolation(const raster::RasterGrid& dem, const SolarParams& params);

}  // namespace vstress::solar

#endif
