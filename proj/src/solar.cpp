#include "vstress/solar.hpp"

#include <algorithm>
#include <cmath>

#include "vstress/error.hpp"

namespace vstress::solar {

namespace {

constexpr double kDegToRad = M_PI / 180.0;
constexpr double kRadToDeg = 180.0 / M_PI;

double declination_deg(int day_of_year) {
  return 23.45 * std::sin(2.0 * M_PI * (284.0 + day_of_year) / 365.0);
}

void validate(const SolarParams& p) {
  if (p.latitude_deg < -90.0 || p.latitude_deg > 90.0)
    throw ValidationError("latitude out of range [-90, 90]");
  if (p.day_of_year < 1 || p.day_of_year > 366)
    throw ValidationError("day_of_year out of range [1, 366]");
  if (p.diffuse_fraction < 0.0 || p.diffuse_fraction > 1.0)
    throw ValidationError("diffuse_fraction out of range [0, 1]");
  if (p.horizon_directions < 8)
    throw ValidationError("horizon_directions must be >= 8");
  if (!(p.time_step_hours > 0.0))
    throw ValidationError("time_step must be > 0");
  if (p.direct_normal_irradiance < 0.0)
    throw ValidationError("direct_normal_irradiance must be >= 0");
}

}  // namespace

SunPosition sun_position(double latitude_deg, int day_of_year, double solar_hour) {
  double phi = latitude_deg * kDegToRad;
  double delta = declination_deg(day_of_year) * kDegToRad;
  double h = (solar_hour - 12.0) * 15.0 * kDegToRad;
  double sin_alpha = std::sin(phi) * std::sin(delta) + std::cos(phi) * std::cos(delta) * std::cos(h);
  double alpha = std::asin(std::clamp(sin_alpha, -1.0, 1.0));
  // azimuth from north, clockwise; 180 deg = due south at noon in the north
  double az = std::atan2(std::sin(h), std::cos(h) * std::sin(phi) - std::tan(delta) * std::cos(phi));
  double az_deg = az * kRadToDeg + 180.0;
  if (az_deg >= 360.0)
    az_deg -= 360.0;
  return {alpha * kRadToDeg, az_deg};
}

std::vector<double> horizon_angles(const raster::RasterGrid& dem, int row, int col,
                                   int directions) {
  std::vector<double> out(static_cast<std::size_t>(directions), 0.0);
  double z0 = dem.at(row, col);
  int max_steps = dem.ncols + dem.nrows;  // beyond the diagonal
  for (int d = 0; d < directions; ++d) {
    double az = d * 360.0 / directions * kDegToRad;
    double de = std::sin(az);   // east = +col
    double dn = std::cos(az);   // north = -row
    double best = 0.0;
    for (int t = 1; t <= max_steps; ++t) {
      int cc = col + static_cast<int>(std::lround(de * t));
      int rr = row - static_cast<int>(std::lround(dn * t));
      if (cc < 0 || cc >= dem.ncols || rr < 0 || rr >= dem.nrows)
        break;
      if (dem.is_nodata(rr, cc))
        continue;
      double dz = dem.at(rr, cc) - z0;
      if (dz <= 0.0)
        continue;
      double angle = std::atan2(dz, t * dem.cellsize);
      if (angle > best)
        best = angle;
    }
    out[static_cast<std::size_t>(d)] = best * kRadToDeg;
  }
  return out;
}

raster::RasterGrid daily_insolation(const raster::RasterGrid& dem, const SolarParams& params) {
  validate(params);
  if (dem.ncols < 1 || dem.nrows < 1 || dem.cells.empty())
    throw ValidationError("daily_insolation: empty grid");

  raster::RasterGrid slope = raster::slope_degrees(dem);
  raster::RasterGrid out = dem;

  // Precompute sun track at time-step midpoints.
  struct Step {
    double elevation_deg;
    int direction_bucket;
    double cos_zenith;
    double sin_zenith;
    double azimuth_deg;
  };
  std::vector<Step> track;
  int nsteps = static_cast<int>(std::ceil(24.0 / params.time_step_hours));
  for (int i = 0; i < nsteps; ++i) {
    double t = (i + 0.5) * params.time_step_hours;
    if (t >= 24.0)
      break;
    SunPosition sp = sun_position(params.latitude_deg, params.day_of_year, t);
    if (sp.elevation_deg <= 0.0)
      continue;
    double sector = 360.0 / params.horizon_directions;
    int bucket = static_cast<int>(std::lround(sp.azimuth_deg / sector)) % params.horizon_directions;
    double zen = (90.0 - sp.elevation_deg) * kDegToRad;
    track.push_back({sp.elevation_deg, bucket, std::cos(zen), std::sin(zen), sp.azimuth_deg});
  }

  double direct_share = 1.0 - params.diffuse_fraction;
  auto clampi = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };

  for (int r = 0; r < dem.nrows; ++r) {
    for (int c = 0; c < dem.ncols; ++c) {
      if (slope.is_nodata(r, c)) {
        out.at(r, c) = dem.nodata;
        continue;
      }

      std::vector<double> horizon = horizon_angles(dem, r, c, params.horizon_directions);
      double svf = 0.0;
      for (double h : horizon) {
        double ch = std::cos(h * kDegToRad);
        svf += ch * ch;
      }
      svf /= params.horizon_directions;

      // Surface normal from the Horn gradient (east/north components).
      double dzdx = ((dem.at(clampi(r - 1, dem.nrows - 1), clampi(c + 1, dem.ncols - 1)) +
                      2 * dem.at(r, clampi(c + 1, dem.ncols - 1)) +
                      dem.at(clampi(r + 1, dem.nrows - 1), clampi(c + 1, dem.ncols - 1))) -
                     (dem.at(clampi(r - 1, dem.nrows - 1), clampi(c - 1, 0)) +
                      2 * dem.at(r, clampi(c - 1, 0)) +
                      dem.at(clampi(r + 1, dem.nrows - 1), clampi(c - 1, 0)))) /
                    (8.0 * dem.cellsize);
      double dzds = ((dem.at(clampi(r + 1, dem.nrows - 1), clampi(c - 1, 0)) +
                      2 * dem.at(clampi(r + 1, dem.nrows - 1), c) +
                      dem.at(clampi(r + 1, dem.nrows - 1), clampi(c + 1, dem.ncols - 1))) -
                     (dem.at(clampi(r - 1, dem.nrows - 1), clampi(c - 1, 0)) +
                      2 * dem.at(clampi(r - 1, dem.nrows - 1), c) +
                      dem.at(clampi(r - 1, dem.nrows - 1), clampi(c + 1, dem.ncols - 1)))) /
                    (8.0 * dem.cellsize);
      // dzds is the south-facing derivative (+row = south); the surface faces
      // the downhill direction.
      double beta = slope.at(r, c) * kDegToRad;
      double facing_deg = std::atan2(-dzdx, dzds) * kRadToDeg;  // from north, clockwise
      if (facing_deg < 0.0)
        facing_deg += 360.0;

      double energy = 0.0;
      for (const Step& s : track) {
        // diffuse: isotropic sky share on the unobstructed fraction
        energy += params.direct_normal_irradiance * params.diffuse_fraction * svf *
                  params.time_step_hours;
        if (s.elevation_deg <= horizon[static_cast<std::size_t>(s.direction_bucket)])
          continue;
        double cos_theta = s.cos_zenith * std::cos(beta) +
                           s.sin_zenith * std::sin(beta) *
                               std::cos((s.azimuth_deg - facing_deg) * kDegToRad);
        if (cos_theta > 0.0)
          energy += params.direct_normal_irradiance * direct_share * cos_theta *
                    params.time_step_hours;
      }
      out.at(r, c) = energy;
    }
  }
  return out;
}

}  // namespace vstress::solar
