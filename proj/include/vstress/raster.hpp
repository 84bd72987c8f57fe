#ifndef VSTRESS_RASTER_HPP
#define VSTRESS_RASTER_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace vstress::raster {

/// Rectangular cell grid in an ESRI-style ASCII layout. Row 0 is the
/// northernmost row (first data row in the file); (xllcorner, yllcorner) is
/// the lower-left corner of the grid in projected meters. Cell values carry
/// whatever unit the layer has (m elevation, degrees slope, kJ/m^2/day).
struct RasterGrid {
  int ncols = 0;
  int nrows = 0;
  double xllcorner = 0.0;
  double yllcorner = 0.0;
  double cellsize = 0.0;
  double nodata = -9999.0;
  std::vector<double> cells;  // row-major, nrows * ncols

  double at(int row, int col) const { return cells[static_cast<std::size_t>(row) * ncols + col]; }
  double& at(int row, int col) { return cells[static_cast<std::size_t>(row) * ncols + col]; }
  bool is_nodata(int row, int col) const { return at(row, col) == nodata; }
  std::size_t size() const { return cells.size(); }
};

/// Boolean village footprint congruent with a RasterGrid.
struct ZoneMask {
  std::string village_id;
  int ncols = 0;
  int nrows = 0;
  std::vector<std::uint8_t> mask;

  bool at(int row, int col) const { return mask[static_cast<std::size_t>(row) * ncols + col] != 0; }
};

/// Parse an ESRI ASCII grid: six header lines (ncols, nrows, xllcorner,
/// yllcorner, cellsize, NODATA_value, any order, case-insensitive keys)
/// followed by nrows*ncols whitespace-separated values. Errors name the
/// offending line.
RasterGrid parse_ascii_grid(std::istream& in, const std::string& origin = "<grid>");
RasterGrid parse_ascii_grid_file(const std::string& path);

void write_ascii_grid(std::ostream& out, const RasterGrid& grid);

/// Interpret a 0/1 grid as a zone mask. Nonzero, non-nodata cells are inside
/// the zone. Fails when no cell is inside.
ZoneMask mask_from_grid(const RasterGrid& grid, const std::string& village_id);

/// Per-cell slope in degrees from the 3x3 Horn kernel. Border cells use edge
/// replication; any cell whose 3x3 neighborhood touches nodata is nodata.
RasterGrid slope_degrees(const RasterGrid& dem);

/// Fraction of masked, non-nodata cells strictly above `threshold`.
/// Throws NumericError("empty zone") when the mask covers no valid cell.
double zone_fraction_above(const RasterGrid& grid, const ZoneMask& mask, double threshold);

}  // namespace vstress::raster

#endif
