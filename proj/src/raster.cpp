#include "vstress/raster.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "vstress/csv.hpp"
#include "vstress/error.hpp"

namespace vstress::raster {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

double to_number(const std::string& tok, const std::string& origin, std::size_t lineno) {
  try {
    std::size_t pos = 0;
    double v = std::stod(tok, &pos);
    if (pos != tok.size())
      throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(origin + " line " + std::to_string(lineno) +
                     ": non-numeric token '" + tok + "'");
  }
}

}  // namespace

RasterGrid parse_ascii_grid(std::istream& in, const std::string& origin) {
  static const char* kKeys[] = {"ncols",  "nrows",    "xllcorner",
                                "yllcorner", "cellsize", "nodata_value"};
  std::map<std::string, double> header;
  std::vector<double> cells;
  std::string line;
  std::size_t lineno = 0;

  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok))
      continue;
    std::string key = lower(tok);
    bool is_header = header.size() < 6 &&
                     std::find_if(std::begin(kKeys), std::end(kKeys),
                                  [&](const char* k) { return key == k; }) != std::end(kKeys);
    if (is_header) {
      std::string val;
      if (!(ls >> val))
        throw ParseError(origin + " line " + std::to_string(lineno) +
                         ": header field '" + tok + "' has no value");
      header[key] = to_number(val, origin, lineno);
      if (ls >> tok)
        throw ParseError(origin + " line " + std::to_string(lineno) +
                         ": trailing token '" + tok + "' after header field");
    } else {
      cells.push_back(to_number(tok, origin, lineno));
      while (ls >> tok)
        cells.push_back(to_number(tok, origin, lineno));
    }
  }

  for (const char* k : kKeys)
    if (!header.count(k))
      throw ParseError(origin + ": missing header field: " + k);

  RasterGrid g;
  g.ncols = static_cast<int>(header["ncols"]);
  g.nrows = static_cast<int>(header["nrows"]);
  if (g.ncols < 1 || g.nrows < 1)
    throw ParseError(origin + ": ncols/nrows must be positive");
  g.xllcorner = header["xllcorner"];
  g.yllcorner = header["yllcorner"];
  g.cellsize = header["cellsize"];
  if (!(g.cellsize > 0))
    throw ParseError(origin + ": cellsize must be > 0");
  g.nodata = header["nodata_value"];
  if (cells.size() != static_cast<std::size_t>(g.ncols) * g.nrows)
    throw ParseError(origin + ": expected " + std::to_string(g.ncols * g.nrows) +
                     " cells, got " + std::to_string(cells.size()));
  g.cells = std::move(cells);
  return g;
}

RasterGrid parse_ascii_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ParseError("cannot open file: " + path);
  return parse_ascii_grid(in, path);
}

void write_ascii_grid(std::ostream& out, const RasterGrid& grid) {
  out << "ncols " << grid.ncols << "\n"
      << "nrows " << grid.nrows << "\n"
      << "xllcorner " << csv::format_double(grid.xllcorner) << "\n"
      << "yllcorner " << csv::format_double(grid.yllcorner) << "\n"
      << "cellsize " << csv::format_double(grid.cellsize) << "\n"
      << "NODATA_value " << csv::format_double(grid.nodata) << "\n";
  for (int r = 0; r < grid.nrows; ++r) {
    for (int c = 0; c < grid.ncols; ++c) {
      if (c)
        out << ' ';
      out << csv::format_double(grid.at(r, c));
    }
    out << '\n';
  }
}

ZoneMask mask_from_grid(const RasterGrid& grid, const std::string& village_id) {
  ZoneMask m;
  m.village_id = village_id;
  m.ncols = grid.ncols;
  m.nrows = grid.nrows;
  m.mask.resize(grid.size());
  bool any = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    bool inside = grid.cells[i] != grid.nodata && grid.cells[i] != 0.0;
    m.mask[i] = inside ? 1 : 0;
    any = any || inside;
  }
  if (!any)
    throw ValidationError("zone mask for " + village_id + " has no cells");
  return m;
}

RasterGrid slope_degrees(const RasterGrid& dem) {
  if (dem.ncols < 1 || dem.nrows < 1 || dem.cells.empty())
    throw ValidationError("slope_degrees: empty grid");

  RasterGrid out = dem;
  auto clamp = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };

  for (int r = 0; r < dem.nrows; ++r) {
    for (int c = 0; c < dem.ncols; ++c) {
      // 3x3 window with edge replication:
      //   a b c
      //   d e f
      //   g h i
      double w[3][3];
      bool touches_nodata = false;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          int rr = clamp(r + dr, dem.nrows - 1);
          int cc = clamp(c + dc, dem.ncols - 1);
          if (dem.is_nodata(rr, cc))
            touches_nodata = true;
          w[dr + 1][dc + 1] = dem.at(rr, cc);
        }
      }
      if (touches_nodata) {
        out.at(r, c) = dem.nodata;
        continue;
      }
      double dzdx = ((w[0][2] + 2 * w[1][2] + w[2][2]) -
                     (w[0][0] + 2 * w[1][0] + w[2][0])) /
                    (8.0 * dem.cellsize);
      double dzdy = ((w[2][0] + 2 * w[2][1] + w[2][2]) -
                     (w[0][0] + 2 * w[0][1] + w[0][2])) /
                    (8.0 * dem.cellsize);
      out.at(r, c) = std::atan(std::sqrt(dzdx * dzdx + dzdy * dzdy)) * 180.0 / M_PI;
    }
  }
  return out;
}

double zone_fraction_above(const RasterGrid& grid, const ZoneMask& mask, double threshold) {
  if (grid.ncols != mask.ncols || grid.nrows != mask.nrows)
    throw ValidationError("zone mask dimensions do not match grid");
  std::size_t valid = 0;
  std::size_t above = 0;
  for (int r = 0; r < grid.nrows; ++r) {
    for (int c = 0; c < grid.ncols; ++c) {
      if (!mask.at(r, c) || grid.is_nodata(r, c))
        continue;
      ++valid;
      if (grid.at(r, c) > threshold)  // strict: "slopes > 4.8", "exceeding 20,000"
        ++above;
    }
  }
  if (valid == 0)
    throw NumericError("empty zone");
  return static_cast<double>(above) / static_cast<double>(valid);
}

}  // namespace vstress::raster
