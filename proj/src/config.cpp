#include "vstress/config.hpp"

#include <fstream>

#include "vstress/csv.hpp"
#include "vstress/error.hpp"

namespace vstress::cli {

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw ParseError("cannot open config: " + path.string());

  PipelineConfig cfg;
  std::filesystem::path base = path.parent_path();
  auto resolve = [&](const std::string& v) {
    std::filesystem::path p(v);
    return p.is_absolute() ? p : base / p;
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string trimmed = line;
    if (auto pos = trimmed.find('#'); pos != std::string::npos)
      trimmed.erase(pos);
    auto first = trimmed.find_first_not_of(" \t\r");
    if (first == std::string::npos)
      continue;
    auto eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw ParseError(path.string() + " line " + std::to_string(lineno) +
                       ": expected key = value");
    auto strip = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = strip(trimmed.substr(0, eq));
    std::string value = strip(trimmed.substr(eq + 1));
    std::string ctx = path.string() + " line " + std::to_string(lineno);
    if (value.empty())
      throw ParseError(ctx + ": empty value for " + key);

    if (key == "villages")
      cfg.villages = resolve(value);
    else if (key == "surfaces")
      cfg.surfaces = resolve(value);
    else if (key == "crops")
      cfg.crops = resolve(value);
    else if (key == "raster_manifest")
      cfg.raster_manifest = resolve(value);
    else if (key == "out_dir")
      cfg.out_dir = resolve(value);
    else if (key == "slope_threshold")
      cfg.slope_threshold = csv::parse_double(value, ctx);
    else if (key == "srei_threshold")
      cfg.srei_threshold = csv::parse_double(value, ctx);
    else if (key == "wi_paved")
      cfg.wi_weights.paved = csv::parse_double(value, ctx);
    else if (key == "wi_hardened")
      cfg.wi_weights.hardened = csv::parse_double(value, ctx);
    else if (key == "wi_rough")
      cfg.wi_weights.rough = csv::parse_double(value, ctx);
    else if (key == "solar_latitude")
      cfg.solar.latitude_deg = csv::parse_double(value, ctx);
    else if (key == "solar_day_of_year")
      cfg.solar.day_of_year = static_cast<int>(csv::parse_double(value, ctx));
    else if (key == "solar_dni")
      cfg.solar.direct_normal_irradiance = csv::parse_double(value, ctx);
    else if (key == "solar_diffuse_fraction")
      cfg.solar.diffuse_fraction = csv::parse_double(value, ctx);
    else if (key == "solar_horizon_directions")
      cfg.solar.horizon_directions = static_cast<int>(csv::parse_double(value, ctx));
    else if (key == "solar_time_step")
      cfg.solar.time_step_hours = csv::parse_double(value, ctx);
    else if (key == "k_min")
      cfg.k_min = static_cast<int>(csv::parse_double(value, ctx));
    else if (key == "k_max")
      cfg.k_max = static_cast<int>(csv::parse_double(value, ctx));
    else if (key == "chosen_k")
      cfg.chosen_k = static_cast<int>(csv::parse_double(value, ctx));
    else
      throw ParseError(ctx + ": unknown key '" + key + "'");
  }

  if (!(cfg.slope_threshold > 0.0) || !(cfg.srei_threshold > 0.0))
    throw ValidationError("thresholds must be positive");
  if (cfg.k_min < 2 || cfg.k_max < cfg.k_min)
    throw ValidationError("invalid k range");
  return cfg;
}

}  // namespace vstress::cli
