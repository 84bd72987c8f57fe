#include "vstress/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "vstress/csv.hpp"
#include "vstress/error.hpp"
#include "vstress/raster.hpp"
#include "vstress/solar.hpp"
#include "vstress/stats.hpp"

namespace vstress::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string fmt(double v) { return csv::format_double(v); }

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ValidationError("cannot write file: " + path.string());
  out << text;
}

// Collects newly written paths so a failed pipeline can remove its partial
// outputs.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_);
  }

  fs::path write(const std::string& name, const std::string& text) {
    fs::path p = dir_ / name;
    write_text_file(p, text);
    written_.push_back(p);
    return p;
  }

  const std::vector<fs::path>& written() const { return written_; }

  void remove_all() {
    for (const fs::path& p : written_) {
      std::error_code ec;
      fs::remove(p, ec);
    }
    written_.clear();
  }

 private:
  fs::path dir_;
  std::vector<fs::path> written_;
};

struct PanelRow {
  std::string indicator;
  std::string group;
  int n = 0;
  double mean = 0.0;
  double sd = 0.0;
  double f = 0.0;
  double p = 1.0;
  std::string stars;
};

std::vector<double> column_values(const classify::StressMatrix& table, int j,
                                  const std::vector<int>& rows) {
  std::vector<double> v;
  v.reserve(rows.size());
  for (int r : rows)
    v.push_back(table.data(r, j));
  return v;
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2)
    return 0.0;
  double m = 0.0;
  for (double x : v)
    m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v)
    ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

/// One-way ANOVA per indicator over named row groups.
std::vector<PanelRow> anova_panel(const classify::StressMatrix& table,
                                  const std::vector<std::string>& group_names,
                                  const std::vector<std::vector<int>>& group_rows) {
  std::vector<PanelRow> out;
  for (int j = 0; j < 4; ++j) {
    std::vector<std::vector<double>> samples;
    samples.reserve(group_rows.size());
    for (const auto& rows : group_rows)
      samples.push_back(column_values(table, j, rows));
    stats::AnovaResult res = stats::anova_oneway(samples);
    for (std::size_t g = 0; g < group_rows.size(); ++g) {
      PanelRow row;
      row.indicator = classify::StressMatrix::kColumns[static_cast<std::size_t>(j)];
      row.group = group_names[g];
      row.n = static_cast<int>(samples[g].size());
      double m = 0.0;
      for (double x : samples[g])
        m += x;
      row.mean = m / static_cast<double>(samples[g].size());
      row.sd = sample_sd(samples[g]);
      row.f = res.f;
      row.p = res.p;
      row.stars = stats::significance_stars(res.p);
      out.push_back(std::move(row));
    }
  }
  return out;
}

std::string panel_csv(const std::vector<PanelRow>& rows) {
  std::string text = "indicator,group,n,mean,sd,f,p,stars\n";
  for (const PanelRow& r : rows) {
    text += csv::join_row({r.indicator, r.group, std::to_string(r.n), fmt(r.mean), fmt(r.sd),
                           fmt(r.f), fmt(r.p), r.stars});
    text += '\n';
  }
  return text;
}

ordered_json panel_json(const std::vector<PanelRow>& rows) {
  ordered_json arr = ordered_json::array();
  for (const PanelRow& r : rows) {
    arr.push_back({{"indicator", r.indicator},
                   {"group", r.group},
                   {"n", r.n},
                   {"mean", r.mean},
                   {"sd", r.sd},
                   {"f", r.f},
                   {"p", r.p},
                   {"stars", r.stars}});
  }
  return arr;
}

std::vector<std::vector<int>> admin_groups(const classify::StressMatrix& table) {
  std::vector<std::vector<int>> groups(2);
  for (int i = 0; i < table.n(); ++i) {
    int g = table.admin[static_cast<std::size_t>(i)] == indices::AdminCategory::ADV ? 0 : 1;
    groups[static_cast<std::size_t>(g)].push_back(i);
  }
  if (groups[0].empty() || groups[1].empty())
    throw ValidationError("both admin categories must be present");
  return groups;
}

std::vector<std::vector<int>> label_groups(const std::vector<int>& labels, int k) {
  std::vector<std::vector<int>> groups(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    int lab = labels[i];
    if (lab < 1 || lab > k)
      throw ValidationError("cluster label out of range");
    groups[static_cast<std::size_t>(lab - 1)].push_back(static_cast<int>(i));
  }
  for (const auto& g : groups)
    if (g.empty())
      throw ValidationError("empty cluster group");
  return groups;
}

std::string villages_csv(const classify::StressMatrix& table) {
  std::string text = "id,name,admin_category,sgi,srei,wi,aii\n";
  for (int i = 0; i < table.n(); ++i) {
    std::size_t u = static_cast<std::size_t>(i);
    text += csv::join_row({table.ids[u], table.names[u], indices::to_string(table.admin[u]),
                           fmt(table.data(i, 0)), fmt(table.data(i, 1)), fmt(table.data(i, 2)),
                           fmt(table.data(i, 3))});
    text += '\n';
  }
  return text;
}

std::string matrix_csv(const Eigen::MatrixXd& m) {
  std::string text = "indicator";
  for (const char* c : classify::StressMatrix::kColumns)
    text += std::string(",") + c;
  text += '\n';
  for (int i = 0; i < 4; ++i) {
    text += classify::StressMatrix::kColumns[static_cast<std::size_t>(i)];
    for (int j = 0; j < 4; ++j)
      text += "," + fmt(m(i, j));
    text += '\n';
  }
  return text;
}

struct LdaSummaryRow {
  std::string category;
  int count = 0;
  double mean = 0.0, sd = 0.0, lo = 0.0, hi = 0.0;
  int correct = 0;
};

std::vector<LdaSummaryRow> lda_summary(const classify::DiscriminantModel& model,
                                       const classify::ClassificationReport& rep) {
  std::vector<LdaSummaryRow> rows(2);
  rows[0].category = "ADV";
  rows[1].category = "SCV";
  std::vector<std::vector<double>> scores(2);
  for (std::size_t i = 0; i < model.scores.size(); ++i) {
    int g = model.labels[i] == indices::AdminCategory::ADV ? 0 : 1;
    scores[static_cast<std::size_t>(g)].push_back(model.scores[i]);
  }
  for (int g = 0; g < 2; ++g) {
    auto& r = rows[static_cast<std::size_t>(g)];
    const auto& s = scores[static_cast<std::size_t>(g)];
    r.count = static_cast<int>(s.size());
    double m = 0.0;
    for (double x : s)
      m += x;
    r.mean = s.empty() ? 0.0 : m / static_cast<double>(s.size());
    r.sd = sample_sd(s);
    auto [lo, hi] = std::minmax_element(s.begin(), s.end());
    r.lo = s.empty() ? 0.0 : *lo;
    r.hi = s.empty() ? 0.0 : *hi;
  }
  rows[0].correct = rep.adv_correct;
  rows[1].correct = rep.scv_correct;
  return rows;
}

ordered_json config_echo(const PipelineConfig& cfg) {
  ordered_json j;
  j["slope_threshold"] = cfg.slope_threshold;
  j["srei_threshold"] = cfg.srei_threshold;
  j["wi_weights"] = {{"paved", cfg.wi_weights.paved},
                     {"hardened", cfg.wi_weights.hardened},
                     {"rough", cfg.wi_weights.rough}};
  j["solar"] = {{"latitude_deg", cfg.solar.latitude_deg},
                {"day_of_year", cfg.solar.day_of_year},
                {"direct_normal_irradiance", cfg.solar.direct_normal_irradiance},
                {"diffuse_fraction", cfg.solar.diffuse_fraction},
                {"horizon_directions", cfg.solar.horizon_directions},
                {"time_step_hours", cfg.solar.time_step_hours}};
  j["k_min"] = cfg.k_min;
  j["k_max"] = cfg.k_max;
  j["chosen_k"] = cfg.chosen_k;
  return j;
}

ordered_json input_digests(const PipelineConfig& cfg) {
  ordered_json j = ordered_json::object();
  auto add = [&](const char* key, const std::optional<fs::path>& p) {
    if (!p)
      return;
    std::ostringstream hex;
    hex << std::hex << csv::fnv1a_digest(*p);
    j[key] = {{"path", p->filename().string()}, {"fnv1a64", hex.str()}};
  };
  add("villages", cfg.villages);
  add("surfaces", cfg.surfaces);
  add("crops", cfg.crops);
  add("raster_manifest", cfg.raster_manifest);
  return j;
}

}  // namespace

std::vector<indices::VillageIndices> load_villages(const fs::path& path) {
  csv::Table t = csv::read_file(path);
  std::size_t id_col = t.column("id");
  std::size_t name_col = t.column("name");
  std::size_t admin_col = t.column("admin_category");
  auto opt_col = [&](const char* name) -> std::optional<std::size_t> {
    if (t.has_column(name))
      return t.column(name);
    return std::nullopt;
  };
  auto sgi_col = opt_col("sgi");
  auto srei_col = opt_col("srei");
  auto wi_col = opt_col("wi");
  auto aii_col = opt_col("aii");

  std::vector<indices::VillageIndices> out;
  for (const auto& row : t.rows) {
    indices::VillageIndices v;
    v.id = row[id_col];
    v.name = row[name_col];
    v.admin = indices::admin_from_string(row[admin_col]);
    std::string ctx = path.filename().string() + " village " + v.id;
    if (sgi_col)
      v.sgi = csv::parse_optional_double(row[*sgi_col], ctx);
    if (srei_col)
      v.srei = csv::parse_optional_double(row[*srei_col], ctx);
    if (wi_col)
      v.wi = csv::parse_optional_double(row[*wi_col], ctx);
    if (aii_col)
      v.aii = csv::parse_optional_double(row[*aii_col], ctx);
    out.push_back(std::move(v));
  }
  if (out.empty())
    throw ValidationError(path.string() + ": no villages");
  return out;
}

std::map<std::string, indices::SurfaceComposition> load_surfaces(const fs::path& path) {
  csv::Table t = csv::read_file(path);
  std::size_t id = t.column("id");
  std::size_t paved = t.column("paved_share");
  std::size_t hardened = t.column("hardened_share");
  std::size_t rough = t.column("rough_share");
  std::map<std::string, indices::SurfaceComposition> out;
  for (const auto& row : t.rows) {
    std::string ctx = path.filename().string() + " village " + row[id];
    indices::SurfaceComposition comp{csv::parse_double(row[paved], ctx),
                                     csv::parse_double(row[hardened], ctx),
                                     csv::parse_double(row[rough], ctx)};
    if (!out.emplace(row[id], comp).second)
      throw ValidationError("duplicate surfaces row for village " + row[id]);
  }
  return out;
}

std::map<std::string, indices::CropSystem> load_crops(const fs::path& path) {
  csv::Table t = csv::read_file(path);
  std::size_t id = t.column("id");
  std::size_t weight = t.column("labor_weight");
  std::size_t share = t.column("area_share");
  std::size_t temporal = t.column("temporal_concentration");
  std::size_t labor = t.column("labor_share");
  std::map<std::string, indices::CropSystem> out;
  for (const auto& row : t.rows) {
    std::string ctx = path.filename().string() + " village " + row[id];
    indices::CropSystem& crop = out[row[id]];
    double tc = csv::parse_double(row[temporal], ctx);
    double ls = csv::parse_double(row[labor], ctx);
    if (crop.components.empty()) {
      crop.temporal_concentration = tc;
      crop.labor_share = ls;
    } else if (std::abs(crop.temporal_concentration - tc) > 1e-12 ||
               std::abs(crop.labor_share - ls) > 1e-12) {
      throw ValidationError("inconsistent temporal_concentration/labor_share for village " +
                            row[id]);
    }
    crop.components.push_back(
        {csv::parse_double(row[weight], ctx), csv::parse_double(row[share], ctx)});
  }
  return out;
}

std::map<std::string, RasterEntry> load_raster_manifest(const fs::path& path) {
  csv::Table t = csv::read_file(path);
  std::size_t id = t.column("id");
  std::size_t dem = t.column("dem");
  std::size_t mask = t.column("mask");
  fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    fs::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };
  std::map<std::string, RasterEntry> out;
  for (const auto& row : t.rows) {
    if (!out.emplace(row[id], RasterEntry{resolve(row[dem]), resolve(row[mask])}).second)
      throw ValidationError("duplicate manifest row for village " + row[id]);
  }
  return out;
}

std::map<std::string, int> load_assignment(const fs::path& path) {
  csv::Table t = csv::read_file(path);
  std::size_t id = t.column("village_id");
  std::size_t cluster = t.column("cluster");
  std::map<std::string, int> out;
  for (const auto& row : t.rows) {
    std::string ctx = path.filename().string() + " village " + row[id];
    int lab = static_cast<int>(csv::parse_double(row[cluster], ctx));
    if (lab < 1)
      throw ValidationError(ctx + ": cluster labels start at 1");
    if (!out.emplace(row[id], lab).second)
      throw ValidationError("duplicate assignment row for village " + row[id]);
  }
  return out;
}

std::vector<indices::VillageIndices> resolve_indices(const PipelineConfig& cfg) {
  if (!cfg.villages)
    throw ValidationError("no villages file configured");
  std::vector<indices::VillageIndices> villages = load_villages(*cfg.villages);

  std::map<std::string, indices::SurfaceComposition> surfaces;
  if (cfg.surfaces)
    surfaces = load_surfaces(*cfg.surfaces);
  std::map<std::string, indices::CropSystem> crops;
  if (cfg.crops)
    crops = load_crops(*cfg.crops);
  std::map<std::string, RasterEntry> manifest;
  if (cfg.raster_manifest)
    manifest = load_raster_manifest(*cfg.raster_manifest);

  // slope/insolation cached per DEM file
  std::map<std::string, std::pair<raster::RasterGrid, raster::RasterGrid>> derived;
  auto derived_layers = [&](const fs::path& dem_path)
      -> const std::pair<raster::RasterGrid, raster::RasterGrid>& {
    auto it = derived.find(dem_path.string());
    if (it == derived.end()) {
      raster::RasterGrid dem = raster::parse_ascii_grid_file(dem_path.string());
      raster::RasterGrid slope = raster::slope_degrees(dem);
      raster::RasterGrid insol = solar::daily_insolation(dem, cfg.solar);
      it = derived.emplace(dem_path.string(), std::make_pair(std::move(slope), std::move(insol)))
               .first;
    }
    return it->second;
  };

  for (indices::VillageIndices& v : villages) {
    if (!v.sgi || !v.srei) {
      auto entry = manifest.find(v.id);
      if (entry == manifest.end())
        throw ValidationError((!v.sgi ? std::string("SGI") : std::string("SREI")) +
                              " inputs missing: " + v.id);
      const auto& [slope, insol] = derived_layers(entry->second.dem);
      raster::RasterGrid mask_grid = raster::parse_ascii_grid_file(entry->second.mask.string());
      raster::ZoneMask mask = raster::mask_from_grid(mask_grid, v.id);
      if (!v.sgi)
        v.sgi = indices::compute_sgi(slope, mask, cfg.slope_threshold);
      if (!v.srei)
        v.srei = indices::compute_srei(insol, mask, cfg.srei_threshold);
    }
    if (!v.wi) {
      auto it = surfaces.find(v.id);
      if (it == surfaces.end())
        throw ValidationError("WI inputs missing: " + v.id);
      v.wi = indices::compute_wi(it->second, cfg.wi_weights);
    }
    if (!v.aii) {
      auto it = crops.find(v.id);
      if (it == crops.end())
        throw ValidationError("AII inputs missing: " + v.id);
      v.aii = indices::compute_aii(it->second);
    }
  }
  return villages;
}

classify::StressMatrix load_stress_table(const PipelineConfig& cfg) {
  return indices::assemble_stress_table(resolve_indices(cfg));
}

std::vector<fs::path> cmd_indices(const PipelineConfig& cfg) {
  classify::StressMatrix table = load_stress_table(cfg);
  OutputSet out(cfg.out_dir);
  out.write("villages_indices.csv", villages_csv(table));
  return out.written();
}

namespace {

void write_correlation_outputs(OutputSet& out, const classify::StressMatrix& table,
                               const stats::CorrelationReport& rep) {
  out.write("correlation_r.csv", matrix_csv(rep.r));
  out.write("correlation_p.csv", matrix_csv(rep.p));
  std::string vif_text = "indicator,vif\n";
  for (int j = 0; j < 4; ++j)
    vif_text += csv::join_row({classify::StressMatrix::kColumns[static_cast<std::size_t>(j)],
                               fmt(rep.vif[j])}) +
                "\n";
  out.write("vif.csv", vif_text);
  std::string pairs = "indicator_a,indicator_b,r,p,significant\n";
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      bool flagged = std::find(rep.flagged.begin(), rep.flagged.end(), std::make_pair(i, j)) !=
                     rep.flagged.end();
      pairs += csv::join_row({classify::StressMatrix::kColumns[static_cast<std::size_t>(i)],
                              classify::StressMatrix::kColumns[static_cast<std::size_t>(j)],
                              fmt(rep.r(i, j)), fmt(rep.p(i, j)), flagged ? "yes" : "no"}) +
               "\n";
    }
  }
  out.write("correlation_pairs.csv", pairs);
  (void)table;
}

void write_lda_outputs(OutputSet& out, const classify::StressMatrix& table,
                       const classify::DiscriminantModel& model,
                       const classify::ClassificationReport& rep) {
  std::string scores = "village_id,admin_category,ld1,predicted\n";
  for (int i = 0; i < table.n(); ++i) {
    std::size_t u = static_cast<std::size_t>(i);
    scores += csv::join_row({table.ids[u], indices::to_string(table.admin[u]),
                             fmt(model.scores[u]), indices::to_string(rep.predicted[u])}) +
              "\n";
  }
  out.write("lda_scores.csv", scores);

  std::string summary =
      "category,count,ld1_mean,ld1_sd,ld1_min,ld1_max,correct,accuracy\n";
  for (const LdaSummaryRow& r : lda_summary(model, rep)) {
    int total = r.category == "ADV" ? rep.adv_total : rep.scv_total;
    summary += csv::join_row({r.category, std::to_string(r.count), fmt(r.mean), fmt(r.sd),
                              fmt(r.lo), fmt(r.hi),
                              std::to_string(r.correct) + "/" + std::to_string(total),
                              fmt(static_cast<double>(r.correct) / total)}) +
               "\n";
  }
  int correct = rep.adv_correct + rep.scv_correct;
  int total = rep.adv_total + rep.scv_total;
  summary += csv::join_row({"total", std::to_string(total), "", "", "", "",
                            std::to_string(correct) + "/" + std::to_string(total),
                            fmt(rep.accuracy)}) +
             "\n";
  out.write("lda_summary.csv", summary);

  std::string coeffs = "indicator,coefficient\n";
  for (int j = 0; j < 4; ++j)
    coeffs += csv::join_row({classify::StressMatrix::kColumns[static_cast<std::size_t>(j)],
                             fmt(model.coefficients[j])}) +
              "\n";
  coeffs += csv::join_row({"offset", fmt(model.offset)}) + "\n";
  out.write("lda_coefficients.csv", coeffs);
}

void write_cluster_outputs(OutputSet& out, const classify::StressMatrix& table,
                           const classify::ClusterModel& model,
                           const classify::ValidityReport& validity,
                           const classify::ClusterAssignment& assignment) {
  std::string val = "k,mean_silhouette,calinski_harabasz,silhouette_max,ch_max\n";
  for (const auto& row : validity.rows) {
    val += csv::join_row({std::to_string(row.k), fmt(row.mean_silhouette),
                          fmt(row.calinski_harabasz),
                          row.k == validity.silhouette_argmax_k ? "yes" : "no",
                          row.k == validity.ch_argmax_k ? "yes" : "no"}) +
           "\n";
  }
  out.write("validity.csv", val);

  std::string linkage = "node_a,node_b,height,new_id\n";
  for (const classify::Merge& m : model.tree.merges)
    linkage += csv::join_row({std::to_string(m.node_a), std::to_string(m.node_b), fmt(m.height),
                              std::to_string(m.new_node)}) +
               "\n";
  out.write("linkage.csv", linkage);

  std::string assign = "village_id,cluster\n";
  for (int i = 0; i < table.n(); ++i)
    assign += csv::join_row({table.ids[static_cast<std::size_t>(i)],
                             std::to_string(assignment.labels[static_cast<std::size_t>(i)])}) +
              "\n";
  out.write("assignment.csv", assign);
}

std::vector<std::vector<int>> groups_from_assignment(const classify::StressMatrix& table,
                                                     const std::map<std::string, int>& assign,
                                                     std::vector<std::string>& names_out) {
  std::set<int> labels;
  std::vector<int> per_row(static_cast<std::size_t>(table.n()));
  for (int i = 0; i < table.n(); ++i) {
    auto it = assign.find(table.ids[static_cast<std::size_t>(i)]);
    if (it == assign.end())
      throw ValidationError("assignment missing village " +
                            table.ids[static_cast<std::size_t>(i)]);
    per_row[static_cast<std::size_t>(i)] = it->second;
    labels.insert(it->second);
  }
  if (assign.size() != static_cast<std::size_t>(table.n()))
    throw ValidationError("assignment and villages do not cover the same ids");
  std::vector<std::vector<int>> groups;
  names_out.clear();
  for (int lab : labels) {
    std::vector<int> rows;
    for (int i = 0; i < table.n(); ++i)
      if (per_row[static_cast<std::size_t>(i)] == lab)
        rows.push_back(i);
    groups.push_back(std::move(rows));
    names_out.push_back("cluster_" + std::to_string(lab));
  }
  return groups;
}

}  // namespace

std::vector<fs::path> cmd_correlate(const PipelineConfig& cfg) {
  classify::StressMatrix table = load_stress_table(cfg);
  stats::CorrelationReport rep = stats::correlation_report(table.data);
  OutputSet out(cfg.out_dir);
  write_correlation_outputs(out, table, rep);
  return out.written();
}

std::vector<fs::path> cmd_lda(const PipelineConfig& cfg) {
  classify::StressMatrix table = load_stress_table(cfg);
  classify::DiscriminantModel model = classify::lda_fit(table);
  classify::ClassificationReport rep = classify::lda_classify(model);
  OutputSet out(cfg.out_dir);
  write_lda_outputs(out, table, model, rep);
  return out.written();
}

std::vector<fs::path> cmd_cluster(const PipelineConfig& cfg) {
  classify::StressMatrix table = load_stress_table(cfg);
  classify::ClusterModel model = classify::build_cluster_model(table);
  classify::ValidityReport validity = classify::scan_k(model, cfg.k_min, cfg.k_max);
  if (cfg.chosen_k < 2 || cfg.chosen_k >= table.n())
    throw ValidationError("chosen_k out of range [2, n-1]");
  classify::ClusterAssignment assignment = classify::cut_tree(model.tree, cfg.chosen_k);
  OutputSet out(cfg.out_dir);
  write_cluster_outputs(out, table, model, validity, assignment);
  return out.written();
}

std::vector<fs::path> cmd_compare(const PipelineConfig& cfg, const fs::path& labels_a,
                                  const fs::path& labels_b) {
  classify::StressMatrix table = load_stress_table(cfg);
  OutputSet out(cfg.out_dir);

  auto panel_for = [&](const fs::path& p) {
    std::vector<std::string> names;
    auto groups = groups_from_assignment(table, load_assignment(p), names);
    return anova_panel(table, names, groups);
  };
  std::vector<PanelRow> panel_a = panel_for(labels_a);
  std::vector<PanelRow> panel_b = panel_for(labels_b);

  // side-by-side per-indicator summary
  std::string text = "indicator,f_a,p_a,stars_a,f_b,p_b,stars_b\n";
  for (int j = 0; j < 4; ++j) {
    const char* ind = classify::StressMatrix::kColumns[static_cast<std::size_t>(j)];
    auto find_first = [&](const std::vector<PanelRow>& rows) -> const PanelRow& {
      for (const PanelRow& r : rows)
        if (r.indicator == ind)
          return r;
      throw NumericError("indicator missing from panel");
    };
    const PanelRow& a = find_first(panel_a);
    const PanelRow& b = find_first(panel_b);
    text += csv::join_row({ind, fmt(a.f), fmt(a.p), a.stars, fmt(b.f), fmt(b.p), b.stars}) + "\n";
  }
  out.write("compare.csv", text);
  return out.written();
}

std::vector<fs::path> cmd_pipeline(const PipelineConfig& cfg) {
  OutputSet out(cfg.out_dir);
  try {
    classify::StressMatrix table = load_stress_table(cfg);
    out.write("villages_indices.csv", villages_csv(table));

    stats::CorrelationReport corr = stats::correlation_report(table.data);
    write_correlation_outputs(out, table, corr);

    classify::DiscriminantModel model = classify::lda_fit(table);
    classify::ClassificationReport lda_rep = classify::lda_classify(model);
    write_lda_outputs(out, table, model, lda_rep);

    classify::ClusterModel cluster_model = classify::build_cluster_model(table);
    classify::ValidityReport validity = classify::scan_k(cluster_model, cfg.k_min, cfg.k_max);
    if (cfg.chosen_k < 2 || cfg.chosen_k >= table.n())
      throw ValidationError("chosen_k out of range [2, n-1]");
    classify::ClusterAssignment assignment = classify::cut_tree(cluster_model.tree, cfg.chosen_k);
    write_cluster_outputs(out, table, cluster_model, validity, assignment);

    std::vector<PanelRow> admin_panel =
        anova_panel(table, {"ADV", "SCV"}, admin_groups(table));
    std::vector<std::string> cluster_names;
    for (int k = 1; k <= cfg.chosen_k; ++k)
      cluster_names.push_back("cluster_" + std::to_string(k));
    std::vector<PanelRow> spatial_panel =
        anova_panel(table, cluster_names, label_groups(assignment.labels, cfg.chosen_k));
    out.write("anova_admin.csv", panel_csv(admin_panel));
    out.write("anova_spatial.csv", panel_csv(spatial_panel));

    classify::CrossTab tab = classify::cross_tab(table.admin, assignment);
    std::string cross = "admin_category";
    for (int k = 1; k <= tab.k; ++k)
      cross += ",cluster_" + std::to_string(k);
    cross += ",total\n";
    for (int row = 0; row < 2; ++row) {
      cross += row == 0 ? "ADV" : "SCV";
      for (int k = 0; k < tab.k; ++k)
        cross += "," + std::to_string(tab.counts[static_cast<std::size_t>(row)][static_cast<std::size_t>(k)]);
      cross += "," + std::to_string(tab.row_totals[static_cast<std::size_t>(row)]) + "\n";
    }
    cross += "total";
    for (int k = 0; k < tab.k; ++k)
      cross += "," + std::to_string(tab.col_totals[static_cast<std::size_t>(k)]);
    cross += "," + std::to_string(tab.row_totals[0] + tab.row_totals[1]) + "\n";
    out.write("cross_tab.csv", cross);

    // two-group CI column for the admin panel (pooled variance)
    ordered_json admin_ci = ordered_json::object();
    {
      auto groups = admin_groups(table);
      for (int j = 0; j < 4; ++j) {
        auto adv = column_values(table, j, groups[0]);
        auto scv = column_values(table, j, groups[1]);
        stats::SummaryGroup g1{"ADV", static_cast<int>(adv.size()), 0.0, sample_sd(adv)};
        stats::SummaryGroup g2{"SCV", static_cast<int>(scv.size()), 0.0, sample_sd(scv)};
        for (double v : adv)
          g1.mean += v;
        g1.mean /= static_cast<double>(adv.size());
        for (double v : scv)
          g2.mean += v;
        g2.mean /= static_cast<double>(scv.size());
        stats::MeanDifferenceCI ci = stats::pooled_ci(g1, g2);
        admin_ci[classify::StressMatrix::kColumns[static_cast<std::size_t>(j)]] = {
            {"lo", ci.lo}, {"hi", ci.hi}};
      }
    }

    ordered_json report;
    report["villages"] = ordered_json::array();
    for (int i = 0; i < table.n(); ++i) {
      std::size_t u = static_cast<std::size_t>(i);
      report["villages"].push_back({{"id", table.ids[u]},
                                    {"name", table.names[u]},
                                    {"admin_category", indices::to_string(table.admin[u])},
                                    {"sgi", table.data(i, 0)},
                                    {"srei", table.data(i, 1)},
                                    {"wi", table.data(i, 2)},
                                    {"aii", table.data(i, 3)},
                                    {"cluster", assignment.labels[u]},
                                    {"ld1", model.scores[u]}});
    }
    {
      ordered_json jc;
      jc["columns"] = classify::StressMatrix::kColumns;
      jc["r"] = ordered_json::array();
      jc["p"] = ordered_json::array();
      for (int i = 0; i < 4; ++i) {
        ordered_json r_row = ordered_json::array(), p_row = ordered_json::array();
        for (int j = 0; j < 4; ++j) {
          r_row.push_back(corr.r(i, j));
          p_row.push_back(corr.p(i, j));
        }
        jc["r"].push_back(r_row);
        jc["p"].push_back(p_row);
      }
      jc["vif"] = std::vector<double>(corr.vif.data(), corr.vif.data() + corr.vif.size());
      jc["flagged_pairs"] = ordered_json::array();
      for (auto [i, j] : corr.flagged)
        jc["flagged_pairs"].push_back(
            {{"a", classify::StressMatrix::kColumns[static_cast<std::size_t>(i)]},
             {"b", classify::StressMatrix::kColumns[static_cast<std::size_t>(j)]},
             {"r", corr.r(i, j)},
             {"p", corr.p(i, j)}});
      report["correlation"] = jc;
    }
    {
      ordered_json jl;
      ordered_json coeffs = ordered_json::object();
      for (int j = 0; j < 4; ++j)
        coeffs[classify::StressMatrix::kColumns[static_cast<std::size_t>(j)]] =
            model.coefficients[j];
      jl["coefficients"] = coeffs;
      jl["offset"] = model.offset;
      jl["positive_class"] = indices::to_string(model.positive_class);
      ordered_json summary = ordered_json::array();
      for (const LdaSummaryRow& r : lda_summary(model, lda_rep)) {
        int total = r.category == "ADV" ? lda_rep.adv_total : lda_rep.scv_total;
        summary.push_back({{"category", r.category},
                           {"count", r.count},
                           {"ld1_mean", r.mean},
                           {"ld1_sd", r.sd},
                           {"ld1_range", {r.lo, r.hi}},
                           {"correct", r.correct},
                           {"total", total}});
      }
      jl["summary"] = summary;
      jl["accuracy"] = lda_rep.accuracy;
      report["discriminant"] = jl;
    }
    {
      ordered_json jv;
      jv["rows"] = ordered_json::array();
      for (const auto& row : validity.rows)
        jv["rows"].push_back({{"k", row.k},
                              {"mean_silhouette", row.mean_silhouette},
                              {"calinski_harabasz", row.calinski_harabasz}});
      jv["silhouette_argmax_k"] = validity.silhouette_argmax_k;
      jv["ch_argmax_k"] = validity.ch_argmax_k;
      jv["chosen_k"] = cfg.chosen_k;
      report["validity"] = jv;
    }
    report["anova"] = {{"admin", panel_json(admin_panel)},
                       {"admin_ci95", admin_ci},
                       {"spatial", panel_json(spatial_panel)}};
    {
      ordered_json jt;
      jt["clusters"] = tab.k;
      jt["ADV"] = tab.counts[0];
      jt["SCV"] = tab.counts[1];
      jt["col_totals"] = tab.col_totals;
      report["cross_tab"] = jt;
    }
    report["provenance"] = {{"config", config_echo(cfg)}, {"inputs", input_digests(cfg)}};

    out.write("report.json", report.dump(2) + "\n");
    return out.written();
  } catch (...) {
    out.remove_all();
    throw;
  }
}

std::size_t cmd_audit(const PipelineConfig& cfg) {
  fs::path dir = cfg.out_dir;
  csv::Table villages = csv::read_file(dir / "villages_indices.csv");

  // rebuild the stress table from the emitted per-village CSV
  std::vector<indices::VillageIndices> records;
  std::size_t id = villages.column("id");
  std::size_t name = villages.column("name");
  std::size_t admin = villages.column("admin_category");
  std::array<std::size_t, 4> cols = {villages.column("sgi"), villages.column("srei"),
                                     villages.column("wi"), villages.column("aii")};
  for (const auto& row : villages.rows) {
    indices::VillageIndices v;
    v.id = row[id];
    v.name = row[name];
    v.admin = indices::admin_from_string(row[admin]);
    v.sgi = csv::parse_double(row[cols[0]], "audit");
    v.srei = csv::parse_double(row[cols[1]], "audit");
    v.wi = csv::parse_double(row[cols[2]], "audit");
    v.aii = csv::parse_double(row[cols[3]], "audit");
    records.push_back(std::move(v));
  }
  classify::StressMatrix table = indices::assemble_stress_table(records);

  std::map<std::string, int> assignment = load_assignment(dir / "assignment.csv");

  auto check_panel = [&](const fs::path& path, const std::vector<PanelRow>& expected) {
    csv::Table emitted = csv::read_file(path);
    if (emitted.rows.size() != expected.size())
      throw ValidationError("audit: " + path.filename().string() + " row count mismatch");
    std::size_t checked = 0;
    auto close = [](double a, double b) {
      return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
    };
    for (std::size_t i = 0; i < expected.size(); ++i) {
      const auto& row = emitted.rows[i];
      const PanelRow& e = expected[i];
      if (row[emitted.column("indicator")] != e.indicator ||
          row[emitted.column("group")] != e.group)
        throw ValidationError("audit: row labels mismatch in " + path.filename().string());
      struct Cell {
        const char* col;
        double want;
      };
      for (const Cell& c : {Cell{"n", static_cast<double>(e.n)}, Cell{"mean", e.mean},
                            Cell{"sd", e.sd}, Cell{"f", e.f}, Cell{"p", e.p}}) {
        double got = csv::parse_double(row[emitted.column(c.col)], "audit");
        if (!close(got, c.want))
          throw ValidationError("audit: " + path.filename().string() + " " + e.indicator + "/" +
                                e.group + " " + c.col + " mismatch: emitted " +
                                fmt(got) + " recomputed " + fmt(c.want));
        ++checked;
      }
    }
    return checked;
  };

  std::size_t checked = 0;
  checked += check_panel(dir / "anova_admin.csv",
                         anova_panel(table, {"ADV", "SCV"}, admin_groups(table)));

  std::vector<std::string> names;
  auto groups = groups_from_assignment(table, assignment, names);
  checked += check_panel(dir / "anova_spatial.csv", anova_panel(table, names, groups));
  return checked;
}

}  // namespace vstress::cli
