#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>

#include "vstress/config.hpp"
#include "vstress/error.hpp"
#include "vstress/pipeline.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  int chosen_k = 0;
  double slope_threshold = 0.0;
  double srei_threshold = 0.0;
  std::string k_range;
  std::string villages;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "config file (key = value lines)");
  cmd->add_option("--out", flags.out_dir, "output directory");
  cmd->add_option("--villages", flags.villages, "villages CSV (overrides config)");
  cmd->add_option("--k", flags.chosen_k, "cluster count for the reported cut");
  cmd->add_option("--slope-threshold", flags.slope_threshold, "SGI slope threshold (degrees)");
  cmd->add_option("--srei-threshold", flags.srei_threshold,
                  "SREI insolation threshold (kJ/m^2/day)");
  cmd->add_option("--k-range", flags.k_range, "validity scan range, e.g. 2..16");
}

vstress::cli::PipelineConfig build_config(const CommonFlags& flags) {
  vstress::cli::PipelineConfig cfg;
  if (!flags.config_path.empty())
    cfg = vstress::cli::load_config(flags.config_path);
  if (!flags.out_dir.empty())
    cfg.out_dir = flags.out_dir;
  if (!flags.villages.empty())
    cfg.villages = flags.villages;
  if (flags.chosen_k > 0)
    cfg.chosen_k = flags.chosen_k;
  if (flags.slope_threshold > 0.0)
    cfg.slope_threshold = flags.slope_threshold;
  if (flags.srei_threshold > 0.0)
    cfg.srei_threshold = flags.srei_threshold;
  if (!flags.k_range.empty()) {
    auto sep = flags.k_range.find("..");
    if (sep == std::string::npos)
      throw vstress::ValidationError("--k-range expects the form a..b");
    try {
      cfg.k_min = std::stoi(flags.k_range.substr(0, sep));
      cfg.k_max = std::stoi(flags.k_range.substr(sep + 2));
    } catch (const std::exception&) {
      throw vstress::ValidationError("--k-range expects integers, e.g. 2..16");
    }
  }
  return cfg;
}

void print_written(const std::vector<std::filesystem::path>& paths) {
  for (const auto& p : paths)
    std::cout << "wrote " << p.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"village spatial stress indices and typology pipeline"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string labels_a, labels_b;

  CLI::App* indices = app.add_subcommand("indices", "compute per-village indices");
  CLI::App* correlate = app.add_subcommand("correlate", "correlation matrix, p-values, VIF");
  CLI::App* lda = app.add_subcommand("lda", "discriminant evaluation of admin labels");
  CLI::App* cluster = app.add_subcommand("cluster", "hierarchical clustering and validity scan");
  CLI::App* compare = app.add_subcommand("compare", "ANOVA comparison of two labelings");
  CLI::App* pipeline = app.add_subcommand("pipeline", "full run with JSON report");
  CLI::App* audit = app.add_subcommand("audit", "recompute emitted tables from per-village CSV");
  for (CLI::App* cmd : {indices, correlate, lda, cluster, compare, pipeline, audit})
    add_common(cmd, flags);
  compare->add_option("labels_a", labels_a, "first assignment CSV")->required();
  compare->add_option("labels_b", labels_b, "second assignment CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    vstress::cli::PipelineConfig cfg = build_config(flags);
    if (indices->parsed())
      print_written(vstress::cli::cmd_indices(cfg));
    else if (correlate->parsed())
      print_written(vstress::cli::cmd_correlate(cfg));
    else if (lda->parsed())
      print_written(vstress::cli::cmd_lda(cfg));
    else if (cluster->parsed())
      print_written(vstress::cli::cmd_cluster(cfg));
    else if (compare->parsed())
      print_written(vstress::cli::cmd_compare(cfg, labels_a, labels_b));
    else if (pipeline->parsed())
      print_written(vstress::cli::cmd_pipeline(cfg));
    else if (audit->parsed()) {
      std::size_t cells = vstress::cli::cmd_audit(cfg);
      std::cout << "audit OK: " << cells << " cells recomputed and matched\n";
    }
  } catch (const vstress::NumericError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const vstress::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
