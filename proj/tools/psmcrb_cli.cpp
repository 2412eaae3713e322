#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "psmcrb/config.hpp"
#include "psmcrb/csv.hpp"
#include "psmcrb/errors.hpp"
#include "psmcrb/montecarlo.hpp"
#include "psmcrb/selfcheck.hpp"
#include "psmcrb/svg.hpp"

namespace fs = std::filesystem;
using namespace psmcrb;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitInvariant = 4;

struct Options {
  std::string config_path;
  std::string out_dir = ".";
  std::string in_dir;
  std::optional<std::int64_t> trials;
  std::optional<std::uint64_t> seed;
  std::string gamma_grid;
  unsigned workers = 0;
  bool quiet = false;
  bool log_y = false;
};

void report_error(const std::string& kind, const std::string& key, const std::string& message) {
  nlohmann::json j;
  j["error"] = kind;
  if (!key.empty()) j["key"] = key;
  j["message"] = message;
  std::cerr << j.dump() << std::endl;
}

ExperimentConfig load_with_overrides(const Options& o) {
  if (o.config_path.empty()) throw ConfigError("--config", "--config is required");
  ExperimentConfig cfg = load_config(o.config_path);
  if (o.trials) cfg.trials = *o.trials;
  if (o.seed) cfg.master_seed = *o.seed;
  if (!o.gamma_grid.empty()) cfg.gamma_grid = parse_gamma_grid_spec(o.gamma_grid);
  cfg.validate();
  return cfg;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("--out", "cannot write " + path.string());
  out << content;
  if (!out) throw ConfigError("--out", "failed writing " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("--in", "missing input " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path prepare_out(const Options& o) {
  const fs::path dir(o.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw ConfigError("--out", "not a directory: " + dir.string());
  return dir;
}

int cmd_sweep(const Options& o) {
  const ExperimentConfig cfg = load_with_overrides(o);
  const fs::path dir = prepare_out(o);
  SweepOptions so;
  so.workers = o.workers;
  if (!o.quiet) {
    so.progress = [](std::size_t done, std::size_t total) {
      std::cerr << "threshold " << done << "/" << total << " done" << std::endl;
    };
  }
  const SweepResult res = sweep(cfg, so);
  std::vector<BoundsRow> brows;
  for (const auto& b : res.bounds) brows.push_back(summarize(b));
  write_file(dir / "sweep.csv", sweep_csv(res.rows));
  write_file(dir / "bounds.csv", bounds_csv(brows));
  if (!o.quiet) std::cerr << "wrote " << (dir / "sweep.csv").string() << " and bounds.csv" << std::endl;
  return kExitOk;
}

int cmd_bounds(const Options& o) {
  const ExperimentConfig cfg = load_with_overrides(o);
  const fs::path dir = prepare_out(o);
  const ModelGeometry geo = build_geometry(cfg.H);
  const Vec phi = cfg.phi();
  std::vector<BoundsRow> rows;
  for (double g : cfg.gamma_grid)
    rows.push_back(summarize(compute_bounds(phi, cfg.true_hypothesis, geo, cfg.sigma2, g)));
  write_file(dir / "bounds.csv", bounds_csv(rows));
  if (!o.quiet) std::cerr << "wrote " << (dir / "bounds.csv").string() << std::endl;
  return kExitOk;
}

int cmd_selfcheck(const Options& o) {
  SelfcheckOptions so;
  if (o.trials) so.trials = *o.trials;
  if (o.seed) so.seed = *o.seed;
  if (so.trials < 1) throw ConfigError("--trials", "trials must be >= 1");
  bool all = true;
  run_selfcheck(so, [&](const CheckResult& r) {
    all = all && r.pass;
    if (!o.quiet || !r.pass)
      std::cout << (r.pass ? "PASS  " : "FAIL  ") << r.name << "  (" << r.detail << ")" << std::endl;
  });
  return all ? kExitOk : kExitInvariant;
}

int cmd_plot(const Options& o) {
  const fs::path in = o.in_dir.empty() ? fs::path(o.out_dir) : fs::path(o.in_dir);
  std::vector<SweepRow> sweep_rows;
  std::vector<BoundsRow> bound_rows;
  try {
    sweep_rows = parse_sweep_csv(read_file(in / "sweep.csv"));
    bound_rows = parse_bounds_csv(read_file(in / "bounds.csv"));
  } catch (const DomainError& e) {
    throw ConfigError("--in", e.what());
  }
  if (sweep_rows.empty()) throw ConfigError("--in", "sweep.csv has no rows");
  std::string mse, bias;
  try {
    mse = render_svg(mse_chart(sweep_rows, bound_rows, o.log_y));
    bias = render_svg(bias_chart(sweep_rows, bound_rows, o.log_y));
  } catch (const DomainError& e) {
    throw ConfigError("--in", e.what());
  }
  const fs::path dir = prepare_out(o);
  write_file(dir / "mse_vs_gamma.svg", mse);
  write_file(dir / "bias_vs_gamma.svg", bias);
  if (!o.quiet) std::cerr << "wrote mse_vs_gamma.svg and bias_vs_gamma.svg" << std::endl;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Post-model-selection estimation benchmarks and misspecified CRBs"};
  app.require_subcommand(1, 1);
  Options o;

  auto add_common = [&](CLI::App* sub, bool config, bool sampling) {
    if (config) {
      sub->add_option("--config", o.config_path, "Experiment JSON file")->required();
      sub->add_option("--gamma-grid", o.gamma_grid, "Thresholds: log:MIN:MAX:COUNT or a comma list");
    }
    sub->add_option("--out", o.out_dir, "Output directory");
    if (sampling) {
      sub->add_option("--trials", o.trials, "Monte-Carlo trials per threshold");
      sub->add_option("--seed", o.seed, "Master seed");
    }
    sub->add_flag("--quiet", o.quiet, "Suppress progress output");
  };

  auto* sweep_cmd = app.add_subcommand("sweep", "Monte-Carlo sweep over thresholds; writes sweep.csv and bounds.csv");
  add_common(sweep_cmd, true, true);
  sweep_cmd->add_option("--workers", o.workers, "Worker threads (0: all cores)");

  auto* bounds_cmd = app.add_subcommand("bounds", "Bounds only, no sampling; writes bounds.csv");
  add_common(bounds_cmd, true, false);

  auto* check_cmd = app.add_subcommand("selfcheck", "Run the library invariant checks");
  add_common(check_cmd, false, true);

  auto* plot_cmd = app.add_subcommand("plot", "Render mse_vs_gamma.svg and bias_vs_gamma.svg");
  add_common(plot_cmd, false, false);
  plot_cmd->add_option("--in", o.in_dir, "Directory holding sweep.csv and bounds.csv (default: --out)");
  plot_cmd->add_flag("--log-y", o.log_y, "Logarithmic ordinate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("usage", "", e.what());
    return kExitConfig;
  }

  try {
    if (sweep_cmd->parsed()) return cmd_sweep(o);
    if (bounds_cmd->parsed()) return cmd_bounds(o);
    if (check_cmd->parsed()) return cmd_selfcheck(o);
    if (plot_cmd->parsed()) return cmd_plot(o);
  } catch (const ConfigError& e) {
    report_error("config", e.key(), e.what());
    return kExitConfig;
  } catch (const DomainError& e) {
    report_error("config", "", e.what());
    return kExitConfig;
  } catch (const NumericalError& e) {
    report_error("numerical", "", e.what());
    return kExitNumerical;
  }
  return kExitConfig;
}
