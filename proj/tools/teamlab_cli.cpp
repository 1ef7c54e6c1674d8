// teamlab: run, sweep, verify and info-probe front end.
//
//   teamlab run CONFIG [--seed S] [--trials T] [--out DIR] [--quiet]
//   teamlab sweep CONFIG [...]
//   teamlab verify [theorem1|lemma1|info-convergence|joint-oracle|all] [--seed S] [--out DIR]
//   teamlab info-probe CONFIG [...]
//
// Exit codes: 0 ok, 1 usage or config error, 2 verification failure, 3 I/O error.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "teamlab/config.hpp"
#include "teamlab/errors.hpp"
#include "teamlab/experiment.hpp"
#include "teamlab/metrics_io.hpp"
#include "teamlab/svg.hpp"
#include "teamlab/verify.hpp"

namespace fs = std::filesystem;
using namespace teamlab;

namespace {

constexpr int kOk = 0, kUsage = 1, kVerifyFailed = 2, kIo = 3;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<std::string> out;
  bool quiet = false;
};

ExperimentConfig load_with_overrides(const std::string& path, const Overrides& o) {
  auto cfg = load_config_file(path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.trials) cfg.trials = *o.trials;
  if (o.out) cfg.out_dir = *o.out;
  cfg.validate();
  return cfg;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
}

void write_manifest(const ExperimentConfig& cfg, const std::string& command) {
  nlohmann::json j;
  j["command"] = command;
  j["config_hash"] = cfg.hash();
  j["seed"] = cfg.seed;
  j["config"] = cfg.canonical();
  write_text(j.dump(2) + "\n", (fs::path(cfg.out_dir) / "manifest.json").string());
}

RunOptions run_options(const Overrides& o) {
  RunOptions opt;
  if (!o.quiet) {
    opt.progress = [](const std::string& msg) { std::fprintf(stderr, "  %s\n", msg.c_str()); };
  }
  return opt;
}

std::set<std::string> metric_names(const MetricsTable& t) {
  std::set<std::string> names;
  for (const auto& r : t.rows) names.insert(r.metric);
  return names;
}

void write_charts(const ExperimentConfig& cfg, const MetricsTable& table) {
  const auto names = metric_names(table);
  for (const char* metric : {"fraction_of_optimal", "mean_reward", "q_gap", "policy_entropy"}) {
    if (!names.count(metric)) continue;
    std::vector<LineSeries> series;
    for (int n : cfg.team_sizes) {
      auto s = band_series(table, metric, n, "n=" + std::to_string(n));
      if (!s.x.empty()) series.push_back(std::move(s));
    }
    if (series.empty()) continue;
    const auto svg = render_line_chart(series, {std::string(metric), "episode", metric});
    write_text(svg, (fs::path(cfg.out_dir) / (std::string(metric) + ".svg")).string());
  }
  if (names.count("visit_dev_sc")) {
    static const char* cells[] = {"sc", "sr", "s3", "s4"};
    const int cell_count = cfg.env == EnvKind::kFourStates ? 4 : 2;
    std::vector<std::string> labels;
    std::vector<BarGroup> groups(cell_count);
    for (int c = 0; c < cell_count; ++c) groups[c].label = cells[c];
    for (int n : cfg.team_sizes) {
      labels.push_back("n=" + std::to_string(n));
      for (int c = 0; c < cell_count; ++c) {
        auto rows = table.select(std::string("visit_dev_") + cells[c], n);
        double sum = 0.0;
        int count = 0;
        for (const auto& r : rows) {
          if (r.checkpoint == cfg.episodes) {
            sum += r.value;
            ++count;
          }
        }
        groups[c].values.push_back(count ? sum / count : 0.0);
      }
    }
    const auto svg = render_bar_chart(groups, labels,
                                      {"visitation vs optimal", "state", "deviation"});
    write_text(svg, (fs::path(cfg.out_dir) / "visitation.svg").string());
  }
}

void print_final_summary(const ExperimentConfig& cfg, const MetricsTable& table) {
  const auto names = metric_names(table);
  for (int n : cfg.team_sizes) {
    std::printf("n=%d", n);
    for (const char* metric : {"fraction_of_optimal", "mean_reward", "q_gap", "expected_info",
                               "tr_entropy"}) {
      if (!names.count(metric)) continue;
      double sum = 0.0;
      int count = 0;
      for (const auto& r : table.select(metric, n)) {
        if (r.checkpoint == cfg.episodes || r.checkpoint == 0) {
          sum += r.value;
          ++count;
        }
      }
      if (count) std::printf("  %s=%.4f", metric, sum / count);
    }
    std::printf("\n");
  }
}

int cmd_train(const std::string& path, const Overrides& o, bool sweep) {
  auto cfg = load_with_overrides(path, o);
  if (!sweep) cfg.team_sizes.resize(1);
  ensure_dir(cfg.out_dir);
  write_manifest(cfg, sweep ? "sweep" : "run");
  const auto csv_path = (fs::path(cfg.out_dir) / "metrics.csv").string();
  MetricsTable all;
  auto opt = run_options(o);
  for (std::size_t i = 0; i < cfg.team_sizes.size(); ++i) {
    opt.only_size_index = static_cast<int>(i);
    auto part = run_experiment(cfg, opt);
    all.rows.insert(all.rows.end(), part.rows.begin(), part.rows.end());
    write_csv(all, csv_path);  // flushed after every team size
  }
  write_charts(cfg, all);
  if (!o.quiet) print_final_summary(cfg, all);
  return kOk;
}

int cmd_probe(const std::string& path, const Overrides& o) {
  auto cfg = load_with_overrides(path, o);
  ensure_dir(cfg.out_dir);
  write_manifest(cfg, "info-probe");
  auto table = run_info_probe(cfg, run_options(o));
  write_csv(table, (fs::path(cfg.out_dir) / "info_probe.csv").string());
  if (!o.quiet) print_final_summary(cfg, table);
  return kOk;
}

int cmd_verify(const std::string& which, const Overrides& o) {
  VerifyOptions opt;
  if (o.seed) opt.seed = *o.seed;
  const auto rows = run_verification(which, opt);
  if (!o.quiet) std::fputs(format_verify_table(rows).c_str(), stdout);
  if (o.out) {
    ensure_dir(*o.out);
    write_text(format_verify_csv(rows), (fs::path(*o.out) / "verify.csv").string());
  } else {
    std::fputs(format_verify_csv(rows).c_str(), stdout);
  }
  return all_passed(rows) ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"teamlab: team-reward learning experiments and checks"};
  app.require_subcommand(1);
  Overrides o;
  std::string config_path;
  std::string which = "all";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", o.seed, "master seed override");
    sub->add_option("--out", o.out, "output directory override");
    sub->add_flag("--quiet", o.quiet, "suppress progress output");
  };
  auto* run = app.add_subcommand("run", "train at the first configured team size");
  auto* sweep = app.add_subcommand("sweep", "train at every configured team size");
  auto* probe = app.add_subcommand("info-probe", "information probe under initial policies");
  for (auto* sub : {run, sweep, probe}) {
    sub->add_option("config", config_path, "config file")->required();
    sub->add_option("--trials", o.trials, "trial count override");
    add_common(sub);
  }
  auto* verify = app.add_subcommand("verify", "closed-form and oracle checks");
  verify->add_option("which", which, "theorem1|lemma1|info-convergence|joint-oracle|all")
      ->check(CLI::IsMember({"theorem1", "lemma1", "info-convergence", "joint-oracle", "all"}));
  add_common(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run) return cmd_train(config_path, o, false);
    if (*sweep) return cmd_train(config_path, o, true);
    if (*probe) return cmd_probe(config_path, o);
    return cmd_verify(which, o);
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kIo;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
}
