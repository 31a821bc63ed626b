// Command-line front end: run experiments to CSV, fit decay rates from
// traces, and execute the acceptance suite. Exit codes: 0 success, 1 failed
// acceptance entries, 2 configuration problems, 3 numerical failures.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pglab/experiment.hpp"
#include "pglab/rate_fit.hpp"
#include "pglab/testing/acceptance.hpp"

namespace {

std::string resolve_out_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  const char* env = std::getenv("PGLAB_OUTPUT_DIR");
  return (env != nullptr && *env != '\0') ? env : ".";
}

int run_command(const std::string& config_path, const std::string& preset,
                const std::string& out_flag) {
  std::vector<pglab::ExperimentConfig> configs;
  if (!preset.empty()) {
    configs = pglab::preset_configs(preset);
  } else {
    const pglab::Json j = pglab::load_json_file(config_path);
    if (j.is_array())
      for (const auto& item : j) configs.push_back(pglab::config_from_json(item));
    else
      configs.push_back(pglab::config_from_json(j));
  }
  const std::string out_dir = resolve_out_dir(out_flag);
  for (const auto& config : configs) {
    const pglab::ExperimentResult result = pglab::run_and_write(config, out_dir);
    std::printf("%s\n", result.path.c_str());
  }
  return 0;
}

int rate_fit_command(const std::string& trace, long from, long to, std::string column) {
  const pglab::CsvTable table = pglab::read_csv(trace);
  if (column.empty()) {
    for (const char* candidate : {"gap_sup", "qre_gap", "ref_gap", "ne_gap", "gap", "gap_rho",
                                  "policy_gap_tv"}) {
      if (std::find(table.columns.begin(), table.columns.end(), candidate) !=
          table.columns.end()) {
        column = candidate;
        break;
      }
    }
    if (column.empty()) {
      if (table.columns.size() < 2)
        throw pglab::ConfigError("rate-fit: trace has no error column");
      column = table.columns[1];
    }
  }
  const std::vector<double> iter_col = pglab::column_values(table, "iter");
  std::vector<long> iters;
  iters.reserve(iter_col.size());
  for (const double v : iter_col) iters.push_back(std::lround(v));
  const pglab::RateFit fit =
      pglab::fit_rate(iters, pglab::column_values(table, column), from, to);
  std::printf("column %s, window [%ld, %ld], %zu samples\n", column.c_str(), fit.from, fit.to,
              fit.samples);
  std::printf("slope     %.17g\n", fit.slope);
  std::printf("factor    %.17g\n", fit.factor);
  std::printf("r_squared %.17g\n", fit.r_squared);
  return 0;
}

int check_command(const std::string& suite) {
  const std::vector<pglab::testing::CriterionResult> results =
      pglab::testing::run_acceptance(suite);
  bool all_pass = true;
  for (const auto& r : results) {
    all_pass = all_pass && r.pass;
    const pglab::Json line{{"id", r.id},           {"suite", r.suite},
                           {"name", r.name},       {"pass", r.pass},
                           {"seconds", r.seconds}, {"details", r.details}};
    std::printf("%s\n", line.dump().c_str());
  }
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"policy gradient lab: tabular MDPs, matrix and Markov games, LQR"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "execute experiments and write CSV traces");
  std::string config_path, preset, out_dir;
  auto* config_opt =
      run->add_option("--config", config_path, "experiment config JSON (object or array)");
  auto* preset_opt = run->add_option("--preset", preset, "named preset: fig1-bandit, fig2-rps");
  run->add_option("--out", out_dir, "output directory (default: $PGLAB_OUTPUT_DIR or .)");
  config_opt->excludes(preset_opt);

  auto* rf = app.add_subcommand("rate-fit", "least-squares decay rate of a trace column");
  std::string trace, column;
  long from = 0, to = 0;
  rf->add_option("--trace", trace, "trace CSV produced by run")->required();
  rf->add_option("--from", from, "window start iteration")->required();
  rf->add_option("--to", to, "window end iteration")->required();
  rf->add_option("--column", column, "error column (default: first gap-like column)");

  auto* check = app.add_subcommand("check", "run acceptance criteria, one JSON line each");
  std::string suite = "all";
  check->add_option("--suite", suite, "all or one module suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) {
      if (config_path.empty() == preset.empty())
        throw pglab::ConfigError("run: give exactly one of --config or --preset");
      return run_command(config_path, preset, out_dir);
    }
    if (rf->parsed()) return rate_fit_command(trace, from, to, column);
    return check_command(suite);
  } catch (const pglab::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const pglab::DimensionError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const pglab::DomainError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const pglab::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
