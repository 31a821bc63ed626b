#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pglab/csv.hpp"
#include "pglab/generators.hpp"
#include "pglab/json_io.hpp"
#include "pglab/lqr.hpp"
#include "pglab/markov_game.hpp"
#include "pglab/matrix_game.hpp"
#include "pglab/single_agent.hpp"
#include "pglab/tabular_mdp.hpp"
#include "pglab/version.hpp"

namespace pglab {

enum class Family { kMdp, kMatrixGame, kMarkovGame, kLqr };

inline const char* family_name(Family f) {
  switch (f) {
    case Family::kMdp: return "mdp";
    case Family::kMatrixGame: return "matrix_game";
    case Family::kMarkovGame: return "markov_game";
    case Family::kLqr: return "lqr";
  }
  return "unknown";
}

inline Family family_from_name(const std::string& name) {
  if (name == "mdp") return Family::kMdp;
  if (name == "matrix_game") return Family::kMatrixGame;
  if (name == "markov_game") return Family::kMarkovGame;
  if (name == "lqr") return Family::kLqr;
  throw ConfigError("family_from_name: unknown family '" + name + "'");
}

// A single run: which solver on which problem, for how long, where to put
// the trace. The problem block is either {"file": path}, an inline problem
// in its family's schema, or generator parameters (dims plus an optional
// "seed" overriding the top-level one).
struct ExperimentConfig {
  Family family = Family::kMdp;
  std::string method;
  double eta = 0.1;
  double tau = 0.0;
  double omega = 0.0;
  double alpha = 0.0;  // markov-game value rate; 0 defaults to eta * tau
  long iters = 100;
  long record_every = 1;
  std::uint64_t seed = 0;
  Json problem;
  Json start;          // family-specific warm start, null for the default
  std::string output;  // trace file name; empty derives <family>_<method>.csv
  std::string preset;  // set when built by preset_configs, stamped as metadata
};

inline ExperimentConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("config_from_json: expected an object");
  ExperimentConfig config;
  config.family = family_from_name(
      detail::require_field(j, "family", "config_from_json").get<std::string>());
  const Json& method = detail::require_field(j, "method", "config_from_json");
  if (!method.is_string()) throw ConfigError("config_from_json: method must be a string");
  config.method = method.get<std::string>();
  try {
    config.eta = j.value("eta", config.eta);
    config.tau = j.value("tau", config.tau);
    config.omega = j.value("omega", config.omega);
    config.alpha = j.value("alpha", config.alpha);
    config.iters = j.value("iters", config.iters);
    config.record_every = j.value("record_every", config.record_every);
    config.seed = j.value("seed", config.seed);
    config.output = j.value("output", config.output);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config_from_json: ") + e.what());
  }
  config.problem = detail::require_field(j, "problem", "config_from_json");
  if (j.contains("start")) config.start = j.at("start");
  return config;
}

inline Json json_from_config(const ExperimentConfig& config) {
  Json j{{"family", family_name(config.family)},
         {"method", config.method},
         {"eta", config.eta},
         {"tau", config.tau},
         {"omega", config.omega},
         {"alpha", config.alpha},
         {"iters", config.iters},
         {"record_every", config.record_every},
         {"seed", config.seed},
         {"problem", config.problem}};
  if (!config.start.is_null()) j["start"] = config.start;
  if (!config.output.empty()) j["output"] = config.output;
  return j;
}

namespace detail {

inline void validate_run_shape(const ExperimentConfig& config) {
  if (config.method.empty()) throw ConfigError("run_experiment: empty method");
  if (config.iters < 0) throw ConfigError("run_experiment: negative iteration budget");
  if (config.record_every <= 0) throw ConfigError("run_experiment: record_every must be positive");
  if (!config.problem.is_object()) throw ConfigError("run_experiment: problem must be an object");
}

inline bool due(long t, long iters, long every) {
  return t == 0 || t == iters || t % every == 0;
}

inline std::uint64_t problem_seed(const ExperimentConfig& config) {
  return config.problem.value("seed", config.seed);
}

inline Json resolved_problem(const Json& problem) {
  if (problem.contains("file"))
    return load_json_file(problem.at("file").get<std::string>());
  return problem;
}

}  // namespace detail

inline PgMethod pg_method_from_name(const std::string& name) {
  if (name == "projected_pg") return PgMethod::kProjectedPg;
  if (name == "softmax_pg") return PgMethod::kSoftmaxPg;
  if (name == "log_barrier_pg") return PgMethod::kLogBarrierPg;
  if (name == "npg") return PgMethod::kNpg;
  if (name == "entropy_npg") return PgMethod::kEntropyNpg;
  if (name == "entropy_pg") return PgMethod::kEntropyPg;
  throw ConfigError("pg_method_from_name: unknown method '" + name + "'");
}

inline LqrStepKind lqr_step_from_name(const std::string& name) {
  if (name == "pg") return LqrStepKind::kPg;
  if (name == "npg") return LqrStepKind::kNpg;
  if (name == "gauss_newton") return LqrStepKind::kGaussNewton;
  throw ConfigError("lqr_step_from_name: unknown method '" + name + "'");
}

namespace detail {

inline TabularMdp load_mdp_problem(const ExperimentConfig& config) {
  const Json p = resolved_problem(config.problem);
  if (p.contains("r")) return mdp_from_json(p);
  if (p.contains("states") && p.contains("actions") && p.contains("gamma"))
    return random_mdp(problem_seed(config), p.at("states").get<Eigen::Index>(),
                      p.at("actions").get<Eigen::Index>(), p.at("gamma").get<double>());
  throw ConfigError("run_experiment: mdp problem needs a file, an inline model, or dims");
}

inline MatrixGame load_matrix_problem(const ExperimentConfig& config) {
  const Json p = resolved_problem(config.problem);
  if (p.contains("payoff")) return matrix_game_from_json(p);
  if (p.contains("rows") && p.contains("cols"))
    return MatrixGame(random_payoff(problem_seed(config), p.at("rows").get<Eigen::Index>(),
                                    p.at("cols").get<Eigen::Index>()));
  throw ConfigError("run_experiment: matrix_game problem needs a payoff or dims");
}

inline ZeroSumMarkovGame load_markov_problem(const ExperimentConfig& config) {
  const Json p = resolved_problem(config.problem);
  if (p.contains("r")) return markov_game_from_json(p);
  if (p.contains("states") && p.contains("row_actions") && p.contains("col_actions") &&
      p.contains("gamma"))
    return random_markov_game(problem_seed(config), p.at("states").get<Eigen::Index>(),
                              p.at("row_actions").get<Eigen::Index>(),
                              p.at("col_actions").get<Eigen::Index>(),
                              p.at("gamma").get<double>());
  throw ConfigError("run_experiment: markov_game problem needs a file, a model, or dims");
}

inline LqrProblem load_lqr_problem(const ExperimentConfig& config) {
  const Json p = resolved_problem(config.problem);
  if (p.contains("A")) return lqr_from_json(p);
  if (p.contains("d") && p.contains("k"))
    return random_lqr(problem_seed(config), p.at("d").get<Eigen::Index>(),
                      p.at("k").get<Eigen::Index>());
  throw ConfigError("run_experiment: lqr problem needs matrices or dims");
}

inline void run_mdp_family(const ExperimentConfig& config, CsvTable& table) {
  const TabularMdp mdp = load_mdp_problem(config);
  PgConfig pg;
  pg.method = pg_method_from_name(config.method);
  pg.eta = config.eta;
  pg.tau = config.tau;
  pg.omega = config.omega;
  pg.max_iters = config.iters;
  pg.record_every = config.record_every;
  const bool track_policy_gap =
      (pg.method == PgMethod::kEntropyNpg || pg.method == PgMethod::kEntropyPg);
  pg.record_policies = track_policy_gap;

  std::optional<Mat> init_theta;
  if (config.start.is_object() && config.start.contains("theta"))
    init_theta = mat_from_json(config.start.at("theta"), "run_experiment mdp start");

  const PgTrace trace = run_single_agent(mdp, pg, init_theta);

  table.columns = {"iter", "value_rho", "gap_rho", "gap_sup"};
  std::optional<Mat> pi_star;
  if (track_policy_gap) {
    table.columns.push_back("policy_gap_tv");
    pi_star = soft_optimal_values(mdp, config.tau, 1e-12).pi_star.matrix();
  }
  for (const PgTraceRecord& rec : trace.records) {
    std::vector<double> row{static_cast<double>(rec.iter), rec.value_rho, rec.gap_rho,
                            rec.gap_sup};
    if (track_policy_gap) {
      const Mat& pi = rec.policy ? *rec.policy : trace.final_policy;
      double tv = 0.0;
      for (Eigen::Index s = 0; s < pi.rows(); ++s)
        tv = std::max(tv, 0.5 * (pi.row(s) - pi_star->row(s)).cwiseAbs().sum());
      row.push_back(tv);
    }
    table.rows.push_back(std::move(row));
  }
}

inline void run_matrix_family(const ExperimentConfig& config, CsvTable& table) {
  const MatrixGame game = load_matrix_problem(config);
  const Eigen::Index m = game.rows(), n = game.cols();

  StrategyPair pair{Distribution::uniform(m), Distribution::uniform(n)};
  if (config.start.is_object()) {
    if (config.start.contains("mu"))
      pair.mu = Distribution(vec_from_json(config.start.at("mu"), "run_experiment start mu"));
    if (config.start.contains("nu"))
      pair.nu = Distribution(vec_from_json(config.start.at("nu"), "run_experiment start nu"));
  }

  const bool damped = config.tau > 0.0;
  table.columns = {"iter", "ne_gap"};
  if (damped) table.columns.push_back("qre_gap");
  for (Eigen::Index i = 0; i < m; ++i) table.columns.push_back("mu" + std::to_string(i + 1));
  for (Eigen::Index i = 0; i < n; ++i) table.columns.push_back("nu" + std::to_string(i + 1));

  auto record = [&](long t, const StrategyPair& at) {
    std::vector<double> row{static_cast<double>(t), ne_gap(game, at)};
    if (damped) row.push_back(qre_gap(game, at, config.tau));
    for (Eigen::Index i = 0; i < m; ++i) row.push_back(at.mu.vec()[i]);
    for (Eigen::Index i = 0; i < n; ++i) row.push_back(at.nu.vec()[i]);
    table.rows.push_back(std::move(row));
  };

  if (config.method == "mwu" || config.method == "reg_mwu") {
    if (config.method == "reg_mwu" && !damped)
      throw ConfigError("run_experiment: reg_mwu needs tau > 0");
    record(0, pair);
    for (long t = 1; t <= config.iters; ++t) {
      pair = config.method == "mwu" ? mwu_step(game, pair, config.eta)
                                    : reg_mwu_step(game, pair, config.eta, config.tau);
      if (due(t, config.iters, config.record_every)) record(t, pair);
    }
  } else if (config.method == "omwu") {
    OmwuState state(pair, config.eta, config.tau);
    record(0, state.pair());
    for (long t = 1; t <= config.iters; ++t) {
      state.step(game.payoff());
      if (due(t, config.iters, config.record_every)) record(t, state.pair());
    }
  } else {
    throw ConfigError("run_experiment: unknown matrix_game method '" + config.method + "'");
  }
}

inline void run_markov_family(const ExperimentConfig& config, CsvTable& table) {
  if (config.method != "actor_critic")
    throw ConfigError("run_experiment: unknown markov_game method '" + config.method + "'");
  const ZeroSumMarkovGame game = load_markov_problem(config);

  ActorCriticConfig ac;
  ac.inner = config.tau > 0.0 ? InnerAlg::kRegOmwu : InnerAlg::kOmwu;
  ac.eta = config.eta;
  ac.tau = config.tau;
  const double alpha = config.alpha > 0.0 ? config.alpha : config.eta * config.tau;
  if (!(alpha > 0.0))
    throw ConfigError("run_experiment: markov_game needs alpha > 0 (or tau > 0)");
  ac.alpha = [alpha](long) { return alpha; };
  ac.max_iters = config.iters;
  ac.record_every = config.record_every;

  const AcRunResult result = actor_critic_run(game, ac);
  table.columns = {"iter", "ref_value_err", "ref_policy_gap", "ref_gap", "ne_gap"};
  for (const AcTraceRecord& rec : result.trace)
    table.rows.push_back({static_cast<double>(rec.iter), rec.ref_value_err, rec.ref_policy_gap,
                          rec.ref_gap, rec.ne_gap});
}

inline void run_lqr_family(const ExperimentConfig& config, CsvTable& table) {
  const LqrProblem prob = load_lqr_problem(config);
  const LqrStepKind kind = lqr_step_from_name(config.method);

  GainMatrix gain = config.problem.contains("K0")
                        ? GainMatrix(prob, mat_from_json(config.problem.at("K0"),
                                                         "run_experiment lqr K0"))
                        : random_stable_gain(problem_seed(config) + 1, prob);
  const double cost_star = evaluate_gain(prob, solve_dare(prob, 1e-12).K).cost;

  table.columns = {"iter", "cost", "gap", "grad_norm"};
  auto record = [&](long t) {
    const LqrEvaluation ev = evaluate_gain(prob, gain);
    table.rows.push_back(
        {static_cast<double>(t), ev.cost, ev.cost - cost_star, ev.gradient.norm()});
  };
  record(0);
  for (long t = 1; t <= config.iters; ++t) {
    gain = lqr_step(prob, gain, config.eta, kind);
    if (due(t, config.iters, config.record_every)) record(t);
  }
}

}  // namespace detail

// Builds the full trace table for one configured run. Deterministic: the
// same config (and library version) yields byte-identical CSV output.
inline CsvTable run_experiment(const ExperimentConfig& config) {
  detail::validate_run_shape(config);
  CsvTable table;
  char hash[24];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(fnv1a_hash(json_from_config(config).dump())));
  table.metadata.emplace_back("pglab_version", kVersion);
  if (!config.preset.empty()) table.metadata.emplace_back("preset", config.preset);
  table.metadata.emplace_back("family", family_name(config.family));
  table.metadata.emplace_back("method", config.method);
  table.metadata.emplace_back("seed", std::to_string(config.seed));
  table.metadata.emplace_back("config_fnv1a", hash);

  switch (config.family) {
    case Family::kMdp: detail::run_mdp_family(config, table); break;
    case Family::kMatrixGame: detail::run_matrix_family(config, table); break;
    case Family::kMarkovGame: detail::run_markov_family(config, table); break;
    case Family::kLqr: detail::run_lqr_family(config, table); break;
  }
  return table;
}

inline std::string trace_file_name(const ExperimentConfig& config) {
  if (!config.output.empty()) return config.output;
  return std::string(family_name(config.family)) + "_" + config.method + ".csv";
}

struct ExperimentResult {
  CsvTable table;
  std::string path;
};

// Runs and writes the trace under out_dir (created if missing). An absolute
// config.output bypasses out_dir.
inline ExperimentResult run_and_write(const ExperimentConfig& config, const std::string& out_dir) {
  ExperimentResult result;
  result.table = run_experiment(config);
  std::filesystem::path path = trace_file_name(config);
  if (!path.is_absolute()) {
    const std::filesystem::path dir = out_dir.empty() ? "." : out_dir;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("run_and_write: cannot create " + dir.string());
    path = dir / path;
  }
  result.path = path.string();
  write_csv(result.path, result.table);
  return result;
}

// Named experiment bundles with every constant pinned.
inline std::vector<ExperimentConfig> preset_configs(const std::string& name) {
  if (name == "fig1-bandit") {
    // Three-armed bandit, softmax policy class, entropy temperature 0.1.
    // Both methods start uniform and run 200 steps at eta = 1.
    Json problem{{"gamma", 0.0},
                 {"rho", Json::array({1.0})},
                 {"r", Json::array({Json::array({1.0, 0.9, 0.1})})},
                 {"P", Json::array({Json::array({Json::array({1.0}), Json::array({1.0}),
                                                 Json::array({1.0})})})}};
    ExperimentConfig pg;
    pg.family = Family::kMdp;
    pg.method = "entropy_pg";
    pg.eta = 1.0;
    pg.tau = 0.1;
    pg.iters = 200;
    pg.problem = problem;
    pg.output = "fig1_bandit_entropy_pg.csv";
    pg.preset = name;
    ExperimentConfig npg = pg;
    npg.method = "entropy_npg";
    npg.output = "fig1_bandit_entropy_npg.csv";
    return {pg, npg};
  }
  if (name == "fig2-rps") {
    // Rock-paper-scissors from a lopsided start; plain simultaneous MWU
    // spirals outward, which is the point of the trace.
    ExperimentConfig mwu;
    mwu.family = Family::kMatrixGame;
    mwu.method = "mwu";
    mwu.eta = 0.1;
    mwu.iters = 1000;
    mwu.problem = Json{{"payoff", Json::array({Json::array({0.0, -1.0, 1.0}),
                                               Json::array({1.0, 0.0, -1.0}),
                                               Json::array({-1.0, 1.0, 0.0})})}};
    mwu.start = Json{{"mu", Json::array({0.4, 0.4, 0.2})},
                     {"nu", Json::array({0.4, 0.4, 0.2})}};
    mwu.output = "fig2_rps_mwu.csv";
    mwu.preset = name;
    return {mwu};
  }
  throw ConfigError("preset_configs: unknown preset '" + name + "'");
}

}  // namespace pglab
