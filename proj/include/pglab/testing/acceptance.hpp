#pragma once

// Executable acceptance suite. Every entry re-measures the claim it names
// with thresholds fixed in this file; the result carries the numbers that
// were actually observed. Runtime limits are part of each entry and a
// breach fails it.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "pglab/experiment.hpp"
#include "pglab/generators.hpp"
#include "pglab/rate_fit.hpp"
#include "pglab/testing/oracles.hpp"

namespace pglab::testing {

struct CriterionResult {
  std::string id;
  std::string suite;
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  std::string details;
};

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

template <class Body>
CriterionResult timed(const char* id, const char* suite, const char* name, double budget_s,
                      Body&& body) {
  CriterionResult out;
  out.id = id;
  out.suite = suite;
  out.name = name;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    out.pass = body(out.details);
  } catch (const std::exception& e) {
    out.pass = false;
    if (!out.details.empty()) out.details += "; ";
    out.details += std::string("exception: ") + e.what();
  }
  out.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!(out.seconds < budget_s)) {
    out.pass = false;
    out.details += " [exceeded " + num(budget_s) + " s budget]";
  }
  return out;
}

inline double relative_error(const Mat& got, const Mat& want) {
  const double scale = std::max(want.norm(), 1e-300);
  return (got - want).norm() / scale;
}

// -------------------------------------------------------------------------
// pg_single_agent

inline CriterionResult criterion_1_gradient_check() {
  return timed("1", "pg_single_agent", "softmax gradient matches central finite differences",
               5.0, [](std::string& d) {
    double worst = 0.0;
    const double gammas[3] = {0.5, 0.9, 0.99};
    for (int i = 0; i < 20; ++i) {
      const auto seed = static_cast<std::uint64_t>(i + 1);
      const Eigen::Index S = 2 + i % 5, A = 2 + i % 3;
      const TabularMdp mdp = random_mdp(seed, S, A, gammas[i % 3]);
      std::mt19937_64 rng(seed + 900);
      std::uniform_real_distribution<double> unif(-1.0, 1.0);
      Mat theta(S, A);
      for (Eigen::Index s = 0; s < S; ++s)
        for (Eigen::Index a = 0; a < A; ++a) theta(s, a) = unif(rng);

      const StochasticPolicy pi = policy_from_softmax(SoftmaxParams(theta));
      const Mat analytic = softmax_pg_gradient(mdp, pi, evaluate_policy(mdp, pi));
      const Mat fd = finite_difference_gradient(
          [&](const Mat& t) {
            return evaluate_policy(mdp, policy_from_softmax(SoftmaxParams(t))).value_at_rho;
          },
          theta, 1e-5);
      worst = std::max(worst, relative_error(analytic, fd));
    }
    d = "20 mdps, max rel err " + num(worst) + " (limit 1e-06)";
    return worst <= 1e-6;
  });
}

inline CriterionResult criterion_2_projected_pg() {
  return timed("2", "pg_single_agent",
               "projected ascent is monotone and meets the sublinear gap bound", 30.0,
               [](std::string& d) {
    bool monotone = true;
    double worst_ratio = 0.0;
    const double gammas[3] = {0.5, 0.9, 0.99};
    for (int i = 0; i < 10; ++i) {
      const Eigen::Index S = 3 + i % 4, A = 2 + i % 3;
      const double gamma = gammas[i % 3];
      const TabularMdp mdp = random_mdp(static_cast<std::uint64_t>(101 + i), S, A, gamma);
      PgConfig config;
      config.method = PgMethod::kProjectedPg;
      config.eta = std::pow(1.0 - gamma, 3) / (2.0 * gamma * static_cast<double>(A));
      config.max_iters = 2000;
      const PgTrace trace = run_single_agent(mdp, config);

      const OptimalValues opt = optimal_values(mdp, 1e-12);
      const Distribution d_star = visitation_distribution(mdp, opt.greedy, mdp.rho());
      const double dist_mismatch =
          (d_star.vec().array() / mdp.rho().vec().array()).maxCoeff();
      const double prefactor = 4.0 * std::sqrt(static_cast<double>(S)) * dist_mismatch /
                               (1.0 - gamma);
      const double gap0 = trace.records[0].gap_rho;

      double running_min = gap0;
      for (std::size_t t = 1; t < trace.records.size(); ++t) {
        if (trace.records[t].value_rho < trace.records[t - 1].value_rho - 1e-12)
          monotone = false;
        running_min = std::min(running_min, trace.records[t].gap_rho);
        const double bound =
            prefactor * std::sqrt(2.0 * gap0 /
                                  (config.eta * static_cast<double>(trace.records[t].iter)));
        worst_ratio = std::max(worst_ratio, running_min / bound);
      }
    }
    d = "10 mdps, T = 2000: monotone " + std::string(monotone ? "yes" : "NO") +
        ", max min-gap/bound " + num(worst_ratio) + " (limit 1)";
    return monotone && worst_ratio <= 1.0;
  });
}

inline CriterionResult criterion_3_npg_rate() {
  return timed("3", "pg_single_agent", "npg meets the log A/(eta T) + 1/((1-g)^2 T) bound",
               30.0, [](std::string& d) {
    double worst_ratio = 0.0;
    const double gammas[3] = {0.5, 0.9, 0.99};
    for (int i = 0; i < 10; ++i) {
      const Eigen::Index S = 3 + i % 4, A = 2 + i % 3;
      const double gamma = gammas[i % 3];
      const TabularMdp mdp = random_mdp(static_cast<std::uint64_t>(301 + i), S, A, gamma);
      const double log_A = std::log(static_cast<double>(A));
      for (const double eta : {0.1, 1.0, 10.0}) {
        PgConfig config;
        config.method = PgMethod::kNpg;
        config.eta = eta;
        config.max_iters = 1000;
        const PgTrace trace = run_single_agent(mdp, config);
        for (std::size_t t = 1; t < trace.records.size(); ++t) {
          const auto T = static_cast<double>(trace.records[t].iter);
          const double bound =
              log_A / (eta * T) + 1.0 / ((1.0 - gamma) * (1.0 - gamma) * T);
          worst_ratio = std::max(worst_ratio, trace.records[t].gap_rho / bound);
        }
      }
    }
    d = "10 mdps x eta {0.1, 1, 10}, T <= 1000: max gap/bound " + num(worst_ratio) +
        " (limit 1)";
    return worst_ratio <= 1.0;
  });
}

inline CriterionResult criterion_4_entropy_npg() {
  return timed("4", "pg_single_agent", "entropy npg meets the linear sup-norm bound",
               30.0, [](std::string& d) {
    const double gamma = 0.9, tau = 0.1;
    const double eta = 0.5 * (1.0 - gamma) / tau;  // 0.5
    double worst_ratio = 0.0, worst_factor = 0.0;
    for (int i = 0; i < 5; ++i) {
      const Eigen::Index S = 3 + i % 3, A = 2 + i % 3;
      const TabularMdp mdp = random_mdp(static_cast<std::uint64_t>(401 + i), S, A, gamma);
      PgConfig config;
      config.method = PgMethod::kEntropyNpg;
      config.eta = eta;
      config.tau = tau;
      config.max_iters = 300;
      const PgTrace trace = run_single_agent(mdp, config);

      const double prefactor =
          15.0 * (1.0 + tau * std::log(static_cast<double>(A))) / (1.0 - gamma);
      std::vector<long> iters;
      std::vector<double> errs;
      long fit_to = 0;
      for (const auto& rec : trace.records) {
        if (rec.iter >= 1) {
          const double bound =
              prefactor * std::pow(1.0 - eta * tau, static_cast<double>(rec.iter - 1));
          worst_ratio = std::max(worst_ratio, rec.gap_sup / bound);
        }
        iters.push_back(rec.iter);
        errs.push_back(rec.gap_sup);
        // fit only while the signal is above the reference-solve floor
        if (rec.gap_sup > 1e-11) fit_to = rec.iter;
      }
      const RateFit fit = fit_rate(iters, errs, 5, fit_to);
      worst_factor = std::max(worst_factor, fit.factor);
    }
    const double factor_limit = 1.0 - eta * tau + 0.02;
    d = "5 mdps: max gap/bound " + num(worst_ratio) + " (limit 1), max fitted factor " +
        num(worst_factor) + " (limit " + num(factor_limit) + ")";
    return worst_ratio <= 1.0 && worst_factor <= factor_limit;
  });
}

// -------------------------------------------------------------------------
// experiment_cli

inline CriterionResult criterion_5_fig1_preset() {
  return timed("5", "experiment_cli", "fig1-bandit: npg reaches the soft optimum, pg lags",
               5.0, [](std::string& d) {
    const auto configs = preset_configs("fig1-bandit");
    const CsvTable pg = run_experiment(configs[0]);
    const CsvTable npg = run_experiment(configs[1]);
    const std::size_t tv = column_index(npg, "policy_gap_tv");

    long first_hit = -1;
    for (const auto& row : npg.rows) {
      if (row[tv] <= 1e-6) {
        first_hit = static_cast<long>(row[0]);
        break;
      }
    }
    const double pg_100 = pg.rows[100][column_index(pg, "policy_gap_tv")];
    const double npg_100 = npg.rows[100][tv];
    d = "npg tv <= 1e-06 at iter " + std::to_string(first_hit) +
        " (limit 200); errors at 100: pg " + num(pg_100) + " vs npg " + num(npg_100);
    return first_hit >= 0 && first_hit <= 200 && pg_100 > npg_100;
  });
}

// -------------------------------------------------------------------------
// matrix_game

inline Mat acceptance_rps_payoff() {
  Mat A(3, 3);
  A << 0, -1, 1, 1, 0, -1, -1, 1, 0;
  return A;
}

inline Distribution acceptance_lopsided3() {
  Vec v(3);
  v << 0.4, 0.4, 0.2;
  return Distribution(v);
}

inline CriterionResult criterion_6_cycling_vs_optimism() {
  return timed("6", "matrix_game", "mwu cycles on rps while omwu's last iterate converges",
               10.0, [](std::string& d) {
    const Mat A = acceptance_rps_payoff();
    const StrategyPair start{acceptance_lopsided3(), acceptance_lopsided3()};

    StrategyPair pair = start;
    double gap_at_10 = 0.0, late_max = 0.0;
    for (long t = 1; t <= 1000; ++t) {
      pair = mwu_step(A, pair, 0.1);
      const double gap = ne_gap(A, pair);
      if (t == 10) gap_at_10 = gap;
      if (t >= 500) late_max = std::max(late_max, gap);
    }

    OmwuState state(start, 0.125, 0.0);
    std::vector<long> iters;
    std::vector<double> gaps;
    long hit = -1;
    for (long t = 1; t <= 5000; ++t) {
      state.step(A);
      const double gap = ne_gap(A, state.pair());
      iters.push_back(t);
      gaps.push_back(gap);
      if (hit < 0 && gap <= 1e-6) {
        hit = t;
        break;
      }
    }
    const RateFit tail = fit_rate(iters, gaps, 2500, hit > 0 ? hit : 5000);

    d = "mwu: max gap over [500,1000] " + num(late_max) + " >= gap@10 " + num(gap_at_10) +
        "; omwu: gap <= 1e-06 at iter " + std::to_string(hit) + " (limit 5000), tail slope " +
        num(tail.slope);
    return late_max >= gap_at_10 && hit > 0 && tail.slope < 0.0;
  });
}

inline Distribution acceptance_ramp(Eigen::Index n) {
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = static_cast<double>(i + 1);
  return Distribution(v / v.sum());
}

inline CriterionResult criterion_7_damped_omwu() {
  return timed("7", "matrix_game", "damped omwu meets its contraction budget to the qre",
               20.0, [](std::string& d) {
    long worst_hit = 0, worst_budget = 0;
    double worst_factor = 0.0, factor_limit = 0.0;
    bool all_hit = true;
    for (const double tau : {0.05, 0.2}) {
      const double eta = std::min(1.0 / (2.0 * tau + 2.0), 0.25);
      factor_limit = std::max(factor_limit, 1.0 - eta * tau + 0.02);
      for (int g = 0; g <= 10; ++g) {
        const Mat A = g < 10 ? random_payoff(static_cast<std::uint64_t>(701 + g),
                                             2 + (701 + g) % 4, 2 + (702 + g) % 4)
                             : acceptance_rps_payoff();
        OmwuState state({acceptance_ramp(A.rows()), acceptance_ramp(A.cols())}, eta, tau);
        const double eps0 = qre_gap(A, state.pair(), tau);
        const long budget = std::lround(std::ceil(std::log(std::max(eps0, 1e-8) / 1e-8) /
                                                  (-std::log1p(-eta * tau)))) +
                            200;
        std::vector<long> iters;
        std::vector<double> gaps;
        long hit = -1;
        for (long t = 1; t <= budget; ++t) {
          state.step(A);
          const double gap = qre_gap(A, state.pair(), tau);
          iters.push_back(t);
          gaps.push_back(gap);
          if (gap <= 1e-8) {
            hit = t;
            break;
          }
        }
        if (hit < 0) {
          all_hit = false;
          continue;
        }
        if (hit > worst_hit) {
          worst_hit = hit;
          worst_budget = budget;
        }
        const RateFit fit = fit_rate(iters, gaps, hit / 4, 3 * hit / 4);
        worst_factor = std::max(worst_factor, fit.factor);
      }
    }
    d = "22 runs: all within budget " + std::string(all_hit ? "yes" : "NO") +
        " (slowest " + std::to_string(worst_hit) + " of " + std::to_string(worst_budget) +
        "), max fitted factor " + num(worst_factor) + " (limit " + num(factor_limit) + ")";
    return all_hit && worst_factor <= factor_limit;
  });
}

inline CriterionResult criterion_8_reg_mwu() {
  return timed("8", "matrix_game", "regularization-only mwu converges to the qre", 20.0,
               [](std::string& d) {
    long worst_hit = 0;
    bool all_hit = true;
    for (const double tau : {0.05, 0.2}) {
      const double eta = tau / 4.0;
      for (int g = 0; g <= 10; ++g) {
        const Mat A = g < 10 ? random_payoff(static_cast<std::uint64_t>(701 + g),
                                             2 + (701 + g) % 4, 2 + (702 + g) % 4)
                             : acceptance_rps_payoff();
        const StrategyPair target = solve_qre(A, tau, 1e-9);
        StrategyPair pair{Distribution::uniform(A.rows()), Distribution::uniform(A.cols())};
        long hit = -1;
        for (long t = 1; t <= 100000; ++t) {
          pair = reg_mwu_step(A, pair, eta, tau);
          if (std::max(total_variation(pair.mu, target.mu),
                       total_variation(pair.nu, target.nu)) <= 1e-7) {
            hit = t;
            break;
          }
        }
        if (hit < 0) all_hit = false;
        worst_hit = std::max(worst_hit, hit);
      }
    }
    d = "22 runs at eta = tau/4: all reach tv <= 1e-07 vs solve_qre " +
        std::string(all_hit ? "yes" : "NO") + ", slowest " + std::to_string(worst_hit) +
        " iterations";
    return all_hit;
  });
}

// -------------------------------------------------------------------------
// markov_game

inline CriterionResult criterion_9_actor_critic() {
  return timed("9", "markov_game",
               "actor critic tracks the regularized oracle; one-state run replays mwu", 60.0,
               [](std::string& d) {
    const double gamma = 0.8, tau = 0.1;
    double worst_factor = 0.0, worst_final = 0.0, factor_limit = 2.0;
    bool all_reached = true;
    const double cs[3] = {0.25, 0.125, 0.0625};
    const long budgets[3] = {1800000, 3600000, 7200000};
    for (const std::uint64_t seed : {901, 902}) {
      const ZeroSumMarkovGame game = random_markov_game(seed, 3, 2, 2, gamma);
      const SoftMinimax oracle = soft_minimax_oracle(game, tau, 1e-10);
      for (int ci = 0; ci < 3; ++ci) {
        const double eta = cs[ci] * std::pow(1.0 - gamma, 3) / 3.0;
        ActorCriticConfig config;
        config.eta = eta;
        config.tau = tau;
        config.alpha = [eta, tau](long) { return eta * tau; };
        config.max_iters = budgets[ci];
        config.record_every = 2000;
        config.stop_ref_gap = 1e-4;
        config.record_ne_gap = false;
        const AcRunResult out = actor_critic_run(game, config, &oracle);

        const double final_gap = out.trace.back().ref_gap;
        worst_final = std::max(worst_final, final_gap);
        if (final_gap > 1e-4) all_reached = false;

        std::vector<long> iters;
        std::vector<double> errs;
        for (const auto& rec : out.trace) {
          iters.push_back(rec.iter);
          errs.push_back(rec.ref_gap);
        }
        const long last = iters.back();
        const RateFit fit = fit_rate(iters, errs, last / 5, last);
        worst_factor = std::max(worst_factor, fit.factor);
        factor_limit = std::min(factor_limit, 1.0 - eta * tau + 0.02);
      }
    }

    // gamma = 0 single state: the run must replay damped optimistic play on
    // the stage game exactly.
    Mat skew = acceptance_rps_payoff();
    std::vector<Mat> P{Mat::Ones(9, 1)};
    std::vector<Mat> r{0.5 + 0.5 * skew.array()};
    const ZeroSumMarkovGame one_state(std::move(P), std::move(r), 0.0);
    ActorCriticConfig rconf;
    rconf.eta = 0.05;
    rconf.tau = 0.1;
    rconf.alpha = [](long) { return 0.005; };
    rconf.max_iters = 300;
    rconf.record_ne_gap = false;
    const AcRunResult replay = actor_critic_run(one_state, rconf);
    OmwuState twin(3, 3, 0.05, 0.1);
    Vec V = Vec::Zero(1);
    twin.step(Mat::Zero(3, 3));
    for (int t = 1; t <= 300; ++t) {
      if (t > 1) twin.step(one_state.reward(0));
      V[0] = 0.995 * V[0] + 0.005 * one_step_value(one_state.reward(0), twin.mu(),
                                                   twin.nu(), 0.1);
    }
    const bool bitwise =
        replay.V[0] == V[0] &&
        (replay.policy.mu[0].vec() - twin.mu().vec()).cwiseAbs().maxCoeff() == 0.0 &&
        (replay.policy.nu[0].vec() - twin.nu().vec()).cwiseAbs().maxCoeff() == 0.0;

    d = "2 games x c {1/4, 1/8, 1/16}: worst final ref gap " + num(worst_final) +
        " (limit 1e-04), max fitted factor " + num(worst_factor) + " (limit " +
        num(factor_limit) + "); one-state replay bit-for-bit " +
        std::string(bitwise ? "yes" : "NO");
    return all_reached && worst_factor <= factor_limit && bitwise;
  });
}

// -------------------------------------------------------------------------
// lqr

inline CriterionResult criterion_10_lqr() {
  return timed("10", "lqr", "riccati, gradients, dominance, and the step-size certificates",
               60.0, [](std::string& d) {
    // (a) scalar golden instance
    const LqrProblem golden(Mat::Ones(1, 1), Mat::Ones(1, 1), Mat::Ones(1, 1), Mat::Ones(1, 1),
                            Mat::Ones(1, 1));
    const DareSolution gsol = solve_dare(golden, 1e-12);
    const double p_err = std::abs(gsol.P(0, 0) - (1.0 + std::sqrt(5.0)) / 2.0);
    const double k_err = std::abs(gsol.K(0, 0) - (std::sqrt(5.0) - 1.0) / 2.0);
    const bool a_ok = p_err <= 1e-9 && k_err <= 1e-9;

    // (b) analytic gradient vs central differences
    double fd_worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const auto seed = static_cast<std::uint64_t>(1001 + i);
      const LqrProblem prob = random_lqr(seed, 2 + i % 3, 1 + i % 2);
      const GainMatrix gain = random_stable_gain(seed + 500, prob, 0.5);
      const LqrEvaluation ev = evaluate_gain(prob, gain);
      const Mat fd = finite_difference_gradient(
          [&](const Mat& K) { return evaluate_gain(prob, K).cost; }, gain.K(), 1e-5);
      fd_worst = std::max(fd_worst, relative_error(ev.gradient, fd));
    }
    const bool b_ok = fd_worst <= 1e-6;

    // (c) gradient dominance on 100 stable gains
    int dominance_holds = 0;
    for (int p = 0; p < 10; ++p) {
      const auto seed = static_cast<std::uint64_t>(2001 + p);
      const LqrProblem prob = random_lqr(seed, 3, 2);
      for (std::uint64_t sub = 0; sub < 10; ++sub)
        if (check_gradient_dominance(prob, random_stable_gain(seed * 10 + sub, prob, 0.6))
                .holds)
          ++dominance_holds;
    }
    const bool c_ok = dominance_holds == 100;

    // (d) npg one-step contraction along the whole trajectory
    bool npg_ok = true;
    double npg_margin = 1.0;
    for (const auto& [seed, dim] : std::vector<std::pair<std::uint64_t, Eigen::Index>>{
             {101, 4}, {103, 4}, {3001, 3}, {3002, 3}}) {
      const LqrProblem prob = random_lqr(seed, dim, 2);
      const DareSolution ref = solve_dare(prob, 1e-13);
      const double cstar = (ref.P * prob.sigma0()).trace();
      const Mat Sstar = solve_discrete_lyapunov(prob.A() - prob.B() * ref.K, prob.sigma0(),
                                                LyapunovMode::kTransposedOnRight);
      const double rate_const =
          prob.lambda_min() * sigma_min_spd(prob.R()) / spectral_norm(Sstar);
      GainMatrix gain = random_stable_gain(seed + 100, prob, 0.5);
      const double c0 = evaluate_gain(prob, gain).cost;
      const double eta =
          1.0 / (spectral_norm(prob.R()) +
                 spectral_norm(prob.B()) * spectral_norm(prob.B()) * c0 / prob.lambda_min());
      const double factor = 1.0 - rate_const * eta;
      double gap = c0 - cstar;
      for (int t = 0; t < 120 && gap > 1e-13; ++t) {
        gain = lqr_step(prob, gain, eta, LqrStepKind::kNpg);  // throws if unstable
        const double next_gap = evaluate_gain(prob, gain).cost - cstar;
        if (next_gap > factor * gap + 1e-12) npg_ok = false;
        if (gap > 1e-11) npg_margin = std::min(npg_margin, next_gap / (factor * gap));
        gap = next_gap;
      }
    }

    // (e) Gauss-Newton at eta = 1
    long gn_worst = 0;
    bool gn_ok = true;
    for (const std::uint64_t seed : {71, 72, 73}) {
      const LqrProblem prob = random_lqr(seed, 4, 2);
      const double cstar = evaluate_gain(prob, solve_dare(prob, 1e-13).K).cost;
      GainMatrix gain = random_stable_gain(seed + 100, prob, 0.5);
      long hit = -1;
      for (long t = 1; t <= 30; ++t) {
        gain = lqr_step(prob, gain, 1.0, LqrStepKind::kGaussNewton);
        if (evaluate_gain(prob, gain).cost - cstar <= 1e-10) {
          hit = t;
          break;
        }
      }
      if (hit < 0) gn_ok = false;
      gn_worst = std::max(gn_worst, hit);
    }

    // (f) plain gradient steps at the backtracking-found constant rate
    bool pg_ok = true;
    int pg_halvings_max = 0;
    for (const std::uint64_t seed : {111, 112}) {
      const LqrProblem prob = random_lqr(seed, 3, 2);
      const DareSolution ref = solve_dare(prob, 1e-13);
      const double cstar = (ref.P * prob.sigma0()).trace();
      const Mat Sstar = solve_discrete_lyapunov(prob.A() - prob.B() * ref.K, prob.sigma0(),
                                                LyapunovMode::kTransposedOnRight);
      const double mu = prob.lambda_min() * prob.lambda_min() * sigma_min_spd(prob.R()) /
                        spectral_norm(Sstar);
      const GainMatrix start = random_stable_gain(seed + 100, prob, 0.4);
      const LqrEvaluation at_start = evaluate_gain(prob, start);
      double eta = 0.5 * prob.lambda_min() * sigma_min_spd(prob.Q()) /
                   (at_start.cost * spectral_norm(prob.B()) * (start.closed_loop_norm() + 1.0) *
                    spectral_norm(prob.R() + prob.B().transpose() * at_start.P * prob.B()));
      auto run_holds = [&](double step) {
        GainMatrix gain = start;
        double gap = at_start.cost - cstar;
        for (int t = 0; t < 150 && gap > 1e-10; ++t) {
          try {
            gain = lqr_step(prob, gain, step, LqrStepKind::kPg);
          } catch (const StabilityError&) {
            return false;
          }
          const double next_gap = evaluate_gain(prob, gain).cost - cstar;
          if (next_gap > (1.0 - mu * step) * gap + 1e-12) return false;
          gap = next_gap;
        }
        return true;
      };
      int halvings = 0;
      while (!run_holds(eta) && halvings < 60) {
        eta *= 0.5;
        ++halvings;
      }
      if (halvings >= 60 || !run_holds(eta)) pg_ok = false;
      pg_halvings_max = std::max(pg_halvings_max, halvings);
    }

    d = "a: dare errs " + num(p_err) + "/" + num(k_err) + "; b: max fd rel " + num(fd_worst) +
        "; c: dominance " + std::to_string(dominance_holds) + "/100; d: npg contraction " +
        std::string(npg_ok ? "holds" : "VIOLATED") + " (margin " + num(npg_margin) +
        "); e: gn worst hit " + std::to_string(gn_worst) + "/30; f: pg certified after " +
        std::to_string(pg_halvings_max) + " halvings";
    return a_ok && b_ok && c_ok && npg_ok && gn_ok && pg_ok;
  });
}

// -------------------------------------------------------------------------
// structural

inline CriterionResult criterion_11_structural() {
  return timed("11", "experiment_cli", "normalization invariants and byte-stable traces",
               10.0, [](std::string& d) {
    double worst_dev = 0.0;
    bool nonneg = true;
    auto scan_simplex = [&](const Vec& p) {
      worst_dev = std::max(worst_dev, std::abs(p.sum() - 1.0));
      if (p.minCoeff() < 0.0) nonneg = false;
    };

    // matrix-game trace rows are strategy profiles
    ExperimentConfig fig2 = preset_configs("fig2-rps")[0];
    const CsvTable trace = run_experiment(fig2);
    for (const auto& row : trace.rows) {
      Vec mu(3), nu(3);
      mu << row[2], row[3], row[4];
      nu << row[5], row[6], row[7];
      scan_simplex(mu);
      scan_simplex(nu);
    }

    // mdp policies along a run
    const TabularMdp mdp = random_mdp(1101, 4, 3, 0.9);
    PgConfig pg;
    pg.method = PgMethod::kNpg;
    pg.eta = 1.0;
    pg.max_iters = 30;
    pg.record_policies = true;
    const PgTrace run = run_single_agent(mdp, pg);
    for (const auto& rec : run.records)
      for (Eigen::Index s = 0; s < rec.policy->rows(); ++s)
        scan_simplex(rec.policy->row(s).transpose());
    scan_simplex(evaluate_policy(mdp, StochasticPolicy(run.final_policy)).d_rho.vec());

    // markov-game joint policy
    const ZeroSumMarkovGame game = random_markov_game(1102, 2, 2, 2, 0.7);
    ActorCriticConfig ac;
    ac.eta = 0.01;
    ac.tau = 0.2;
    ac.alpha = [](long) { return 0.002; };
    ac.max_iters = 500;
    ac.record_ne_gap = false;
    const AcRunResult acr = actor_critic_run(game, ac);
    for (Eigen::Index s = 0; s < game.n_states(); ++s) {
      scan_simplex(acr.policy.mu[static_cast<size_t>(s)].vec());
      scan_simplex(acr.policy.nu[static_cast<size_t>(s)].vec());
    }

    // byte-stable output through the writer the cli uses
    const auto dir = std::filesystem::temp_directory_path() / "pglab_acceptance";
    fig2.iters = 300;
    const ExperimentResult a = run_and_write(fig2, (dir / "a").string());
    const ExperimentResult b = run_and_write(fig2, (dir / "b").string());
    auto slurp = [](const std::string& path) {
      std::ifstream in(path, std::ios::binary);
      return std::string(std::istreambuf_iterator<char>(in),
                         std::istreambuf_iterator<char>());
    };
    const std::string bytes_a = slurp(a.path), bytes_b = slurp(b.path);
    const bool deterministic = !bytes_a.empty() && bytes_a == bytes_b;
    ExperimentConfig reseeded = fig2;
    reseeded.seed += 1;
    const bool seed_stamped =
        csv_to_string(run_experiment(reseeded)) != bytes_a;

    d = "max |sum - 1| " + num(worst_dev) + " (limit 1e-09), nonnegative " +
        std::string(nonneg ? "yes" : "NO") + "; repeat runs byte-identical " +
        std::string(deterministic ? "yes" : "NO") + ", reseed changes the trace " +
        std::string(seed_stamped ? "yes" : "NO");
    return worst_dev <= 1e-9 && nonneg && deterministic && seed_stamped;
  });
}

// -------------------------------------------------------------------------
// supporting property entries

inline CriterionResult property_simplex_projection() {
  return timed("core_numeric.1", "core_numeric", "simplex projection is feasible and optimal",
               30.0, [](std::string& d) {
    std::mt19937_64 rng(7001);
    std::normal_distribution<double> gauss(0.0, 2.0);
    double worst_dev = 0.0;
    bool optimal = true, nonneg = true;
    for (int k = 0; k < 50; ++k) {
      const Eigen::Index n = 2 + k % 7;
      Vec v(n);
      for (Eigen::Index i = 0; i < n; ++i) v[i] = gauss(rng);
      const Distribution p = project_to_simplex(v);
      worst_dev = std::max(worst_dev, std::abs(p.vec().sum() - 1.0));
      if (p.vec().minCoeff() < 0.0) nonneg = false;
      if (!simplex_projection_is_optimal(v, p.vec(), 200, rng)) optimal = false;
    }
    d = "50 projections: max |sum - 1| " + num(worst_dev) + ", nonnegative " +
        std::string(nonneg ? "yes" : "NO") + ", optimality certificate " +
        std::string(optimal ? "holds" : "VIOLATED");
    return worst_dev <= 1e-12 && nonneg && optimal;
  });
}

inline CriterionResult property_lyapunov_series() {
  return timed("core_numeric.2", "core_numeric", "lyapunov solves match the truncated series",
               30.0, [](std::string& d) {
    double worst = 0.0;
    for (const std::uint64_t seed : {7101, 7102, 7103, 7104}) {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> unif(-1.0, 1.0);
      Mat M(4, 4), G(4, 4);
      for (Eigen::Index i = 0; i < 4; ++i)
        for (Eigen::Index j = 0; j < 4; ++j) {
          M(i, j) = unif(rng);
          G(i, j) = unif(rng);
        }
      M *= 0.85 / spectral_radius(M);
      const Mat W = 0.5 * Mat::Identity(4, 4) + 0.25 * G * G.transpose();
      for (const auto mode : {LyapunovMode::kTransposedOnLeft, LyapunovMode::kTransposedOnRight}) {
        const Mat X = solve_discrete_lyapunov(M, W, mode);
        const Mat series = truncated_lyapunov_series(M, W, mode, 600);
        worst = std::max(worst, (X - series).norm() / series.norm());
      }
    }
    d = "4 instances x 2 modes: max rel err " + num(worst) + " (limit 1e-09)";
    return worst <= 1e-9;
  });
}

inline CriterionResult property_matrix_norms() {
  return timed("core_numeric.3", "core_numeric", "norm helpers agree with dense eigensolvers",
               30.0, [](std::string& d) {
    double worst = 0.0;
    std::mt19937_64 rng(7301);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int k = 0; k < 20; ++k) {
      const Eigen::Index n = 2 + k % 5;
      Mat M(n, n);
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) M(i, j) = unif(rng);
      const Eigen::JacobiSVD<Mat> svd(M);
      worst = std::max(worst, std::abs(spectral_norm(M) - svd.singularValues()[0]) /
                                  svd.singularValues()[0]);
      const Eigen::EigenSolver<Mat> eig(M);
      worst = std::max(worst, std::abs(spectral_radius(M) -
                                       eig.eigenvalues().cwiseAbs().maxCoeff()));
      const Mat S = Mat::Identity(n, n) + 0.5 * M * M.transpose();
      const Eigen::SelfAdjointEigenSolver<Mat> sa(S);
      worst = std::max(worst,
                       std::abs(sigma_min_spd(S) - sa.eigenvalues().minCoeff()));
    }
    // the iterative helpers run to 1e-10 per-step change, so agreement is
    // checked at the next order up
    d = "20 matrices: max deviation " + num(worst) + " (limit 1e-08)";
    return worst <= 1e-8;
  });
}

inline CriterionResult property_policy_evaluation() {
  return timed("tabular_mdp.1", "tabular_mdp", "policy evaluation solves the bellman system",
               30.0, [](std::string& d) {
    double worst_res = 0.0, worst_d = 0.0;
    for (const std::uint64_t seed : {7201, 7202, 7203, 7204, 7205}) {
      const TabularMdp mdp = random_mdp(seed, 4, 3, 0.9);
      std::mt19937_64 rng(seed + 50);
      const StochasticPolicy pi(random_policy_matrix(4, 3, rng));
      const EvaluationResult ev = evaluate_policy(mdp, pi);
      const Vec residual = ev.V - (mdp.induced_reward(pi.matrix()) +
                                   mdp.gamma() * mdp.induced_chain(pi.matrix()) * ev.V);
      worst_res = std::max(worst_res, residual.cwiseAbs().maxCoeff());
      const Vec series =
          truncated_visitation_series(mdp, pi, mdp.rho().vec(), 800);
      worst_d = std::max(worst_d, (ev.d_rho.vec() - series).cwiseAbs().maxCoeff());
    }
    d = "5 mdps: max bellman residual " + num(worst_res) +
        ", max visitation vs series " + num(worst_d) + " (limits 1e-10 / 1e-08)";
    return worst_res <= 1e-10 && worst_d <= 1e-8;
  });
}

inline CriterionResult property_optimal_values() {
  return timed("tabular_mdp.2", "tabular_mdp", "value iteration dominates every policy",
               30.0, [](std::string& d) {
    double worst_res = 0.0, worst_greedy = 0.0, worst_dom = 0.0;
    for (const std::uint64_t seed : {7201, 7202, 7203}) {
      const TabularMdp mdp = random_mdp(seed, 4, 3, 0.9);
      const OptimalValues opt = optimal_values(mdp, 1e-12);
      const Mat Q = ::pglab::detail::q_from_v(mdp, opt.V_star);
      worst_res = std::max(
          worst_res, (opt.V_star - Q.rowwise().maxCoeff()).cwiseAbs().maxCoeff());
      worst_greedy = std::max(worst_greedy,
                              (evaluate_policy(mdp, opt.greedy).V - opt.V_star)
                                  .cwiseAbs()
                                  .maxCoeff());
      std::mt19937_64 rng(seed + 60);
      for (int k = 0; k < 5; ++k) {
        const StochasticPolicy pi(random_policy_matrix(4, 3, rng));
        worst_dom = std::max(
            worst_dom, (evaluate_policy(mdp, pi).V - opt.V_star).maxCoeff());
      }
    }
    d = "3 mdps: bellman residual " + num(worst_res) + ", greedy vs V* " +
        num(worst_greedy) + ", max policy excess " + num(worst_dom) + " (limit 1e-09)";
    return worst_res <= 1e-9 && worst_greedy <= 1e-9 && worst_dom <= 1e-9;
  });
}

inline CriterionResult property_soft_optimum() {
  return timed("tabular_mdp.3", "tabular_mdp", "soft optimum satisfies its fixed point",
               30.0, [](std::string& d) {
    const double tau = 0.1;
    double worst_res = 0.0, worst_pi = 0.0;
    for (const std::uint64_t seed : {7201, 7202, 7203}) {
      const TabularMdp mdp = random_mdp(seed, 4, 3, 0.9);
      const SoftOptimalValues opt = soft_optimal_values(mdp, tau, 1e-12);
      for (Eigen::Index s = 0; s < 4; ++s) {
        const Vec q = opt.Q_star.row(s).transpose();
        worst_res = std::max(worst_res,
                             std::abs(opt.V_star[s] - tau * log_sum_exp(q / tau)));
        worst_pi = std::max(
            worst_pi, total_variation(Vec(opt.pi_star.matrix().row(s).transpose()),
                                      distribution_from_log(q / tau).vec()));
      }
    }
    d = "3 mdps: max soft bellman residual " + num(worst_res) +
        ", max pi* vs softmax(Q*/tau) tv " + num(worst_pi) + " (limits 1e-09 / 1e-12)";
    return worst_res <= 1e-9 && worst_pi <= 1e-12;
  });
}

}  // namespace detail

inline std::vector<std::string> acceptance_suites() {
  return {"all",         "core_numeric", "tabular_mdp", "pg_single_agent",
          "matrix_game", "markov_game",  "lqr",         "experiment_cli"};
}

// Runs the selected suite ("all" or one module) and returns results in a
// fixed order. Failures are entries, never exceptions.
inline std::vector<CriterionResult> run_acceptance(const std::string& suite = "all") {
  const auto known = acceptance_suites();
  if (std::find(known.begin(), known.end(), suite) == known.end())
    throw ConfigError("run_acceptance: unknown suite '" + suite + "'");

  using Entry = std::pair<const char*, std::function<CriterionResult()>>;
  const std::vector<Entry> entries = {
      {"core_numeric", detail::property_simplex_projection},
      {"core_numeric", detail::property_lyapunov_series},
      {"core_numeric", detail::property_matrix_norms},
      {"tabular_mdp", detail::property_policy_evaluation},
      {"tabular_mdp", detail::property_optimal_values},
      {"tabular_mdp", detail::property_soft_optimum},
      {"pg_single_agent", detail::criterion_1_gradient_check},
      {"pg_single_agent", detail::criterion_2_projected_pg},
      {"pg_single_agent", detail::criterion_3_npg_rate},
      {"pg_single_agent", detail::criterion_4_entropy_npg},
      {"experiment_cli", detail::criterion_5_fig1_preset},
      {"matrix_game", detail::criterion_6_cycling_vs_optimism},
      {"matrix_game", detail::criterion_7_damped_omwu},
      {"matrix_game", detail::criterion_8_reg_mwu},
      {"markov_game", detail::criterion_9_actor_critic},
      {"lqr", detail::criterion_10_lqr},
      {"experiment_cli", detail::criterion_11_structural},
  };

  std::vector<CriterionResult> results;
  for (const auto& [name, fn] : entries)
    if (suite == "all" || suite == name) results.push_back(fn());
  return results;
}

}  // namespace pglab::testing
