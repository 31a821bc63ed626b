#pragma once

#include <iostream>
#include <optional>
#include <utility>
#include <vector>

#include "pglab/tabular_mdp.hpp"

namespace pglab {

enum class PgMethod {
  kProjectedPg,   // projected gradient ascent on the policy simplex
  kSoftmaxPg,     // gradient ascent on softmax logits
  kLogBarrierPg,  // softmax ascent with a log-barrier regularizer
  kNpg,           // natural policy gradient (multiplicative weights on Q)
  kEntropyNpg,    // entropy-regularized natural policy gradient
  kEntropyPg,     // gradient ascent on logits for the entropy-regularized value
};

struct PgConfig {
  PgMethod method = PgMethod::kNpg;
  double eta = 0.1;
  double tau = 0.0;    // entropy temperature (entropy methods)
  double omega = 0.0;  // log-barrier weight
  long max_iters = 100;
  long record_every = 1;
  bool record_policies = false;

  // Strict checks throw; advisory step-size regimes only warn.
  void validate(const TabularMdp& mdp) const {
    if (!(eta > 0.0)) throw ConfigError("PgConfig: eta must be positive");
    if (max_iters < 0) throw ConfigError("PgConfig: max_iters must be nonnegative");
    if (record_every <= 0) throw ConfigError("PgConfig: record_every must be positive");
    const double gamma = mdp.gamma();
    switch (method) {
      case PgMethod::kEntropyNpg:
        if (!(tau > 0.0)) throw ConfigError("PgConfig: entropy npg requires tau > 0");
        if (eta > (1.0 - gamma) / tau + 1e-15)
          throw ConfigError("PgConfig: entropy npg requires eta <= (1 - gamma) / tau");
        break;
      case PgMethod::kEntropyPg:
        if (!(tau > 0.0)) throw ConfigError("PgConfig: entropy pg requires tau > 0");
        break;
      case PgMethod::kLogBarrierPg:
        if (!(omega > 0.0)) throw ConfigError("PgConfig: log barrier requires omega > 0");
        break;
      case PgMethod::kProjectedPg: {
        const double A = static_cast<double>(mdp.num_actions());
        if (gamma > 0.0) {
          const double safe = std::pow(1.0 - gamma, 3) / (2.0 * gamma * A);
          if (eta > safe * (1.0 + 1e-12))
            std::cerr << "pglab: projected pg eta " << eta << " above the monotone range "
                      << safe << "\n";
        }
        break;
      }
      default:
        break;
    }
  }
};

// Exact gradient of V^{pi_theta}(rho) in the softmax parameterization:
// g(s, a) = d_rho(s) pi(a|s) Adv(s, a) / (1 - gamma).
inline Mat softmax_pg_gradient(const TabularMdp& mdp, const StochasticPolicy& pi,
                               const EvaluationResult& ev) {
  Mat g(mdp.num_states(), mdp.num_actions());
  const double scale = 1.0 / (1.0 - mdp.gamma());
  for (Eigen::Index s = 0; s < g.rows(); ++s)
    g.row(s) = scale * ev.d_rho[s] * pi.matrix().row(s).cwiseProduct(ev.Adv.row(s));
  return g;
}
inline Mat softmax_pg_gradient(const TabularMdp& mdp, const SoftmaxParams& params) {
  const StochasticPolicy pi = policy_from_softmax(params);
  return softmax_pg_gradient(mdp, pi, evaluate_policy(mdp, pi));
}

// Gradient of the log-barrier regularizer omega / (S A) sum log pi(a|s):
// omega / (S A) (1 - A pi(a|s)) per entry.
inline Mat log_barrier_gradient(const StochasticPolicy& pi, double omega) {
  const double S = static_cast<double>(pi.num_states());
  const double A = static_cast<double>(pi.num_actions());
  return (omega / (S * A)) * (1.0 - A * pi.matrix().array()).matrix();
}

// Gradient of the entropy-regularized value V_tau(rho) in the softmax
// parameterization: g(s, a) = d_rho(s) pi(a|s) (Q_tau - tau log pi - V_tau) / (1 - gamma).
inline Mat entropy_pg_gradient(const TabularMdp& mdp, const StochasticPolicy& pi,
                               const Mat& log_pi, const SoftEvaluationResult& soft,
                               const Distribution& d_rho) {
  Mat g(mdp.num_states(), mdp.num_actions());
  const double scale = 1.0 / (1.0 - mdp.gamma());
  for (Eigen::Index s = 0; s < g.rows(); ++s) {
    for (Eigen::Index a = 0; a < g.cols(); ++a) {
      const double p = pi.matrix()(s, a);
      const double adj = soft.Q_tau(s, a) - soft.tau * log_pi(s, a) - soft.V_tau[s];
      g(s, a) = scale * d_rho[s] * p * adj;
    }
  }
  return g;
}

// One projected policy gradient step: rows move along d_rho(s) Q(s, .) / (1 - gamma)
// and are projected back onto the simplex.
inline StochasticPolicy direct_pg_step(const TabularMdp& mdp, const StochasticPolicy& pi,
                                       double eta) {
  detail::check_policy_shape(mdp, pi.matrix(), "direct_pg_step");
  if (!(eta > 0.0)) throw ConfigError("direct_pg_step: eta must be positive");
  const EvaluationResult ev = evaluate_policy(mdp, pi);
  const double scale = eta / (1.0 - mdp.gamma());
  Mat next(pi.num_states(), pi.num_actions());
  for (Eigen::Index s = 0; s < next.rows(); ++s) {
    const Vec moved =
        pi.matrix().row(s).transpose() + scale * ev.d_rho[s] * ev.Q.row(s).transpose();
    next.row(s) = project_to_simplex(moved).vec().transpose();
  }
  return StochasticPolicy(std::move(next));
}

// One softmax policy gradient step on the logits.
inline SoftmaxParams softmax_pg_step(const TabularMdp& mdp, const SoftmaxParams& params,
                                     double eta) {
  if (!(eta > 0.0)) throw ConfigError("softmax_pg_step: eta must be positive");
  return SoftmaxParams(params.theta + eta * softmax_pg_gradient(mdp, params));
}

// One log-barrier step: value gradient plus barrier gradient.
inline SoftmaxParams log_barrier_pg_step(const TabularMdp& mdp, const SoftmaxParams& params,
                                         double eta, double omega) {
  if (!(eta > 0.0)) throw ConfigError("log_barrier_pg_step: eta must be positive");
  if (!(omega > 0.0)) throw ConfigError("log_barrier_pg_step: omega must be positive");
  const StochasticPolicy pi = policy_from_softmax(params);
  const EvaluationResult ev = evaluate_policy(mdp, pi);
  const Mat g = softmax_pg_gradient(mdp, pi, ev) + log_barrier_gradient(pi, omega);
  return SoftmaxParams(params.theta + eta * g);
}

namespace detail {

// NPG in log space: log pi' = log pi + eta Q / (1 - gamma), rows normalized.
inline Mat npg_step_log(const Mat& log_pi, const Mat& Q, double eta, double gamma) {
  Mat next = log_pi + (eta / (1.0 - gamma)) * Q;
  for (Eigen::Index s = 0; s < next.rows(); ++s)
    next.row(s) = log_normalize(next.row(s).transpose()).transpose();
  return next;
}

// Entropy NPG in log space:
// log pi' = (1 - eta tau / (1 - gamma)) log pi + eta Q_tau / (1 - gamma), normalized.
inline Mat entropy_npg_step_log(const Mat& log_pi, const Mat& Q_tau, double eta, double tau,
                                double gamma) {
  const double keep = 1.0 - eta * tau / (1.0 - gamma);
  Mat next = keep * log_pi + (eta / (1.0 - gamma)) * Q_tau;
  for (Eigen::Index s = 0; s < next.rows(); ++s)
    next.row(s) = log_normalize(next.row(s).transpose()).transpose();
  return next;
}

inline Mat policy_from_log(const Mat& log_pi) {
  Mat pi = log_pi.array().exp();
  for (Eigen::Index s = 0; s < pi.rows(); ++s) pi.row(s) /= pi.row(s).sum();
  return pi;
}

inline Mat log_of_policy(const StochasticPolicy& pi, const char* where) {
  if (!pi.strictly_positive())
    throw DomainError(std::string(where) + ": zero-probability action");
  return pi.matrix().array().log();
}

}  // namespace detail

// Multiplicative-weights NPG update pi' propto pi exp(eta Q / (1 - gamma)).
inline StochasticPolicy npg_step(const StochasticPolicy& pi, const Mat& Q, double eta,
                                 double gamma) {
  if (pi.matrix().rows() != Q.rows() || pi.matrix().cols() != Q.cols())
    throw DimensionError("npg_step: Q shape mismatch");
  if (!(eta > 0.0)) throw ConfigError("npg_step: eta must be positive");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("npg_step: gamma outside [0, 1)");
  const Mat log_pi = detail::log_of_policy(pi, "npg_step");
  return StochasticPolicy(detail::policy_from_log(detail::npg_step_log(log_pi, Q, eta, gamma)));
}

// Entropy-regularized NPG update
// pi' propto pi^{1 - eta tau / (1 - gamma)} exp(eta Q_tau / (1 - gamma)).
// Admissible range 0 < eta <= (1 - gamma) / tau is enforced strictly; at the
// endpoint the update is the memoryless soft-greedy softmax(Q_tau / tau).
inline StochasticPolicy entropy_npg_step(const StochasticPolicy& pi, const Mat& Q_tau, double eta,
                                         double tau, double gamma) {
  if (pi.matrix().rows() != Q_tau.rows() || pi.matrix().cols() != Q_tau.cols())
    throw DimensionError("entropy_npg_step: Q shape mismatch");
  if (!(tau > 0.0)) throw ConfigError("entropy_npg_step: tau must be positive");
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw ConfigError("entropy_npg_step: gamma outside [0, 1)");
  if (!(eta > 0.0) || eta > (1.0 - gamma) / tau + 1e-15)
    throw ConfigError("entropy_npg_step: eta outside (0, (1 - gamma) / tau]");
  const Mat log_pi = detail::log_of_policy(pi, "entropy_npg_step");
  return StochasticPolicy(
      detail::policy_from_log(detail::entropy_npg_step_log(log_pi, Q_tau, eta, tau, gamma)));
}

// One entropy-regularized plain PG step on the logits.
inline SoftmaxParams entropy_pg_step(const TabularMdp& mdp, const SoftmaxParams& params,
                                     double eta, double tau) {
  if (!(eta > 0.0)) throw ConfigError("entropy_pg_step: eta must be positive");
  if (!(tau > 0.0)) throw ConfigError("entropy_pg_step: tau must be positive");
  const Mat log_pi = log_policy_from_softmax(params);
  const StochasticPolicy pi = policy_from_softmax(params);
  const SoftEvaluationResult soft = detail::soft_evaluate_core(mdp, pi.matrix(), log_pi, tau);
  const Distribution d = visitation_distribution(mdp, pi, mdp.rho());
  return SoftmaxParams(params.theta + eta * entropy_pg_gradient(mdp, pi, log_pi, soft, d));
}

struct PgTraceRecord {
  long iter = 0;
  double value_rho = 0.0;  // V(rho), or soft V_tau(rho) for entropy methods
  double gap_rho = 0.0;    // optimality gap at rho
  double gap_sup = 0.0;    // sup-norm optimality gap
  std::optional<Mat> policy;
};

struct PgTrace {
  std::vector<PgTraceRecord> records;
  Mat final_policy;                  // row-stochastic
  std::optional<Mat> final_theta;    // logits, for softmax-parameterized methods
};

// Runs one of the policy gradient family methods from a uniform policy
// (zero logits) or a caller-provided start. Gap columns compare against the
// unregularized optimum, or the tau-regularized one for entropy methods.
inline PgTrace run_single_agent(const TabularMdp& mdp, const PgConfig& config,
                                std::optional<Mat> init_theta = std::nullopt,
                                std::optional<StochasticPolicy> init_policy = std::nullopt) {
  config.validate(mdp);
  const Eigen::Index S = mdp.num_states();
  const Eigen::Index A = mdp.num_actions();
  const double gamma = mdp.gamma();

  const bool theta_space = config.method == PgMethod::kSoftmaxPg ||
                           config.method == PgMethod::kLogBarrierPg ||
                           config.method == PgMethod::kEntropyPg;
  const bool soft_objective =
      config.method == PgMethod::kEntropyNpg || config.method == PgMethod::kEntropyPg;
  if (theta_space && init_policy)
    throw ConfigError("run_single_agent: this method takes a logit start");
  if (!theta_space && init_theta)
    throw ConfigError("run_single_agent: this method takes a policy start");

  // references for the gap columns
  Vec V_ref;
  std::optional<SoftOptimalValues> soft_opt;
  if (soft_objective) {
    soft_opt = soft_optimal_values(mdp, config.tau, 1e-12);
    V_ref = soft_opt->V_star;
  } else {
    V_ref = optimal_values(mdp, 1e-12).V_star;
  }
  const double ref_rho = mdp.rho().vec().dot(V_ref);

  // iterate state: either logits (theta space) or a log policy
  Mat theta = init_theta ? *init_theta : Mat::Zero(S, A);
  if (theta_space && (theta.rows() != S || theta.cols() != A))
    throw DimensionError("run_single_agent: init theta shape mismatch");
  Mat log_pi;
  if (!theta_space) {
    if (init_policy) {
      detail::check_policy_shape(mdp, init_policy->matrix(), "run_single_agent");
      if (config.method != PgMethod::kProjectedPg &&
          !init_policy->strictly_positive())
        throw DomainError("run_single_agent: start policy must have full support");
      log_pi = config.method == PgMethod::kProjectedPg
                   ? Mat()
                   : Mat(init_policy->matrix().array().max(1e-300).log());
    } else {
      log_pi = Mat::Constant(S, A, -std::log(static_cast<double>(A)));
    }
  }
  Mat pi_mat = init_policy ? init_policy->matrix()
                           : Mat::Constant(S, A, 1.0 / static_cast<double>(A));
  if (theta_space) pi_mat = detail::policy_from_log(log_policy_from_softmax(SoftmaxParams(theta)));

  PgTrace trace;
  auto record = [&](long iter) {
    const StochasticPolicy pi(pi_mat);
    PgTraceRecord rec;
    rec.iter = iter;
    if (soft_objective) {
      const Mat lp = theta_space ? log_policy_from_softmax(SoftmaxParams(theta)) : log_pi;
      const SoftEvaluationResult soft =
          detail::soft_evaluate_core(mdp, pi_mat, lp, config.tau);
      rec.value_rho = mdp.rho().vec().dot(soft.V_tau);
      rec.gap_rho = ref_rho - rec.value_rho;
      rec.gap_sup = (V_ref - soft.V_tau).cwiseAbs().maxCoeff();
    } else {
      const EvaluationResult ev = evaluate_policy(mdp, pi);
      rec.value_rho = ev.value_at_rho;
      rec.gap_rho = ref_rho - rec.value_rho;
      rec.gap_sup = (V_ref - ev.V).cwiseAbs().maxCoeff();
    }
    if (config.record_policies) rec.policy = pi_mat;
    trace.records.push_back(std::move(rec));
  };

  record(0);
  for (long t = 1; t <= config.max_iters; ++t) {
    switch (config.method) {
      case PgMethod::kProjectedPg: {
        const StochasticPolicy next = direct_pg_step(mdp, StochasticPolicy(pi_mat), config.eta);
        pi_mat = next.matrix();
        break;
      }
      case PgMethod::kSoftmaxPg: {
        const SoftmaxParams next = softmax_pg_step(mdp, SoftmaxParams(theta), config.eta);
        theta = next.theta;
        pi_mat = detail::policy_from_log(log_policy_from_softmax(next));
        break;
      }
      case PgMethod::kLogBarrierPg: {
        const SoftmaxParams next =
            log_barrier_pg_step(mdp, SoftmaxParams(theta), config.eta, config.omega);
        theta = next.theta;
        pi_mat = detail::policy_from_log(log_policy_from_softmax(next));
        break;
      }
      case PgMethod::kEntropyPg: {
        const SoftmaxParams next =
            entropy_pg_step(mdp, SoftmaxParams(theta), config.eta, config.tau);
        theta = next.theta;
        pi_mat = detail::policy_from_log(log_policy_from_softmax(next));
        break;
      }
      case PgMethod::kNpg: {
        const EvaluationResult ev = evaluate_policy(mdp, StochasticPolicy(pi_mat));
        log_pi = detail::npg_step_log(log_pi, ev.Q, config.eta, gamma);
        pi_mat = detail::policy_from_log(log_pi);
        break;
      }
      case PgMethod::kEntropyNpg: {
        const SoftEvaluationResult soft =
            detail::soft_evaluate_core(mdp, pi_mat, log_pi, config.tau);
        log_pi = detail::entropy_npg_step_log(log_pi, soft.Q_tau, config.eta, config.tau, gamma);
        pi_mat = detail::policy_from_log(log_pi);
        break;
      }
    }
    if (t % config.record_every == 0 || t == config.max_iters) record(t);
  }

  trace.final_policy = pi_mat;
  if (theta_space) trace.final_theta = theta;
  return trace;
}

}  // namespace pglab
