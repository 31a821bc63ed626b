#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pglab/numeric.hpp"

namespace pglab {

// Finite discounted MDP. Transitions are stored per state as an A x S matrix
// whose rows are distributions over next states; rewards live in [0, 1].
// gamma in [0, 1): the gamma = 0 bandit case is admitted and every operation
// degrades to its single-step form there.
class TabularMdp {
 public:
  TabularMdp(std::vector<Mat> P, Mat r, double gamma, Distribution rho)
      : P_(std::move(P)), r_(std::move(r)), gamma_(gamma), rho_(std::move(rho)) {
    const Eigen::Index S = r_.rows();
    const Eigen::Index A = r_.cols();
    if (S <= 0 || A <= 0) throw DimensionError("TabularMdp: empty reward matrix");
    if (static_cast<Eigen::Index>(P_.size()) != S)
      throw DimensionError("TabularMdp: P has wrong number of states");
    if (rho_.size() != S) throw DimensionError("TabularMdp: rho size mismatch");
    if (!(gamma_ >= 0.0 && gamma_ < 1.0))
      throw DomainError("TabularMdp: gamma must lie in [0, 1)");
    require_finite(r_, "TabularMdp r");
    if ((r_.array() < 0.0).any() || (r_.array() > 1.0).any())
      throw DomainError("TabularMdp: rewards outside [0, 1]");
    for (const Mat& Ps : P_) {
      if (Ps.rows() != A || Ps.cols() != S)
        throw DimensionError("TabularMdp: transition block shape mismatch");
      for (Eigen::Index a = 0; a < A; ++a)
        Distribution(Ps.row(a).transpose());  // validates the row
    }
  }

  Eigen::Index num_states() const { return r_.rows(); }
  Eigen::Index num_actions() const { return r_.cols(); }
  const Mat& transitions(Eigen::Index s) const { return P_[s]; }
  const Mat& rewards() const { return r_; }
  double gamma() const { return gamma_; }
  const Distribution& rho() const { return rho_; }

  // Row-stochastic S x S chain induced by a policy matrix (rows pi(.|s)).
  Mat induced_chain(const Mat& pi) const {
    const Eigen::Index S = num_states();
    Mat P_pi(S, S);
    for (Eigen::Index s = 0; s < S; ++s) P_pi.row(s) = pi.row(s) * P_[s];
    return P_pi;
  }

  Vec induced_reward(const Mat& pi) const {
    const Eigen::Index S = num_states();
    Vec r_pi(S);
    for (Eigen::Index s = 0; s < S; ++s) r_pi[s] = pi.row(s).dot(r_.row(s));
    return r_pi;
  }

 private:
  std::vector<Mat> P_;
  Mat r_;
  double gamma_;
  Distribution rho_;
};

// Row-stochastic policy table, one distribution per state.
class StochasticPolicy {
 public:
  explicit StochasticPolicy(Mat pi) : pi_(std::move(pi)) {
    if (pi_.rows() <= 0 || pi_.cols() <= 0) throw DimensionError("StochasticPolicy: empty");
    for (Eigen::Index s = 0; s < pi_.rows(); ++s)
      Distribution(pi_.row(s).transpose());  // validates the row
  }

  static StochasticPolicy uniform(Eigen::Index S, Eigen::Index A) {
    return StochasticPolicy(Mat::Constant(S, A, 1.0 / static_cast<double>(A)));
  }

  Eigen::Index num_states() const { return pi_.rows(); }
  Eigen::Index num_actions() const { return pi_.cols(); }
  const Mat& matrix() const { return pi_; }
  Vec row(Eigen::Index s) const { return pi_.row(s).transpose(); }
  bool strictly_positive() const { return (pi_.array() > 0.0).all(); }

 private:
  Mat pi_;
};

// Softmax policy parameters, theta(s, a) unconstrained.
struct SoftmaxParams {
  Mat theta;
  explicit SoftmaxParams(Mat t) : theta(std::move(t)) {
    require_finite(theta, "SoftmaxParams");
  }
  static SoftmaxParams zeros(Eigen::Index S, Eigen::Index A) {
    return SoftmaxParams(Mat::Zero(S, A));
  }
};

// Row-wise normalized log-probabilities of a softmax policy; exact even where
// exp underflows.
inline Mat log_policy_from_softmax(const SoftmaxParams& params) {
  Mat logpi = params.theta;
  for (Eigen::Index s = 0; s < logpi.rows(); ++s)
    logpi.row(s) = log_normalize(logpi.row(s).transpose()).transpose();
  return logpi;
}

inline StochasticPolicy policy_from_softmax(const SoftmaxParams& params) {
  Mat pi = log_policy_from_softmax(params).array().exp();
  for (Eigen::Index s = 0; s < pi.rows(); ++s) pi.row(s) /= pi.row(s).sum();
  return StochasticPolicy(std::move(pi));
}

struct EvaluationResult {
  Vec V;                 // state values
  Mat Q;                 // state-action values
  Mat Adv;               // Q - V, policy-weighted rows sum to zero
  Distribution d_rho;    // discounted visitation from rho
  double value_at_rho;   // <rho, V>
};

namespace detail {

inline void check_policy_shape(const TabularMdp& mdp, const Mat& pi, const char* where) {
  if (pi.rows() != mdp.num_states() || pi.cols() != mdp.num_actions())
    throw DimensionError(std::string(where) + ": policy shape mismatch");
}

// (I - gamma P_pi) V = r_pi; at gamma = 0 the system is the identity.
inline Vec evaluate_values(const TabularMdp& mdp, const Mat& pi, const Vec& r_pi) {
  const Eigen::Index S = mdp.num_states();
  const Mat A = Mat::Identity(S, S) - mdp.gamma() * mdp.induced_chain(pi);
  return solve_linear(A, r_pi);
}

inline Mat q_from_v(const TabularMdp& mdp, const Vec& V) {
  const Eigen::Index S = mdp.num_states();
  Mat Q(S, mdp.num_actions());
  for (Eigen::Index s = 0; s < S; ++s)
    Q.row(s) = mdp.rewards().row(s) + mdp.gamma() * (mdp.transitions(s) * V).transpose();
  return Q;
}

}  // namespace detail

// Discounted visitation d_start = (1 - gamma) (I - gamma P_pi^T)^{-1} start.
inline Distribution visitation_distribution(const TabularMdp& mdp, const StochasticPolicy& pi,
                                            const Distribution& start) {
  detail::check_policy_shape(mdp, pi.matrix(), "visitation_distribution");
  if (start.size() != mdp.num_states())
    throw DimensionError("visitation_distribution: start size mismatch");
  const Eigen::Index S = mdp.num_states();
  const Mat A = Mat::Identity(S, S) - mdp.gamma() * mdp.induced_chain(pi.matrix()).transpose();
  Vec d = (1.0 - mdp.gamma()) * solve_linear(A, start.vec());
  d = d.cwiseMax(0.0);
  d /= d.sum();
  return Distribution(std::move(d));
}

// Exact policy evaluation by linear solve.
inline EvaluationResult evaluate_policy(const TabularMdp& mdp, const StochasticPolicy& pi) {
  detail::check_policy_shape(mdp, pi.matrix(), "evaluate_policy");
  const Vec r_pi = mdp.induced_reward(pi.matrix());
  Vec V = detail::evaluate_values(mdp, pi.matrix(), r_pi);
  Mat Q = detail::q_from_v(mdp, V);
  Mat Adv = Q.colwise() - V;
  Distribution d = visitation_distribution(mdp, pi, mdp.rho());
  const double value = mdp.rho().vec().dot(V);
  return EvaluationResult{std::move(V), std::move(Q), std::move(Adv), std::move(d), value};
}

struct OptimalValues {
  Vec V_star;
  Mat Q_star;
  StochasticPolicy greedy;  // deterministic, lowest-index tie break
};

// Value iteration with the stopping rule ||V_{k+1} - V_k||_inf <=
// tol (1 - gamma) / (2 gamma), which certifies ||V - V*||_inf <= tol / 2.
// At gamma = 0 a single sweep is exact.
inline OptimalValues optimal_values(const TabularMdp& mdp, double tol = 1e-10) {
  if (!(tol > 0.0)) throw ConfigError("optimal_values: tol must be positive");
  const Eigen::Index S = mdp.num_states();
  const Eigen::Index A = mdp.num_actions();
  const double gamma = mdp.gamma();
  const double threshold =
      gamma > 0.0 ? tol * (1.0 - gamma) / (2.0 * gamma) : std::numeric_limits<double>::infinity();
  Vec V = Vec::Zero(S);
  Mat Q(S, A);
  for (long it = 0;; ++it) {
    Q = detail::q_from_v(mdp, V);
    Vec V_next = Q.rowwise().maxCoeff();
    const double change = (V_next - V).cwiseAbs().maxCoeff();
    V = std::move(V_next);
    if (change <= threshold) break;
    if (it > 100000000)
      throw ConvergenceError("optimal_values: no convergence", change);
  }
  Q = detail::q_from_v(mdp, V);
  Mat greedy = Mat::Zero(S, A);
  for (Eigen::Index s = 0; s < S; ++s) {
    Eigen::Index best = 0;
    for (Eigen::Index a = 1; a < A; ++a)
      if (Q(s, a) > Q(s, best)) best = a;
    greedy(s, best) = 1.0;
  }
  return OptimalValues{std::move(V), std::move(Q), StochasticPolicy(std::move(greedy))};
}

struct SoftEvaluationResult {
  Vec V_tau;   // value of pi on the entropy-augmented reward r - tau log pi
  Mat Q_tau;   // r + gamma E V_tau (no entropy at the current step)
  double tau;
};

namespace detail {

// Core soft evaluation; log_pi rows must be the exact log-probabilities of pi
// (callers with softmax parameters pass normalized logits to avoid underflow).
inline SoftEvaluationResult soft_evaluate_core(const TabularMdp& mdp, const Mat& pi,
                                               const Mat& log_pi, double tau) {
  const Eigen::Index S = mdp.num_states();
  Vec r_pi(S);
  for (Eigen::Index s = 0; s < S; ++s) {
    double h = 0.0;
    for (Eigen::Index a = 0; a < pi.cols(); ++a)
      if (pi(s, a) > 0.0) h -= pi(s, a) * log_pi(s, a);
    r_pi[s] = pi.row(s).dot(mdp.rewards().row(s)) + tau * h;
  }
  Vec V = evaluate_values(mdp, pi, r_pi);
  Mat Q = q_from_v(mdp, V);
  return SoftEvaluationResult{std::move(V), std::move(Q), tau};
}

}  // namespace detail

// Entropy-regularized policy evaluation: the value of pi on the augmented
// reward r(s, a) - tau log pi(a|s). Requires full support.
inline SoftEvaluationResult soft_evaluate_policy(const TabularMdp& mdp,
                                                 const StochasticPolicy& pi, double tau) {
  detail::check_policy_shape(mdp, pi.matrix(), "soft_evaluate_policy");
  if (!(tau > 0.0)) throw ConfigError("soft_evaluate_policy: tau must be positive");
  if (!pi.strictly_positive())
    throw DomainError("soft_evaluate_policy: zero-probability action under pi");
  const Mat log_pi = pi.matrix().array().log();
  return detail::soft_evaluate_core(mdp, pi.matrix(), log_pi, tau);
}

struct SoftOptimalValues {
  Vec V_star;
  Mat Q_star;
  StochasticPolicy pi_star;  // softmax(Q_star / tau)
  double tau;
};

// Soft value iteration V <- tau log sum_a exp((r + gamma E V)/tau), computed
// max-shifted. The soft-optimal policy is the softmax of Q_star / tau.
inline SoftOptimalValues soft_optimal_values(const TabularMdp& mdp, double tau,
                                             double tol = 1e-10) {
  if (!(tau > 0.0)) throw ConfigError("soft_optimal_values: tau must be positive");
  if (!(tol > 0.0)) throw ConfigError("soft_optimal_values: tol must be positive");
  const Eigen::Index S = mdp.num_states();
  const double gamma = mdp.gamma();
  const double threshold =
      gamma > 0.0 ? tol * (1.0 - gamma) / (2.0 * gamma) : std::numeric_limits<double>::infinity();
  Vec V = Vec::Zero(S);
  for (long it = 0;; ++it) {
    const Mat Q = detail::q_from_v(mdp, V);
    Vec V_next(S);
    for (Eigen::Index s = 0; s < S; ++s)
      V_next[s] = tau * log_sum_exp(Q.row(s).transpose() / tau);
    const double change = (V_next - V).cwiseAbs().maxCoeff();
    V = std::move(V_next);
    if (change <= threshold) break;
    if (it > 100000000)
      throw ConvergenceError("soft_optimal_values: no convergence", change);
  }
  Mat Q = detail::q_from_v(mdp, V);
  Mat pi(S, mdp.num_actions());
  for (Eigen::Index s = 0; s < S; ++s) {
    const Vec logits = Q.row(s).transpose() / tau;
    pi.row(s) = distribution_from_log(logits).vec().transpose();
  }
  return SoftOptimalValues{std::move(V), std::move(Q), StochasticPolicy(std::move(pi)), tau};
}

// Stationary distribution of the induced chain by power iteration; requires
// the chain to mix (irreducible and aperiodic up to the residual tolerance).
inline Distribution stationary_distribution(const TabularMdp& mdp, const StochasticPolicy& pi) {
  detail::check_policy_shape(mdp, pi.matrix(), "stationary_distribution");
  const Mat P_pi = mdp.induced_chain(pi.matrix());
  // Deterministic non-uniform start: a uniform start sits at a fixed point of
  // doubly stochastic chains and would mask periodicity.
  const Eigen::Index S = mdp.num_states();
  Vec nu(S);
  for (Eigen::Index s = 0; s < S; ++s) nu[s] = 1.0 + 0.5 * static_cast<double>(s + 1) / S;
  nu /= nu.sum();
  for (long it = 0; it < 1000000; ++it) {
    Vec next = P_pi.transpose() * nu;
    next /= next.sum();
    const double resid = (P_pi.transpose() * next - next).cwiseAbs().maxCoeff();
    nu = std::move(next);
    if (resid <= 1e-10) {
      nu = nu.cwiseMax(0.0);
      nu /= nu.sum();
      return Distribution(std::move(nu));
    }
  }
  throw ReducibilityError("stationary_distribution: power iteration did not converge");
}

}  // namespace pglab
