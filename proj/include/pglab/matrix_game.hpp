#pragma once

#include <cstdio>
#include <iostream>
#include <utility>

#include "pglab/numeric.hpp"

namespace pglab {

// Two-player zero-sum matrix game. The row player maximizes mu^T A nu, the
// column player minimizes it. Payoffs are bounded by 1 in absolute value.
class MatrixGame {
 public:
  explicit MatrixGame(Mat payoff) : A_(std::move(payoff)) {
    if (A_.rows() <= 0 || A_.cols() <= 0) throw DimensionError("MatrixGame: empty payoff");
    require_finite(A_, "MatrixGame");
    if (A_.cwiseAbs().maxCoeff() > 1.0 + 1e-12)
      throw DomainError("MatrixGame: |payoff| entries must be <= 1");
  }
  Eigen::Index rows() const { return A_.rows(); }
  Eigen::Index cols() const { return A_.cols(); }
  const Mat& payoff() const { return A_; }

 private:
  Mat A_;
};

struct StrategyPair {
  Distribution mu;
  Distribution nu;
};

namespace detail {

inline void check_pair_shape(const Mat& A, Eigen::Index m, Eigen::Index n, const char* where) {
  if (A.rows() != m || A.cols() != n)
    throw DimensionError(std::string(where) + ": strategy sizes do not match the payoff");
}

}  // namespace detail

// Simultaneous multiplicative weights:
// mu' propto mu exp(eta A nu), nu' propto nu exp(-eta A^T mu).
// Both players update from the same incoming pair.
inline StrategyPair mwu_step(const Mat& payoff, const StrategyPair& pair, double eta) {
  detail::check_pair_shape(payoff, pair.mu.size(), pair.nu.size(), "mwu_step");
  if (!(eta >= 0.0)) throw ConfigError("mwu_step: eta must be nonnegative");
  if (!pair.mu.strictly_positive() || !pair.nu.strictly_positive())
    throw DomainError("mwu_step: zero entries in the incoming pair");
  const Vec log_mu = pair.mu.vec().array().log().matrix() + eta * (payoff * pair.nu.vec());
  const Vec log_nu =
      pair.nu.vec().array().log().matrix() - eta * (payoff.transpose() * pair.mu.vec());
  return {distribution_from_log(log_mu), distribution_from_log(log_nu)};
}
inline StrategyPair mwu_step(const MatrixGame& game, const StrategyPair& pair, double eta) {
  return mwu_step(game.payoff(), pair, eta);
}

// Entropy-damped multiplicative weights:
// mu' propto mu^{1 - eta tau} exp(eta A nu), mirrored for nu.
inline StrategyPair reg_mwu_step(const Mat& payoff, const StrategyPair& pair, double eta,
                                 double tau) {
  detail::check_pair_shape(payoff, pair.mu.size(), pair.nu.size(), "reg_mwu_step");
  if (!(eta > 0.0)) throw ConfigError("reg_mwu_step: eta must be positive");
  if (!(tau > 0.0)) throw ConfigError("reg_mwu_step: tau must be positive");
  if (eta * tau >= 1.0) throw ConfigError("reg_mwu_step: eta tau must be below 1");
  if (!pair.mu.strictly_positive() || !pair.nu.strictly_positive())
    throw DomainError("reg_mwu_step: zero entries in the incoming pair");
  const double keep = 1.0 - eta * tau;
  const Vec log_mu =
      keep * pair.mu.vec().array().log().matrix() + eta * (payoff * pair.nu.vec());
  const Vec log_nu =
      keep * pair.nu.vec().array().log().matrix() - eta * (payoff.transpose() * pair.mu.vec());
  return {distribution_from_log(log_mu), distribution_from_log(log_nu)};
}
inline StrategyPair reg_mwu_step(const MatrixGame& game, const StrategyPair& pair, double eta,
                                 double tau) {
  return reg_mwu_step(game.payoff(), pair, eta, tau);
}

// Optimistic multiplicative weights with an auxiliary predictive pair.
// State is kept as normalized log-weights so long runs cannot underflow.
//
//   t >= 1:  mu_bar^t propto (mu_bar^{t-1})^{1-eta tau} exp(eta A nu^t)
//   always:  mu^{t+1} propto (mu_bar^t)^{1-eta tau} exp(eta A nu^t)
//
// mirrored with -A^T mu for the column player; the predictive update is
// skipped at t = 0 so the first step uses the initial pair.
class OmwuState {
 public:
  OmwuState(Eigen::Index m, Eigen::Index n, double eta, double tau)
      : log_mu_(Vec::Constant(m, -std::log(static_cast<double>(m)))),
        log_nu_(Vec::Constant(n, -std::log(static_cast<double>(n)))),
        log_mu_bar_(log_mu_),
        log_nu_bar_(log_nu_),
        eta_(eta),
        tau_(tau) {
    if (m <= 0 || n <= 0) throw DimensionError("OmwuState: empty strategy");
    scratch_mu_.resize(m);
    scratch_nu_.resize(n);
    if (!(eta >= 0.0)) throw ConfigError("OmwuState: eta must be nonnegative");
    if (!(tau >= 0.0)) throw ConfigError("OmwuState: tau must be nonnegative");
    if (eta * tau >= 1.0) throw ConfigError("OmwuState: eta tau must be below 1");
    if (tau > 0.0 && eta * (tau + 1.0) > 0.5 + 1e-12)
      std::cerr << "pglab: omwu eta " << eta << " outside the certified range "
                << "min{1/(2 tau + 2), 1/4}\n";
  }

  OmwuState(StrategyPair start, double eta, double tau)
      : OmwuState(start.mu.size(), start.nu.size(), eta, tau) {
    if (!start.mu.strictly_positive() || !start.nu.strictly_positive())
      throw DomainError("OmwuState: start pair must have full support");
    log_mu_ = start.mu.vec().array().log();
    log_nu_ = start.nu.vec().array().log();
    log_mu_bar_ = log_mu_;
    log_nu_bar_ = log_nu_;
  }

  Distribution mu() const { return distribution_from_log(log_mu_); }
  Distribution nu() const { return distribution_from_log(log_nu_); }
  Distribution mu_bar() const { return distribution_from_log(log_mu_bar_); }
  Distribution nu_bar() const { return distribution_from_log(log_nu_bar_); }
  StrategyPair pair() const { return {mu(), nu()}; }
  const Vec& log_mu() const { return log_mu_; }
  const Vec& log_nu() const { return log_nu_; }
  double eta() const { return eta_; }
  double tau() const { return tau_; }
  long t() const { return t_; }

  void step(const Mat& payoff) {
    detail::check_pair_shape(payoff, log_mu_.size(), log_nu_.size(), "omwu_step");
    const double keep = 1.0 - eta_ * tau_;
    scratch_mu_.noalias() = eta_ * (payoff * distribution_from_log(log_nu_).vec());
    scratch_nu_.noalias() = -eta_ * (payoff.transpose() * distribution_from_log(log_mu_).vec());
    if (t_ >= 1) {
      log_mu_bar_ = keep * log_mu_bar_ + scratch_mu_;
      log_mu_bar_.array() -= log_sum_exp(log_mu_bar_);
      log_nu_bar_ = keep * log_nu_bar_ + scratch_nu_;
      log_nu_bar_.array() -= log_sum_exp(log_nu_bar_);
    }
    log_mu_ = keep * log_mu_bar_ + scratch_mu_;
    log_mu_.array() -= log_sum_exp(log_mu_);
    log_nu_ = keep * log_nu_bar_ + scratch_nu_;
    log_nu_.array() -= log_sum_exp(log_nu_);
    ++t_;
  }

 private:
  Vec log_mu_, log_nu_;          // current pair
  Vec log_mu_bar_, log_nu_bar_;  // predictive pair
  Vec scratch_mu_, scratch_nu_;  // per-step gain buffers
  double eta_;
  double tau_;
  long t_ = 0;
};

inline OmwuState omwu_step(const Mat& payoff, OmwuState state) {
  state.step(payoff);
  return state;
}
inline OmwuState omwu_step(const MatrixGame& game, OmwuState state) {
  state.step(game.payoff());
  return state;
}

// Nash equilibrium gap: best row response minus best column response.
inline double ne_gap(const Mat& payoff, const StrategyPair& pair) {
  detail::check_pair_shape(payoff, pair.mu.size(), pair.nu.size(), "ne_gap");
  return (payoff * pair.nu.vec()).maxCoeff() - (payoff.transpose() * pair.mu.vec()).minCoeff();
}
inline double ne_gap(const MatrixGame& game, const StrategyPair& pair) {
  return ne_gap(game.payoff(), pair);
}

// Quantal-response equilibrium gap: the sum of both players' regularized
// best-response advantages,
//   tau LSE(A nu / tau) + tau LSE(-A^T mu / tau) - tau H(mu) - tau H(nu).
// Zero exactly at the QRE, nonnegative everywhere.
inline double qre_gap(const Mat& payoff, const StrategyPair& pair, double tau) {
  detail::check_pair_shape(payoff, pair.mu.size(), pair.nu.size(), "qre_gap");
  if (!(tau > 0.0)) throw ConfigError("qre_gap: tau must be positive");
  const double row_best = tau * log_sum_exp(payoff * pair.nu.vec() / tau);
  const double col_best = tau * log_sum_exp(-(payoff.transpose() * pair.mu.vec()) / tau);
  return row_best + col_best - tau * entropy(pair.mu) - tau * entropy(pair.nu);
}
inline double qre_gap(const MatrixGame& game, const StrategyPair& pair, double tau) {
  return qre_gap(game.payoff(), pair, tau);
}

// Solves for the quantal-response equilibrium with entropy-regularized
// optimistic multiplicative weights at eta = min{1/(2 tau + 2), 1/4}. Stops
// when the qre gap and both fixed-point residuals
//   mu = normalize(exp(A nu / tau)), nu = normalize(exp(-A^T mu / tau))
// are below tol (rowwise total variation).
inline StrategyPair solve_qre(const Mat& payoff, double tau, double tol,
                              long max_iters = 2000000) {
  if (!(tau > 0.0)) throw ConfigError("solve_qre: tau must be positive");
  if (!(tol > 0.0)) throw ConfigError("solve_qre: tol must be positive");
  const double eta = std::min(1.0 / (2.0 * tau + 2.0), 0.25);
  OmwuState state(payoff.rows(), payoff.cols(), eta, tau);
  double gap = std::numeric_limits<double>::infinity();
  for (long t = 0; t < max_iters; ++t) {
    state.step(payoff);
    const StrategyPair pair = state.pair();
    gap = qre_gap(payoff, pair, tau);
    if (gap <= tol) {
      const double fp_mu =
          total_variation(pair.mu.vec(), distribution_from_log(payoff * pair.nu.vec() / tau).vec());
      const double fp_nu = total_variation(
          pair.nu.vec(), distribution_from_log(-(payoff.transpose() * pair.mu.vec()) / tau).vec());
      if (fp_mu <= tol && fp_nu <= tol) return pair;
    }
  }
  const StrategyPair pair = state.pair();
  const double fp_mu =
      total_variation(pair.mu.vec(), distribution_from_log(payoff * pair.nu.vec() / tau).vec());
  const double fp_nu = total_variation(
      pair.nu.vec(), distribution_from_log(-(payoff.transpose() * pair.mu.vec()) / tau).vec());
  char msg[128];
  std::snprintf(msg, sizeof(msg), "solve_qre: gap %.3e, fixed-point residual %.3e above tol %.3e",
                gap, std::max(fp_mu, fp_nu), tol);
  throw ConvergenceError(msg, gap);
}
inline StrategyPair solve_qre(const MatrixGame& game, double tau, double tol,
                              long max_iters = 2000000) {
  return solve_qre(game.payoff(), tau, tol, max_iters);
}

}  // namespace pglab
