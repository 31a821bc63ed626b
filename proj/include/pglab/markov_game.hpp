#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "pglab/matrix_game.hpp"
#include "pglab/numeric.hpp"

namespace pglab {

// Two-player zero-sum Markov game. Per state the max player picks a row in
// {0..m-1}, the min player a column in {0..n-1}; transition rows are indexed
// a*n + b. Rewards live in [0, 1], earned by the max player.
class ZeroSumMarkovGame {
 public:
  ZeroSumMarkovGame(std::vector<Mat> transitions, std::vector<Mat> rewards, double gamma)
      : P_(std::move(transitions)), r_(std::move(rewards)), gamma_(gamma) {
    if (r_.empty() || P_.size() != r_.size())
      throw DimensionError("ZeroSumMarkovGame: state counts disagree");
    if (!(gamma >= 0.0 && gamma < 1.0))
      throw DomainError("ZeroSumMarkovGame: gamma must lie in [0, 1)");
    const auto S = static_cast<Eigen::Index>(r_.size());
    m_ = r_[0].rows();
    n_ = r_[0].cols();
    if (m_ <= 0 || n_ <= 0) throw DimensionError("ZeroSumMarkovGame: empty action set");
    for (Eigen::Index s = 0; s < S; ++s) {
      require_finite(r_[s], "ZeroSumMarkovGame reward");
      if (r_[s].rows() != m_ || r_[s].cols() != n_)
        throw DimensionError("ZeroSumMarkovGame: ragged reward tables");
      if (r_[s].minCoeff() < 0.0 || r_[s].maxCoeff() > 1.0)
        throw DomainError("ZeroSumMarkovGame: rewards must lie in [0, 1]");
      const Mat& P = P_[s];
      if (P.rows() != m_ * n_ || P.cols() != S)
        throw DimensionError("ZeroSumMarkovGame: transition block shape");
      require_finite(P, "ZeroSumMarkovGame transition");
      if ((P.array() < 0.0).any())
        throw DomainError("ZeroSumMarkovGame: negative transition probability");
      for (Eigen::Index row = 0; row < P.rows(); ++row) {
        if (std::abs(P.row(row).sum() - 1.0) > Distribution::kTol)
          throw DomainError("ZeroSumMarkovGame: transition row mass != 1");
      }
    }
  }

  Eigen::Index n_states() const { return static_cast<Eigen::Index>(r_.size()); }
  Eigen::Index max_actions() const { return m_; }
  Eigen::Index min_actions() const { return n_; }
  double gamma() const { return gamma_; }
  const Mat& reward(Eigen::Index s) const { return r_[s]; }
  const Mat& transition(Eigen::Index s) const { return P_[s]; }

 private:
  std::vector<Mat> P_;  // per state: (m*n) x S, row a*n + b
  std::vector<Mat> r_;  // per state: m x n
  Eigen::Index m_ = 0, n_ = 0;
  double gamma_;
};

struct JointPolicy {
  std::vector<Distribution> mu;
  std::vector<Distribution> nu;

  static JointPolicy uniform(const ZeroSumMarkovGame& game) {
    JointPolicy out;
    out.mu.assign(static_cast<size_t>(game.n_states()),
                  Distribution::uniform(game.max_actions()));
    out.nu.assign(static_cast<size_t>(game.n_states()),
                  Distribution::uniform(game.min_actions()));
    return out;
  }
};

namespace detail {

inline void check_joint_policy(const ZeroSumMarkovGame& game, const JointPolicy& policy,
                               const char* where) {
  const auto S = static_cast<size_t>(game.n_states());
  if (policy.mu.size() != S || policy.nu.size() != S)
    throw DimensionError(std::string(where) + ": policy state count");
  for (size_t s = 0; s < S; ++s) {
    if (policy.mu[s].size() != game.max_actions() || policy.nu[s].size() != game.min_actions())
      throw DimensionError(std::string(where) + ": policy action count");
  }
}

// Value-iteration stopping threshold for sup-norm accuracy tol. A gamma of
// zero makes one exact sweep, so any finite change passes.
inline double vi_threshold(double tol, double gamma) {
  if (gamma == 0.0) return std::numeric_limits<double>::infinity();
  return tol * (1.0 - gamma) / (2.0 * gamma);
}

}  // namespace detail

// Per-state payoff matrices induced by a value table: r(s,a,b) + gamma E V.
inline std::vector<Mat> game_q_from_v(const ZeroSumMarkovGame& game, const Vec& V) {
  if (V.size() != game.n_states()) throw DimensionError("game_q_from_v: value table size");
  const Eigen::Index n = game.min_actions();
  std::vector<Mat> Q(static_cast<size_t>(game.n_states()));
  for (Eigen::Index s = 0; s < game.n_states(); ++s) {
    Vec expected = game.transition(s) * V;  // (m*n) entries, row-major in (a, b)
    Q[static_cast<size_t>(s)] =
        game.reward(s) +
        game.gamma() * Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                Eigen::RowMajor>>(expected.data(),
                                                                  game.max_actions(), n);
  }
  return Q;
}

// One-step value estimate mu^T Q nu, entropy-corrected when tau > 0.
inline double one_step_value(const Mat& Q_s, const Distribution& mu_s, const Distribution& nu_s,
                             double tau) {
  if (Q_s.rows() != mu_s.size() || Q_s.cols() != nu_s.size())
    throw DimensionError("one_step_value: shape mismatch");
  if (!(tau >= 0.0)) throw ConfigError("one_step_value: tau must be nonnegative");
  double v = mu_s.vec().dot(Q_s * nu_s.vec());
  if (tau > 0.0) v += tau * (entropy(mu_s) - entropy(nu_s));
  return v;
}

struct JointEvaluation {
  Vec V;
  std::vector<Mat> Q;
};

// Exact policy evaluation: linear solve on the induced chain with reward
// mu^T r nu (+ tau entropy correction), then Q = r + gamma E V.
inline JointEvaluation evaluate_joint_policy(const ZeroSumMarkovGame& game,
                                             const JointPolicy& policy, double tau) {
  detail::check_joint_policy(game, policy, "evaluate_joint_policy");
  if (!(tau >= 0.0)) throw ConfigError("evaluate_joint_policy: tau must be nonnegative");
  const Eigen::Index S = game.n_states(), m = game.max_actions(), n = game.min_actions();
  Vec reward_bar(S);
  Mat chain(S, S);
  for (Eigen::Index s = 0; s < S; ++s) {
    const Distribution& mu = policy.mu[static_cast<size_t>(s)];
    const Distribution& nu = policy.nu[static_cast<size_t>(s)];
    if (tau > 0.0 && (!mu.strictly_positive() || !nu.strictly_positive()))
      throw DomainError("evaluate_joint_policy: zero-probability action with tau > 0");
    reward_bar[s] = one_step_value(game.reward(s), mu, nu, tau);
    for (Eigen::Index next = 0; next < S; ++next) {
      double p = 0.0;
      for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b < n; ++b)
          p += mu[a] * nu[b] * game.transition(s)(a * n + b, next);
      chain(s, next) = p;
    }
  }
  JointEvaluation out;
  out.V = solve_linear(Mat::Identity(S, S) - game.gamma() * chain, reward_bar);
  out.Q = game_q_from_v(game, out.V);
  return out;
}

// Which side of the joint policy stays fixed while the other best-responds.
enum class FixedSide { kMaxFixed, kMinFixed };

// Unregularized best-response values by value iteration on the induced MDP.
// kMaxFixed: mu stays, the min player minimizes. kMinFixed: nu stays, the max
// player maximizes. Warm start is optional; accuracy is sup-norm tol.
inline Vec best_response_values(const ZeroSumMarkovGame& game, const JointPolicy& policy,
                                FixedSide side, double tol,
                                const std::optional<Vec>& warm_start = std::nullopt) {
  detail::check_joint_policy(game, policy, "best_response_values");
  if (!(tol > 0.0)) throw ConfigError("best_response_values: tol must be positive");
  const Eigen::Index S = game.n_states(), m = game.max_actions(), n = game.min_actions();
  const bool mu_fixed = side == FixedSide::kMaxFixed;
  const Eigen::Index actions = mu_fixed ? n : m;

  // Collapse the fixed side once: reduced rewards (S x actions) and reduced
  // transition blocks (actions x S).
  Mat reduced_r(S, actions);
  std::vector<Mat> reduced_P(static_cast<size_t>(S));
  for (Eigen::Index s = 0; s < S; ++s) {
    const Vec& weights =
        mu_fixed ? policy.mu[static_cast<size_t>(s)].vec() : policy.nu[static_cast<size_t>(s)].vec();
    Mat block = Mat::Zero(actions, S);
    for (Eigen::Index free = 0; free < actions; ++free) {
      double rr = 0.0;
      for (Eigen::Index fixed = 0; fixed < (mu_fixed ? m : n); ++fixed) {
        const Eigen::Index a = mu_fixed ? fixed : free;
        const Eigen::Index b = mu_fixed ? free : fixed;
        rr += weights[fixed] * game.reward(s)(a, b);
        block.row(free) += weights[fixed] * game.transition(s).row(a * n + b);
      }
      reduced_r(s, free) = rr;
    }
    reduced_P[static_cast<size_t>(s)] = std::move(block);
  }

  Vec V = warm_start.has_value() ? *warm_start : Vec::Zero(S);
  if (V.size() != S) throw DimensionError("best_response_values: warm start size");
  const double threshold = detail::vi_threshold(tol, game.gamma());
  Vec V_next(S);
  double change = std::numeric_limits<double>::infinity();
  for (long sweep = 0; sweep < 1000000; ++sweep) {
    for (Eigen::Index s = 0; s < S; ++s) {
      const Vec totals =
          reduced_r.row(s).transpose() + game.gamma() * (reduced_P[static_cast<size_t>(s)] * V);
      V_next[s] = mu_fixed ? totals.minCoeff() : totals.maxCoeff();
    }
    change = (V_next - V).cwiseAbs().maxCoeff();
    V.swap(V_next);
    if (change <= threshold) return V;
  }
  throw ConvergenceError("best_response_values: value iteration stalled", change);
}

// Exploitability: the gap between both sides' best-response values,
// maximized over states. Zero exactly at a Nash equilibrium.
inline double markov_ne_gap(const ZeroSumMarkovGame& game, const JointPolicy& policy,
                            double tol = 1e-10) {
  const Vec upper = best_response_values(game, policy, FixedSide::kMinFixed, tol);
  const Vec lower = best_response_values(game, policy, FixedSide::kMaxFixed, tol);
  return (upper - lower).maxCoeff();
}

struct SoftMinimax {
  Vec V;
  JointPolicy policy;
};

// Regularized Shapley iteration: V(s) <- value of the tau-regularized matrix
// game on payoff r + gamma E V, each inner game solved to a quantal-response
// equilibrium. Payoffs are rescaled to unit range before the inner solve
// (the equilibrium is invariant under joint payoff/temperature scaling).
inline SoftMinimax soft_minimax_oracle(const ZeroSumMarkovGame& game, double tau, double tol,
                                       double inner_tol = 1e-11) {
  if (!(tau > 0.0)) throw ConfigError("soft_minimax_oracle: tau must be positive");
  if (!(tol > 0.0) || !(inner_tol > 0.0))
    throw ConfigError("soft_minimax_oracle: tolerances must be positive");
  const Eigen::Index S = game.n_states();
  SoftMinimax out;
  out.V = Vec::Zero(S);
  out.policy = JointPolicy::uniform(game);
  const double threshold = detail::vi_threshold(tol, game.gamma());
  double change = std::numeric_limits<double>::infinity();
  for (long sweep = 0; sweep < 100000; ++sweep) {
    const std::vector<Mat> Q = game_q_from_v(game, out.V);
    Vec V_next(S);
    for (Eigen::Index s = 0; s < S; ++s) {
      const Mat& Q_s = Q[static_cast<size_t>(s)];
      const double scale = std::max(1.0, Q_s.cwiseAbs().maxCoeff());
      const StrategyPair pair = solve_qre(Q_s / scale, tau / scale, inner_tol / scale);
      out.policy.mu[static_cast<size_t>(s)] = pair.mu;
      out.policy.nu[static_cast<size_t>(s)] = pair.nu;
      V_next[s] = one_step_value(Q_s, pair.mu, pair.nu, tau);
    }
    change = (V_next - out.V).cwiseAbs().maxCoeff();
    out.V.swap(V_next);
    if (change <= threshold) return out;
  }
  throw ConvergenceError("soft_minimax_oracle: no fixed point within sweep budget", change);
}

enum class InnerAlg { kOmwu, kRegOmwu };

struct ActorCriticConfig {
  InnerAlg inner = InnerAlg::kRegOmwu;
  double eta = 0.0;
  double tau = 0.0;
  // Value learning rate at 1-based iteration t; must return values in (0, 1].
  std::function<double(long)> alpha;
  long max_iters = 0;
  long record_every = 0;     // 0: every iteration when S <= 5, else every 10
  double stop_ref_gap = 0.0; // stop once the reference gap falls below (0: run out)
  double br_tol = 1e-9;      // exploitability solve accuracy in trace records
  bool record_ne_gap = true;
};

// One outer iteration: every state advances its inner matrix-game iterate on
// the current payoff, then the payoffs are refreshed from the value table and
// the values move toward the one-step estimates.
class ActorCriticState {
 public:
  ActorCriticState(const ZeroSumMarkovGame& game, const ActorCriticConfig& config)
      : eta_(config.eta),
        tau_(config.inner == InnerAlg::kRegOmwu ? config.tau : 0.0),
        alpha_(config.alpha),
        V_(Vec::Zero(game.n_states())) {
    if (!(config.eta > 0.0)) throw ConfigError("ActorCriticState: eta must be positive");
    if (config.inner == InnerAlg::kRegOmwu && !(config.tau > 0.0))
      throw ConfigError("ActorCriticState: damped inner updates need tau > 0");
    if (!alpha_) throw ConfigError("ActorCriticState: missing alpha schedule");
    inner_.reserve(static_cast<size_t>(game.n_states()));
    Q_.assign(static_cast<size_t>(game.n_states()),
              Mat::Zero(game.max_actions(), game.min_actions()));
    expected_.resize(game.max_actions() * game.min_actions());
    f_.resize(game.n_states());
    for (Eigen::Index s = 0; s < game.n_states(); ++s)
      inner_.emplace_back(game.max_actions(), game.min_actions(), eta_, tau_);
  }

  void advance(const ZeroSumMarkovGame& game) {
    const Eigen::Index S = game.n_states(), n = game.min_actions();
    const double alpha = alpha_(t_ + 1);
    if (!(alpha > 0.0 && alpha <= 1.0))
      throw ConfigError("ActorCriticState: alpha outside (0, 1]");
    for (Eigen::Index s = 0; s < S; ++s)
      inner_[static_cast<size_t>(s)].step(Q_[static_cast<size_t>(s)]);
    // Refresh every payoff from the pre-update value table, then move the
    // values in one synchronized sweep.
    for (Eigen::Index s = 0; s < S; ++s) {
      Mat& Q_s = Q_[static_cast<size_t>(s)];
      expected_.noalias() = game.transition(s) * V_;
      Q_s = game.reward(s) +
            game.gamma() *
                Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                         Eigen::RowMajor>>(expected_.data(),
                                                           game.max_actions(), n);
      const auto& st = inner_[static_cast<size_t>(s)];
      f_[s] = one_step_value(Q_s, st.mu(), st.nu(), tau_);
    }
    V_ = (1.0 - alpha) * V_ + alpha * f_;
    ++t_;
  }

  long t() const { return t_; }
  const Vec& values() const { return V_; }
  double eta() const { return eta_; }
  double tau() const { return tau_; }
  const OmwuState& inner(Eigen::Index s) const { return inner_[static_cast<size_t>(s)]; }

  JointPolicy policy() const {
    JointPolicy out;
    out.mu.reserve(inner_.size());
    out.nu.reserve(inner_.size());
    for (const auto& st : inner_) {
      out.mu.push_back(st.mu());
      out.nu.push_back(st.nu());
    }
    return out;
  }

 private:
  double eta_, tau_;
  std::function<double(long)> alpha_;
  Vec V_;
  std::vector<OmwuState> inner_;
  std::vector<Mat> Q_;
  Vec expected_, f_;
  long t_ = 0;
};

struct AcTraceRecord {
  long iter = 0;
  // Distances to the regularized-equilibrium reference; NaN when no
  // reference is available (undamped runs).
  double ref_value_err = std::numeric_limits<double>::quiet_NaN();
  double ref_policy_gap = std::numeric_limits<double>::quiet_NaN();
  double ref_gap = std::numeric_limits<double>::quiet_NaN();
  double ne_gap = std::numeric_limits<double>::quiet_NaN();
};

struct AcRunResult {
  JointPolicy policy;
  Vec V;
  std::vector<AcTraceRecord> trace;
  long iters = 0;
};

inline AcRunResult actor_critic_run(const ZeroSumMarkovGame& game,
                                    const ActorCriticConfig& config,
                                    const SoftMinimax* reference = nullptr) {
  if (config.max_iters < 0) throw ConfigError("actor_critic_run: negative iteration budget");
  std::optional<SoftMinimax> own_reference;
  if (reference == nullptr && config.inner == InnerAlg::kRegOmwu) {
    own_reference = soft_minimax_oracle(game, config.tau, 1e-11);
    reference = &*own_reference;
  }
  if (config.stop_ref_gap > 0.0 && reference == nullptr)
    throw ConfigError("actor_critic_run: stop threshold needs a reference");
  std::vector<Mat> Q_ref;
  if (reference != nullptr) Q_ref = game_q_from_v(game, reference->V);

  ActorCriticState state(game, config);
  const long cadence =
      config.record_every > 0 ? config.record_every : (game.n_states() <= 5 ? 1 : 10);

  AcRunResult out;
  std::optional<Vec> warm_upper, warm_lower;
  auto record = [&]() {
    AcTraceRecord rec;
    rec.iter = state.t();
    if (reference != nullptr) {
      rec.ref_value_err = (state.values() - reference->V).cwiseAbs().maxCoeff();
      double policy_gap = 0.0;
      for (Eigen::Index s = 0; s < game.n_states(); ++s) {
        const auto& st = state.inner(s);
        policy_gap = std::max(
            policy_gap, qre_gap(Q_ref[static_cast<size_t>(s)], {st.mu(), st.nu()}, config.tau));
      }
      rec.ref_policy_gap = policy_gap;
      rec.ref_gap = std::max(rec.ref_value_err, rec.ref_policy_gap);
    }
    if (config.record_ne_gap) {
      const JointPolicy policy = state.policy();
      warm_upper =
          best_response_values(game, policy, FixedSide::kMinFixed, config.br_tol, warm_upper);
      warm_lower =
          best_response_values(game, policy, FixedSide::kMaxFixed, config.br_tol, warm_lower);
      rec.ne_gap = (*warm_upper - *warm_lower).maxCoeff();
    }
    out.trace.push_back(rec);
    return rec;
  };

  record();
  for (long t = 1; t <= config.max_iters; ++t) {
    state.advance(game);
    if (t % cadence == 0 || t == config.max_iters) {
      const AcTraceRecord rec = record();
      if (config.stop_ref_gap > 0.0 && rec.ref_gap <= config.stop_ref_gap) break;
    }
  }
  out.policy = state.policy();
  out.V = state.values();
  out.iters = state.t();
  return out;
}

}  // namespace pglab
