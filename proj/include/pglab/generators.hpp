#pragma once

#include <random>
#include <vector>

#include "pglab/lqr.hpp"
#include "pglab/markov_game.hpp"
#include "pglab/numeric.hpp"
#include "pglab/tabular_mdp.hpp"

namespace pglab {

// Symmetric Dirichlet(1) row: normalized unit exponentials.
inline Vec dirichlet_row(Eigen::Index n, std::mt19937_64& rng) {
  std::exponential_distribution<double> expd(1.0);
  Vec p(n);
  for (Eigen::Index i = 0; i < n; ++i) p[i] = expd(rng);
  return p / p.sum();
}

inline TabularMdp random_mdp(std::uint64_t seed, Eigen::Index S, Eigen::Index A, double gamma) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Mat> P(S, Mat(A, S));
  for (Eigen::Index s = 0; s < S; ++s)
    for (Eigen::Index a = 0; a < A; ++a) P[s].row(a) = dirichlet_row(S, rng).transpose();
  Mat r(S, A);
  for (Eigen::Index s = 0; s < S; ++s)
    for (Eigen::Index a = 0; a < A; ++a) r(s, a) = unif(rng);
  return TabularMdp(std::move(P), std::move(r), gamma, Distribution::uniform(S));
}

// Payoff entries uniform in [-1, 1].
inline Mat random_payoff(std::uint64_t seed, Eigen::Index m, Eigen::Index n) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Mat A(m, n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) A(i, j) = unif(rng);
  return A;
}

// Random strictly positive policy matrix (Dirichlet rows).
inline Mat random_policy_matrix(Eigen::Index S, Eigen::Index A, std::mt19937_64& rng) {
  Mat pi(S, A);
  for (Eigen::Index s = 0; s < S; ++s) pi.row(s) = dirichlet_row(A, rng).transpose();
  return pi;
}

// Entries uniform in [-1, 1]; A rescaled when its spectral radius exceeds
// 1.19, so instances are unstable in open loop but stabilizable. Q and R are
// shifted Gram matrices (sigma_min >= 0.5); Sigma0 is the identity.
inline LqrProblem random_lqr(std::uint64_t seed, Eigen::Index d, Eigen::Index k) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  auto draw = [&](Eigen::Index rows, Eigen::Index cols) {
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = unif(rng);
    return m;
  };
  Mat A = draw(d, d);
  const double rho = spectral_radius(A);
  if (rho > 1.19) A *= 1.19 / rho;
  Mat B = draw(d, k);
  const Mat W = draw(d, d);
  const Mat Z = draw(k, k);
  Mat Q = 0.5 * Mat::Identity(d, d) + W * W.transpose() / static_cast<double>(d);
  Mat R = 0.5 * Mat::Identity(k, k) + Z * Z.transpose() / static_cast<double>(k);
  return LqrProblem(std::move(A), std::move(B), std::move(Q), std::move(R), Mat::Identity(d, d));
}

// Riccati gain perturbed entrywise, resampled until the closed loop is stable.
inline GainMatrix random_stable_gain(std::uint64_t seed, const LqrProblem& prob,
                                     double spread = 0.5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const DareSolution ref = solve_dare(prob, 1e-12);
  for (int tries = 0; tries < 1000; ++tries) {
    Mat K = ref.K;
    for (Eigen::Index i = 0; i < K.rows(); ++i)
      for (Eigen::Index j = 0; j < K.cols(); ++j) K(i, j) += spread * unif(rng);
    GainMatrix gain(prob, std::move(K));
    if (gain.stable()) return gain;
  }
  throw StabilityError("random_stable_gain: no stable perturbation found", 1.0);
}

inline ZeroSumMarkovGame random_markov_game(std::uint64_t seed, Eigen::Index S, Eigen::Index m,
                                            Eigen::Index n, double gamma) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Mat> P(static_cast<size_t>(S), Mat(m * n, S));
  std::vector<Mat> r(static_cast<size_t>(S), Mat(m, n));
  for (Eigen::Index s = 0; s < S; ++s) {
    for (Eigen::Index row = 0; row < m * n; ++row)
      P[static_cast<size_t>(s)].row(row) = dirichlet_row(S, rng).transpose();
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = 0; b < n; ++b) r[static_cast<size_t>(s)](a, b) = unif(rng);
  }
  return ZeroSumMarkovGame(std::move(P), std::move(r), gamma);
}

}  // namespace pglab
