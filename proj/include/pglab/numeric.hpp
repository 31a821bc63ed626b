#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "pglab/errors.hpp"

namespace pglab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline bool all_finite(const Mat& m) { return m.allFinite(); }
inline bool all_finite(const Vec& v) { return v.allFinite(); }

inline void require_finite(const Mat& m, const char* name) {
  if (!m.allFinite()) throw DomainError(std::string(name) + ": non-finite entries");
}

// Probability vector on the simplex. Entries are nonnegative and the total
// mass is 1 within kTol; both are checked at construction.
class Distribution {
 public:
  static constexpr double kTol = 1e-12;

  explicit Distribution(Vec p) : p_(std::move(p)) {
    if (p_.size() == 0) throw DimensionError("Distribution: empty vector");
    require_finite(p_, "Distribution");
    if ((p_.array() < 0.0).any()) throw DomainError("Distribution: negative entry");
    const double mass = p_.sum();
    if (std::abs(mass - 1.0) > kTol)
      throw DomainError("Distribution: mass " + std::to_string(mass) + " != 1");
  }

  static Distribution uniform(Eigen::Index n) {
    if (n <= 0) throw DimensionError("Distribution::uniform: n <= 0");
    return Distribution(Vec::Constant(n, 1.0 / static_cast<double>(n)));
  }

  static Distribution delta(Eigen::Index n, Eigen::Index i) {
    if (n <= 0 || i < 0 || i >= n) throw DimensionError("Distribution::delta: bad index");
    Vec p = Vec::Zero(n);
    p[i] = 1.0;
    return Distribution(std::move(p));
  }

  Eigen::Index size() const { return p_.size(); }
  double operator[](Eigen::Index i) const { return p_[i]; }
  const Vec& vec() const { return p_; }
  bool strictly_positive() const { return (p_.array() > 0.0).all(); }

 private:
  Vec p_;
};

// Euclidean projection onto the probability simplex.
// Sort-and-threshold form of the KKT conditions: with u the entries of v in
// decreasing order, the active set is the largest j with
// u_j + (1 - sum_{i<=j} u_i)/j > 0 and the shift is lambda = (1 - sum)/j.
inline Distribution project_to_simplex(const Vec& v) {
  if (v.size() == 0) throw DimensionError("project_to_simplex: empty vector");
  require_finite(v, "project_to_simplex");
  const Eigen::Index n = v.size();
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cumsum = 0.0;
  double lambda = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    cumsum += u[j];
    const double cand = (1.0 - cumsum) / static_cast<double>(j + 1);
    if (u[j] + cand > 0.0) lambda = cand;
  }
  Vec out = (v.array() + lambda).cwiseMax(0.0);
  // Exact zeros are fine; renormalization is not needed because lambda solves
  // the KKT system, but guard the sum against rounding for large n.
  const double mass = out.sum();
  if (std::abs(mass - 1.0) > 0.5 * Distribution::kTol) out /= mass;
  return Distribution(std::move(out));
}

// Shannon entropy with the 0 * log 0 = 0 convention.
inline double entropy(const Vec& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  return h;
}
inline double entropy(const Distribution& p) { return entropy(p.vec()); }

// KL(p || q). Support of p must lie inside the support of q.
inline double kl_divergence(const Vec& p, const Vec& q) {
  if (p.size() != q.size()) throw DimensionError("kl_divergence: size mismatch");
  double kl = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) throw DomainError("kl_divergence: support violation");
    kl += p[i] * std::log(p[i] / q[i]);
  }
  return kl;
}
inline double kl_divergence(const Distribution& p, const Distribution& q) {
  return kl_divergence(p.vec(), q.vec());
}

inline double total_variation(const Vec& p, const Vec& q) {
  if (p.size() != q.size()) throw DimensionError("total_variation: size mismatch");
  return 0.5 * (p - q).cwiseAbs().sum();
}
inline double total_variation(const Distribution& p, const Distribution& q) {
  return total_variation(p.vec(), q.vec());
}

// Max-shifted log(sum(exp(x))).
inline double log_sum_exp(const Vec& x) {
  if (x.size() == 0) throw DimensionError("log_sum_exp: empty vector");
  const double m = x.maxCoeff();
  return m + std::log((x.array() - m).exp().sum());
}

// Normalize log-weights so that exp of the result sums to 1.
inline Vec log_normalize(const Vec& logw) { return logw.array() - log_sum_exp(logw); }

inline Distribution distribution_from_log(const Vec& logw) {
  Vec p = log_normalize(logw).array().exp();
  const double mass = p.sum();
  if (std::abs(mass - 1.0) > 0.5 * Distribution::kTol) p /= mass;
  return Distribution(std::move(p));
}

// Dense solve of A x = b via partially pivoted LU. Refuses systems whose
// reciprocal condition estimate falls below 1e-12 and verifies the residual
// against 1e-10 * (1 + ||b||_inf), applying one refinement step if needed.
inline Vec solve_linear(const Mat& A, const Vec& b) {
  if (A.rows() != A.cols()) throw DimensionError("solve_linear: A not square");
  if (A.rows() != b.size()) throw DimensionError("solve_linear: size mismatch");
  require_finite(A, "solve_linear A");
  require_finite(b, "solve_linear b");
  Eigen::PartialPivLU<Mat> lu(A);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-12))
    throw NumericError("solve_linear: condition estimate " +
                           std::to_string(rcond > 0 ? 1.0 / rcond : INFINITY) + " too large",
                       rcond > 0 ? 1.0 / rcond : INFINITY);
  Vec x = lu.solve(b);
  const double tol = 1e-10 * (1.0 + b.cwiseAbs().maxCoeff());
  double resid = (A * x - b).cwiseAbs().maxCoeff();
  if (resid > tol) {
    x += lu.solve(b - A * x);
    resid = (A * x - b).cwiseAbs().maxCoeff();
    if (resid > tol)
      throw NumericError("solve_linear: residual " + std::to_string(resid) + " above tolerance",
                         1.0 / rcond);
  }
  return x;
}

// Largest eigenvalue magnitude via the QR eigensolver.
inline double spectral_radius(const Mat& M) {
  if (M.rows() != M.cols()) throw DimensionError("spectral_radius: not square");
  require_finite(M, "spectral_radius");
  if (M.rows() == 0) throw DimensionError("spectral_radius: empty matrix");
  Eigen::EigenSolver<Mat> es(M, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw NumericError("spectral_radius: eigensolver failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Largest singular value via power iteration on M^T M, tolerance 1e-10.
inline double spectral_norm(const Mat& M) {
  require_finite(M, "spectral_norm");
  if (M.size() == 0) throw DimensionError("spectral_norm: empty matrix");
  const Mat S = M.transpose() * M;
  Vec x = Vec::Ones(S.rows());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += 1e-3 * static_cast<double>(i + 1);
  x.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 100000; ++it) {
    Vec y = S * x;
    const double norm = y.norm();
    if (norm == 0.0) return 0.0;
    y /= norm;
    const double next = y.dot(S * y);
    const bool done = std::abs(next - lambda) <= 1e-10 * std::max(1.0, std::abs(next));
    lambda = next;
    x = y;
    if (done) break;
  }
  return std::sqrt(std::max(lambda, 0.0));
}

// Smallest eigenvalue of a symmetric positive definite matrix via inverse
// power iteration on the symmetric part.
inline double sigma_min_spd(const Mat& M) {
  if (M.rows() != M.cols()) throw DimensionError("sigma_min_spd: not square");
  require_finite(M, "sigma_min_spd");
  const Mat S = 0.5 * (M + M.transpose());
  Eigen::LLT<Mat> llt(S);
  if (llt.info() != Eigen::Success)
    throw DomainError("sigma_min_spd: matrix is not positive definite");
  Vec x = Vec::Ones(S.rows());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += 1e-3 * static_cast<double>(i + 1);
  x.normalize();
  double mu = 0.0;
  for (int it = 0; it < 100000; ++it) {
    Vec y = llt.solve(x);
    y.normalize();
    const double next = y.dot(S * y);
    const bool done = std::abs(next - mu) <= 1e-10 * std::max(1.0, std::abs(next));
    mu = next;
    x = y;
    if (done) break;
  }
  return mu;
}

enum class LyapunovMode {
  kTransposedOnLeft,   // X = M^T X M + W
  kTransposedOnRight,  // X = M X M^T + W
};

// Discrete Lyapunov solve by doubling: X_{j+1} = X_j + M_j^T X_j M_j with
// M_{j+1} = M_j^2 sums the series sum_t (M^T)^t W M^t in log many steps.
// Requires spectral_radius(M) < 1; the result is symmetrized each step and
// the residual is verified against 1e-10 * ||W||_F.
inline Mat solve_discrete_lyapunov(const Mat& M, const Mat& W, LyapunovMode mode) {
  if (M.rows() != M.cols() || W.rows() != W.cols() || M.rows() != W.rows())
    throw DimensionError("solve_discrete_lyapunov: size mismatch");
  require_finite(M, "solve_discrete_lyapunov M");
  require_finite(W, "solve_discrete_lyapunov W");
  if ((W - W.transpose()).cwiseAbs().maxCoeff() >
      1e-9 * std::max(1.0, W.cwiseAbs().maxCoeff()))
    throw DomainError("solve_discrete_lyapunov: W not symmetric");
  const double rho = spectral_radius(M);
  if (!(rho < 1.0))
    throw StabilityError("solve_discrete_lyapunov: spectral radius " + std::to_string(rho), rho);

  const Mat Ws = 0.5 * (W + W.transpose());
  Mat X = Ws;
  Mat T = (mode == LyapunovMode::kTransposedOnLeft) ? Mat(M) : Mat(M.transpose());
  for (int it = 0; it < 200; ++it) {
    const Mat inc = T.transpose() * X * T;
    X += inc;
    X = 0.5 * (X + X.transpose()).eval();
    T = (T * T).eval();
    if (inc.cwiseAbs().maxCoeff() <= 1e-14 * std::max(1.0, X.cwiseAbs().maxCoeff()) &&
        T.cwiseAbs().maxCoeff() <= 1e-14)
      break;
  }
  const Mat resid = (mode == LyapunovMode::kTransposedOnLeft)
                        ? Mat(X - M.transpose() * X * M - Ws)
                        : Mat(X - M * X * M.transpose() - Ws);
  const double wnorm = Ws.norm();
  if (resid.norm() > 1e-10 * std::max(wnorm, 1e-300) && wnorm > 0.0)
    throw NumericError("solve_discrete_lyapunov: residual " + std::to_string(resid.norm()));
  return X;
}

}  // namespace pglab
