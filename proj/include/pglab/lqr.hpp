#pragma once

#include <iostream>
#include <utility>

#include "pglab/numeric.hpp"

namespace pglab {

namespace detail {

inline void require_symmetric(const Mat& M, const char* name) {
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, M.cwiseAbs().maxCoeff()))
    throw DomainError(std::string(name) + " must be symmetric");
}

inline void require_spd(const Mat& M, const char* name) {
  Eigen::LLT<Mat> llt(0.5 * (M + M.transpose()));
  if (llt.info() != Eigen::Success)
    throw DomainError(std::string(name) + " must be positive definite");
}

}  // namespace detail

// Discrete-time linear dynamics x' = Ax + Bu with stage cost x^T Q x + u^T R u
// and start covariance Sigma0 = E[x0 x0^T]. A linear feedback u = -Kx incurs
// finite total cost exactly when the closed loop A - BK is stable.
class LqrProblem {
 public:
  LqrProblem(Mat A, Mat B, Mat Q, Mat R, Mat Sigma0)
      : A_(std::move(A)),
        B_(std::move(B)),
        Q_(std::move(Q)),
        R_(std::move(R)),
        Sigma0_(std::move(Sigma0)) {
    const Eigen::Index d = A_.rows();
    const Eigen::Index k = B_.cols();
    if (d <= 0 || A_.cols() != d) throw DimensionError("LqrProblem: A must be square");
    if (k <= 0 || B_.rows() != d) throw DimensionError("LqrProblem: B must be d x k");
    if (Q_.rows() != d || Q_.cols() != d) throw DimensionError("LqrProblem: Q must be d x d");
    if (R_.rows() != k || R_.cols() != k) throw DimensionError("LqrProblem: R must be k x k");
    if (Sigma0_.rows() != d || Sigma0_.cols() != d)
      throw DimensionError("LqrProblem: Sigma0 must be d x d");
    require_finite(A_, "LqrProblem A");
    require_finite(B_, "LqrProblem B");
    detail::require_symmetric(Q_, "LqrProblem: Q");
    detail::require_symmetric(R_, "LqrProblem: R");
    detail::require_symmetric(Sigma0_, "LqrProblem: Sigma0");
    detail::require_spd(Q_, "LqrProblem: Q");
    detail::require_spd(R_, "LqrProblem: R");
    detail::require_spd(Sigma0_, "LqrProblem: Sigma0");
    lambda_ = sigma_min_spd(Sigma0_);
    if (!(lambda_ > 0.0)) throw DomainError("LqrProblem: Sigma0 must have sigma_min > 0");
  }

  Eigen::Index d() const { return A_.rows(); }
  Eigen::Index k() const { return B_.cols(); }
  const Mat& A() const { return A_; }
  const Mat& B() const { return B_; }
  const Mat& Q() const { return Q_; }
  const Mat& R() const { return R_; }
  const Mat& sigma0() const { return Sigma0_; }
  // sigma_min of the start covariance; every gradient-dominance constant
  // degrades with this floor.
  double lambda_min() const { return lambda_; }

 private:
  Mat A_, B_, Q_, R_, Sigma0_;
  double lambda_;
};

// Linear feedback u = -Kx together with its stability certificate: the closed
// loop A - BK, its spectral radius and spectral norm. stable() gates every
// evaluation; an unstable gain has infinite cost and is never evaluated.
class GainMatrix {
 public:
  GainMatrix(const LqrProblem& prob, Mat K) : K_(std::move(K)) {
    if (K_.rows() != prob.k() || K_.cols() != prob.d())
      throw DimensionError("GainMatrix: K must be k x d");
    require_finite(K_, "GainMatrix");
    M_ = prob.A() - prob.B() * K_;
    radius_ = pglab::spectral_radius(M_);
    norm_ = pglab::spectral_norm(M_);
  }

  const Mat& K() const { return K_; }
  const Mat& closed_loop() const { return M_; }
  double closed_loop_radius() const { return radius_; }
  double closed_loop_norm() const { return norm_; }
  bool stable() const { return radius_ < 1.0; }

 private:
  Mat K_;
  Mat M_;
  double radius_;
  double norm_;
};

struct LqrEvaluation {
  Mat P;         // cost-to-go: P = M^T P M + Q + K^T R K
  Mat Sigma;     // state correlation: Sigma = M Sigma M^T + Sigma0
  double cost;   // trace(P Sigma0)
  Mat gradient;  // 2((R + B^T P B)K - B^T P A) Sigma
};

namespace detail {

// (R + B^T P B)K - B^T P A: half the cost gradient with the trailing Sigma
// stripped; vanishes exactly at the Riccati gain for this P.
inline Mat lqr_half_direction(const LqrProblem& prob, const Mat& K, const Mat& P) {
  return (prob.R() + prob.B().transpose() * P * prob.B()) * K -
         prob.B().transpose() * P * prob.A();
}

}  // namespace detail

inline LqrEvaluation evaluate_gain(const LqrProblem& prob, const GainMatrix& gain) {
  if (!gain.stable())
    throw StabilityError("evaluate_gain: closed loop is unstable", gain.closed_loop_radius());
  const Mat& K = gain.K();
  const Mat& M = gain.closed_loop();
  LqrEvaluation out;
  out.P = solve_discrete_lyapunov(M, prob.Q() + K.transpose() * prob.R() * K,
                                  LyapunovMode::kTransposedOnLeft);
  out.Sigma = solve_discrete_lyapunov(M, prob.sigma0(), LyapunovMode::kTransposedOnRight);
  out.cost = (out.P * prob.sigma0()).trace();
  out.gradient = 2.0 * detail::lqr_half_direction(prob, K, out.P) * out.Sigma;
  return out;
}

inline LqrEvaluation evaluate_gain(const LqrProblem& prob, const Mat& K) {
  return evaluate_gain(prob, GainMatrix(prob, K));
}

enum class LqrStepKind {
  kPg,           // K - eta * gradient
  kNpg,          // K - eta * gradient * Sigma^{-1} = K - 2 eta ((R + B^T P B)K - B^T P A)
  kGaussNewton,  // K - eta (R + B^T P B)^{-1} ((R + B^T P B)K - B^T P A)
};

// One exact policy update. The Gauss-Newton direction absorbs the gradient's
// leading factor 2 so that eta = 1 is exactly the Riccati policy-improvement
// map K <- (R + B^T P B)^{-1} B^T P A; a doubled unit step would overshoot the
// improvement point and cycle instead of converging.
inline GainMatrix lqr_step(const LqrProblem& prob, const GainMatrix& gain, double eta,
                           LqrStepKind kind) {
  if (!(eta > 0.0)) throw ConfigError("lqr_step: eta must be positive");
  const LqrEvaluation eval = evaluate_gain(prob, gain);
  const Mat E = detail::lqr_half_direction(prob, gain.K(), eval.P);
  Mat next;
  switch (kind) {
    case LqrStepKind::kPg:
      next = gain.K() - eta * eval.gradient;
      break;
    case LqrStepKind::kNpg: {
      const Mat M = prob.R() + prob.B().transpose() * eval.P * prob.B();
      if (eta > 1.0 / spectral_norm(M) + 1e-12)
        std::cerr << "lqr_step: npg eta exceeds 1/||R + B^T P B||_2; "
                     "the one-step contraction is not certified\n";
      next = gain.K() - 2.0 * eta * E;
      break;
    }
    case LqrStepKind::kGaussNewton: {
      const Mat M = prob.R() + prob.B().transpose() * eval.P * prob.B();
      Eigen::LLT<Mat> llt(M);
      if (llt.info() != Eigen::Success)
        throw NumericError("lqr_step: R + B^T P B is not positive definite");
      next = gain.K() - eta * llt.solve(E);
      break;
    }
  }
  GainMatrix out(prob, std::move(next));
  if (!out.stable())
    throw StabilityError("lqr_step: update left the stable region", out.closed_loop_radius());
  return out;
}

inline GainMatrix lqr_step(const LqrProblem& prob, const Mat& K, double eta, LqrStepKind kind) {
  return lqr_step(prob, GainMatrix(prob, K), eta, kind);
}

struct DareSolution {
  Mat P;
  Mat K;
};

// Fixed-point Riccati iteration P <- Q + A^T P A - A^T P B (R + B^T P B)^{-1} B^T P A
// from P = Q, run to sup-change <= tol. Unbounded growth means no stabilizing
// gain exists; slow decay past the sweep cap is reported as non-convergence.
inline DareSolution solve_dare(const LqrProblem& prob, double tol) {
  if (!(tol > 0.0)) throw ConfigError("solve_dare: tol must be positive");
  Mat P = prob.Q();
  double change = std::numeric_limits<double>::infinity();
  for (long it = 0; it < 200000 && change > tol; ++it) {
    const Mat BtPA = prob.B().transpose() * P * prob.A();
    Eigen::LLT<Mat> llt(prob.R() + prob.B().transpose() * P * prob.B());
    if (llt.info() != Eigen::Success)
      throw NumericError("solve_dare: R + B^T P B is not positive definite");
    Mat next = prob.Q() + prob.A().transpose() * P * prob.A() - BtPA.transpose() * llt.solve(BtPA);
    next = 0.5 * (next + next.transpose()).eval();
    change = (next - P).cwiseAbs().maxCoeff();
    P = std::move(next);
    if (P.cwiseAbs().maxCoeff() > 1e14)
      throw StabilityError("solve_dare: cost iteration diverged; the instance is not stabilizable",
                           spectral_radius(prob.A()));
  }
  if (change > tol) throw ConvergenceError("solve_dare: sweep cap reached", change);
  const Mat BtPA = prob.B().transpose() * P * prob.A();
  Eigen::LLT<Mat> llt(prob.R() + prob.B().transpose() * P * prob.B());
  Mat K = llt.solve(BtPA);
  GainMatrix gain(prob, std::move(K));
  if (!gain.stable())
    throw StabilityError("solve_dare: Riccati gain is not stabilizing",
                         gain.closed_loop_radius());
  return {std::move(P), gain.K()};
}

struct DominanceCheck {
  double lhs;  // C(K) - C(K*)
  double rhs;  // ||Sigma_{K*}||_2 / (lambda^2 sigma_min(R)) * ||grad||_F^2
  bool holds;
};

// Suboptimality gap against the gradient-dominance bound: the gap at any
// stable K is controlled by the squared gradient norm alone, which is what
// rules out spurious stationary points.
inline DominanceCheck check_gradient_dominance(const LqrProblem& prob, const GainMatrix& gain) {
  const LqrEvaluation eval = evaluate_gain(prob, gain);
  const DareSolution ref = solve_dare(prob, 1e-12);
  const Mat Sstar = solve_discrete_lyapunov(prob.A() - prob.B() * ref.K, prob.sigma0(),
                                            LyapunovMode::kTransposedOnRight);
  DominanceCheck out;
  out.lhs = eval.cost - (ref.P * prob.sigma0()).trace();
  out.rhs = spectral_norm(Sstar) /
            (prob.lambda_min() * prob.lambda_min() * sigma_min_spd(prob.R())) *
            eval.gradient.squaredNorm();
  out.holds = out.lhs <= out.rhs + 1e-9;
  return out;
}

inline DominanceCheck check_gradient_dominance(const LqrProblem& prob, const Mat& K) {
  return check_gradient_dominance(prob, GainMatrix(prob, K));
}

}  // namespace pglab
