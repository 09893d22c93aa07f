#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>

#include "tanlars/data_model.hpp"
#include "tanlars/glm_family.hpp"

namespace tanlars {

enum class RidgeMode {
  on_separation,  // unpenalized first; restart with the ridge only if coefficients diverge
  always,         // penalize from the first iteration
};

struct MleOptions {
  int max_iter = 100;
  double grad_tol = 1e-8;
  /// Quadratic penalty ridge * ||theta||^2 used as the separation fallback.
  /// Zero means divergence raises Separation.
  double ridge = 0.0;
  RidgeMode ridge_mode = RidgeMode::on_separation;
  /// ||theta||_inf above this during an unpenalized fit counts as divergence.
  double divergence_bound = 1e3;
};

struct MleResult {
  Eigen::VectorXd theta_hat;
  int iterations = 0;
  /// Infinity norm of the gradient of the (possibly penalized) log-likelihood.
  double final_gradient_norm = 0.0;
  bool converged = false;
  bool separation_flag = false;
  double ridge_used = 0.0;
};

/// Damped Newton (IRLS) maximum likelihood for the full model. The gaussian
/// family is solved in closed form. Throws NotConverged or Separation.
MleResult fit_mle(const DesignMatrix& X, const ResponseVector& y, const GlmFamily& family,
                  const MleOptions& opts = {});

/// Same solver on a raw column block; used for support refits.
MleResult fit_mle(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GlmFamily& family,
                  const MleOptions& opts = {});

/// Number of times a likelihood maximization has been started in this process.
std::uint64_t mle_solver_invocations();

/// Solution of X^T X theta = X^T y.
struct ThetaTilde {
  Eigen::VectorXd value;
};

ThetaTilde solve_theta_tilde(const DesignMatrix& X, const ResponseVector& y);
ThetaTilde solve_theta_tilde(const DesignMatrix& X, const Eigen::VectorXd& y);

/// Second-order expansion of the log-likelihood at the origin:
///   -(1/2a)(theta - a*tt)^T X^T X (theta - a*tt) + (a/2) tt^T X^T X tt - psi(0)
/// with a = family.alpha() and tt = theta_tilde. It agrees with
/// log_likelihood() up to third-order terms in theta, and exactly for the
/// gaussian family.
double quadratic_loglik(const DesignMatrix& X, const GlmFamily& family, const ThetaTilde& theta_tilde,
                        const Eigen::VectorXd& theta);

}  // namespace tanlars
