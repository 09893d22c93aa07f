#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

#include "tanlars/data_model.hpp"
#include "tanlars/glm_family.hpp"

namespace tanlars {

/// Log-spaced, strictly decreasing penalty levels from lambda_max down to
/// lambda_max * ratio, where lambda_max = max_j |x_j^T (y - mu(0))| is the
/// smallest level with an all-zero solution.
struct LambdaGrid {
  std::vector<double> values;
  double lambda_max = 0.0;
  double ratio = 1e-4;
  std::size_t count = 100;
};

LambdaGrid make_lambda_grid(const DesignMatrix& X, const ResponseVector& y, const GlmFamily& family,
                            std::size_t count = 100, double ratio = 1e-4);

struct L1Options {
  double outer_tol = 1e-8;   // max |theta change| between reweightings
  double inner_tol = 1e-10;  // coordinate descent
  int max_outer = 100;
  int max_inner_sweeps = 100000;
};

/// Solutions of min -y^T X theta + psi(theta) + lambda ||theta||_1 along a grid.
struct L1Path {
  std::vector<double> lambdas;
  std::vector<Eigen::VectorXd> thetas;
  std::vector<double> kkt;
  std::vector<bool> converged;
  std::vector<int> outer_iterations;
  std::string family;

  std::size_t size() const { return thetas.size(); }
};

/// Warm-started proximal Newton: a quadratic model of the log-likelihood at
/// the current estimate is minimized by cyclic coordinate descent with soft
/// thresholding, followed by a backtracking step on the exact objective.
/// Grid points that fail to converge are flagged and the path continues.
L1Path l1_glm_path(const DesignMatrix& X, const ResponseVector& y, const GlmFamily& family,
                   const LambdaGrid& grid, const L1Options& opts = {});

/// Largest violation of the optimality conditions at (theta, lambda):
/// |g_j - lambda sign(theta_j)| on the support, max(0, |g_j| - lambda) off it,
/// with g = X^T (y - mu(theta)).
double kkt_residual(const DesignMatrix& X, const ResponseVector& y, const GlmFamily& family,
                    const Eigen::VectorXd& theta, double lambda);

/// The penalized negative log-likelihood being minimized.
double l1_objective(const DesignMatrix& X, const ResponseVector& y, const GlmFamily& family,
                    const Eigen::VectorXd& theta, double lambda);

}  // namespace tanlars
