#pragma once

// Sparse GLM estimators that run least angle regression / lasso in the
// tangent space of the model at the origin, where the Fisher metric is
// proportional to X^T X. Path coefficients are coordinates of the fitted
// distributions directly: the map from the tangent space back to the model is
// the identity on theta.

#include <Eigen/Dense>

#include "tanlars/data_model.hpp"
#include "tanlars/glm_family.hpp"
#include "tanlars/glm_mle.hpp"
#include "tanlars/lars_engine.hpp"

namespace tanlars {

enum class ResponseSource { mle, alpha_theta_tilde };

/// Surrogate response X * theta_hat. It reproduces the correlations
/// X^T X theta_hat that the path algorithm needs.
struct VirtualResponse {
  Eigen::VectorXd values;
  ResponseSource source = ResponseSource::mle;
};

VirtualResponse virtual_response(const DesignMatrix& X, const Eigen::VectorXd& theta_hat,
                                 ResponseSource source = ResponseSource::mle);

/// LARS on the virtual response of the full-model MLE.
SolutionPath tlars(const DesignMatrix& X, const ResponseVector& y, const GlmFamily& family,
                   const MleOptions& mle_opts = {});

/// Lasso path of min ||X theta_mle - X theta||^2 + lambda ||theta||_1.
SolutionPath tlasso1(const DesignMatrix& X, const ResponseVector& y, const GlmFamily& family,
                     const MleOptions& mle_opts = {});

/// Lasso path of min ||alpha X theta_tilde - X theta||^2 + lambda ||theta||_1,
/// where X^T X theta_tilde = X^T y. Never maximizes the likelihood.
SolutionPath tlasso2(const DesignMatrix& X, const ResponseVector& y, const GlmFamily& family);

/// tlars and tlasso1 share the MLE; this runs both from one fit.
struct TangentPaths {
  MleResult mle;
  SolutionPath tlars;
  SolutionPath tlasso1;
};
TangentPaths tlars_and_tlasso1(const DesignMatrix& X, const ResponseVector& y, const GlmFamily& family,
                               const MleOptions& mle_opts = {});

}  // namespace tanlars
