#include "tanlars/tangent_methods.hpp"

#include <stdexcept>


namespace tanlars {
namespace {

SolutionPath path_from_mle(const DesignMatrix& X, const MleResult& mle, const GlmFamily& family,
                           PathMode mode, const char* method) {
  const VirtualResponse yhat = virtual_response(X, mle.theta_hat);
  SolutionPath path = lars_path(X, yhat.values, mode);
  path.method = method;
  path.family = std::string(family.name());
  path.separation_flag = mle.separation_flag;
  path.ridge_used = mle.ridge_used;
  return path;
}

}  // namespace

VirtualResponse virtual_response(const DesignMatrix& X, const Eigen::VectorXd& theta_hat, ResponseSource source) {
  if (static_cast<std::size_t>(theta_hat.size()) != X.d())
    throw std::invalid_argument("coefficient length does not match design");
  if (!theta_hat.allFinite()) throw std::invalid_argument("coefficients are not finite");
  VirtualResponse out;
  out.source = source;
  out.values = linear_predictor(X.values(), theta_hat);
  return out;
}

SolutionPath tlars(const DesignMatrix& X, const ResponseVector& y, const GlmFamily& family,
                   const MleOptions& mle_opts) {
  return path_from_mle(X, fit_mle(X, y, family, mle_opts), family, PathMode::lar, "tlars");
}

SolutionPath tlasso1(const DesignMatrix& X, const ResponseVector& y, const GlmFamily& family,
                     const MleOptions& mle_opts) {
  return path_from_mle(X, fit_mle(X, y, family, mle_opts), family, PathMode::lasso, "tlasso1");
}

SolutionPath tlasso2(const DesignMatrix& X, const ResponseVector& y, const GlmFamily& family) {
  check_response_domain(family, y);
  const ThetaTilde tt = solve_theta_tilde(X, y);
  const VirtualResponse target =
      virtual_response(X, family.alpha() * tt.value, ResponseSource::alpha_theta_tilde);
  SolutionPath path = lars_path(X, target.values, PathMode::lasso);
  path.method = "tlasso2";
  path.family = std::string(family.name());
  return path;
}

TangentPaths tlars_and_tlasso1(const DesignMatrix& X, const ResponseVector& y, const GlmFamily& family,
                               const MleOptions& mle_opts) {
  TangentPaths out;
  out.mle = fit_mle(X, y, family, mle_opts);
  out.tlars = path_from_mle(X, out.mle, family, PathMode::lar, "tlars");
  out.tlasso1 = path_from_mle(X, out.mle, family, PathMode::lasso, "tlasso1");
  return out;
}

}  // namespace tanlars
