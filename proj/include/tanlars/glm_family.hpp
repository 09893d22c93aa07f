#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>

#include "tanlars/data_model.hpp"

namespace tanlars {

enum class FamilyKind { gaussian, binomial, poisson };

/// Canonical-link exponential family. The natural parameter of sample a is the
/// linear predictor eta_a = x_a^T theta and the cumulant is b(eta), so that
///   inverse_link = b',  inverse_link_derivative = b''.
/// Linear predictors are clamped to [-700, 700] before exponentiation for the
/// binomial and Poisson families.
class GlmFamily {
 public:
  static constexpr double kEtaClamp = 700.0;

  constexpr explicit GlmFamily(FamilyKind kind) : kind_(kind) {}

  static GlmFamily gaussian() { return GlmFamily(FamilyKind::gaussian); }
  static GlmFamily binomial() { return GlmFamily(FamilyKind::binomial); }
  static GlmFamily poisson() { return GlmFamily(FamilyKind::poisson); }
  /// Accepts "gaussian", "binomial" or "poisson".
  static GlmFamily from_name(std::string_view name);

  FamilyKind kind() const { return kind_; }
  std::string_view name() const;
  FamilyDomain domain() const;

  double inverse_link(double eta) const;
  double inverse_link_derivative(double eta) const;
  /// b(eta); sums to the potential psi.
  double cumulant(double eta) const;
  /// 1 / inverse_link_derivative(0): 1 for gaussian and poisson, 4 for binomial.
  double alpha() const;

  friend bool operator==(const GlmFamily&, const GlmFamily&) = default;

 private:
  FamilyKind kind_;
};

/// X theta, through the dispatched kernels.
Eigen::VectorXd linear_predictor(const Eigen::MatrixXd& X, const Eigen::VectorXd& theta);

/// mu(theta) = h^{-1}(X theta), componentwise.
Eigen::VectorXd mean_response(const GlmFamily& family, const Eigen::MatrixXd& X, const Eigen::VectorXd& theta);
/// psi(theta) = sum_a b(x_a^T theta). Data-only constants of the gaussian
/// density are dropped, leaving psi = theta^T X^T X theta / 2.
double potential(const GlmFamily& family, const Eigen::MatrixXd& X, const Eigen::VectorXd& theta);
/// y^T X theta - psi(theta).
double log_likelihood(const GlmFamily& family, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& theta);
/// g_ij(theta) = sum_a x_ai x_aj h~(x_a^T theta); G(0) = h~(0) X^T X.
Eigen::MatrixXd fisher_metric(const GlmFamily& family, const Eigen::MatrixXd& X, const Eigen::VectorXd& theta);

inline Eigen::VectorXd mean_response(const GlmFamily& f, const DesignMatrix& X, const Eigen::VectorXd& theta) {
  return mean_response(f, X.values(), theta);
}
inline double potential(const GlmFamily& f, const DesignMatrix& X, const Eigen::VectorXd& theta) {
  return potential(f, X.values(), theta);
}
inline double log_likelihood(const GlmFamily& f, const DesignMatrix& X, const ResponseVector& y,
                             const Eigen::VectorXd& theta) {
  return log_likelihood(f, X.values(), y.values(), theta);
}
Eigen::MatrixXd fisher_metric(const GlmFamily& family, const DesignMatrix& X, const Eigen::VectorXd& theta);

/// Throws DomainError unless the response domain is compatible with the family.
void check_response_domain(const GlmFamily& family, const ResponseVector& y);

}  // namespace tanlars
