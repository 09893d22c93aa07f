#include "tanlars/glm_family.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tanlars/errors.hpp"
#include "tanlars/kernels.hpp"

namespace tanlars {
namespace {

double clamp_eta(double eta) { return std::clamp(eta, -GlmFamily::kEtaClamp, GlmFamily::kEtaClamp); }

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

GlmFamily GlmFamily::from_name(std::string_view name) {
  if (name == "gaussian") return gaussian();
  if (name == "binomial") return binomial();
  if (name == "poisson") return poisson();
  throw std::invalid_argument("unknown family: " + std::string(name));
}

std::string_view GlmFamily::name() const {
  switch (kind_) {
    case FamilyKind::gaussian: return "gaussian";
    case FamilyKind::binomial: return "binomial";
    case FamilyKind::poisson: return "poisson";
  }
  return "?";
}

FamilyDomain GlmFamily::domain() const {
  switch (kind_) {
    case FamilyKind::binomial: return FamilyDomain::binary01;
    case FamilyKind::poisson: return FamilyDomain::nonneg_integer;
    case FamilyKind::gaussian: break;
  }
  return FamilyDomain::real;
}

double GlmFamily::inverse_link(double eta) const {
  switch (kind_) {
    case FamilyKind::gaussian: return eta;
    case FamilyKind::binomial: {
      const double t = clamp_eta(eta);
      if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
      const double e = std::exp(t);
      return e / (1.0 + e);
    }
    case FamilyKind::poisson: return std::exp(clamp_eta(eta));
  }
  return 0.0;
}

double GlmFamily::inverse_link_derivative(double eta) const {
  switch (kind_) {
    case FamilyKind::gaussian: return 1.0;
    case FamilyKind::binomial: {
      const double p = inverse_link(eta);
      return p * (1.0 - p);
    }
    case FamilyKind::poisson: return std::exp(clamp_eta(eta));
  }
  return 0.0;
}

double GlmFamily::cumulant(double eta) const {
  switch (kind_) {
    case FamilyKind::gaussian: return 0.5 * eta * eta;
    case FamilyKind::binomial: {
      // log(1 + e^t) without overflow
      const double t = clamp_eta(eta);
      return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
    }
    case FamilyKind::poisson: return std::exp(clamp_eta(eta));
  }
  return 0.0;
}

double GlmFamily::alpha() const { return kind_ == FamilyKind::binomial ? 4.0 : 1.0; }

void check_response_domain(const GlmFamily& family, const ResponseVector& y) {
  const FamilyDomain need = family.domain();
  if (need == FamilyDomain::real) return;
  if (y.domain() == need) return;
  // Re-validate the values against the stricter domain.
  ResponseVector checked(y.values(), need);
  (void)checked;
}

Eigen::VectorXd linear_predictor(const Eigen::MatrixXd& X, const Eigen::VectorXd& theta) {
  if (theta.size() != X.cols()) throw std::invalid_argument("theta length does not match design");
  Eigen::VectorXd eta(X.rows());
  kernels::gemv(X.data(), static_cast<std::size_t>(X.rows()), static_cast<std::size_t>(X.cols()),
                as_span(theta), {eta.data(), static_cast<std::size_t>(eta.size())});
  return eta;
}

Eigen::VectorXd mean_response(const GlmFamily& family, const Eigen::MatrixXd& X, const Eigen::VectorXd& theta) {
  Eigen::VectorXd mu = linear_predictor(X, theta);
  for (Eigen::Index a = 0; a < mu.size(); ++a) mu(a) = family.inverse_link(mu(a));
  return mu;
}

double potential(const GlmFamily& family, const Eigen::MatrixXd& X, const Eigen::VectorXd& theta) {
  Eigen::VectorXd b = linear_predictor(X, theta);
  for (Eigen::Index a = 0; a < b.size(); ++a) b(a) = family.cumulant(b(a));
  return kernels::sum(as_span(b));
}

double log_likelihood(const GlmFamily& family, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& theta) {
  if (y.size() != X.rows()) throw std::invalid_argument("response length does not match design");
  Eigen::VectorXd eta = linear_predictor(X, theta);
  const double fit = kernels::dot(as_span(y), as_span(eta));
  for (Eigen::Index a = 0; a < eta.size(); ++a) eta(a) = family.cumulant(eta(a));
  return fit - kernels::sum(as_span(eta));
}

Eigen::MatrixXd fisher_metric(const GlmFamily& family, const Eigen::MatrixXd& X, const Eigen::VectorXd& theta) {
  Eigen::VectorXd w = linear_predictor(X, theta);
  for (Eigen::Index a = 0; a < w.size(); ++a) w(a) = family.inverse_link_derivative(w(a));
  const auto d = X.cols();
  const auto n = static_cast<std::size_t>(X.rows());
  Eigen::MatrixXd g(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      const double s = kernels::weighted_dot(as_span(w), {X.col(i).data(), n}, {X.col(j).data(), n});
      g(i, j) = s;
      g(j, i) = s;
    }
  }
  return g;
}

Eigen::MatrixXd fisher_metric(const GlmFamily& family, const DesignMatrix& X, const Eigen::VectorXd& theta) {
  // Reuse the cached Gram when the weights are all equal.
  if (family.kind() == FamilyKind::gaussian) return X.gram();
  if (theta.isZero(0.0)) return family.inverse_link_derivative(0.0) * X.gram();
  return fisher_metric(family, X.values(), theta);
}

}  // namespace tanlars
