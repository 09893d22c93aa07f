#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tanlars/data_model.hpp"

namespace tanlars {

enum class PathMode { lar, lasso };

std::string_view path_mode_name(PathMode mode);

/// One breakpoint of a least angle path, together with the equiangular step
/// that leaves it. The terminal breakpoint has gamma == 0 and an empty step.
struct LarsState {
  std::size_t k = 0;
  Eigen::VectorXd theta;
  /// Indices moving on the step that leaves this breakpoint, in entry order.
  std::vector<std::size_t> active;
  /// Correlation sign of each entry of `active`.
  std::vector<int> signs;
  /// X^T (response - X theta)
  Eigen::VectorXd residual_corr;
  double max_corr = 0.0;

  double A = 0.0;
  Eigen::VectorXd w;          // over `active`
  Eigen::VectorXd a;          // X^T u, length d
  Eigen::VectorXd direction;  // d theta / d gamma, length d
  double gamma = 0.0;

  /// Index that left the active set on arrival at this breakpoint (lasso mode).
  std::optional<std::size_t> dropped;

  /// Penalty level at which theta solves ||r - X theta||^2 + lambda ||theta||_1.
  double lambda() const { return 2.0 * max_corr; }
};

struct SolutionPath {
  PathMode mode = PathMode::lar;
  std::vector<LarsState> breakpoints;
  Eigen::VectorXd terminal_theta;

  // Provenance carried into exports and reports.
  std::string method;
  std::string family;
  bool separation_flag = false;
  double ridge_used = 0.0;

  std::size_t size() const { return breakpoints.size(); }
  std::size_t dimension() const { return static_cast<std::size_t>(terminal_theta.size()); }

  /// Coefficients at penalty level lambda (same scale as LarsState::lambda()),
  /// by linear interpolation between the bracketing breakpoints.
  Eigen::VectorXd coefficients_at(double lambda) const;
};

/// Least angle regression (lar) or its lasso modification on a normalized
/// design. Throws NumericalBreakdown if an active Gram block is not positive
/// definite.
SolutionPath lars_path(const DesignMatrix& X, const Eigen::VectorXd& response, PathMode mode);

/// Variant that works from the correlations X^T response alone; the response
/// only enters LARS through them.
SolutionPath lars_path_from_correlations(const DesignMatrix& X, const Eigen::VectorXd& correlations,
                                         PathMode mode);

struct Equiangular {
  double A;
  Eigen::VectorXd w;
};

/// Unit bisector of the signed active columns given their Gram block:
/// A = (1^T G^{-1} 1)^{-1/2}, w = A G^{-1} 1.
Equiangular equiangular(const Eigen::MatrixXd& signed_gram);

struct StepLength {
  double gamma;
  std::vector<std::size_t> entering;
};

/// Smallest positive step at which an inactive correlation catches up with the
/// shrinking maximum. With no inactive index the step drives every
/// correlation to zero: gamma = C / A.
StepLength step_length(double C, double A, const Eigen::VectorXd& c, const Eigen::VectorXd& a,
                       const std::vector<std::size_t>& inactive);

struct Drop {
  double gamma;
  std::size_t position;  // into the active list
};

/// First zero crossing -theta_j / direction_j > 0 among the active
/// coefficients, if it comes before gamma_hat.
std::optional<Drop> lasso_drop(const Eigen::VectorXd& theta_active, const Eigen::VectorXd& direction_active,
                               double gamma_hat);

}  // namespace tanlars
