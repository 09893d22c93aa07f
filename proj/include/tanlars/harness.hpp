#pragma once

// Monte Carlo comparison of the tangent-space estimators with the l1
// baseline on simulated GLM data.

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tanlars/data_model.hpp"
#include "tanlars/glm_family.hpp"
#include "tanlars/model_selection.hpp"

namespace tanlars {

enum class Method { tlars, tlasso1, tlasso2, l1 };
std::string_view method_name(Method m);
Method method_from_name(std::string_view name);

enum class Correlation { independent, b_case };
enum class GeneralizationMetric { squared_error, misclassification };

struct CaseConfig {
  std::string name = "custom";
  std::size_t d = 0;
  std::size_t n = 0;
  Eigen::VectorXd theta0;
  std::size_t m_trials = 1;
  FamilyKind family = FamilyKind::binomial;
  Correlation correlation = Correlation::independent;
  /// Case B: raw column 3 = raw column 2 + noise_sd * N(0, 1).
  double noise_sd = 0.1;
  std::vector<Method> methods{Method::tlars, Method::tlasso1, Method::tlasso2, Method::l1};
  std::vector<CriterionKind> criteria{CriterionKind::aic1(), CriterionKind::aic2(), CriterionKind::bic1(),
                                     CriterionKind::bic2()};
  std::uint64_t base_seed = 1;
  /// Separation fallback for the full-model and support MLEs.
  double ridge = 1e-6;
  std::size_t nlambda = 100;
  double lambda_ratio = 1e-4;
  GeneralizationMetric metric = GeneralizationMetric::squared_error;

  /// Throws std::invalid_argument when inconsistent.
  void validate() const;
};

/// A1, A2, B1, B2, C1, C2 (m_trials defaults to 300).
CaseConfig preset_case(std::string_view name);

struct TrialData {
  DesignMatrix X;
  ResponseVector y;
  DesignMatrix X_fresh;
  ResponseVector y_fresh;
  std::uint64_t seed = 0;
  int attempts = 1;
};

/// Per-trial seed derived from (base_seed, trial_index).
std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t trial_index);

/// Bit-for-bit reproducible given (config.base_seed, trial_index). Raw
/// designs are standard normal; responses are drawn at theta0 on the
/// normalized design; the fresh pair is an independent draw of the same shape.
TrialData generate_trial(const CaseConfig& config, std::size_t trial_index);

/// Mean over fresh samples of (y - mu_hat)^2, or of the 0/1 error of
/// thresholding mu_hat at 1/2.
double generalization_error(const Eigen::VectorXd& theta_hat, const DesignMatrix& X_fresh,
                            const ResponseVector& y_fresh, const GlmFamily& family,
                            GeneralizationMetric metric = GeneralizationMetric::squared_error);

struct CriterionOutcome {
  double generalization_error = 0.0;
  bool selected_true_model = false;
  double parameter_sq_error = 0.0;
  std::size_t selected_size = 0;
};

struct MethodOutcome {
  Method method = Method::tlars;
  bool seq_contains_truth = false;
  bool separation_flag = false;
  std::map<std::string, CriterionOutcome> by_criterion;  // keyed by criterion name
};

struct TrialSummary {
  std::size_t trial_index = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string failure;
  std::vector<MethodOutcome> methods;
  std::optional<bool> tlars_tlasso1_identical;
};

TrialSummary run_trial(const CaseConfig& config, std::size_t trial_index);

struct CriterionAggregate {
  double generalization = 0.0;
  double model_selection = 0.0;
  double parameter_estimation = 0.0;
};

struct MethodAggregate {
  double seq = 0.0;
  std::size_t separation_trials = 0;
  std::map<std::string, CriterionAggregate> by_criterion;
};

struct CaseReport {
  CaseConfig config;
  std::size_t trials = 0;
  std::size_t failed_trials = 0;
  std::vector<std::string> failures;  // "trial <i>: <reason>"
  std::map<std::string, MethodAggregate> methods;
  std::optional<double> tlars_tlasso1_identical;
};

/// Aggregates in trial order, so the report does not depend on `workers`.
CaseReport aggregate(const CaseConfig& config, const std::vector<TrialSummary>& trials);
CaseReport run_case(const CaseConfig& config, unsigned workers = 1);

std::string config_to_json(const CaseConfig& config);
CaseConfig config_from_json(std::string_view text);
std::string report_to_json(const CaseReport& report);
CaseReport report_from_json(std::string_view text);

/// Human-readable table with the generalization (x 1e-2), model selection
/// and parameter estimation blocks, or the same numbers as CSV.
std::string format_report_table(const CaseReport& report);
std::string format_report_csv(const CaseReport& report);

}  // namespace tanlars
