#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tanlars/data_model.hpp"
#include "tanlars/glm_family.hpp"
#include "tanlars/glm_mle.hpp"
#include "tanlars/l1_baseline.hpp"
#include "tanlars/lars_engine.hpp"

namespace tanlars {

enum class CriterionBase { aic, bic };
enum class EvaluateAt { refit_mle, path_estimate };

/// AIC1/BIC1 score each candidate at the MLE refitted on its support;
/// AIC2/BIC2 score the path estimate itself.
struct CriterionKind {
  CriterionBase base = CriterionBase::aic;
  EvaluateAt evaluate_at = EvaluateAt::refit_mle;

  static constexpr CriterionKind aic1() { return {CriterionBase::aic, EvaluateAt::refit_mle}; }
  static constexpr CriterionKind aic2() { return {CriterionBase::aic, EvaluateAt::path_estimate}; }
  static constexpr CriterionKind bic1() { return {CriterionBase::bic, EvaluateAt::refit_mle}; }
  static constexpr CriterionKind bic2() { return {CriterionBase::bic, EvaluateAt::path_estimate}; }
  static constexpr std::array<CriterionKind, 4> all() { return {aic1(), aic2(), bic1(), bic2()}; }

  /// "aic1", "aic2", "bic1" or "bic2" (case-insensitive).
  static CriterionKind from_name(std::string_view name);
  std::string name() const;

  friend bool operator==(const CriterionKind&, const CriterionKind&) = default;
};

/// Indices with a nonzero coefficient, ascending.
std::vector<std::size_t> active_set(const Eigen::VectorXd& theta);

/// MLE of the submodel that fixes theta_j = 0 off `support`; zeros elsewhere.
Eigen::VectorXd refit_mle_on_support(const DesignMatrix& X, const ResponseVector& y, const GlmFamily& family,
                                     const std::vector<std::size_t>& support, const MleOptions& mle_opts = {});

/// AIC = -2 loglik + 2 d', BIC = -2 loglik + d' log n.
double criterion_value(double loglik, std::size_t d_prime, std::size_t n, CriterionBase base);

/// Everything a criterion needs about one estimate on a path.
struct Candidate {
  std::size_t path_index = 0;
  std::vector<std::size_t> support;
  Eigen::VectorXd theta_path;
  double loglik_path = 0.0;
  std::optional<Eigen::VectorXd> theta_refit;
  double loglik_refit = 0.0;
  std::string refit_error;  // nonempty when the refit failed
};

/// Candidates of one path. Refits are shared between identical supports.
struct CandidateSet {
  std::vector<Candidate> candidates;
  std::size_t n = 0;
};

CandidateSet build_candidates(const SolutionPath& path, const DesignMatrix& X, const ResponseVector& y,
                              const GlmFamily& family, bool with_refits, const MleOptions& mle_opts = {});
CandidateSet build_candidates(const L1Path& path, const DesignMatrix& X, const ResponseVector& y,
                              const GlmFamily& family, bool with_refits, const MleOptions& mle_opts = {});

struct SelectionResult {
  std::size_t chosen_index = 0;  // position on the path
  /// One entry per run of consecutive candidates sharing a support (the run's
  /// best value); candidate_indices gives the path position behind each.
  std::vector<double> criterion_values;
  std::vector<std::size_t> candidate_indices;
  std::vector<std::size_t> d_prime;
  Eigen::VectorXd theta_selected;  // the path estimate at chosen_index
  std::optional<Eigen::VectorXd> theta_refit;
  std::vector<std::size_t> skipped;  // path positions whose refit failed

  /// The estimate the criterion was evaluated at.
  const Eigen::VectorXd& estimate() const { return theta_refit ? *theta_refit : theta_selected; }
};

/// Minimizes the criterion; ties go to the smaller support, then the earlier
/// path position. Throws std::invalid_argument if no candidate is usable.
SelectionResult select(const CandidateSet& set, CriterionKind kind);

SelectionResult select(const SolutionPath& path, const DesignMatrix& X, const ResponseVector& y,
                       const GlmFamily& family, CriterionKind kind, const MleOptions& mle_opts = {});
SelectionResult select(const L1Path& path, const DesignMatrix& X, const ResponseVector& y,
                       const GlmFamily& family, CriterionKind kind, const MleOptions& mle_opts = {});

}  // namespace tanlars
