#include "tanlars/model_selection.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <stdexcept>

#include "tanlars/errors.hpp"

namespace tanlars {
namespace {

struct RefitCache {
  const DesignMatrix& X;
  const ResponseVector& y;
  const GlmFamily& family;
  const MleOptions& opts;
  std::map<std::vector<std::size_t>, Candidate> fits;

  void fill(Candidate& c) {
    auto it = fits.find(c.support);
    if (it == fits.end()) {
      Candidate fit;
      try {
        fit.theta_refit = refit_mle_on_support(X, y, family, c.support, opts);
        fit.loglik_refit = log_likelihood(family, X, y, *fit.theta_refit);
      } catch (const Error& e) {
        fit.refit_error = e.what();
      }
      it = fits.emplace(c.support, std::move(fit)).first;
    }
    c.theta_refit = it->second.theta_refit;
    c.loglik_refit = it->second.loglik_refit;
    c.refit_error = it->second.refit_error;
  }
};

CandidateSet build(const std::vector<const Eigen::VectorXd*>& thetas, const DesignMatrix& X,
                   const ResponseVector& y, const GlmFamily& family, bool with_refits, const MleOptions& opts) {
  CandidateSet set;
  set.n = X.n();
  RefitCache cache{X, y, family, opts, {}};
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    Candidate c;
    c.path_index = k;
    c.theta_path = *thetas[k];
    c.support = active_set(c.theta_path);
    c.loglik_path = log_likelihood(family, X, y, c.theta_path);
    if (with_refits) cache.fill(c);
    set.candidates.push_back(std::move(c));
  }
  return set;
}

}  // namespace

CriterionKind CriterionKind::from_name(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  for (CriterionKind k : all())
    if (k.name() == s) return k;
  throw std::invalid_argument("unknown criterion: " + std::string(name));
}

std::string CriterionKind::name() const {
  std::string s = base == CriterionBase::aic ? "aic" : "bic";
  return s + (evaluate_at == EvaluateAt::refit_mle ? "1" : "2");
}

std::vector<std::size_t> active_set(const Eigen::VectorXd& theta) {
  std::vector<std::size_t> out;
  for (Eigen::Index j = 0; j < theta.size(); ++j)
    if (theta(j) != 0.0) out.push_back(static_cast<std::size_t>(j));
  return out;
}

Eigen::VectorXd refit_mle_on_support(const DesignMatrix& X, const ResponseVector& y, const GlmFamily& family,
                                     const std::vector<std::size_t>& support, const MleOptions& mle_opts) {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(X.d()));
  if (support.empty()) return theta;
  check_response_domain(family, y);
  const DesignMatrix sub = X.select_columns(support);
  const MleResult fit = fit_mle(sub, y, family, mle_opts);
  for (std::size_t i = 0; i < support.size(); ++i)
    theta(static_cast<Eigen::Index>(support[i])) = fit.theta_hat(static_cast<Eigen::Index>(i));
  return theta;
}

double criterion_value(double loglik, std::size_t d_prime, std::size_t n, CriterionBase base) {
  const double dp = static_cast<double>(d_prime);
  const double penalty = base == CriterionBase::aic ? 2.0 * dp : dp * std::log(static_cast<double>(n));
  return -2.0 * loglik + penalty;
}

CandidateSet build_candidates(const SolutionPath& path, const DesignMatrix& X, const ResponseVector& y,
                              const GlmFamily& family, bool with_refits, const MleOptions& mle_opts) {
  std::vector<const Eigen::VectorXd*> thetas;
  for (const auto& bp : path.breakpoints) thetas.push_back(&bp.theta);
  return build(thetas, X, y, family, with_refits, mle_opts);
}

CandidateSet build_candidates(const L1Path& path, const DesignMatrix& X, const ResponseVector& y,
                              const GlmFamily& family, bool with_refits, const MleOptions& mle_opts) {
  std::vector<const Eigen::VectorXd*> thetas;
  for (const auto& t : path.thetas) thetas.push_back(&t);
  return build(thetas, X, y, family, with_refits, mle_opts);
}

SelectionResult select(const CandidateSet& set, CriterionKind kind) {
  const bool refit = kind.evaluate_at == EvaluateAt::refit_mle;
  SelectionResult out;

  // Best usable candidate of each run of consecutive identical supports.
  std::vector<const Candidate*> reps;
  std::vector<double> values;
  const std::vector<std::size_t>* run_support = nullptr;
  for (const Candidate& c : set.candidates) {
    if (refit && !c.theta_refit) {
      out.skipped.push_back(c.path_index);
      continue;
    }
    const double v = criterion_value(refit ? c.loglik_refit : c.loglik_path, c.support.size(), set.n, kind.base);
    if (run_support && *run_support == c.support) {
      if (v < values.back()) {
        values.back() = v;
        reps.back() = &c;
      }
      continue;
    }
    reps.push_back(&c);
    values.push_back(v);
    run_support = &c.support;
  }
  if (reps.empty()) throw std::invalid_argument("no usable candidate on the path");

  std::size_t best = 0;
  for (std::size_t i = 1; i < reps.size(); ++i) {
    const bool better = values[i] < values[best] ||
                        (values[i] == values[best] && reps[i]->support.size() < reps[best]->support.size());
    if (better) best = i;
  }
  for (std::size_t i = 0; i < reps.size(); ++i) {
    out.criterion_values.push_back(values[i]);
    out.candidate_indices.push_back(reps[i]->path_index);
    out.d_prime.push_back(reps[i]->support.size());
  }
  out.chosen_index = reps[best]->path_index;
  out.theta_selected = reps[best]->theta_path;
  if (refit) out.theta_refit = reps[best]->theta_refit;
  return out;
}

SelectionResult select(const SolutionPath& path, const DesignMatrix& X, const ResponseVector& y,
                       const GlmFamily& family, CriterionKind kind, const MleOptions& mle_opts) {
  if (path.breakpoints.empty()) throw std::invalid_argument("empty path");
  return select(build_candidates(path, X, y, family, kind.evaluate_at == EvaluateAt::refit_mle, mle_opts), kind);
}

SelectionResult select(const L1Path& path, const DesignMatrix& X, const ResponseVector& y,
                       const GlmFamily& family, CriterionKind kind, const MleOptions& mle_opts) {
  if (path.thetas.empty()) throw std::invalid_argument("empty path");
  return select(build_candidates(path, X, y, family, kind.evaluate_at == EvaluateAt::refit_mle, mle_opts), kind);
}

}  // namespace tanlars
