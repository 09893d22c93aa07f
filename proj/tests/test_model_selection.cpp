#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tanlars/glm_mle.hpp"
#include "tanlars/l1_baseline.hpp"
#include "tanlars/lars_engine.hpp"
#include "tanlars/model_selection.hpp"
#include "tanlars/tangent_methods.hpp"

using namespace tanlars;

namespace {

using Support = std::vector<std::size_t>;

struct Instance {
  DesignMatrix X;
  ResponseVector y;
};

Instance make(const char* family, std::uint64_t seed, int n, const Eigen::VectorXd& theta) {
  std::mt19937_64 rng(seed);
  DesignMatrix X = normalize_design(oracle::normal_matrix(rng, n, static_cast<int>(theta.size())));
  ResponseVector y(oracle::draw_response(family, X.values(), theta, rng), GlmFamily::from_name(family).domain());
  return {std::move(X), std::move(y)};
}

Eigen::VectorXd alternating(int d, int k, double signal) {
  Eigen::VectorXd t = Eigen::VectorXd::Zero(d);
  for (int j = 0; j < k; ++j) t(j) = j % 2 == 0 ? signal : -signal;
  return t;
}

Candidate candidate(std::size_t index, Support support, double loglik) {
  Candidate c;
  c.path_index = index;
  c.support = std::move(support);
  c.theta_path = Eigen::VectorXd::Zero(4);
  for (std::size_t j : c.support) c.theta_path(static_cast<Eigen::Index>(j)) = 1.0;
  c.loglik_path = loglik;
  c.theta_refit = c.theta_path;
  c.loglik_refit = loglik;
  return c;
}

}  // namespace

TEST_CASE("active set") {
  Eigen::VectorXd t(5);
  t << 0.0, 1.5, 0.0, -2.0, 0.0;
  CHECK(active_set(t) == Support{1, 3});
  CHECK(active_set(Eigen::VectorXd::Zero(3)).empty());
  CHECK(active_set(Eigen::VectorXd::Constant(3, 1e-300)) == Support{0, 1, 2});
}

TEST_CASE("criterion arithmetic") {
  CHECK(criterion_value(-10.0, 3, 50, CriterionBase::aic) == 26.0);
  CHECK(criterion_value(-10.0, 3, 7, CriterionBase::bic) == doctest::Approx(20.0 + 3.0 * std::log(7.0)));
  CHECK(criterion_value(-4.5, 0, 100, CriterionBase::aic) == 9.0);
  CHECK(criterion_value(-4.5, 0, 100, CriterionBase::bic) == 9.0);
  // log(7) < 2 < log(8).
  CHECK(criterion_value(0.0, 2, 7, CriterionBase::bic) < criterion_value(0.0, 2, 7, CriterionBase::aic));
  CHECK(criterion_value(0.0, 2, 8, CriterionBase::bic) > criterion_value(0.0, 2, 8, CriterionBase::aic));
}

TEST_CASE("criterion names") {
  for (CriterionKind k : CriterionKind::all()) CHECK(CriterionKind::from_name(k.name()) == k);
  CHECK(CriterionKind::from_name("BIC2") == CriterionKind::bic2());
  CHECK(CriterionKind::aic1().evaluate_at == EvaluateAt::refit_mle);
  CHECK(CriterionKind::bic2().evaluate_at == EvaluateAt::path_estimate);
  CHECK_THROWS_AS(CriterionKind::from_name("aic3"), std::invalid_argument);
}

TEST_CASE("refit on a support") {
  const Instance in = make("binomial", 200, 150, alternating(4, 2, 2.0));
  const GlmFamily f = GlmFamily::binomial();
  CHECK(refit_mle_on_support(in.X, in.y, f, {}).isZero(0.0));
  const Eigen::VectorXd full = refit_mle_on_support(in.X, in.y, f, {0, 1, 2, 3});
  CHECK((full - oracle::newton_mle("binomial", in.X.values(), in.y.values())).cwiseAbs().maxCoeff() <= 1e-7);

  const Eigen::VectorXd sub = refit_mle_on_support(in.X, in.y, f, {1, 3});
  CHECK(sub(0) == 0.0);
  CHECK(sub(2) == 0.0);
  Eigen::MatrixXd Xs(150, 2);
  Xs << in.X.values().col(1), in.X.values().col(3);
  const Eigen::VectorXd ref = oracle::newton_mle("binomial", Xs, in.y.values());
  CHECK(std::abs(sub(1) - ref(0)) <= 1e-7);
  CHECK(std::abs(sub(3) - ref(1)) <= 1e-7);

  // Gaussian single column: the coefficient is the unit-norm column's inner product.
  const Instance g = make("gaussian", 201, 40, alternating(3, 1, 2.0));
  const Eigen::VectorXd one = refit_mle_on_support(g.X, g.y, GlmFamily::gaussian(), {0});
  CHECK(one(0) == doctest::Approx(g.X.values().col(0).dot(g.y.values())).epsilon(1e-12));
}

TEST_CASE("ties go to the smaller support, then the earlier position") {
  CandidateSet set;
  set.n = 100;
  // AIC values: 24, 24, 26, 24.
  set.candidates.push_back(candidate(0, {0, 1}, -10.0));
  set.candidates.push_back(candidate(1, {0}, -11.0));
  set.candidates.push_back(candidate(2, {0, 1, 2}, -10.0));
  set.candidates.push_back(candidate(3, {2}, -11.0));
  const SelectionResult r = select(set, CriterionKind::aic1());
  CHECK(r.chosen_index == 1);
  CHECK(r.criterion_values == std::vector<double>{24.0, 24.0, 26.0, 24.0});
  CHECK(r.d_prime == Support{2, 1, 3, 1});
  CHECK(r.skipped.empty());
  REQUIRE(r.theta_refit);
  CHECK(r.estimate() == *r.theta_refit);
}

TEST_CASE("consecutive identical supports count once") {
  CandidateSet set;
  set.n = 100;
  set.candidates.push_back(candidate(0, {}, -20.0));
  set.candidates.push_back(candidate(1, {0}, -15.0));
  set.candidates.push_back(candidate(2, {0}, -12.0));
  set.candidates.push_back(candidate(3, {0}, -13.0));
  set.candidates.push_back(candidate(4, {0, 1}, -11.5));
  const SelectionResult r = select(set, CriterionKind::aic2());
  CHECK(r.candidate_indices == Support{0, 2, 4});
  CHECK(r.criterion_values == std::vector<double>{40.0, 26.0, 27.0});
  CHECK(r.chosen_index == 2);
  CHECK_FALSE(r.theta_refit);
}

TEST_CASE("failed refits are skipped") {
  CandidateSet set;
  set.n = 50;
  set.candidates.push_back(candidate(0, {}, -30.0));
  Candidate broken = candidate(1, {0}, -1.0);
  broken.theta_refit.reset();
  broken.refit_error = "separation";
  set.candidates.push_back(broken);
  const SelectionResult r1 = select(set, CriterionKind::bic1());
  CHECK(r1.skipped == Support{1});
  CHECK(r1.chosen_index == 0);
  // The path estimate is still usable.
  CHECK(select(set, CriterionKind::bic2()).chosen_index == 1);

  set.candidates.erase(set.candidates.begin());
  CHECK_THROWS_AS(select(set, CriterionKind::aic1()), std::invalid_argument);
}

TEST_CASE("single breakpoint path") {
  const Instance in = make("binomial", 202, 30, alternating(3, 1, 1.0));
  SolutionPath p;
  LarsState s;
  s.theta = Eigen::VectorXd::Zero(3);
  p.breakpoints.push_back(s);
  p.terminal_theta = s.theta;
  for (CriterionKind k : CriterionKind::all()) {
    const SelectionResult r = select(p, in.X, in.y, GlmFamily::binomial(), k);
    CHECK(r.chosen_index == 0);
    CHECK(r.estimate().isZero(0.0));
  }
  CHECK_THROWS_AS(select(SolutionPath{}, in.X, in.y, GlmFamily::binomial(), CriterionKind::aic1()),
                  std::invalid_argument);
}

TEST_CASE("selection minimizes the criterion evaluated independently") {
  for (const char* family : {"gaussian", "binomial", "poisson"}) {
    const double signal = family[0] == 'b' ? 3.0 : family[0] == 'p' ? 0.7 : 2.0;
    for (std::uint64_t seed = 210; seed < 215; ++seed) {
      const Instance in = make(family, seed, 120, alternating(6, 3, signal));
      const GlmFamily f = GlmFamily::from_name(family);
      const SolutionPath p = tlasso1(in.X, in.y, f);
      CAPTURE(family);
      CAPTURE(seed);
      for (CriterionKind k : CriterionKind::all()) {
        const bool refit = k.evaluate_at == EvaluateAt::refit_mle;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& bp : p.breakpoints) {
          const Support sup = active_set(bp.theta);
          Eigen::VectorXd est = bp.theta;
          if (refit && !sup.empty()) {
            Eigen::MatrixXd Xs(in.X.n(), static_cast<Eigen::Index>(sup.size()));
            for (std::size_t i = 0; i < sup.size(); ++i)
              Xs.col(static_cast<Eigen::Index>(i)) = in.X.values().col(static_cast<Eigen::Index>(sup[i]));
            const Eigen::VectorXd fit = oracle::newton_mle(family, Xs, in.y.values());
            est.setZero();
            for (std::size_t i = 0; i < sup.size(); ++i)
              est(static_cast<Eigen::Index>(sup[i])) = fit(static_cast<Eigen::Index>(i));
          } else if (refit) {
            est.setZero();
          }
          const double pen = k.base == CriterionBase::aic ? 2.0 : std::log(120.0);
          const double v =
              -2.0 * oracle::loglik(family, in.X.values(), in.y.values(), est) + pen * static_cast<double>(sup.size());
          best = std::min(best, v);
        }
        const SelectionResult r = select(p, in.X, in.y, f, k);
        const auto it = std::min_element(r.criterion_values.begin(), r.criterion_values.end());
        CHECK(*it == doctest::Approx(best).epsilon(1e-9));
        CHECK(r.chosen_index == r.candidate_indices[static_cast<std::size_t>(it - r.criterion_values.begin())]);
      }
    }
  }
}

TEST_CASE("a strong gaussian signal is recovered by BIC1") {
  Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(5);
  theta0 << 5.0, 5.0, 0.0, 0.0, 0.0;
  int hits = 0;
  for (std::uint64_t seed = 220; seed < 240; ++seed) {
    const Instance in = make("gaussian", seed, 200, theta0);
    const GlmFamily f = GlmFamily::gaussian();
    const SelectionResult r = select(tlars(in.X, in.y, f), in.X, in.y, f, CriterionKind::bic1());
    if (active_set(r.theta_selected) == Support{0, 1}) ++hits;
  }
  CHECK(hits >= 15);
}

TEST_CASE("BIC never selects a larger model than AIC") {
  for (std::uint64_t seed = 250; seed < 270; ++seed) {
    const Instance in = make("binomial", seed, 100, alternating(8, 4, 2.0));
    const GlmFamily f = GlmFamily::binomial();
    const CandidateSet set = build_candidates(tlasso1(in.X, in.y, f), in.X, in.y, f, true);
    CAPTURE(seed);
    CHECK(select(set, CriterionKind::bic1()).d_prime.size() == select(set, CriterionKind::aic1()).d_prime.size());
    CHECK(active_set(select(set, CriterionKind::bic1()).theta_selected).size() <=
          active_set(select(set, CriterionKind::aic1()).theta_selected).size());
    CHECK(active_set(select(set, CriterionKind::bic2()).theta_selected).size() <=
          active_set(select(set, CriterionKind::aic2()).theta_selected).size());
  }
}

TEST_CASE("refit and path evaluation can disagree") {
  // Path estimates are shrunk, so the refitted likelihood favours earlier stops.
  int differ = 0;
  for (std::uint64_t seed = 270; seed < 300 && differ == 0; ++seed) {
    const Instance in = make("binomial", seed, 100, alternating(8, 4, 2.0));
    const GlmFamily f = GlmFamily::binomial();
    const CandidateSet set = build_candidates(tlasso1(in.X, in.y, f), in.X, in.y, f, true);
    if (select(set, CriterionKind::aic1()).chosen_index != select(set, CriterionKind::aic2()).chosen_index) ++differ;
  }
  CHECK(differ > 0);
}

TEST_CASE("refit and path evaluation agree when the path estimates are already MLEs") {
  // Keep only the origin and the least squares endpoint of a gaussian LAR path.
  for (std::uint64_t seed = 300; seed < 305; ++seed) {
    const Instance in = make("gaussian", seed, 50, alternating(4, 2, 1.0));
    const GlmFamily f = GlmFamily::gaussian();
    const SolutionPath p = lars_path(in.X, in.y.values(), PathMode::lar);
    SolutionPath ends = p;
    ends.breakpoints = {p.breakpoints.front(), p.breakpoints.back()};
    const CandidateSet set = build_candidates(ends, in.X, in.y, f, true);
    for (const Candidate& c : set.candidates)
      CHECK((*c.theta_refit - c.theta_path).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(select(set, CriterionKind::aic1()).chosen_index == select(set, CriterionKind::aic2()).chosen_index);
    CHECK(select(set, CriterionKind::bic1()).chosen_index == select(set, CriterionKind::bic2()).chosen_index);
  }
}

TEST_CASE("refits are shared between identical supports") {
  const Instance in = make("binomial", 310, 120, alternating(5, 3, 2.0));
  const GlmFamily f = GlmFamily::binomial();
  const L1Path p = l1_glm_path(in.X, in.y, f, make_lambda_grid(in.X, in.y, f, 30));
  std::vector<Support> distinct;
  for (const auto& t : p.thetas)
    if (std::find(distinct.begin(), distinct.end(), active_set(t)) == distinct.end()) distinct.push_back(active_set(t));
  std::size_t nonempty = 0;
  for (const auto& s : distinct) nonempty += s.empty() ? 0 : 1;
  const auto before = mle_solver_invocations();
  const CandidateSet set = build_candidates(p, in.X, in.y, f, true);
  CHECK(mle_solver_invocations() - before == nonempty);
  CHECK(set.candidates.size() == p.size());
  const CandidateSet no_refit = build_candidates(p, in.X, in.y, f, false);
  for (const Candidate& c : no_refit.candidates) CHECK_FALSE(c.theta_refit);
}

TEST_CASE("separated supports are skipped without a ridge") {
  std::mt19937_64 rng(320);
  const DesignMatrix X = normalize_design(oracle::normal_matrix(rng, 40, 3));
  Eigen::VectorXd v(40);
  for (Eigen::Index i = 0; i < 40; ++i) v(i) = X.values()(i, 1) > 0.0 ? 1.0 : 0.0;
  const ResponseVector y(v, FamilyDomain::binary01);
  const GlmFamily f = GlmFamily::binomial();
  const SolutionPath p = tlasso2(X, y, f);
  MleOptions opts;
  opts.ridge = 0.0;
  const SelectionResult r = select(p, X, y, f, CriterionKind::aic1(), opts);
  CHECK_FALSE(r.skipped.empty());
  for (std::size_t k : r.skipped) CHECK(k != r.chosen_index);
  opts.ridge = 1e-3;
  CHECK(select(p, X, y, f, CriterionKind::aic1(), opts).skipped.empty());
}
