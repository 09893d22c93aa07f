#include "tanlars/glm_mle.hpp"

#include <atomic>
#include <cmath>
#include <string>
#include <vector>

#include "tanlars/errors.hpp"
#include "tanlars/kernels.hpp"

namespace tanlars {
namespace {

std::atomic<std::uint64_t> g_invocations{0};

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

struct Evaluation {
  double objective;  // penalized log-likelihood, to be maximized
  Eigen::VectorXd gradient;
  Eigen::VectorXd weights;
};

Evaluation evaluate(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GlmFamily& family,
                    const Eigen::VectorXd& theta, double ridge) {
  const auto n = static_cast<std::size_t>(X.rows());
  const auto d = static_cast<std::size_t>(X.cols());
  Eigen::VectorXd eta = linear_predictor(X, theta);
  Evaluation ev;
  ev.weights.resize(eta.size());
  Eigen::VectorXd resid(eta.size());
  double psi = 0.0;
  for (Eigen::Index a = 0; a < eta.size(); ++a) {
    psi += family.cumulant(eta(a));
    resid(a) = y(a) - family.inverse_link(eta(a));
    ev.weights(a) = family.inverse_link_derivative(eta(a));
  }
  ev.objective = kernels::dot(as_span(y), as_span(eta)) - psi - ridge * theta.squaredNorm();
  ev.gradient.resize(static_cast<Eigen::Index>(d));
  kernels::gemv_t(X.data(), n, d, as_span(resid), {ev.gradient.data(), d});
  ev.gradient -= 2.0 * ridge * theta;
  return ev;
}

Eigen::MatrixXd weighted_gram(const Eigen::MatrixXd& X, const Eigen::VectorXd& w) {
  const auto d = X.cols();
  const auto n = static_cast<std::size_t>(X.rows());
  Eigen::MatrixXd h(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i; j < d; ++j)
      h(i, j) = h(j, i) = kernels::weighted_dot(as_span(w), {X.col(i).data(), n}, {X.col(j).data(), n});
  return h;
}

// Newton on a separated sample moves a roughly constant distance per
// iteration along a fixed direction instead of converging quadratically.
bool drifting(const std::vector<Eigen::VectorXd>& moves) {
  constexpr std::size_t kWindow = 10;
  if (moves.size() <= kWindow) return false;
  const Eigen::VectorXd& last = moves.back();
  const Eigen::VectorXd& earlier = moves[moves.size() - 1 - kWindow];
  const double last_norm = last.norm();
  if (last_norm == 0.0 || last_norm < 0.5 * earlier.norm()) return false;
  for (std::size_t k = moves.size() - kWindow; k < moves.size(); ++k) {
    const Eigen::VectorXd& a = moves[k - 1];
    const Eigen::VectorXd& b = moves[k];
    if (a.dot(b) < 0.9 * a.norm() * b.norm()) return false;
  }
  return true;
}

enum class Outcome { converged, diverged, exhausted };

// Under complete separation the likelihood has no maximizer, yet the gradient
// can fall below tolerance at a finite point once every fitted probability is
// within rounding of its label.
bool fits_perfectly(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GlmFamily& family,
                    const Eigen::VectorXd& theta) {
  if (family.kind() != FamilyKind::binomial) return false;
  const Eigen::VectorXd eta = linear_predictor(X, theta);
  for (Eigen::Index a = 0; a < eta.size(); ++a)
    if (std::abs(y(a) - family.inverse_link(eta(a))) > 1e-6) return false;
  return true;
}

Outcome newton(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GlmFamily& family,
               const MleOptions& opts, double ridge, bool watch_divergence, MleResult& out) {
  const auto d = X.cols();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);
  Evaluation ev = evaluate(X, y, family, theta, ridge);
  std::vector<Eigen::VectorXd> moves;
  for (int it = 0; it < opts.max_iter; ++it) {
    out.iterations = it;
    out.final_gradient_norm = ev.gradient.lpNorm<Eigen::Infinity>();
    if (out.final_gradient_norm < opts.grad_tol) {
      out.theta_hat = theta;
      return Outcome::converged;
    }
    Eigen::MatrixXd hessian = weighted_gram(X, ev.weights);
    hessian.diagonal().array() += 2.0 * ridge;
    Eigen::LLT<Eigen::MatrixXd> llt(hessian);
    Eigen::VectorXd step;
    if (llt.info() == Eigen::Success) {
      step = llt.solve(ev.gradient);
    } else {
      // Weights underflowed; fall back to a gradient step scaled by the Gram.
      Eigen::LLT<Eigen::MatrixXd> base(X.transpose() * X);
      step = base.solve(ev.gradient);
    }

    // Step halving: accept the first trial that does not decrease the
    // objective beyond rounding.
    double t = 1.0;
    Evaluation trial;
    Eigen::VectorXd next;
    bool accepted = false;
    const double slack = 1e-13 * (1.0 + std::abs(ev.objective));
    for (int h = 0; h < 60; ++h, t *= 0.5) {
      next = theta + t * step;
      trial = evaluate(X, y, family, next, ridge);
      if (std::isfinite(trial.objective) && trial.objective >= ev.objective - slack) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No ascent direction left at double precision.
      out.theta_hat = theta;
      out.iterations = it + 1;
      return out.final_gradient_norm < opts.grad_tol ? Outcome::converged : Outcome::exhausted;
    }
    if (watch_divergence) moves.push_back(next - theta);
    theta = std::move(next);
    ev = std::move(trial);
    if (watch_divergence && theta.lpNorm<Eigen::Infinity>() > opts.divergence_bound) {
      out.theta_hat = theta;
      out.iterations = it + 1;
      return Outcome::diverged;
    }
  }
  out.iterations = opts.max_iter;
  out.final_gradient_norm = ev.gradient.lpNorm<Eigen::Infinity>();
  out.theta_hat = theta;
  if (out.final_gradient_norm < opts.grad_tol) return Outcome::converged;
  if (watch_divergence && drifting(moves)) return Outcome::diverged;
  return Outcome::exhausted;
}

}  // namespace

std::uint64_t mle_solver_invocations() { return g_invocations.load(); }

MleResult fit_mle(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GlmFamily& family,
                  const MleOptions& opts) {
  ++g_invocations;
  if (y.size() != X.rows()) throw std::invalid_argument("response length does not match design");
  MleResult result;
  if (X.cols() == 0) {
    result.theta_hat.resize(0);
    result.converged = true;
    return result;
  }

  const bool ridge_first = opts.ridge_mode == RidgeMode::always && opts.ridge > 0.0;
  if (family.kind() == FamilyKind::gaussian) {
    Eigen::MatrixXd g = X.transpose() * X;
    if (ridge_first) g.diagonal().array() += 2.0 * opts.ridge;
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success) throw NumericalBreakdown("normal equations are not positive definite");
    result.theta_hat = llt.solve(X.transpose() * y);
    result.ridge_used = ridge_first ? opts.ridge : 0.0;
    result.final_gradient_norm =
        (X.transpose() * (y - X * result.theta_hat) - 2.0 * result.ridge_used * result.theta_hat)
            .lpNorm<Eigen::Infinity>();
    result.converged = true;
    return result;
  }

  if (!ridge_first) {
    Outcome first = newton(X, y, family, opts, 0.0, true, result);
    if (first == Outcome::converged && fits_perfectly(X, y, family, result.theta_hat)) first = Outcome::diverged;
    if (first == Outcome::converged) {
      result.converged = true;
      return result;
    }
    if (first == Outcome::exhausted)
      throw NotConverged("likelihood maximization did not converge in " + std::to_string(opts.max_iter) +
                         " iterations (gradient " + std::to_string(result.final_gradient_norm) + ")");
    if (opts.ridge <= 0.0)
      throw Separation("coefficients diverged (||theta||_inf > " + std::to_string(opts.divergence_bound) +
                       "); the maximum likelihood estimate does not exist");
    result.separation_flag = true;
  }

  result.ridge_used = opts.ridge;
  const Outcome penalized = newton(X, y, family, opts, opts.ridge, false, result);
  if (penalized != Outcome::converged)
    throw NotConverged("ridge-stabilized likelihood maximization did not converge");
  result.converged = true;
  return result;
}

MleResult fit_mle(const DesignMatrix& X, const ResponseVector& y, const GlmFamily& family,
                  const MleOptions& opts) {
  check_response_domain(family, y);
  if (family.kind() == FamilyKind::gaussian && !(opts.ridge_mode == RidgeMode::always && opts.ridge > 0.0)) {
    ++g_invocations;
    MleResult result;
    result.theta_hat = solve_theta_tilde(X, y).value;
    result.final_gradient_norm = (X.values().transpose() * (y.values() - X.values() * result.theta_hat))
                                     .lpNorm<Eigen::Infinity>();
    result.converged = true;
    return result;
  }
  return fit_mle(X.values(), y.values(), family, opts);
}

ThetaTilde solve_theta_tilde(const DesignMatrix& X, const Eigen::VectorXd& y) {
  if (static_cast<std::size_t>(y.size()) != X.n()) throw std::invalid_argument("response length does not match design");
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(X.d()));
  kernels::gemv_t(X.values().data(), X.n(), X.d(), as_span(y), {rhs.data(), X.d()});
  Eigen::LLT<Eigen::MatrixXd> llt(X.gram());
  if (llt.info() != Eigen::Success) throw NumericalBreakdown("Gram matrix is not positive definite");
  return ThetaTilde{llt.solve(rhs)};
}

ThetaTilde solve_theta_tilde(const DesignMatrix& X, const ResponseVector& y) {
  return solve_theta_tilde(X, y.values());
}

double quadratic_loglik(const DesignMatrix& X, const GlmFamily& family, const ThetaTilde& theta_tilde,
                        const Eigen::VectorXd& theta) {
  const double a = family.alpha();
  const Eigen::MatrixXd& g = X.gram();
  const Eigen::VectorXd& tt = theta_tilde.value;
  const Eigen::VectorXd diff = theta - a * tt;
  const double psi0 = static_cast<double>(X.n()) * family.cumulant(0.0);
  return -diff.dot(g * diff) / (2.0 * a) + 0.5 * a * tt.dot(g * tt) - psi0;
}

}  // namespace tanlars
