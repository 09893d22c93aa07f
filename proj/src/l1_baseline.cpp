#include "tanlars/l1_baseline.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

#include "tanlars/kernels.hpp"

namespace tanlars {
namespace {

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}
std::span<double> as_mut_span(Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

Eigen::VectorXd score(const DesignMatrix& X, const Eigen::VectorXd& y, const GlmFamily& family,
                      const Eigen::VectorXd& theta) {
  Eigen::VectorXd resid = y - mean_response(family, X.values(), theta);
  Eigen::VectorXd g(static_cast<Eigen::Index>(X.d()));
  kernels::gemv_t(X.values().data(), X.n(), X.d(), as_span(resid), as_mut_span(g));
  return g;
}

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

// One reweighting: minimize the local quadratic model plus the penalty,
// starting from and centred at theta. Returns the model minimizer.
Eigen::VectorXd solve_local_model(const DesignMatrix& X, const Eigen::VectorXd& y, const GlmFamily& family,
                                  const Eigen::VectorXd& theta, double lambda, const L1Options& opts) {
  const auto n = static_cast<Eigen::Index>(X.n());
  const auto d = static_cast<Eigen::Index>(X.d());
  const std::size_t nn = X.n();
  const Eigen::MatrixXd& V = X.values();

  const Eigen::VectorXd eta = linear_predictor(V, theta);
  Eigen::VectorXd w(n);
  Eigen::VectorXd s(n);  // (y - mu) - W X (beta - theta)
  for (Eigen::Index a = 0; a < n; ++a) {
    w(a) = std::max(family.inverse_link_derivative(eta(a)), 1e-12);
    s(a) = y(a) - family.inverse_link(eta(a));
  }
  Eigen::MatrixXd WX = w.asDiagonal() * V;
  Eigen::VectorXd curvature(d);
  for (Eigen::Index j = 0; j < d; ++j) curvature(j) = kernels::dot({V.col(j).data(), nn}, {WX.col(j).data(), nn});

  Eigen::VectorXd beta = theta;
  auto update = [&](Eigen::Index j) {
    const double hj = curvature(j);
    const double z = hj * beta(j) + kernels::dot({V.col(j).data(), nn}, as_span(s));
    const double next = soft_threshold(z, lambda) / hj;
    const double delta = next - beta(j);
    if (delta != 0.0) {
      kernels::axpy(-delta, {WX.col(j).data(), nn}, as_mut_span(s));
      beta(j) = next;
    }
    return std::abs(delta) * std::sqrt(hj);
  };

  int sweeps = 0;
  while (sweeps < opts.max_inner_sweeps) {
    double change = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) change = std::max(change, update(j));
    ++sweeps;
    if (change < opts.inner_tol) break;
    // Cycle over the current support until it settles, then re-check everything.
    while (sweeps < opts.max_inner_sweeps) {
      double c = 0.0;
      for (Eigen::Index j = 0; j < d; ++j)
        if (beta(j) != 0.0) c = std::max(c, update(j));
      ++sweeps;
      if (c < opts.inner_tol) break;
    }
  }
  return beta;
}

}  // namespace

LambdaGrid make_lambda_grid(const DesignMatrix& X, const ResponseVector& y, const GlmFamily& family,
                            std::size_t count, double ratio) {
  if (count == 0) throw std::invalid_argument("lambda grid needs at least one point");
  if (!(ratio > 0.0 && ratio < 1.0) && count > 1) throw std::invalid_argument("lambda ratio must lie in (0, 1)");
  LambdaGrid grid;
  grid.count = count;
  grid.ratio = ratio;
  grid.lambda_max = score(X, y.values(), family, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(X.d())))
                        .lpNorm<Eigen::Infinity>();
  grid.values.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double t = count == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(count - 1);
    grid.values[k] = grid.lambda_max * std::pow(ratio, t);
  }
  return grid;
}

double l1_objective(const DesignMatrix& X, const ResponseVector& y, const GlmFamily& family,
                    const Eigen::VectorXd& theta, double lambda) {
  return -log_likelihood(family, X, y, theta) + lambda * theta.lpNorm<1>();
}

double kkt_residual(const DesignMatrix& X, const ResponseVector& y, const GlmFamily& family,
                    const Eigen::VectorXd& theta, double lambda) {
  const Eigen::VectorXd g = score(X, y.values(), family, theta);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    const double v = theta(j) != 0.0 ? std::abs(g(j) - lambda * (theta(j) > 0 ? 1.0 : -1.0))
                                     : std::max(0.0, std::abs(g(j)) - lambda);
    worst = std::max(worst, v);
  }
  return worst;
}

L1Path l1_glm_path(const DesignMatrix& X, const ResponseVector& y, const GlmFamily& family,
                   const LambdaGrid& grid, const L1Options& opts) {
  check_response_domain(family, y);
  L1Path path;
  path.family = std::string(family.name());
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(X.d()));

  for (double lambda : grid.values) {
    double objective = l1_objective(X, y, family, theta, lambda);
    bool converged = false;
    int outer = 0;
    for (; outer < opts.max_outer && !converged; ++outer) {
      const Eigen::VectorXd target = solve_local_model(X, y.values(), family, theta, lambda, opts);
      const Eigen::VectorXd step = target - theta;
      if (step.lpNorm<Eigen::Infinity>() < opts.outer_tol) {
        theta = target;
        converged = true;
        break;
      }
      double t = 1.0;
      Eigen::VectorXd next;
      double next_objective = objective;
      const double slack = 1e-13 * (1.0 + std::abs(objective));
      bool accepted = false;
      for (int h = 0; h < 50; ++h, t *= 0.5) {
        next = theta + t * step;
        next_objective = l1_objective(X, y, family, next, lambda);
        if (std::isfinite(next_objective) && next_objective <= objective + slack) {
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
      assert(next_objective <= objective + slack);
      const double moved = (next - theta).lpNorm<Eigen::Infinity>();
      theta = std::move(next);
      objective = next_objective;
      if (moved < opts.outer_tol) converged = true;
    }
    path.lambdas.push_back(lambda);
    path.thetas.push_back(theta);
    path.kkt.push_back(kkt_residual(X, y, family, theta, lambda));
    path.converged.push_back(converged);
    path.outer_iterations.push_back(outer);
  }
  return path;
}

}  // namespace tanlars
