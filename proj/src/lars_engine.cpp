#include "tanlars/lars_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tanlars/errors.hpp"
#include "tanlars/kernels.hpp"

namespace tanlars {
namespace {

constexpr double kTieTolerance = 1e-12;

int sign_of(double v) { return v < 0.0 ? -1 : 1; }

}  // namespace

std::string_view path_mode_name(PathMode mode) { return mode == PathMode::lar ? "lar" : "lasso"; }

Equiangular equiangular(const Eigen::MatrixXd& signed_gram) {
  const auto k = signed_gram.rows();
  Eigen::LLT<Eigen::MatrixXd> llt(signed_gram);
  if (llt.info() != Eigen::Success) throw NumericalBreakdown("active Gram block is not positive definite");
  Eigen::VectorXd u = llt.solve(Eigen::VectorXd::Ones(k));
  const double q = u.sum();
  if (!(q > 0.0) || !std::isfinite(q)) throw NumericalBreakdown("degenerate equiangular direction");
  const double A = 1.0 / std::sqrt(q);
  return Equiangular{A, A * u};
}

StepLength step_length(double C, double A, const Eigen::VectorXd& c, const Eigen::VectorXd& a,
                       const std::vector<std::size_t>& inactive) {
  StepLength out{C / A, {}};
  if (inactive.empty()) return out;

  double best = std::numeric_limits<double>::infinity();
  std::vector<std::pair<std::size_t, double>> candidates;
  for (std::size_t j : inactive) {
    const auto jj = static_cast<Eigen::Index>(j);
    double g = std::numeric_limits<double>::infinity();
    const double minus = (C - c(jj)) / (A - a(jj));
    const double plus = (C + c(jj)) / (A + a(jj));
    if (minus > 0.0) g = std::min(g, minus);
    if (plus > 0.0) g = std::min(g, plus);
    candidates.emplace_back(j, g);
    best = std::min(best, g);
  }
  // Past C/A every correlation would have changed sign; that point ends the path.
  if (!(best < C / A)) return out;
  out.gamma = best;
  for (auto [j, g] : candidates)
    if (g - best <= kTieTolerance * (1.0 + best)) out.entering.push_back(j);
  return out;
}

std::optional<Drop> lasso_drop(const Eigen::VectorXd& theta_active, const Eigen::VectorXd& direction_active,
                               double gamma_hat) {
  std::optional<Drop> best;
  for (Eigen::Index i = 0; i < theta_active.size(); ++i) {
    if (theta_active(i) == 0.0 || direction_active(i) == 0.0) continue;
    const double g = -theta_active(i) / direction_active(i);
    if (g > 0.0 && g < gamma_hat && (!best || g < best->gamma))
      best = Drop{g, static_cast<std::size_t>(i)};
  }
  return best;
}

SolutionPath lars_path(const DesignMatrix& X, const Eigen::VectorXd& response, PathMode mode) {
  if (static_cast<std::size_t>(response.size()) != X.n())
    throw std::invalid_argument("response length does not match design");
  if (!response.allFinite()) throw std::invalid_argument("response is not finite");
  Eigen::VectorXd c0(static_cast<Eigen::Index>(X.d()));
  kernels::gemv_t(X.values().data(), X.n(), X.d(), {response.data(), X.n()}, {c0.data(), X.d()});
  return lars_path_from_correlations(X, c0, mode);
}

SolutionPath lars_path_from_correlations(const DesignMatrix& X, const Eigen::VectorXd& c0, PathMode mode) {
  const std::size_t d = X.d();
  const Eigen::MatrixXd& gram = X.gram();

  SolutionPath path;
  path.mode = mode;

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  Eigen::VectorXd c = c0;
  double C = c.cwiseAbs().maxCoeff();

  LarsState state;
  state.k = 0;
  state.theta = theta;
  state.residual_corr = c;
  state.max_corr = C;

  if (!(C > 1e-14 * std::max(1.0, c0.norm())) || C == 0.0) {
    state.max_corr = 0.0;
    path.breakpoints.push_back(std::move(state));
    path.terminal_theta = theta;
    return path;
  }

  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < d; ++j)
    if (std::abs(c(static_cast<Eigen::Index>(j))) >= C - kTieTolerance * (1.0 + C)) active.push_back(j);

  std::optional<std::size_t> just_dropped;
  const std::size_t max_steps = 50 * std::max<std::size_t>(d, 10);

  for (std::size_t step = 0;; ++step) {
    if (step > max_steps) throw NumericalBreakdown("lasso path did not terminate");
    const auto m = static_cast<Eigen::Index>(active.size());

    std::vector<int> signs(active.size());
    for (std::size_t i = 0; i < active.size(); ++i) signs[i] = sign_of(c(static_cast<Eigen::Index>(active[i])));

    Eigen::MatrixXd g(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j)
        g(i, j) = signs[i] * signs[j] * gram(static_cast<Eigen::Index>(active[i]), static_cast<Eigen::Index>(active[j]));
    const Equiangular eq = equiangular(g);

    Eigen::VectorXd direction = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    Eigen::VectorXd dir_active(m);
    Eigen::VectorXd theta_active(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto j = static_cast<Eigen::Index>(active[static_cast<std::size_t>(i)]);
      dir_active(i) = signs[static_cast<std::size_t>(i)] * eq.w(i);
      direction(j) = dir_active(i);
      theta_active(i) = theta(j);
    }
    Eigen::VectorXd a = gram * direction;

    std::vector<std::size_t> inactive;
    for (std::size_t j = 0; j < d; ++j) {
      if (std::find(active.begin(), active.end(), j) != active.end()) continue;
      if (just_dropped && *just_dropped == j) continue;
      inactive.push_back(j);
    }
    StepLength sl = step_length(C, eq.A, c, a, inactive);
    if (just_dropped) {
      // The dropped index sits at |c_j| = C, so its same-sign crossing is the
      // trivial gamma = 0. It can only come back with the opposite sign.
      const auto jj = static_cast<Eigen::Index>(*just_dropped);
      const double s = c(jj) < 0.0 ? -1.0 : 1.0;
      const double g = (C + s * c(jj)) / (eq.A + s * a(jj));
      const double cap = sl.entering.empty() ? sl.gamma : std::numeric_limits<double>::infinity();
      if (g > 0.0 && g < C / eq.A && g < cap) {
        if (!sl.entering.empty() && std::abs(g - sl.gamma) <= kTieTolerance * (1.0 + g)) {
          sl.entering.push_back(*just_dropped);
        } else if (sl.entering.empty() || g < sl.gamma) {
          sl.gamma = g;
          sl.entering.assign(1, *just_dropped);
        }
      }
    }

    std::optional<Drop> drop;
    if (mode == PathMode::lasso) {
      drop = lasso_drop(theta_active, dir_active, sl.gamma);
      if (drop) {
        sl.gamma = drop->gamma;
        sl.entering.clear();
      }
    }
    const bool terminal = !drop && sl.entering.empty();

    state.active = active;
    state.signs = signs;
    state.A = eq.A;
    state.w = eq.w;
    state.a = a;
    state.direction = direction;
    state.gamma = sl.gamma;
    path.breakpoints.push_back(std::move(state));

    theta += sl.gamma * direction;
    just_dropped.reset();
    if (drop) {
      const std::size_t j = active[drop->position];
      theta(static_cast<Eigen::Index>(j)) = 0.0;
      active.erase(active.begin() + static_cast<std::ptrdiff_t>(drop->position));
      just_dropped = j;
    }
    for (std::size_t j : sl.entering) active.push_back(j);
    c = c0 - gram * theta;
    C = terminal ? 0.0 : C - sl.gamma * eq.A;

    state = LarsState{};
    state.k = step + 1;
    state.theta = theta;
    state.residual_corr = c;
    state.max_corr = C;
    state.dropped = drop ? std::optional<std::size_t>(just_dropped) : std::nullopt;

    if (terminal) {
      state.active = active;
      for (std::size_t j : active) state.signs.push_back(sign_of(theta(static_cast<Eigen::Index>(j))));
      path.breakpoints.push_back(std::move(state));
      break;
    }
    if (active.empty()) throw NumericalBreakdown("active set emptied");
  }
  path.terminal_theta = path.breakpoints.back().theta;
  return path;
}

Eigen::VectorXd SolutionPath::coefficients_at(double lambda) const {
  if (breakpoints.empty()) return {};
  if (lambda >= breakpoints.front().lambda()) return breakpoints.front().theta;
  for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
    const double hi = breakpoints[k].lambda();
    const double lo = breakpoints[k + 1].lambda();
    if (lambda <= hi && lambda >= lo) {
      const double t = hi > lo ? (hi - lambda) / (hi - lo) : 1.0;
      return breakpoints[k].theta + t * (breakpoints[k + 1].theta - breakpoints[k].theta);
    }
  }
  return breakpoints.back().theta;
}

}  // namespace tanlars
