#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "tanlars/data_model.hpp"
#include "tanlars/kernels.hpp"
#include "tanlars/lars_engine.hpp"

namespace k = tanlars::kernels;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> N(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = N(rng);
  return v;
}

double naive_dot(const std::vector<double>& a, const std::vector<double>& b) {
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
  return static_cast<double>(s);
}

// Restores the dispatch choice when a test forces a backend.
struct BackendGuard {
  k::Backend saved = k::active_backend();
  ~BackendGuard() { k::set_backend(saved); }
};

}  // namespace

TEST_CASE("scalar kernels match long double references") {
  std::mt19937_64 rng(1);
  const auto& t = k::scalar_table();
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 15u, 16u, 33u, 100u, 1001u}) {
    const auto a = random_vector(rng, n), b = random_vector(rng, n), w = random_vector(rng, n);
    std::vector<double> ab(n);
    for (std::size_t i = 0; i < n; ++i) ab[i] = a[i] * w[i];
    const double scale = 1.0 + std::sqrt(static_cast<double>(n));
    CHECK(std::abs(t.dot(a.data(), b.data(), n) - naive_dot(a, b)) <= 1e-13 * scale);
    CHECK(std::abs(t.weighted_dot(w.data(), a.data(), b.data(), n) - naive_dot(ab, b)) <= 1e-13 * scale);
    std::vector<double> ones(n, 1.0);
    CHECK(std::abs(t.sum(a.data(), n) - naive_dot(a, ones)) <= 1e-13 * scale);
  }
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
  const k::KernelTable* avx = k::avx2_table();
  if (avx == nullptr || !k::backend_available(k::Backend::avx2)) {
    MESSAGE("avx2 variant not available on this machine");
    return;
  }
  std::mt19937_64 rng(2);
  const auto& ref = k::scalar_table();
  for (std::size_t n = 0; n < 70; ++n) {
    const auto a = random_vector(rng, n), b = random_vector(rng, n), w = random_vector(rng, n);
    const double scale = 1.0 + std::sqrt(static_cast<double>(n));
    CHECK(std::abs(avx->dot(a.data(), b.data(), n) - ref.dot(a.data(), b.data(), n)) <= 1e-13 * scale);
    CHECK(std::abs(avx->weighted_dot(w.data(), a.data(), b.data(), n) -
                   ref.weighted_dot(w.data(), a.data(), b.data(), n)) <= 1e-13 * scale);
    CHECK(std::abs(avx->sum(a.data(), n) - ref.sum(a.data(), n)) <= 1e-13 * scale);

    std::vector<double> y1 = b, y2 = b;
    avx->axpy(0.37, a.data(), y1.data(), n);
    ref.axpy(0.37, a.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-15));
  }
}

TEST_CASE("gemv and gemv_t match Eigen on every backend") {
  BackendGuard guard;
  std::mt19937_64 rng(3);
  for (auto backend : {k::Backend::scalar, k::Backend::avx2}) {
    if (!k::backend_available(backend)) continue;
    k::set_backend(backend);
    CAPTURE(k::backend_name(backend));
    for (int rows : {1, 5, 17, 64}) {
      for (int cols : {1, 3, 9}) {
        const Eigen::MatrixXd M = oracle::normal_matrix(rng, rows, cols);
        const Eigen::VectorXd v = oracle::normal_matrix(rng, cols, 1).col(0);
        const Eigen::VectorXd u = oracle::normal_matrix(rng, rows, 1).col(0);
        Eigen::VectorXd out(rows), out_t(cols);
        k::gemv(M.data(), rows, cols, {v.data(), static_cast<std::size_t>(cols)},
                {out.data(), static_cast<std::size_t>(rows)});
        k::gemv_t(M.data(), rows, cols, {u.data(), static_cast<std::size_t>(rows)},
                  {out_t.data(), static_cast<std::size_t>(cols)});
        CHECK((out - M * v).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((out_t - M.transpose() * u).cwiseAbs().maxCoeff() <= 1e-12);
      }
    }
  }
}

TEST_CASE("forcing an unavailable backend is rejected") {
  if (k::backend_available(k::Backend::avx2)) return;
  CHECK_THROWS_AS(k::set_backend(k::Backend::avx2), std::invalid_argument);
}

TEST_CASE("least angle paths do not depend on the kernel backend") {
  if (!k::backend_available(k::Backend::avx2)) return;
  BackendGuard guard;
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd raw = oracle::normal_matrix(rng, 120, 10);
  const Eigen::VectorXd y = oracle::normal_matrix(rng, 120, 1).col(0);

  k::set_backend(k::Backend::scalar);
  const auto X1 = tanlars::normalize_design(raw);
  const auto p1 = tanlars::lars_path(X1, y, tanlars::PathMode::lasso);
  k::set_backend(k::Backend::avx2);
  const auto X2 = tanlars::normalize_design(raw);
  const auto p2 = tanlars::lars_path(X2, y, tanlars::PathMode::lasso);

  REQUIRE(p1.size() == p2.size());
  for (std::size_t i = 0; i < p1.size(); ++i)
    CHECK((p1.breakpoints[i].theta - p2.breakpoints[i].theta).cwiseAbs().maxCoeff() <= 1e-11);
}
