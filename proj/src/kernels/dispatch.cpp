#include <atomic>
#include <cassert>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "tanlars/kernels.hpp"

namespace tanlars::kernels {

#ifdef TANLARS_HAVE_AVX2_KERNELS
const KernelTable* avx2_table_impl();
const KernelTable* avx2_table() { return avx2_table_impl(); }
#else
const KernelTable* avx2_table() { return nullptr; }
#endif

namespace {

bool cpu_has_avx2() {
#if defined(TANLARS_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend detect() {
  if (const char* env = std::getenv("TANLARS_KERNELS")) {
    if (std::string(env) == "scalar") return Backend::scalar;
  }
  return cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> backend{detect()};
  return backend;
}

const KernelTable& table() {
  return current().load(std::memory_order_relaxed) == Backend::avx2 ? *avx2_table()
                                                                    : scalar_table();
}

}  // namespace

std::string_view backend_name(Backend backend) {
  return backend == Backend::avx2 ? "avx2" : "scalar";
}

bool backend_available(Backend backend) {
  return backend == Backend::scalar || (avx2_table() != nullptr && cpu_has_avx2());
}

Backend active_backend() { return current().load(); }

void set_backend(Backend backend) {
  if (!backend_available(backend))
    throw std::invalid_argument("kernel backend not available: " + std::string(backend_name(backend)));
  current().store(backend);
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return table().dot(a.data(), b.data(), a.size());
}

double weighted_dot(std::span<const double> w, std::span<const double> a, std::span<const double> b) {
  assert(w.size() == a.size() && a.size() == b.size());
  return table().weighted_dot(w.data(), a.data(), b.data(), a.size());
}

double sum(std::span<const double> a) { return table().sum(a.data(), a.size()); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  table().axpy(alpha, x.data(), y.data(), x.size());
}

void gemv(const double* X, std::size_t rows, std::size_t cols, std::span<const double> v,
          std::span<double> out) {
  assert(v.size() == cols && out.size() == rows);
  const KernelTable& t = table();
  for (std::size_t i = 0; i < rows; ++i) out[i] = 0.0;
  for (std::size_t j = 0; j < cols; ++j) {
    if (v[j] != 0.0) t.axpy(v[j], X + j * rows, out.data(), rows);
  }
}

void gemv_t(const double* X, std::size_t rows, std::size_t cols, std::span<const double> v,
            std::span<double> out) {
  assert(v.size() == rows && out.size() == cols);
  const KernelTable& t = table();
  for (std::size_t j = 0; j < cols; ++j) out[j] = t.dot(X + j * rows, v.data(), rows);
}

}  // namespace tanlars::kernels
