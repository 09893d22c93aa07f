#pragma once

// Dense double-precision kernels used by the inner loops of the solvers.
//
// Every kernel has a portable scalar reference implementation. On x86-64 an
// AVX2/FMA variant is compiled into a separate translation unit and selected
// at first use when the CPU supports it. The environment variable
// TANLARS_KERNELS=scalar forces the reference path.
//
// Matrices are column-major with leading dimension equal to the row count,
// matching Eigen::MatrixXd.

#include <cstddef>
#include <span>
#include <string_view>

namespace tanlars::kernels {

enum class Backend { scalar, avx2 };

std::string_view backend_name(Backend backend);
bool backend_available(Backend backend);

Backend active_backend();
/// Overrides the dispatch choice for the whole process. Throws
/// std::invalid_argument if the backend is not available on this CPU.
void set_backend(Backend backend);

double dot(std::span<const double> a, std::span<const double> b);
/// sum_i w[i] * a[i] * b[i]
double weighted_dot(std::span<const double> w, std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// out = X * v, X is rows x cols.
void gemv(const double* X, std::size_t rows, std::size_t cols, std::span<const double> v,
          std::span<double> out);
/// out = X^T * v, X is rows x cols.
void gemv_t(const double* X, std::size_t rows, std::size_t cols, std::span<const double> v,
            std::span<double> out);

// Per-backend tables. Tests call these directly to check equivalence.
struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  double (*weighted_dot)(const double*, const double*, const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
};

const KernelTable& scalar_table();
/// nullptr when the AVX2 variant was not compiled in.
const KernelTable* avx2_table();

}  // namespace tanlars::kernels
