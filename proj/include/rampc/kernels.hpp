#pragma once

#include <cstddef>

// Double-precision inner loops shared by the solvers and the simulation
// harness. Every kernel has a scalar reference implementation and, on
// x86-64, an AVX2+FMA variant. The variant is picked once at startup from
// CPUID; tests and benchmarks can pin a backend explicitly or through the
// RAMPC_SIMD environment variable (values: "scalar", "avx2", "auto").

namespace rampc::kernels {

enum class Backend { Scalar, Avx2 };

/// Backend currently in use.
Backend active_backend();

/// Pin the backend. Throws ConfigError if the CPU lacks the requested ISA.
void force_backend(Backend b);

const char* backend_name(Backend b);

/// Sum of a[i] * b[i].
double dot(const double* a, const double* b, std::size_t n);

/// Sum of a[i]^2.
double sum_sq(const double* a, std::size_t n);

/// y[i] += alpha * x[i].
void axpy(double alpha, const double* x, double* y, std::size_t n);

/// One dictionary pivot on a row-major tableau of nrows x ncols entries
/// (row i starts at tab[i * stride]). Eliminates column `col` from every
/// row except `row`, then rescales the pivot row and column so the tableau
/// expresses the basis after the entering/leaving swap. Rows whose column
/// entry has magnitude <= skip_tol are left untouched.
void pivot_update(double* tab, std::size_t nrows, std::size_t ncols,
                  std::size_t stride, std::size_t row, std::size_t col,
                  double skip_tol);

} // namespace rampc::kernels
