#pragma once

#include <cstddef>

// Per-backend entry points. Signatures mirror rampc/kernels.hpp.

namespace rampc::kernels::detail {

double dot_scalar(const double* a, const double* b, std::size_t n);
double sum_sq_scalar(const double* a, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
void pivot_update_scalar(double* tab, std::size_t nrows, std::size_t ncols,
                         std::size_t stride, std::size_t row, std::size_t col,
                         double skip_tol);

#if defined(RAMPC_HAVE_AVX2_SOURCES)
double dot_avx2(const double* a, const double* b, std::size_t n);
double sum_sq_avx2(const double* a, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
void pivot_update_avx2(double* tab, std::size_t nrows, std::size_t ncols,
                       std::size_t stride, std::size_t row, std::size_t col,
                       double skip_tol);
#endif

} // namespace rampc::kernels::detail
