#include "kernels_impl.hpp"

#include <cmath>

namespace rampc::kernels::detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum_sq_scalar(const double* a, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
    return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void pivot_update_scalar(double* tab, std::size_t nrows, std::size_t ncols,
                         std::size_t stride, std::size_t row, std::size_t col,
                         double skip_tol) {
    double* piv = tab + row * stride;
    const double inv = 1.0 / piv[col];
    for (std::size_t i = 0; i < nrows; ++i) {
        if (i == row) continue;
        double* r = tab + i * stride;
        if (std::fabs(r[col]) <= skip_tol) continue;
        const double f = r[col] * inv;
        for (std::size_t j = 0; j < ncols; ++j) r[j] -= f * piv[j];
        // full-row update zeroed r[col]; restore it so the column rescale
        // below produces -old/pivot
        r[col] = f * piv[col];
    }
    for (std::size_t j = 0; j < ncols; ++j) {
        if (j != col) piv[j] *= inv;
    }
    for (std::size_t i = 0; i < nrows; ++i) {
        if (i != row) tab[i * stride + col] *= -inv;
    }
    piv[col] = inv;
}

} // namespace rampc::kernels::detail
