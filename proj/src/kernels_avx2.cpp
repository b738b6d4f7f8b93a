#include "kernels_impl.hpp"

#include <cmath>
#include <immintrin.h>

namespace rampc::kernels::detail {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

} // namespace

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum_sq_avx2(const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(a + i);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i] * a[i];
    return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d yv = _mm256_loadu_pd(y + i);
        yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
        _mm256_storeu_pd(y + i, yv);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void pivot_update_avx2(double* tab, std::size_t nrows, std::size_t ncols,
                       std::size_t stride, std::size_t row, std::size_t col,
                       double skip_tol) {
    double* piv = tab + row * stride;
    const double inv = 1.0 / piv[col];
    for (std::size_t i = 0; i < nrows; ++i) {
        if (i == row) continue;
        double* r = tab + i * stride;
        const double c = r[col];
        if (std::fabs(c) <= skip_tol) continue;
        const double f = c * inv;
        const __m256d fv = _mm256_set1_pd(f);
        std::size_t j = 0;
        for (; j + 4 <= ncols; j += 4) {
            __m256d rv = _mm256_loadu_pd(r + j);
            rv = _mm256_fnmadd_pd(fv, _mm256_loadu_pd(piv + j), rv);
            _mm256_storeu_pd(r + j, rv);
        }
        for (; j < ncols; ++j) r[j] -= f * piv[j];
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
