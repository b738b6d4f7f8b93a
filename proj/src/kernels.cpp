#include "rampc/kernels.hpp"

#include "kernels_impl.hpp"
#include "rampc/errors.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace rampc::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(RAMPC_HAVE_AVX2_SOURCES) && defined(__GNUC__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend pick_initial() {
    if (const char* env = std::getenv("RAMPC_SIMD")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
        if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return Backend::Avx2;
        // "auto" or anything else falls through to detection
    }
    return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend> g_backend{pick_initial()};

} // namespace

Backend active_backend() { return g_backend.load(std::memory_order_relaxed); }

void force_backend(Backend b) {
    if (b == Backend::Avx2 && !cpu_has_avx2()) {
        throw ConfigError("AVX2 backend requested but not supported on this CPU");
    }
    g_backend.store(b, std::memory_order_relaxed);
}

const char* backend_name(Backend b) {
    switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    }
    return "?";
}

double dot(const double* a, const double* b, std::size_t n) {
#if defined(RAMPC_HAVE_AVX2_SOURCES)
    if (active_backend() == Backend::Avx2) return detail::dot_avx2(a, b, n);
#endif
    return detail::dot_scalar(a, b, n);
}

double sum_sq(const double* a, std::size_t n) {
#if defined(RAMPC_HAVE_AVX2_SOURCES)
    if (active_backend() == Backend::Avx2) return detail::sum_sq_avx2(a, n);
#endif
    return detail::sum_sq_scalar(a, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
#if defined(RAMPC_HAVE_AVX2_SOURCES)
    if (active_backend() == Backend::Avx2) {
        detail::axpy_avx2(alpha, x, y, n);
        return;
    }
#endif
    detail::axpy_scalar(alpha, x, y, n);
}

void pivot_update(double* tab, std::size_t nrows, std::size_t ncols,
                  std::size_t stride, std::size_t row, std::size_t col,
                  double skip_tol) {
#if defined(RAMPC_HAVE_AVX2_SOURCES)
    if (active_backend() == Backend::Avx2) {
        detail::pivot_update_avx2(tab, nrows, ncols, stride, row, col, skip_tol);
        return;
    }
#endif
    detail::pivot_update_scalar(tab, nrows, ncols, stride, row, col, skip_tol);
}

} // namespace rampc::kernels
