#include "noonsim/kernels.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace noonsim::kernels {

namespace {
// Below this many output rows the fork/join overhead dominates.
constexpr std::size_t kParallelRowThreshold = 64;
} // namespace

void gemm_serial(const complexd* a, const complexd* b, complexd* c,
                 std::size_t n, std::size_t k, std::size_t m) {
    for (std::size_t i = 0; i < n; ++i) {
        complexd* ci = c + i * m;
        for (std::size_t j = 0; j < m; ++j) ci[j] = complexd(0.0, 0.0);
        for (std::size_t p = 0; p < k; ++p) {
            const complexd aip = a[i * k + p];
            if (aip == complexd(0.0, 0.0)) continue;
            const complexd* bp = b + p * m;
            for (std::size_t j = 0; j < m; ++j) ci[j] += aip * bp[j];
        }
    }
}

void gemm_parallel(const complexd* a, const complexd* b, complexd* c,
                   std::size_t n, std::size_t k, std::size_t m) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        complexd* ci = c + i * m;
        for (std::size_t j = 0; j < m; ++j) ci[j] = complexd(0.0, 0.0);
        for (std::size_t p = 0; p < k; ++p) {
            const complexd aip = a[i * k + p];
            if (aip == complexd(0.0, 0.0)) continue;
            const complexd* bp = b + p * m;
            for (std::size_t j = 0; j < m; ++j) ci[j] += aip * bp[j];
        }
    }
#else
    gemm_serial(a, b, c, n, k, m);
#endif
}

void gemm(const complexd* a, const complexd* b, complexd* c,
          std::size_t n, std::size_t k, std::size_t m) {
    if (n >= kParallelRowThreshold && max_threads() > 1)
        gemm_parallel(a, b, c, n, k, m);
    else
        gemm_serial(a, b, c, n, k, m);
}

void spmv_serial(const std::size_t* row_ptr, const std::size_t* col_idx,
                 const complexd* values, const complexd* x, complexd* y,
                 std::size_t n, complexd alpha) {
    for (std::size_t i = 0; i < n; ++i) {
        complexd acc(0.0, 0.0);
        for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
            acc += values[p] * x[col_idx[p]];
        y[i] = alpha * acc;
    }
}

void spmv_parallel(const std::size_t* row_ptr, const std::size_t* col_idx,
                   const complexd* values, const complexd* x, complexd* y,
                   std::size_t n, complexd alpha) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        complexd acc(0.0, 0.0);
        for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
            acc += values[p] * x[col_idx[p]];
        y[i] = alpha * acc;
    }
#else
    spmv_serial(row_ptr, col_idx, values, x, y, n, alpha);
#endif
}

void spmv(const std::size_t* row_ptr, const std::size_t* col_idx,
          const complexd* values, const complexd* x, complexd* y,
          std::size_t n, complexd alpha) {
    if (n >= kParallelRowThreshold && max_threads() > 1)
        spmv_parallel(row_ptr, col_idx, values, x, y, n, alpha);
    else
        spmv_serial(row_ptr, col_idx, values, x, y, n, alpha);
}

complexd dot_conj(const complexd* a, const complexd* b, std::size_t n) {
    complexd acc(0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) acc += std::conj(a[i]) * b[i];
    return acc;
}

double norm2(const complexd* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::norm(a[i]);
    return std::sqrt(acc);
}

void axpy(complexd alpha, const complexd* x, complexd* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace noonsim::kernels
