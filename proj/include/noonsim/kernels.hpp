// Low-level numeric kernels: complex dense matrix products and CSR
// sparse-matrix / vector products.
//
// Every kernel comes in two flavors: a plain serial reference and an
// OpenMP-parallel version. Parallelism is always over output rows, so the
// per-element accumulation order is identical in both flavors and the
// results are bitwise equal. The undecorated entry points dispatch to the
// parallel flavor when OpenMP is enabled and the problem is large enough
// to pay for the fork.
#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace noonsim::kernels {

using complexd = std::complex<double>;

// C (n x m) = A (n x k) * B (k x m), row-major, C must not alias A or B.
void gemm_serial(const complexd* a, const complexd* b, complexd* c,
                 std::size_t n, std::size_t k, std::size_t m);
void gemm_parallel(const complexd* a, const complexd* b, complexd* c,
                   std::size_t n, std::size_t k, std::size_t m);
void gemm(const complexd* a, const complexd* b, complexd* c,
          std::size_t n, std::size_t k, std::size_t m);

// y = alpha * A * x for a CSR matrix (row_ptr has n+1 entries).
void spmv_serial(const std::size_t* row_ptr, const std::size_t* col_idx,
                 const complexd* values, const complexd* x, complexd* y,
                 std::size_t n, complexd alpha);
void spmv_parallel(const std::size_t* row_ptr, const std::size_t* col_idx,
                   const complexd* values, const complexd* x, complexd* y,
                   std::size_t n, complexd alpha);
void spmv(const std::size_t* row_ptr, const std::size_t* col_idx,
          const complexd* values, const complexd* x, complexd* y,
          std::size_t n, complexd alpha);

// Serial on purpose: O(n) reductions are cheap and a fixed summation order
// keeps results independent of the thread count.
complexd dot_conj(const complexd* a, const complexd* b, std::size_t n);
double norm2(const complexd* a, std::size_t n);
void axpy(complexd alpha, const complexd* x, complexd* y, std::size_t n);

// Number of threads the parallel kernels would use (1 when OpenMP is off).
int max_threads();

} // namespace noonsim::kernels
