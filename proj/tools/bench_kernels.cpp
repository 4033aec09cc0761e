// Micro-benchmark for the numeric kernels: serial reference vs the
// OpenMP-parallel flavor on dense GEMM and CSR SpMV, plus two end-to-end
// workloads (dense expm and a STIRAP integration) that sit on top of them.
// Also cross-checks that both flavors return bitwise-identical results.
#include <algorithm>
#include <chrono>
#include <complex>
#include <cstdio>
#include <cstring>
#include <numbers>
#include <random>
#include <vector>

#include "noonsim/atomcavity.hpp"
#include "noonsim/dense.hpp"
#include "noonsim/kernels.hpp"

using noonsim::kernels::complexd;

namespace {

double seconds_per_run(int runs, const auto& fn) {
    fn(); // warm-up
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < runs; ++i) fn();
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(stop - start).count() / runs;
}

bool bitwise_equal(const std::vector<complexd>& a, const std::vector<complexd>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(complexd)) == 0;
}

void bench_gemm(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (const std::size_t n : {128, 256, 512}) {
        std::vector<complexd> a(n * n), b(n * n), c_serial(n * n), c_parallel(n * n);
        for (auto& v : a) v = {uni(rng), uni(rng)};
        for (auto& v : b) v = {uni(rng), uni(rng)};

        const double ts = seconds_per_run(3, [&] {
            noonsim::kernels::gemm_serial(a.data(), b.data(), c_serial.data(), n, n, n);
        });
        const double tp = seconds_per_run(3, [&] {
            noonsim::kernels::gemm_parallel(a.data(), b.data(), c_parallel.data(), n, n, n);
        });
        std::printf("gemm   n=%4zu  serial %9.3f ms  parallel %9.3f ms  speedup %5.2fx  %s\n",
                    n, ts * 1e3, tp * 1e3, ts / tp,
                    bitwise_equal(c_serial, c_parallel) ? "bitwise-equal" : "MISMATCH");
    }
}

void bench_spmv(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (const std::size_t n : {20000, 100000}) {
        // ~15 nonzeros per row, banded pattern.
        std::vector<std::size_t> row_ptr(n + 1, 0);
        std::vector<std::size_t> col_idx;
        std::vector<complexd> values;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t lo = i >= 7 ? i - 7 : 0;
            const std::size_t hi = std::min(n - 1, i + 7);
            for (std::size_t j = lo; j <= hi; ++j) {
                col_idx.push_back(j);
                values.push_back({uni(rng), uni(rng)});
            }
            row_ptr[i + 1] = col_idx.size();
        }
        std::vector<complexd> x(n), y_serial(n), y_parallel(n);
        for (auto& v : x) v = {uni(rng), uni(rng)};

        const double ts = seconds_per_run(20, [&] {
            noonsim::kernels::spmv_serial(row_ptr.data(), col_idx.data(), values.data(),
                                          x.data(), y_serial.data(), n, {1.0, 0.0});
        });
        const double tp = seconds_per_run(20, [&] {
            noonsim::kernels::spmv_parallel(row_ptr.data(), col_idx.data(), values.data(),
                                            x.data(), y_parallel.data(), n, {1.0, 0.0});
        });
        std::printf("spmv   n=%6zu nnz=%8zu  serial %8.3f ms  parallel %8.3f ms  "
                    "speedup %5.2fx  %s\n",
                    n, values.size(), ts * 1e3, tp * 1e3, ts / tp,
                    bitwise_equal(y_serial, y_parallel) ? "bitwise-equal" : "MISMATCH");
    }
}

void bench_expm(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const std::size_t n = 256;
    noonsim::DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = complexd(uni(rng), uni(rng)) / 16.0;
    const double t = seconds_per_run(2, [&] { (void)noonsim::expm(m); });
    std::printf("expm   n=%4zu  %9.3f ms per call (Pade 13, scaling and squaring)\n", n,
                t * 1e3);
}

void bench_stirap() {
    const int n_atoms = 2;
    noonsim::atomcavity::NoonGunParams params{
        n_atoms, 1.0, 1.0,
        noonsim::atomcavity::RampSpec{noonsim::atomcavity::RampShape::tanh_ramp, 20.0,
                                      200.0, 2000}};
    const auto ghz = noonsim::atomcavity::evolve_ghz(
        n_atoms, 1.0, noonsim::atomcavity::ghz_scan(n_atoms).best_angle);
    const auto initial = noonsim::atomcavity::embed_atomic(
        noonsim::atomcavity::raman_rotation(ghz, std::numbers::pi / 2.0));
    const auto start = std::chrono::steady_clock::now();
    const auto report = noonsim::atomcavity::run_stirap(params, initial);
    const auto stop = std::chrono::steady_clock::now();
    std::printf("stirap N=2 (2000 steps)  %9.3f ms  transfer fidelity %.6f\n",
                std::chrono::duration<double>(stop - start).count() * 1e3,
                report.target_fidelity);
}

} // namespace

int main() {
    std::printf("noonsim kernel benchmark (max threads: %d)\n",
                noonsim::kernels::max_threads());
    std::mt19937_64 rng(12345);
    bench_gemm(rng);
    bench_spmv(rng);
    bench_expm(rng);
    bench_stirap();
    return 0;
}
