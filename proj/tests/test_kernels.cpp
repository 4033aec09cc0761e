#include "doctest.h"

#include <complex>
#include <random>
#include <tuple>
#include <vector>

#include "noonsim/kernels.hpp"

using noonsim::kernels::complexd;
namespace k = noonsim::kernels;

namespace {

std::vector<complexd> random_vector(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<complexd> out(n);
    for (auto& v : out) v = {uni(rng), uni(rng)};
    return out;
}

// Straightforward reference product, written independently of the kernels.
std::vector<complexd> naive_gemm(const std::vector<complexd>& a,
                                 const std::vector<complexd>& b, std::size_t n,
                                 std::size_t kk, std::size_t m) {
    std::vector<complexd> c(n * m, complexd(0.0, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t l = 0; l < kk; ++l) c[i * m + j] += a[i * kk + l] * b[l * m + j];
    return c;
}

} // namespace

TEST_CASE("gemm matches a hand-computed 2x2 product") {
    // [[1, i], [2, 0]] * [[0, 1], [1, 0]] = [[i, 1], [0, 2]]
    const std::vector<complexd> a = {{1, 0}, {0, 1}, {2, 0}, {0, 0}};
    const std::vector<complexd> b = {{0, 0}, {1, 0}, {1, 0}, {0, 0}};
    std::vector<complexd> c(4);
    k::gemm(a.data(), b.data(), c.data(), 2, 2, 2);
    CHECK(c[0] == complexd(0, 1));
    CHECK(c[1] == complexd(1, 0));
    CHECK(c[2] == complexd(0, 0));
    CHECK(c[3] == complexd(2, 0));
}

TEST_CASE("gemm serial and parallel are bitwise identical") {
    using Shape = std::tuple<std::size_t, std::size_t, std::size_t>;
    const std::vector<Shape> shapes = {{3, 5, 4}, {64, 64, 64}, {129, 80, 65}, {200, 1, 200}};
    for (const auto& [n, kk, m] : shapes) {
        const auto a = random_vector(n * kk, 17 * n + m);
        const auto b = random_vector(kk * m, 31 * kk + n);
        std::vector<complexd> cs(n * m), cp(n * m);
        k::gemm_serial(a.data(), b.data(), cs.data(), n, kk, m);
        k::gemm_parallel(a.data(), b.data(), cp.data(), n, kk, m);
        CHECK(cs == cp); // complexd equality is exact bit comparison here
        const auto ref = naive_gemm(a, b, n, kk, m);
        double max_diff = 0.0;
        for (std::size_t i = 0; i < cs.size(); ++i)
            max_diff = std::max(max_diff, std::abs(cs[i] - ref[i]));
        CHECK(max_diff <= 1e-12);
    }
}

TEST_CASE("spmv serial and parallel are bitwise identical and correct") {
    const std::size_t n = 300;
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::uniform_int_distribution<std::size_t> col(0, n - 1);

    std::vector<std::size_t> row_ptr = {0};
    std::vector<std::size_t> col_idx;
    std::vector<complexd> values;
    for (std::size_t i = 0; i < n; ++i) {
        const int nnz = static_cast<int>(rng() % 9);
        for (int t = 0; t < nnz; ++t) {
            col_idx.push_back(col(rng));
            values.push_back({uni(rng), uni(rng)});
        }
        row_ptr.push_back(col_idx.size());
    }
    const auto x = random_vector(n, 7);
    std::vector<complexd> ys(n), yp(n), ref(n, complexd(0, 0));
    const complexd alpha(0.3, -1.1);
    k::spmv_serial(row_ptr.data(), col_idx.data(), values.data(), x.data(), ys.data(), n,
                   alpha);
    k::spmv_parallel(row_ptr.data(), col_idx.data(), values.data(), x.data(), yp.data(), n,
                     alpha);
    CHECK(ys == yp);

    for (std::size_t i = 0; i < n; ++i) {
        complexd acc(0, 0);
        for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
            acc += values[p] * x[col_idx[p]];
        ref[i] = alpha * acc;
    }
    double max_diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diff = std::max(max_diff, std::abs(ys[i] - ref[i]));
    CHECK(max_diff <= 1e-12);
}

TEST_CASE("dot_conj conjugates the first argument") {
    const std::vector<complexd> a = {{0, 1}, {2, 0}};
    const std::vector<complexd> b = {{1, 0}, {0, 1}};
    // conj(i)*1 + conj(2)*i = -i + 2i = i
    CHECK(k::dot_conj(a.data(), b.data(), 2) == complexd(0, 1));
}

TEST_CASE("norm2 and axpy basics") {
    const std::vector<complexd> a = {{3, 0}, {0, 4}};
    CHECK(k::norm2(a.data(), 2) == doctest::Approx(5.0).epsilon(1e-15));

    std::vector<complexd> y = {{1, 0}, {0, 0}};
    const std::vector<complexd> x = {{0, 1}, {1, 0}};
    k::axpy(complexd(2, 0), x.data(), y.data(), 2);
    CHECK(y[0] == complexd(1, 2));
    CHECK(y[1] == complexd(2, 0));
}

TEST_CASE("max_threads reports at least one thread") {
    CHECK(k::max_threads() >= 1);
}
