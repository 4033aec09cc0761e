#include "noonsim/dense.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "noonsim/errors.hpp"

namespace noonsim {

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = complexd(1.0, 0.0);
    return m;
}

DenseMatrix DenseMatrix::operator*(const DenseMatrix& rhs) const {
    if (cols_ != rhs.rows_) throw ContractError("DenseMatrix::operator*: shape mismatch");
    DenseMatrix out(rows_, rhs.cols_);
    kernels::gemm(data_.data(), rhs.data_.data(), out.data_.data(), rows_, cols_, rhs.cols_);
    return out;
}

DenseMatrix& DenseMatrix::operator+=(const DenseMatrix& rhs) {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_)
        throw ContractError("DenseMatrix::operator+=: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
    return *this;
}

DenseMatrix& DenseMatrix::operator*=(complexd scale) {
    for (auto& v : data_) v *= scale;
    return *this;
}

DenseMatrix DenseMatrix::dagger() const {
    DenseMatrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
    return out;
}

double DenseMatrix::opnorm1() const {
    double best = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) col += std::abs((*this)(i, j));
        best = std::max(best, col);
    }
    return best;
}

double DenseMatrix::max_abs() const {
    double best = 0.0;
    for (const auto& v : data_) best = std::max(best, std::abs(v));
    return best;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ContractError("max_abs_diff: shape mismatch");
    double best = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            best = std::max(best, std::abs(a(i, j) - b(i, j)));
    return best;
}

void lu_solve_inplace(DenseMatrix& a, DenseMatrix& b) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.rows() != n) throw ContractError("lu_solve_inplace: shape mismatch");
    const std::size_t m = b.cols();

    for (std::size_t k = 0; k < n; ++k) {
        // Partial pivoting.
        std::size_t piv = k;
        double best = std::abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double mag = std::abs(a(i, k));
            if (mag > best) {
                best = mag;
                piv = i;
            }
        }
        if (best == 0.0) throw NumericalError("lu_solve_inplace: singular matrix");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            for (std::size_t j = 0; j < m; ++j) std::swap(b(k, j), b(piv, j));
        }
        const complexd pivot = a(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const complexd factor = a(i, k) / pivot;
            a(i, k) = factor;
            if (factor == complexd(0.0, 0.0)) continue;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= factor * a(k, j);
            for (std::size_t j = 0; j < m; ++j) b(i, j) -= factor * b(k, j);
        }
    }
    // Back substitution.
    for (std::size_t kk = n; kk-- > 0;) {
        const complexd pivot = a(kk, kk);
        for (std::size_t j = 0; j < m; ++j) {
            complexd acc = b(kk, j);
            for (std::size_t p = kk + 1; p < n; ++p) acc -= a(kk, p) * b(p, j);
            b(kk, j) = acc / pivot;
        }
    }
}

namespace {

// Pade numerator coefficients for orders 3, 5, 7, 9, 13 and the 1-norm
// thresholds below which each order meets double-precision accuracy
// (Higham, "The scaling and squaring method for the matrix exponential
// revisited").
const double kTheta3 = 1.495585217958292e-2;
const double kTheta5 = 2.539398330063230e-1;
const double kTheta7 = 9.504178996162932e-1;
const double kTheta9 = 2.097847961257068e0;
const double kTheta13 = 5.371920351148152e0;

DenseMatrix pade_low_order(const DenseMatrix& a, const std::vector<double>& b) {
    const std::size_t n = a.rows();
    const DenseMatrix ident = DenseMatrix::identity(n);
    const DenseMatrix a2 = a * a;

    // Even powers a^0, a^2, a^4, ... as needed by the coefficient list.
    std::vector<DenseMatrix> even;
    even.push_back(ident);
    even.push_back(a2);
    while (2 * (even.size() - 1) + 1 < b.size() - 1) even.push_back(even.back() * a2);

    DenseMatrix u_poly(n, n);
    DenseMatrix v(n, n);
    for (std::size_t k = 0; k < even.size(); ++k) {
        DenseMatrix term = even[k];
        if (2 * k + 1 < b.size()) {
            term *= complexd(b[2 * k + 1], 0.0);
            u_poly += term;
        }
        DenseMatrix term2 = even[k];
        term2 *= complexd(b[2 * k], 0.0);
        v += term2;
    }
    DenseMatrix u = a * u_poly;

    // Solve (v - u) x = (v + u).
    DenseMatrix num = v;
    num += u;
    DenseMatrix den = v;
    DenseMatrix neg_u = u;
    neg_u *= complexd(-1.0, 0.0);
    den += neg_u;
    lu_solve_inplace(den, num);
    return num;
}

DenseMatrix pade13(const DenseMatrix& a) {
    static const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                               1187353796428800.0,  129060195264000.0,   10559470521600.0,
                               670442572800.0,      33522128640.0,       1323241920.0,
                               40840800.0,          960960.0,            16380.0,
                               182.0,               1.0};
    const std::size_t n = a.rows();
    const DenseMatrix ident = DenseMatrix::identity(n);
    const DenseMatrix a2 = a * a;
    const DenseMatrix a4 = a2 * a2;
    const DenseMatrix a6 = a2 * a4;

    auto lincomb = [&](double c6, double c4, double c2, double c0) {
        DenseMatrix out(n, n);
        DenseMatrix t = a6;
        t *= complexd(c6, 0.0);
        out += t;
        t = a4;
        t *= complexd(c4, 0.0);
        out += t;
        t = a2;
        t *= complexd(c2, 0.0);
        out += t;
        t = ident;
        t *= complexd(c0, 0.0);
        out += t;
        return out;
    };

    DenseMatrix u_inner = lincomb(b[13], b[11], b[9], 0.0);
    DenseMatrix u_poly = a6 * u_inner;
    u_poly += lincomb(b[7], b[5], b[3], b[1]);
    DenseMatrix u = a * u_poly;

    DenseMatrix v_inner = lincomb(b[12], b[10], b[8], 0.0);
    DenseMatrix v = a6 * v_inner;
    v += lincomb(b[6], b[4], b[2], b[0]);

    DenseMatrix num = v;
    num += u;
    DenseMatrix den = v;
    DenseMatrix neg_u = u;
    neg_u *= complexd(-1.0, 0.0);
    den += neg_u;
    lu_solve_inplace(den, num);
    return num;
}

} // namespace

DenseMatrix expm(const DenseMatrix& a) {
    if (a.rows() != a.cols()) throw ContractError("expm: matrix must be square");
    const double norm = a.opnorm1();
    if (!std::isfinite(norm)) throw NumericalError("expm: non-finite input");

    if (norm <= kTheta3)
        return pade_low_order(a, {120.0, 60.0, 12.0, 1.0});
    if (norm <= kTheta5)
        return pade_low_order(a, {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0});
    if (norm <= kTheta7)
        return pade_low_order(a, {17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0,
                                  56.0, 1.0});
    if (norm <= kTheta9)
        return pade_low_order(a, {17643225600.0, 8821612800.0, 2075673600.0, 302702400.0,
                                  30270240.0, 2162160.0, 110880.0, 3960.0, 90.0, 1.0});

    int squarings = 0;
    DenseMatrix scaled = a;
    if (norm > kTheta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / kTheta13)));
        scaled *= complexd(std::ldexp(1.0, -squarings), 0.0);
    }
    DenseMatrix result = pade13(scaled);
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

} // namespace noonsim
