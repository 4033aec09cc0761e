// Dense complex matrices and the scaling-and-squaring matrix exponential.
// Dense work only appears where full unitaries are required; everything on
// the hot propagation path stays sparse (see fock.hpp).
#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "noonsim/kernels.hpp"

namespace noonsim {

using complexd = std::complex<double>;

class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, complexd(0.0, 0.0)) {}

    static DenseMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    complexd& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const complexd& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const complexd* data() const { return data_.data(); }
    complexd* data() { return data_.data(); }

    DenseMatrix operator*(const DenseMatrix& rhs) const;
    DenseMatrix& operator+=(const DenseMatrix& rhs);
    DenseMatrix& operator*=(complexd scale);
    DenseMatrix dagger() const;

    // Maximum column sum of absolute values (the induced 1-norm).
    double opnorm1() const;
    double max_abs() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<complexd> data_;
};

// exp(A) by Pade approximation with scaling and squaring.
DenseMatrix expm(const DenseMatrix& a);

// Solves A X = B in place of B (partial pivoting); A is consumed.
void lu_solve_inplace(DenseMatrix& a, DenseMatrix& b);

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

} // namespace noonsim
