#pragma once

#include <cstddef>
#include <vector>

namespace stallpred {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles. All weight tensors and input windows
/// use this one type; shape is part of the value.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // row-major, rows*cols entries

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
    std::size_t size() const { return data.size(); }
};

// y = W x          (y: rows, x: cols)
void matvec(const Matrix& w, const double* x, double* y);
// y += W x
void matvec_add(const Matrix& w, const double* x, double* y);
// dx += W^T dy     (dy: rows, dx: cols)
void matvec_t_add(const Matrix& w, const double* dy, double* dx);
// dW += dy x^T     (outer product accumulate)
void outer_add(Matrix& dw, const double* dy, const double* x);

bool all_finite(const Matrix& m);
bool all_finite(const Vector& v);

}  // namespace stallpred
