#include "stallpred/matrix.hpp"

#include <cmath>

namespace stallpred {

void matvec(const Matrix& w, const double* x, double* y) {
    const double* row = w.data.data();
    for (std::size_t r = 0; r < w.rows; ++r, row += w.cols) {
        double acc = 0.0;
        for (std::size_t c = 0; c < w.cols; ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
}

void matvec_add(const Matrix& w, const double* x, double* y) {
    const double* row = w.data.data();
    for (std::size_t r = 0; r < w.rows; ++r, row += w.cols) {
        double acc = 0.0;
        for (std::size_t c = 0; c < w.cols; ++c) acc += row[c] * x[c];
        y[r] += acc;
    }
}

void matvec_t_add(const Matrix& w, const double* dy, double* dx) {
    const double* row = w.data.data();
    for (std::size_t r = 0; r < w.rows; ++r, row += w.cols) {
        const double d = dy[r];
        if (d == 0.0) continue;
        for (std::size_t c = 0; c < w.cols; ++c) dx[c] += row[c] * d;
    }
}

void outer_add(Matrix& dw, const double* dy, const double* x) {
    double* row = dw.data.data();
    for (std::size_t r = 0; r < dw.rows; ++r, row += dw.cols) {
        const double d = dy[r];
        if (d == 0.0) continue;
        for (std::size_t c = 0; c < dw.cols; ++c) row[c] += d * x[c];
    }
}

bool all_finite(const Matrix& m) {
    for (double v : m.data)
        if (!std::isfinite(v)) return false;
    return true;
}

bool all_finite(const Vector& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace stallpred
