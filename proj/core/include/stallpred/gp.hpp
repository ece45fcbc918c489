#pragma once

#include <vector>

#include "stallpred/matrix.hpp"

namespace stallpred {

/// One evaluated configuration in normalized [0,1]^d coordinates.
struct Observation {
    Vector point;
    double objective = 0.0;
};

/// Squared-exponential kernel
///   k(a,b) = signal_var * exp(-sum_d (a_d-b_d)^2 / (2 l_d^2))
struct SeKernel {
    Vector length_scales;    // per dimension
    double signal_var = 1.0;  // sigma_f^2
    double noise_var = 1e-6;  // sigma_n^2
};

double kernel_eval(const SeKernel& k, const Vector& a, const Vector& b);

/// Zero-mean GP over the observations with a cached Cholesky factor of
/// K + sigma_n^2 I (+ jitter).
struct GpSurrogate {
    std::vector<Observation> obs;  // duplicates merged by objective mean
    SeKernel kernel;
    Matrix chol;     // lower triangular
    Vector alpha;    // (K + sigma_n^2 I)^-1 y
    double jitter = 0.0;
};

/// Merges exactly-duplicated points by mean, then factors the kernel matrix,
/// escalating jitter 1e-10, 1e-9, ... 1e-4 until the Cholesky succeeds.
/// Throws std::invalid_argument on empty input, NumericError when even the
/// largest jitter cannot make the matrix positive definite.
GpSurrogate gp_fit(std::vector<Observation> obs, const SeKernel& kernel);

struct Posterior {
    double mean = 0.0;
    double stddev = 0.0;  // clamped at 0 from below
};

Posterior gp_posterior(const GpSurrogate& s, const Vector& x);

/// Closed-form EI for maximization: with z = (mean - y_best)/stddev,
/// EI = (mean - y_best) Phi(z) + stddev phi(z); degenerates to
/// max(0, mean - y_best) at stddev = 0. Always >= 0.
double ei_value(double mean, double stddev, double y_best);

/// ei_value applied to the GP posterior at x.
double expected_improvement(const GpSurrogate& s, const Vector& x, double y_best);

}  // namespace stallpred
