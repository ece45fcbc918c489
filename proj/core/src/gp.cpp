#include "stallpred/gp.hpp"

#include <cmath>
#include <stdexcept>

#include "stallpred/errors.hpp"

namespace stallpred {

double kernel_eval(const SeKernel& k, const Vector& a, const Vector& b) {
    double q = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double diff = a[d] - b[d];
        const double l = k.length_scales[d];
        q += diff * diff / (2.0 * l * l);
    }
    return k.signal_var * std::exp(-q);
}

namespace {

// In-place lower Cholesky; returns false on a non-positive pivot.
bool cholesky(Matrix& a) {
    const std::size_t n = a.rows;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = a(i, j);
            for (std::size_t k = 0; k < j; ++k) sum -= a(i, k) * a(j, k);
            if (i == j) {
                if (!(sum > 0.0)) return false;
                a(i, i) = std::sqrt(sum);
            } else {
                a(i, j) = sum / a(j, j);
            }
        }
        for (std::size_t j = i + 1; j < n; ++j) a(i, j) = 0.0;
    }
    return true;
}

// Solves L y = b in place.
void forward_solve(const Matrix& l, Vector& b) {
    for (std::size_t i = 0; i < l.rows; ++i) {
        double sum = b[i];
        for (std::size_t k = 0; k < i; ++k) sum -= l(i, k) * b[k];
        b[i] = sum / l(i, i);
    }
}

// Solves L^T x = b in place.
void backward_solve(const Matrix& l, Vector& b) {
    for (std::size_t i = l.rows; i-- > 0;) {
        double sum = b[i];
        for (std::size_t k = i + 1; k < l.rows; ++k) sum -= l(k, i) * b[k];
        b[i] = sum / l(i, i);
    }
}

}  // namespace

GpSurrogate gp_fit(std::vector<Observation> obs, const SeKernel& kernel) {
    if (obs.empty()) throw std::invalid_argument("gp_fit: needs at least one observation");
    for (const auto& o : obs)
        if (o.point.size() != kernel.length_scales.size())
            throw std::invalid_argument("gp_fit: point dimension mismatch");

    // Merge exact duplicates by mean objective.
    std::vector<Observation> merged;
    std::vector<std::size_t> hits;
    for (const auto& o : obs) {
        bool found = false;
        for (std::size_t i = 0; i < merged.size(); ++i) {
            if (merged[i].point == o.point) {
                merged[i].objective += o.objective;
                ++hits[i];
                found = true;
                break;
            }
        }
        if (!found) {
            merged.push_back(o);
            hits.push_back(1);
        }
    }
    for (std::size_t i = 0; i < merged.size(); ++i)
        merged[i].objective /= static_cast<double>(hits[i]);

    GpSurrogate s;
    s.obs = std::move(merged);
    s.kernel = kernel;
    const std::size_t n = s.obs.size();

    Matrix k(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = kernel_eval(kernel, s.obs[i].point, s.obs[j].point);
            k(i, j) = v;
            k(j, i) = v;
        }

    double jitter = 0.0;
    Matrix work = k;
    for (std::size_t i = 0; i < n; ++i) work(i, i) += kernel.noise_var;
    if (!cholesky(work)) {
        jitter = 1e-10;
        for (; jitter <= 1e-4 * 1.0000001; jitter *= 10.0) {
            work = k;
            for (std::size_t i = 0; i < n; ++i) work(i, i) += kernel.noise_var + jitter;
            if (cholesky(work)) break;
        }
        if (jitter > 1e-4 * 1.0000001)
            throw NumericError("gp_fit: kernel matrix not positive definite");
    }
    s.jitter = jitter;
    s.chol = std::move(work);

    s.alpha.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.alpha[i] = s.obs[i].objective;
    forward_solve(s.chol, s.alpha);
    backward_solve(s.chol, s.alpha);
    return s;
}

Posterior gp_posterior(const GpSurrogate& s, const Vector& x) {
    if (x.size() != s.kernel.length_scales.size())
        throw std::invalid_argument("gp_posterior: point dimension mismatch");
    const std::size_t n = s.obs.size();
    Vector kstar(n);
    for (std::size_t i = 0; i < n; ++i) kstar[i] = kernel_eval(s.kernel, s.obs[i].point, x);

    Posterior post;
    for (std::size_t i = 0; i < n; ++i) post.mean += kstar[i] * s.alpha[i];

    Vector w = kstar;
    forward_solve(s.chol, w);
    double reduction = 0.0;
    for (double v : w) reduction += v * v;
    const double var = s.kernel.signal_var - reduction;
    post.stddev = var > 0.0 ? std::sqrt(var) : 0.0;
    return post;
}

double ei_value(double mean, double stddev, double y_best) {
    const double gap = mean - y_best;
    if (stddev <= 0.0) return gap > 0.0 ? gap : 0.0;
    const double z = gap / stddev;
    const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.14159265358979323846);
    const double ei = gap * cdf + stddev * pdf;
    return ei > 0.0 ? ei : 0.0;
}

double expected_improvement(const GpSurrogate& s, const Vector& x, double y_best) {
    const Posterior post = gp_posterior(s, x);
    return ei_value(post.mean, post.stddev, y_best);
}

}  // namespace stallpred
