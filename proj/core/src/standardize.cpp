#include "stallpred/standardize.hpp"

#include <cmath>
#include <stdexcept>

namespace stallpred {

Standardizer fit_standardizer(const Dataset& train) {
    if (train.samples.empty())
        throw std::invalid_argument("fit_standardizer: empty training set");
    const std::size_t features = train.samples.front().x.rows;
    const std::size_t window_len = train.samples.front().x.cols;
    const double n = static_cast<double>(train.samples.size() * window_len);

    Standardizer s;
    s.mean.assign(features, 0.0);
    s.stddev.assign(features, 0.0);

    for (const auto& sample : train.samples)
        for (std::size_t f = 0; f < features; ++f)
            for (std::size_t k = 0; k < window_len; ++k) s.mean[f] += sample.x(f, k);
    for (std::size_t f = 0; f < features; ++f) s.mean[f] /= n;

    for (const auto& sample : train.samples)
        for (std::size_t f = 0; f < features; ++f)
            for (std::size_t k = 0; k < window_len; ++k) {
                const double d = sample.x(f, k) - s.mean[f];
                s.stddev[f] += d * d;
            }
    for (std::size_t f = 0; f < features; ++f)
        s.stddev[f] = std::max(std::sqrt(s.stddev[f] / n), s.sigma_floor);
    return s;
}

void standardize_window(const Standardizer& s, Matrix& window) {
    if (window.rows != s.mean.size())
        throw std::invalid_argument("standardize: feature count mismatch");
    for (std::size_t f = 0; f < window.rows; ++f)
        for (std::size_t k = 0; k < window.cols; ++k)
            window(f, k) = (window(f, k) - s.mean[f]) / s.stddev[f];
}

Dataset apply_standardizer(const Standardizer& s, const Dataset& ds) {
    Dataset out = ds;
    for (auto& sample : out.samples) standardize_window(s, sample.x);
    return out;
}

}  // namespace stallpred
