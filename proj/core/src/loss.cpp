#include "stallpred/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stallpred {

double bce_one(double prob, int label) {
    constexpr double kClamp = 1e-12;
    const double p = std::clamp(prob, kClamp, 1.0 - kClamp);
    return label != 0 ? -std::log(p) : -std::log(1.0 - p);
}

double bce_loss(const Vector& probs, const std::vector<int>& labels) {
    if (probs.empty()) throw std::invalid_argument("bce_loss: empty input");
    if (probs.size() != labels.size())
        throw std::invalid_argument("bce_loss: length mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) sum += bce_one(probs[i], labels[i]);
    return sum / static_cast<double>(probs.size());
}

}  // namespace stallpred
