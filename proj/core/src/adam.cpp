#include "stallpred/adam.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "stallpred/errors.hpp"

namespace stallpred {

void validate(const TrainConfig& cfg) {
    if (!(cfg.learning_rate > 0.0))
        throw std::invalid_argument("train config: learning_rate must be > 0");
    if (cfg.epochs == 0) throw std::invalid_argument("train config: epochs must be >= 1");
    if (cfg.batch_size == 0) throw std::invalid_argument("train config: batch_size must be >= 1");
    if (!(cfg.adam_beta1 > 0.0 && cfg.adam_beta1 < 1.0))
        throw std::invalid_argument("train config: beta1 must be in (0,1)");
    if (!(cfg.adam_beta2 > 0.0 && cfg.adam_beta2 < 1.0))
        throw std::invalid_argument("train config: beta2 must be in (0,1)");
    if (!(cfg.adam_eps > 0.0)) throw std::invalid_argument("train config: adam_eps must be > 0");
    if (cfg.threads == 0) throw std::invalid_argument("train config: threads must be >= 1");
}

AdamState make_adam_state(const ParamSet& params) {
    AdamState st;
    for_each_tensor(params, [&](std::string_view, const std::vector<double>& t) {
        st.m.emplace_back(t.size(), 0.0);
        st.v.emplace_back(t.size(), 0.0);
    });
    return st;
}

void adam_step(AdamState& state, ParamSet& params, const ParamSet& grads,
               const TrainConfig& cfg) {
    state.t += 1;
    const double b1 = cfg.adam_beta1;
    const double b2 = cfg.adam_beta2;
    const double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
    const double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.t));

    std::vector<std::vector<double>*> pt;
    std::vector<const std::vector<double>*> gt;
    std::vector<std::string> names;
    for_each_tensor(params, [&](std::string_view, std::vector<double>& t) { pt.push_back(&t); });
    for_each_tensor(grads, [&](std::string_view name, const std::vector<double>& t) {
        gt.push_back(&t);
        names.emplace_back(name);
    });
    if (pt.size() != gt.size() || pt.size() != state.m.size())
        throw std::invalid_argument("adam_step: tensor layout mismatch");

    for (std::size_t i = 0; i < pt.size(); ++i) {
        auto& p = *pt[i];
        const auto& g = *gt[i];
        auto& m = state.m[i];
        auto& v = state.v[i];
        if (p.size() != g.size() || p.size() != m.size())
            throw std::invalid_argument("adam_step: tensor shape mismatch");
        for (std::size_t j = 0; j < p.size(); ++j) {
            const double gj = g[j];
            if (!std::isfinite(gj))
                throw NumericError("adam_step: non-finite gradient in tensor " + names[i]);
            m[j] = b1 * m[j] + (1.0 - b1) * gj;
            v[j] = b2 * v[j] + (1.0 - b2) * gj * gj;
            const double m_hat = m[j] / corr1;
            const double v_hat = v[j] / corr2;
            p[j] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
        }
    }
}

}  // namespace stallpred
