#include "stallpred/backprop.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stallpred/loss.hpp"

namespace stallpred {

namespace {

// Reverse sweep of one directional LSTM over its trace.
//
//   do = dh . tanh(c)                 dc += dh . o . (1 - tanh(c)^2)
//   di = dc . g    df = dc . c_prev   dg = dc . i    dc_prev = dc . f
//   pre-activation: dz_i = di.i(1-i), dz_f = df.f(1-f),
//                   dz_o = do.o(1-o), dz_g = dg.(1-g^2)
//   dW_k += dz_k x^T   dU_k += dz_k h_prev^T   db_k += dz_k
//   dx = sum_k W_k^T dz_k     dh_prev = sum_k U_k^T dz_k
//
// dh_out holds dL/dh_t in the direction's internal time order; dx is written
// in the same order.
void lstm_dir_backward(const LstmCellParams& p, const LstmLayerTrace& tr,
                       const std::vector<Vector>& dh_out, LstmCellParams& g,
                       std::vector<Vector>& dx) {
    const std::size_t T = tr.steps.size();
    const std::size_t h = p.hidden_size;
    const Vector zero(h, 0.0);
    Vector dh_next(h, 0.0), dc_next(h, 0.0);
    Vector dz[4];
    for (auto& v : dz) v.resize(h);
    dx.assign(T, Vector(p.input_size, 0.0));

    for (std::size_t ti = T; ti-- > 0;) {
        const LstmStep& s = tr.steps[ti];
        const Vector& c_prev = ti > 0 ? tr.steps[ti - 1].c : zero;
        const Vector& h_prev = ti > 0 ? tr.steps[ti - 1].h : zero;
        for (std::size_t j = 0; j < h; ++j) {
            const double dh = dh_out[ti][j] + dh_next[j];
            const double tc = s.tanh_c[j];
            const double d_o = dh * tc;
            const double dc = dh * s.o[j] * (1.0 - tc * tc) + dc_next[j];
            const double d_i = dc * s.g[j];
            const double d_f = dc * c_prev[j];
            const double d_g = dc * s.i[j];
            dz[kGateInput][j] = d_i * s.i[j] * (1.0 - s.i[j]);
            dz[kGateForget][j] = d_f * s.f[j] * (1.0 - s.f[j]);
            dz[kGateOutput][j] = d_o * s.o[j] * (1.0 - s.o[j]);
            dz[kGateCell][j] = d_g * (1.0 - s.g[j] * s.g[j]);
            dc_next[j] = dc * s.f[j];
        }
        std::fill(dh_next.begin(), dh_next.end(), 0.0);
        for (std::size_t k = 0; k < 4; ++k) {
            outer_add(g.w[k], dz[k].data(), tr.inputs[ti].data());
            outer_add(g.u[k], dz[k].data(), h_prev.data());
            for (std::size_t j = 0; j < h; ++j) g.b[k][j] += dz[k][j];
            matvec_t_add(p.w[k], dz[k].data(), dx[ti].data());
            matvec_t_add(p.u[k], dz[k].data(), dh_next.data());
        }
    }
}

double act_derivative(Activation act, double z, double out) {
    switch (act) {
        case Activation::Tanh: return 1.0 - out * out;
        case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
        case Activation::Sigmoid: return out * (1.0 - out);
    }
    return 0.0;
}

}  // namespace

void model_backward_into(const Model& m, const ForwardTrace& trace, double label,
                         ParamSet& grads) {
    const auto& layers = m.spec.layers;
    if (trace.layers.size() != layers.size() || grads.layers.size() != layers.size())
        throw std::invalid_argument("model_backward: trace/gradient layout mismatch");

    std::size_t last_lstm = 0;
    for (std::size_t li = 0; li < layers.size(); ++li)
        if (layers[li].kind == LayerKind::LstmUni || layers[li].kind == LayerKind::LstmBi)
            last_lstm = li;

    // Head stage, output unit down to the layer above the LSTM stack.
    Vector dhead;
    for (std::size_t li = layers.size(); li-- > last_lstm + 1;) {
        switch (layers[li].kind) {
            case LayerKind::OutputSigmoid: {
                const auto& tr = std::get<OutputTrace>(trace.layers[li]);
                const auto& op = std::get<OutputParams>(m.params.layers[li]);
                auto& go = std::get<OutputParams>(grads.layers[li]);
                const double dz = tr.p - label;  // fused sigmoid + BCE
                for (std::size_t j = 0; j < tr.in.size(); ++j) go.w[j] += dz * tr.in[j];
                go.b[0] += dz;
                dhead.resize(tr.in.size());
                for (std::size_t j = 0; j < tr.in.size(); ++j) dhead[j] = dz * op.w[j];
                break;
            }
            case LayerKind::Dropout: {
                const auto& tr = std::get<DropoutTrace>(trace.layers[li]);
                for (std::size_t j = 0; j < dhead.size(); ++j) dhead[j] *= tr.mask[j];
                break;
            }
            case LayerKind::Dense: {
                const auto& tr = std::get<DenseTrace>(trace.layers[li]);
                const auto& dp = std::get<DenseParams>(m.params.layers[li]);
                auto& gd = std::get<DenseParams>(grads.layers[li]);
                Vector dzv(dhead.size());
                for (std::size_t j = 0; j < dhead.size(); ++j)
                    dzv[j] = dhead[j] * act_derivative(dp.activation, tr.z[j], tr.out[j]);
                outer_add(gd.w, dzv.data(), tr.in.data());
                for (std::size_t j = 0; j < dzv.size(); ++j) gd.b[j] += dzv[j];
                Vector din(dp.w.cols, 0.0);
                matvec_t_add(dp.w, dzv.data(), din.data());
                dhead = std::move(din);
                break;
            }
            default:
                throw std::invalid_argument("model_backward: unexpected layer in head stage");
        }
    }

    // Sequence stage. dh_out holds dL/dh_t (aligned to original time order)
    // for the layer currently being processed.
    const std::size_t T = m.spec.window_len;
    std::vector<Vector> dh_out;
    for (std::size_t li = last_lstm + 1; li-- > 0;) {
        const bool is_last = (li == last_lstm);
        if (layers[li].kind == LayerKind::LstmUni) {
            const auto& tr = std::get<LstmLayerTrace>(trace.layers[li]);
            const auto& lp = std::get<LstmLayerParams>(m.params.layers[li]);
            auto& gl = std::get<LstmLayerParams>(grads.layers[li]);
            if (is_last) {
                dh_out.assign(T, Vector(lp.cell.hidden_size, 0.0));
                dh_out[T - 1] = dhead;  // head consumed the final state
            }
            std::vector<Vector> dx;
            lstm_dir_backward(lp.cell, tr, dh_out, gl.cell, dx);
            dh_out = std::move(dx);
        } else {
            const auto& tr = std::get<BiLstmLayerTrace>(trace.layers[li]);
            const auto& bp = std::get<BiLstmLayerParams>(m.params.layers[li]);
            auto& gb = std::get<BiLstmLayerParams>(grads.layers[li]);
            const std::size_t h = bp.fwd.hidden_size;
            std::vector<Vector> dh_f(T, Vector(h, 0.0)), dh_b(T, Vector(h, 0.0));
            if (is_last) {
                // dhead = [d h_fwd(T-1) ; d h_bwd(final)]; the backward
                // stream's final internal step sits at original t = 0.
                for (std::size_t j = 0; j < h; ++j) {
                    dh_f[T - 1][j] = dhead[j];
                    dh_b[T - 1][j] = dhead[h + j];
                }
            } else {
                // Split the aligned gradient; map the bwd half to internal
                // (reversed) time order.
                for (std::size_t t = 0; t < T; ++t)
                    for (std::size_t j = 0; j < h; ++j) {
                        dh_f[t][j] = dh_out[t][j];
                        dh_b[T - 1 - t][j] = dh_out[t][h + j];
                    }
            }
            std::vector<Vector> dx_f, dx_b;
            lstm_dir_backward(bp.fwd, tr.fwd, dh_f, gb.fwd, dx_f);
            lstm_dir_backward(bp.bwd, tr.bwd, dh_b, gb.bwd, dx_b);
            // dx_b is in reversed order; fold back onto the original axis.
            dh_out.assign(T, Vector(bp.fwd.input_size, 0.0));
            for (std::size_t t = 0; t < T; ++t)
                for (std::size_t j = 0; j < bp.fwd.input_size; ++j)
                    dh_out[t][j] = dx_f[t][j] + dx_b[T - 1 - t][j];
        }
    }
}

ParamSet model_backward(const Model& m, const ForwardTrace& trace, double label) {
    ParamSet grads = zeros_like(m.params);
    model_backward_into(m, trace, label, grads);
    return grads;
}

ParamSet finite_diff_gradients(const Model& m, const Matrix& window, double label,
                               const DropoutMasks& masks, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("finite_diff_gradients: eps must be > 0");
    Model work = m;
    ParamSet num = zeros_like(m.params);
    std::vector<std::vector<double>*> wt, nt;
    for_each_tensor(work.params,
                    [&](std::string_view, std::vector<double>& t) { wt.push_back(&t); });
    for_each_tensor(num, [&](std::string_view, std::vector<double>& t) { nt.push_back(&t); });
    ForwardTrace trace;
    const int y = label != 0.0 ? 1 : 0;
    for (std::size_t i = 0; i < wt.size(); ++i) {
        for (std::size_t j = 0; j < wt[i]->size(); ++j) {
            const double orig = (*wt[i])[j];
            (*wt[i])[j] = orig + eps;
            const double lp = bce_one(forward_trace(work, window, masks, trace), y);
            (*wt[i])[j] = orig - eps;
            const double lm = bce_one(forward_trace(work, window, masks, trace), y);
            (*wt[i])[j] = orig;
            (*nt[i])[j] = (lp - lm) / (2.0 * eps);
        }
    }
    return num;
}

double max_rel_error(const ParamSet& a, const ParamSet& b) {
    std::vector<const std::vector<double>*> at, bt;
    for_each_tensor(a, [&](std::string_view, const std::vector<double>& t) { at.push_back(&t); });
    for_each_tensor(b, [&](std::string_view, const std::vector<double>& t) { bt.push_back(&t); });
    if (at.size() != bt.size()) throw std::invalid_argument("max_rel_error: layout mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < at.size(); ++i) {
        if (at[i]->size() != bt[i]->size())
            throw std::invalid_argument("max_rel_error: tensor shape mismatch");
        for (std::size_t j = 0; j < at[i]->size(); ++j) {
            const double x = (*at[i])[j];
            const double y = (*bt[i])[j];
            const double denom = std::max({std::fabs(x), std::fabs(y), 1e-8});
            worst = std::max(worst, std::fabs(x - y) / denom);
        }
    }
    return worst;
}

double grad_check(const Model& m, const Matrix& window, double label, double eps,
                  std::uint64_t mask_seed) {
    if (!(eps > 0.0)) throw std::invalid_argument("grad_check: eps must be > 0");
    Rng rng(mask_seed);
    const DropoutMasks masks = sample_dropout_masks(m.spec, rng);
    ForwardTrace trace;
    forward_trace(m, window, masks, trace);
    const ParamSet analytic = model_backward(m, trace, label);
    const ParamSet numeric = finite_diff_gradients(m, window, label, masks, eps);
    return max_rel_error(analytic, numeric);
}

}  // namespace stallpred
