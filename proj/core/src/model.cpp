#include "stallpred/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stallpred {

LayerSpec lstm_layer(std::size_t units) { return {LayerKind::LstmUni, units, Activation::Tanh, 0.0}; }
LayerSpec bilstm_layer(std::size_t units) { return {LayerKind::LstmBi, units, Activation::Tanh, 0.0}; }
LayerSpec dense_layer(std::size_t units, Activation act) { return {LayerKind::Dense, units, act, 0.0}; }
LayerSpec dropout_layer(double rate) { return {LayerKind::Dropout, 0, Activation::Relu, rate}; }
LayerSpec output_layer() { return {LayerKind::OutputSigmoid, 1, Activation::Sigmoid, 0.0}; }

static bool is_lstm(LayerKind k) { return k == LayerKind::LstmUni || k == LayerKind::LstmBi; }

void validate(const ModelSpec& spec) {
    if (spec.input_features == 0) throw std::invalid_argument("spec: input_features must be >= 1");
    if (spec.window_len == 0) throw std::invalid_argument("spec: window_len must be >= 1");
    if (spec.layers.size() < 2) throw std::invalid_argument("spec: needs at least one LSTM layer and the output unit");
    const auto& layers = spec.layers;
    if (layers.back().kind != LayerKind::OutputSigmoid)
        throw std::invalid_argument("spec: last layer must be OutputSigmoid");
    std::size_t n_out = 0;
    for (const auto& l : layers)
        if (l.kind == LayerKind::OutputSigmoid) ++n_out;
    if (n_out != 1) throw std::invalid_argument("spec: exactly one OutputSigmoid layer allowed");
    if (!is_lstm(layers.front().kind))
        throw std::invalid_argument("spec: first layer must be an LSTM layer");

    bool seen_non_lstm = false;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& l = layers[i];
        switch (l.kind) {
            case LayerKind::LstmUni:
            case LayerKind::LstmBi:
                if (seen_non_lstm)
                    throw std::invalid_argument("spec: LSTM layers must form a contiguous stack at the front");
                if (l.hidden_units == 0) throw std::invalid_argument("spec: LSTM hidden_units must be >= 1");
                break;
            case LayerKind::Dense:
                seen_non_lstm = true;
                if (l.hidden_units == 0) throw std::invalid_argument("spec: Dense hidden_units must be >= 1");
                break;
            case LayerKind::Dropout: {
                seen_non_lstm = true;
                if (!(l.drop_rate >= 0.0 && l.drop_rate < 1.0))
                    throw std::invalid_argument("spec: drop_rate must be in [0,1)");
                // Dropout stays off the recurrent path: allowed only directly
                // after a Dense layer or after the last LSTM of the stack.
                const LayerKind prev = layers[i - 1].kind;
                if (prev != LayerKind::Dense && !is_lstm(prev))
                    throw std::invalid_argument("spec: Dropout may only follow a Dense or the final LSTM layer");
                for (std::size_t j = i + 1; j < layers.size(); ++j)
                    if (is_lstm(layers[j].kind))
                        throw std::invalid_argument("spec: Dropout between LSTM layers is not allowed");
                break;
            }
            case LayerKind::OutputSigmoid:
                seen_non_lstm = true;
                break;
        }
    }
}

std::size_t param_count(const ModelSpec& spec) {
    validate(spec);
    std::size_t width = spec.input_features;
    std::size_t total = 0;
    for (const auto& l : spec.layers) {
        switch (l.kind) {
            case LayerKind::LstmUni: {
                const std::size_t h = l.hidden_units;
                total += 4 * (h * (width + h) + h);
                width = h;
                break;
            }
            case LayerKind::LstmBi: {
                const std::size_t h = l.hidden_units;
                total += 2 * 4 * (h * (width + h) + h);
                width = 2 * h;
                break;
            }
            case LayerKind::Dense:
                total += l.hidden_units * (width + 1);
                width = l.hidden_units;
                break;
            case LayerKind::Dropout:
                break;
            case LayerKind::OutputSigmoid:
                total += width + 1;
                width = 1;
                break;
        }
    }
    return total;
}

ModelSpec arch_a() {
    ModelSpec s;
    s.layers = {lstm_layer(32), lstm_layer(16), dense_layer(16), dense_layer(16),
                dropout_layer(0.5), output_layer()};
    return s;
}

ModelSpec arch_b() {
    ModelSpec s;
    s.layers = {lstm_layer(224), lstm_layer(128), lstm_layer(96), lstm_layer(80),
                dense_layer(64), dropout_layer(0.5), dense_layer(32), output_layer()};
    return s;
}

ModelSpec arch_c() {
    ModelSpec s;
    s.layers = {bilstm_layer(192), bilstm_layer(160), bilstm_layer(128), bilstm_layer(32),
                bilstm_layer(32), dense_layer(16), dense_layer(16), dropout_layer(0.5),
                output_layer()};
    return s;
}

ModelSpec spec_preset(const std::string& name) {
    if (name == "arch-a") return arch_a();
    if (name == "arch-b") return arch_b();
    if (name == "arch-c") return arch_c();
    throw std::invalid_argument("unknown model preset: " + name);
}

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

Matrix he_init(std::size_t rows, std::size_t cols, std::size_t fan_in, std::uint64_t seed) {
    if (fan_in == 0) throw std::invalid_argument("he_init: fan_in must be >= 1");
    Matrix m(rows, cols);
    Rng rng(seed);
    const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (double& v : m.data) v = stddev * rng.normal();
    return m;
}

static LstmCellParams init_cell(std::size_t in, std::size_t h, std::uint64_t seed,
                                std::uint64_t& stream, const InitOptions& opts) {
    LstmCellParams p = LstmCellParams::zeros(in, h);
    for (std::size_t k = 0; k < 4; ++k) {
        p.w[k] = he_init(h, in, in, mix_seed(seed, stream++));
        if (opts.he_recurrent)
            p.u[k] = he_init(h, h, h, mix_seed(seed, stream++));
        else
            ++stream;
    }
    for (std::size_t j = 0; j < h; ++j) p.b[kGateForget][j] = opts.forget_bias;
    return p;
}

Model init_model(const ModelSpec& spec, std::uint64_t seed, const InitOptions& opts) {
    validate(spec);
    Model m;
    m.spec = spec;
    m.rng_seed = seed;
    std::uint64_t stream = 0;
    std::size_t width = spec.input_features;
    for (const auto& l : spec.layers) {
        switch (l.kind) {
            case LayerKind::LstmUni: {
                LstmLayerParams lp{init_cell(width, l.hidden_units, seed, stream, opts)};
                m.params.layers.emplace_back(std::move(lp));
                width = l.hidden_units;
                break;
            }
            case LayerKind::LstmBi: {
                BiLstmLayerParams bp;
                bp.fwd = init_cell(width, l.hidden_units, seed, stream, opts);
                bp.bwd = init_cell(width, l.hidden_units, seed, stream, opts);
                m.params.layers.emplace_back(std::move(bp));
                width = 2 * l.hidden_units;
                break;
            }
            case LayerKind::Dense: {
                DenseParams dp;
                dp.w = he_init(l.hidden_units, width, width, mix_seed(seed, stream++));
                dp.b = Vector(l.hidden_units, 0.0);
                dp.activation = l.activation;
                m.params.layers.emplace_back(std::move(dp));
                width = l.hidden_units;
                break;
            }
            case LayerKind::Dropout:
                m.params.layers.emplace_back(NoParams{});
                break;
            case LayerKind::OutputSigmoid: {
                OutputParams op;
                op.w = he_init(1, width, width, mix_seed(seed, stream++)).data;
                op.b = Vector(1, 0.0);
                m.params.layers.emplace_back(std::move(op));
                width = 1;
                break;
            }
        }
    }
    return m;
}

template <typename PS, typename Fn>
static void visit_tensors(PS& ps, Fn&& fn) {
    for (std::size_t li = 0; li < ps.layers.size(); ++li) {
        const std::string base = "layer" + std::to_string(li);
        auto& lp = ps.layers[li];
        if (auto* p = std::get_if<LstmLayerParams>(&lp)) {
            for (std::size_t k = 0; k < 4; ++k) {
                fn(base + ".lstm.w_" + kGateNames[k], p->cell.w[k].data);
                fn(base + ".lstm.u_" + kGateNames[k], p->cell.u[k].data);
                fn(base + ".lstm.b_" + kGateNames[k], p->cell.b[k]);
            }
        } else if (auto* p = std::get_if<BiLstmLayerParams>(&lp)) {
            const char* dirs[2] = {"fwd", "bwd"};
            LstmCellParams* cells[2] = {&p->fwd, &p->bwd};
            for (int d = 0; d < 2; ++d) {
                for (std::size_t k = 0; k < 4; ++k) {
                    fn(base + ".bilstm." + dirs[d] + ".w_" + kGateNames[k], cells[d]->w[k].data);
                    fn(base + ".bilstm." + dirs[d] + ".u_" + kGateNames[k], cells[d]->u[k].data);
                    fn(base + ".bilstm." + dirs[d] + ".b_" + kGateNames[k], cells[d]->b[k]);
                }
            }
        } else if (auto* p = std::get_if<DenseParams>(&lp)) {
            fn(base + ".dense.w", p->w.data);
            fn(base + ".dense.b", p->b);
        } else if (auto* p = std::get_if<OutputParams>(&lp)) {
            fn(base + ".output.w", p->w);
            fn(base + ".output.b", p->b);
        }
    }
}

void for_each_tensor(ParamSet& ps,
                     const std::function<void(std::string_view, std::vector<double>&)>& fn) {
    visit_tensors(ps, [&](const std::string& name, std::vector<double>& t) { fn(name, t); });
}

void for_each_tensor(const ParamSet& ps,
                     const std::function<void(std::string_view, const std::vector<double>&)>& fn) {
    // visitation never writes through the callback's const reference
    visit_tensors(const_cast<ParamSet&>(ps),
                  [&](const std::string& name, std::vector<double>& t) {
                      fn(name, static_cast<const std::vector<double>&>(t));
                  });
}

ParamSet zeros_like(const ParamSet& ref) {
    ParamSet out = ref;
    for_each_tensor(out, [](std::string_view, std::vector<double>& t) {
        std::fill(t.begin(), t.end(), 0.0);
    });
    return out;
}

std::size_t scalar_count(const ParamSet& ps) {
    std::size_t n = 0;
    for_each_tensor(ps, [&](std::string_view, const std::vector<double>& t) { n += t.size(); });
    return n;
}

// ---------------------------------------------------------------------------
// Forward
// ---------------------------------------------------------------------------

DropoutMasks sample_dropout_masks(const ModelSpec& spec, Rng& rng) {
    DropoutMasks masks;
    std::size_t width = spec.input_features;
    for (const auto& l : spec.layers) {
        switch (l.kind) {
            case LayerKind::LstmUni: width = l.hidden_units; break;
            case LayerKind::LstmBi: width = 2 * l.hidden_units; break;
            case LayerKind::Dense: width = l.hidden_units; break;
            case LayerKind::Dropout: {
                Vector mask(width);
                const double keep_scale = 1.0 / (1.0 - l.drop_rate);
                for (double& v : mask)
                    v = (rng.uniform() >= l.drop_rate) ? keep_scale : 0.0;
                masks.push_back(std::move(mask));
                break;
            }
            case LayerKind::OutputSigmoid: width = 1; break;
        }
    }
    return masks;
}

namespace {

template <class T>
T& ensure_trace(LayerTrace& lt) {
    if (!std::holds_alternative<T>(lt)) lt = T{};
    return std::get<T>(lt);
}

void run_lstm_dir(const LstmCellParams& p, LstmLayerTrace& tr) {
    const std::size_t T = tr.inputs.size();
    const Vector zero(p.hidden_size, 0.0);
    detail::check_cell_shapes(p, zero, zero);
    if (tr.inputs.front().size() != p.input_size)
        throw std::invalid_argument("model_forward: layer input width mismatch");
    tr.steps.resize(T);
    const Vector* hp = &zero;
    const Vector* cp = &zero;
    for (std::size_t t = 0; t < T; ++t) {
        detail::lstm_cell_step(p, tr.inputs[t].data(), *hp, *cp, tr.steps[t]);
        hp = &tr.steps[t].h;
        cp = &tr.steps[t].c;
    }
}

// Vector handed to the dense head: the terminal state of the last LSTM
// layer; for a bidirectional layer, each direction's own final state
// concatenated (the backward stream ends at original t = 0).
Vector head_vector(const LayerTrace& lt) {
    if (const auto* u = std::get_if<LstmLayerTrace>(&lt)) return u->steps.back().h;
    const auto& b = std::get<BiLstmLayerTrace>(lt);
    const Vector& hf = b.fwd.steps.back().h;
    const Vector& hb = b.bwd.steps.back().h;
    Vector out(hf.size() + hb.size());
    std::copy(hf.begin(), hf.end(), out.begin());
    std::copy(hb.begin(), hb.end(), out.begin() + static_cast<std::ptrdiff_t>(hf.size()));
    return out;
}

void apply_activation(Activation act, const Vector& z, Vector& out) {
    out.resize(z.size());
    switch (act) {
        case Activation::Tanh:
            for (std::size_t j = 0; j < z.size(); ++j) out[j] = std::tanh(z[j]);
            break;
        case Activation::Relu:
            for (std::size_t j = 0; j < z.size(); ++j) out[j] = z[j] > 0.0 ? z[j] : 0.0;
            break;
        case Activation::Sigmoid:
            for (std::size_t j = 0; j < z.size(); ++j) out[j] = sigmoid(z[j]);
            break;
    }
}

}  // namespace

double forward_trace(const Model& m, const Matrix& window, const DropoutMasks& masks,
                     ForwardTrace& trace) {
    const ModelSpec& spec = m.spec;
    if (window.rows != spec.input_features || window.cols != spec.window_len)
        throw std::invalid_argument("model_forward: window shape mismatch");
    std::size_t n_dropout = 0;
    for (const auto& l : spec.layers)
        if (l.kind == LayerKind::Dropout) ++n_dropout;
    if (!masks.empty() && masks.size() != n_dropout)
        throw std::invalid_argument("model_forward: dropout mask count mismatch");

    const std::size_t T = spec.window_len;
    trace.layers.resize(spec.layers.size());

    // Window columns as the input sequence.
    std::vector<Vector> seq(T, Vector(spec.input_features));
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t f = 0; f < spec.input_features; ++f) seq[t][f] = window(f, t);

    Vector head;          // current head-stage vector
    bool in_head = false;
    std::size_t mask_idx = 0;

    for (std::size_t li = 0; li < spec.layers.size(); ++li) {
        const LayerSpec& l = spec.layers[li];
        const LayerParams& lp = m.params.layers[li];
        switch (l.kind) {
            case LayerKind::LstmUni: {
                auto& tr = ensure_trace<LstmLayerTrace>(trace.layers[li]);
                tr.inputs = std::move(seq);
                run_lstm_dir(std::get<LstmLayerParams>(lp).cell, tr);
                seq.resize(tr.steps.size());
                for (std::size_t t = 0; t < tr.steps.size(); ++t) seq[t] = tr.steps[t].h;
                break;
            }
            case LayerKind::LstmBi: {
                auto& tr = ensure_trace<BiLstmLayerTrace>(trace.layers[li]);
                const auto& bp = std::get<BiLstmLayerParams>(lp);
                tr.fwd.inputs = seq;
                tr.bwd.inputs.assign(seq.rbegin(), seq.rend());
                run_lstm_dir(bp.fwd, tr.fwd);
                run_lstm_dir(bp.bwd, tr.bwd);
                const std::size_t h = bp.fwd.hidden_size;
                for (std::size_t t = 0; t < T; ++t) {
                    seq[t].resize(2 * h);
                    for (std::size_t j = 0; j < h; ++j) {
                        seq[t][j] = tr.fwd.steps[t].h[j];
                        seq[t][h + j] = tr.bwd.steps[T - 1 - t].h[j];
                    }
                }
                break;
            }
            case LayerKind::Dense: {
                if (!in_head) {
                    // Head consumes each direction's terminal state.
                    head = head_vector(trace.layers[li - 1]);
                    in_head = true;
                }
                auto& tr = ensure_trace<DenseTrace>(trace.layers[li]);
                const auto& dp = std::get<DenseParams>(lp);
                if (dp.w.cols != head.size())
                    throw std::invalid_argument("model_forward: dense input width mismatch");
                tr.in = head;
                tr.z.assign(dp.b.begin(), dp.b.end());
                matvec_add(dp.w, tr.in.data(), tr.z.data());
                apply_activation(dp.activation, tr.z, tr.out);
                head = tr.out;
                break;
            }
            case LayerKind::Dropout: {
                if (!in_head) {
                    head = head_vector(trace.layers[li - 1]);
                    in_head = true;
                }
                auto& tr = ensure_trace<DropoutTrace>(trace.layers[li]);
                tr.in = head;
                if (masks.empty()) {
                    tr.mask.assign(head.size(), 1.0);
                } else {
                    tr.mask = masks[mask_idx];
                    if (tr.mask.size() != head.size())
                        throw std::invalid_argument("model_forward: dropout mask width mismatch");
                }
                ++mask_idx;
                tr.out.resize(head.size());
                for (std::size_t j = 0; j < head.size(); ++j) tr.out[j] = tr.in[j] * tr.mask[j];
                head = tr.out;
                break;
            }
            case LayerKind::OutputSigmoid: {
                if (!in_head) {
                    head = head_vector(trace.layers[li - 1]);
                    in_head = true;
                }
                auto& tr = ensure_trace<OutputTrace>(trace.layers[li]);
                const auto& op = std::get<OutputParams>(lp);
                if (op.w.size() != head.size())
                    throw std::invalid_argument("model_forward: output input width mismatch");
                tr.in = head;
                double z = op.b[0];
                for (std::size_t j = 0; j < head.size(); ++j) z += op.w[j] * head[j];
                tr.z = z;
                tr.p = sigmoid(z);
                trace.prob = tr.p;
                break;
            }
        }
    }
    return trace.prob;
}

double model_forward(const Model& m, const Matrix& window, RunMode mode,
                     std::uint64_t dropout_seed) {
    ForwardTrace trace;
    if (mode == RunMode::Infer) return forward_trace(m, window, {}, trace);
    Rng rng(dropout_seed);
    DropoutMasks masks = sample_dropout_masks(m.spec, rng);
    return forward_trace(m, window, masks, trace);
}

}  // namespace stallpred
