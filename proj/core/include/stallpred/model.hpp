#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "stallpred/lstm.hpp"
#include "stallpred/matrix.hpp"
#include "stallpred/rng.hpp"

namespace stallpred {

enum class LayerKind { LstmUni, LstmBi, Dense, Dropout, OutputSigmoid };
enum class Activation { Tanh, Relu, Sigmoid };

struct LayerSpec {
    LayerKind kind = LayerKind::Dense;
    std::size_t hidden_units = 0;              // per direction for LstmBi
    Activation activation = Activation::Relu;  // Dense layers only
    double drop_rate = 0.0;                    // Dropout layers only, in [0,1)
};

LayerSpec lstm_layer(std::size_t units);
LayerSpec bilstm_layer(std::size_t units);
LayerSpec dense_layer(std::size_t units, Activation act = Activation::Relu);
LayerSpec dropout_layer(double rate);
LayerSpec output_layer();

/// Network description: a contiguous stack of LSTM layers (uni or bi),
/// then a fully-connected head, ending in the single sigmoid output unit.
struct ModelSpec {
    std::size_t input_features = 16;
    std::size_t window_len = 10;
    std::vector<LayerSpec> layers;
};

/// Structural checks. Dropout is rejected anywhere a recurrent layer would
/// follow it, and may only directly follow a Dense layer or the last LSTM
/// layer of the stack. Throws std::invalid_argument.
void validate(const ModelSpec& spec);

/// Exact trainable-scalar count: 4*(h*(in+h)+h) per LSTM direction,
/// out*(in+1) per dense/output layer.
std::size_t param_count(const ModelSpec& spec);

// Presets. arch-a counts 9,969 trainable parameters.
ModelSpec arch_a();
ModelSpec arch_b();
ModelSpec arch_c();
ModelSpec spec_preset(const std::string& name);  // "arch-a" | "arch-b" | "arch-c"

std::string spec_to_json(const ModelSpec& spec);
ModelSpec spec_from_json_text(const std::string& text);

// ---------------------------------------------------------------------------
// Parameter storage
// ---------------------------------------------------------------------------

struct LstmLayerParams { LstmCellParams cell; };
struct BiLstmLayerParams { LstmCellParams fwd, bwd; };
struct DenseParams { Matrix w; Vector b; Activation activation = Activation::Relu; };
struct NoParams {};
struct OutputParams { Vector w; Vector b; };  // b has exactly one entry

using LayerParams =
    std::variant<LstmLayerParams, BiLstmLayerParams, DenseParams, NoParams, OutputParams>;

/// Ordered parameter tensors for a spec; also reused as gradient storage.
struct ParamSet {
    std::vector<LayerParams> layers;
};

struct Model {
    ModelSpec spec;
    ParamSet params;
    std::uint64_t rng_seed = 0;
};

struct InitOptions {
    // He init on the recurrent (U) matrices; when off they start at zero and
    // only the feedforward path carries signal before training.
    bool he_recurrent = true;
    double forget_bias = 1.0;  // all other biases start at zero
};

/// rows x cols matrix with i.i.d. Normal(0, 2/fan_in) entries; deterministic
/// per seed. fan_in = 0 throws std::invalid_argument.
Matrix he_init(std::size_t rows, std::size_t cols, std::size_t fan_in, std::uint64_t seed);

Model init_model(const ModelSpec& spec, std::uint64_t seed, const InitOptions& opts = {});

ParamSet zeros_like(const ParamSet& ref);
std::size_t scalar_count(const ParamSet& ps);

/// Visits every tensor in canonical order with a stable diagnostic name
/// (e.g. "layer0.lstm.w_i", "layer2.dense.b").
void for_each_tensor(ParamSet& ps,
                     const std::function<void(std::string_view, std::vector<double>&)>& fn);
void for_each_tensor(const ParamSet& ps,
                     const std::function<void(std::string_view, const std::vector<double>&)>& fn);

// ---------------------------------------------------------------------------
// Forward pass
// ---------------------------------------------------------------------------

enum class RunMode { Train, Infer };

/// Inverted-dropout masks: one vector per Dropout layer in spec order, each
/// entry 0 (dropped) or 1/(1-rate) (kept, pre-scaled). Empty list = dropout
/// disabled.
using DropoutMasks = std::vector<Vector>;

DropoutMasks sample_dropout_masks(const ModelSpec& spec, Rng& rng);

struct LstmLayerTrace {
    std::vector<Vector> inputs;   // input sequence as consumed (internal order)
    std::vector<LstmStep> steps;  // per-timestep activations
};
struct BiLstmLayerTrace {
    LstmLayerTrace fwd;  // original time order
    LstmLayerTrace bwd;  // over the reversed sequence
};
struct DenseTrace { Vector in, z, out; };
struct DropoutTrace { Vector in, mask, out; };
struct OutputTrace { Vector in; double z = 0.0, p = 0.0; };

using LayerTrace =
    std::variant<LstmLayerTrace, BiLstmLayerTrace, DenseTrace, DropoutTrace, OutputTrace>;

/// Recorded activations of one forward pass, consumed by the backward pass.
/// Reusable across samples; buffers are overwritten in place.
struct ForwardTrace {
    std::vector<LayerTrace> layers;
    double prob = 0.0;
};

/// Forward pass with recorded activations and the given fixed dropout masks.
/// Returns the stall probability in (0,1).
double forward_trace(const Model& m, const Matrix& window, const DropoutMasks& masks,
                     ForwardTrace& trace);

/// Plain forward pass. Train mode samples fresh masks from dropout_seed and
/// applies inverted dropout; infer mode is deterministic (dropout = identity).
double model_forward(const Model& m, const Matrix& window, RunMode mode,
                     std::uint64_t dropout_seed = 0);

}  // namespace stallpred
