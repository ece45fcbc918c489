#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <utility>

#include "stallpred/matrix.hpp"

namespace stallpred {

// Gate indices. The cell candidate (g) is kept alongside the three gates
// because it shares the weight layout.
inline constexpr std::size_t kGateInput = 0;
inline constexpr std::size_t kGateForget = 1;
inline constexpr std::size_t kGateOutput = 2;
inline constexpr std::size_t kGateCell = 3;
inline constexpr std::array<const char*, 4> kGateNames = {"i", "f", "o", "g"};

/// Weights of one LSTM cell, shared across every timestep of a layer.
///
/// For gate k:  z_k = W[k] x_t + U[k] h_{t-1} + b[k]
///   i = sigmoid(z_i), f = sigmoid(z_f), o = sigmoid(z_o), g = tanh(z_g)
///   c_t = f (.) c_{t-1} + i (.) g
///   h_t = o (.) tanh(c_t)
struct LstmCellParams {
    std::size_t input_size = 0;
    std::size_t hidden_size = 0;
    std::array<Matrix, 4> w;  // hidden x input
    std::array<Matrix, 4> u;  // hidden x hidden
    std::array<Vector, 4> b;  // hidden

    static LstmCellParams zeros(std::size_t input_size, std::size_t hidden_size);
    std::size_t scalar_count() const {
        return 4 * (hidden_size * (input_size + hidden_size) + hidden_size);
    }
};

/// Activations of one timestep, kept for backpropagation through time.
struct LstmStep {
    Vector i, f, o, g;  // post-activation gate values
    Vector c;           // cell state after the step
    Vector tanh_c;      // tanh(c), cached for the backward pass
    Vector h;           // output
};

/// One step of the recurrence. Throws std::invalid_argument on shape
/// mismatch between params, input and state.
void lstm_cell_forward(const LstmCellParams& p, const double* x,
                       const Vector& h_prev, const Vector& c_prev, LstmStep& out);

/// Convenience form returning (h_t, c_t).
std::pair<Vector, Vector> lstm_cell_forward(const LstmCellParams& p, const Vector& x,
                                            const Vector& h_prev, const Vector& c_prev);

/// Runs the shared-weight cell over a sequence with zero initial state.
/// Returns one hidden vector per timestep.
std::vector<Vector> lstm_layer_forward(const LstmCellParams& p,
                                       const std::vector<Vector>& seq);

/// Bidirectional layer: the backward cell consumes the time-reversed
/// sequence; output at timestep t is [h_fwd_t ; h_bwd_t] re-aligned to the
/// original time order.
std::vector<Vector> bilstm_layer_forward(const LstmCellParams& fwd,
                                         const LstmCellParams& bwd,
                                         const std::vector<Vector>& seq);

// Numerically stable logistic; no overflow for |z| up to ~1e3.
inline double sigmoid(double z) {
    if (z >= 0.0) {
        double e = std::exp(-z);
        return 1.0 / (1.0 + e);
    }
    double e = std::exp(z);
    return e / (1.0 + e);
}

namespace detail {
// Hot-path step without shape validation; callers check once per layer.
void lstm_cell_step(const LstmCellParams& p, const double* x,
                    const Vector& h_prev, const Vector& c_prev, LstmStep& out);
void check_cell_shapes(const LstmCellParams& p, const Vector& h_prev,
                       const Vector& c_prev);
}  // namespace detail

}  // namespace stallpred
