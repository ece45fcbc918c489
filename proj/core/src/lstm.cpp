#include "stallpred/lstm.hpp"

#include <stdexcept>

namespace stallpred {

LstmCellParams LstmCellParams::zeros(std::size_t input_size, std::size_t hidden_size) {
    LstmCellParams p;
    p.input_size = input_size;
    p.hidden_size = hidden_size;
    for (std::size_t k = 0; k < 4; ++k) {
        p.w[k] = Matrix(hidden_size, input_size);
        p.u[k] = Matrix(hidden_size, hidden_size);
        p.b[k] = Vector(hidden_size, 0.0);
    }
    return p;
}

namespace detail {

void check_cell_shapes(const LstmCellParams& p, const Vector& h_prev,
                       const Vector& c_prev) {
    const std::size_t h = p.hidden_size;
    for (std::size_t k = 0; k < 4; ++k) {
        if (p.w[k].rows != h || p.w[k].cols != p.input_size ||
            p.u[k].rows != h || p.u[k].cols != h || p.b[k].size() != h)
            throw std::invalid_argument("lstm cell: parameter shape mismatch");
    }
    if (h_prev.size() != h || c_prev.size() != h)
        throw std::invalid_argument("lstm cell: state size mismatch");
}

void lstm_cell_step(const LstmCellParams& p, const double* x,
                    const Vector& h_prev, const Vector& c_prev, LstmStep& out) {
    const std::size_t h = p.hidden_size;
    Vector* gates[4] = {&out.i, &out.f, &out.o, &out.g};
    for (std::size_t k = 0; k < 4; ++k) {
        Vector& z = *gates[k];
        z.assign(p.b[k].begin(), p.b[k].end());
        matvec_add(p.w[k], x, z.data());
        matvec_add(p.u[k], h_prev.data(), z.data());
    }
    for (std::size_t j = 0; j < h; ++j) {
        out.i[j] = sigmoid(out.i[j]);
        out.f[j] = sigmoid(out.f[j]);
        out.o[j] = sigmoid(out.o[j]);
        out.g[j] = std::tanh(out.g[j]);
    }
    out.c.resize(h);
    out.tanh_c.resize(h);
    out.h.resize(h);
    for (std::size_t j = 0; j < h; ++j) {
        out.c[j] = out.f[j] * c_prev[j] + out.i[j] * out.g[j];
        out.tanh_c[j] = std::tanh(out.c[j]);
        out.h[j] = out.o[j] * out.tanh_c[j];
    }
}

}  // namespace detail

void lstm_cell_forward(const LstmCellParams& p, const double* x,
                       const Vector& h_prev, const Vector& c_prev, LstmStep& out) {
    detail::check_cell_shapes(p, h_prev, c_prev);
    detail::lstm_cell_step(p, x, h_prev, c_prev, out);
}

std::pair<Vector, Vector> lstm_cell_forward(const LstmCellParams& p, const Vector& x,
                                            const Vector& h_prev, const Vector& c_prev) {
    if (x.size() != p.input_size)
        throw std::invalid_argument("lstm_cell_forward: input size mismatch");
    LstmStep step;
    lstm_cell_forward(p, x.data(), h_prev, c_prev, step);
    return {std::move(step.h), std::move(step.c)};
}

std::vector<Vector> lstm_layer_forward(const LstmCellParams& p,
                                       const std::vector<Vector>& seq) {
    if (seq.empty()) throw std::invalid_argument("lstm_layer_forward: empty sequence");
    const Vector zero(p.hidden_size, 0.0);
    detail::check_cell_shapes(p, zero, zero);
    std::vector<Vector> out;
    out.reserve(seq.size());
    LstmStep step;
    Vector h = zero, c = zero;
    for (const Vector& x : seq) {
        if (x.size() != p.input_size)
            throw std::invalid_argument("lstm_layer_forward: input size mismatch");
        detail::lstm_cell_step(p, x.data(), h, c, step);
        h = step.h;
        c = step.c;
        out.push_back(h);
    }
    return out;
}

std::vector<Vector> bilstm_layer_forward(const LstmCellParams& fwd,
                                         const LstmCellParams& bwd,
                                         const std::vector<Vector>& seq) {
    if (seq.empty()) throw std::invalid_argument("bilstm_layer_forward: empty sequence");
    if (fwd.hidden_size != bwd.hidden_size || fwd.input_size != bwd.input_size)
        throw std::invalid_argument("bilstm_layer_forward: direction shape mismatch");
    const std::size_t n = seq.size();
    std::vector<Vector> f_out = lstm_layer_forward(fwd, seq);
    std::vector<Vector> rev(seq.rbegin(), seq.rend());
    std::vector<Vector> b_out = lstm_layer_forward(bwd, rev);
    const std::size_t h = fwd.hidden_size;
    std::vector<Vector> out(n, Vector(2 * h));
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t j = 0; j < h; ++j) {
            out[t][j] = f_out[t][j];
            out[t][h + j] = b_out[n - 1 - t][j];  // re-align to original order
        }
    }
    return out;
}

}  // namespace stallpred
