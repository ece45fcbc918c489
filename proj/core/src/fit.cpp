#include "stallpred/fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "stallpred/errors.hpp"
#include "stallpred/loss.hpp"
#include "stallpred/text.hpp"

namespace stallpred {

namespace {

// Seed-stream tags; keep the shuffle, mask and any future streams disjoint.
constexpr std::uint64_t kShuffleStream = 0x100000000ULL;
constexpr std::uint64_t kMaskStream = 0x200000000ULL;

std::vector<std::vector<double>*> tensor_ptrs(ParamSet& ps) {
    std::vector<std::vector<double>*> out;
    for_each_tensor(ps, [&](std::string_view, std::vector<double>& t) { out.push_back(&t); });
    return out;
}

void zero_tensors(const std::vector<std::vector<double>*>& ts) {
    for (auto* t : ts) std::fill(t->begin(), t->end(), 0.0);
}

// dst += src, tensor by tensor
void add_tensors(const std::vector<std::vector<double>*>& dst,
                 const std::vector<std::vector<double>*>& src) {
    for (std::size_t i = 0; i < dst.size(); ++i) {
        auto& d = *dst[i];
        const auto& s = *src[i];
        for (std::size_t j = 0; j < d.size(); ++j) d[j] += s[j];
    }
}

void scale_tensors(const std::vector<std::vector<double>*>& ts, double s) {
    for (auto* t : ts)
        for (double& v : *t) v *= s;
}

}  // namespace

std::vector<int> labels_of(const Dataset& ds) {
    std::vector<int> out;
    out.reserve(ds.size());
    for (const auto& s : ds.samples) out.push_back(s.label);
    return out;
}

std::string history_to_csv(const TrainHistory& hist) {
    std::string csv = "epoch,train_loss,val_loss,val_accuracy\n";
    for (std::size_t e = 0; e < hist.epochs.size(); ++e) {
        const auto& st = hist.epochs[e];
        csv += std::to_string(e + 1);
        csv += ',';
        csv += fmt_double(st.train_loss);
        csv += ',';
        csv += fmt_double(st.val_loss);
        csv += ',';
        csv += fmt_double(st.val_accuracy);
        csv += '\n';
    }
    return csv;
}

Vector predict_probs(const Model& m, const Dataset& ds, std::size_t threads) {
    Vector probs(ds.size(), 0.0);
    const std::size_t T = std::max<std::size_t>(threads, 1);
    auto worker = [&](std::size_t stream) {
        ForwardTrace trace;
        for (std::size_t i = stream; i < ds.size(); i += T)
            probs[i] = forward_trace(m, ds.samples[i].x, {}, trace);
    };
    if (T == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(T);
        for (std::size_t j = 0; j < T; ++j) pool.emplace_back(worker, j);
        for (auto& th : pool) th.join();
    }
    return probs;
}

TrainHistory fit(Model& m, const Dataset& train, const Dataset& val, const TrainConfig& cfg) {
    validate(cfg);
    validate(m.spec);
    if (train.samples.empty()) throw std::invalid_argument("fit: empty training set");
    if (val.samples.empty()) throw std::invalid_argument("fit: empty validation set");

    const std::size_t n = train.size();
    const std::size_t T = cfg.threads;
    AdamState adam = make_adam_state(m.params);

    // Per-stream gradient buffers plus one reduction target; addresses are
    // collected once and stay valid (tensors never resize during training).
    std::vector<ParamSet> stream_grads(T, zeros_like(m.params));
    ParamSet batch_grads = zeros_like(m.params);
    std::vector<std::vector<std::vector<double>*>> stream_ptrs;
    stream_ptrs.reserve(T);
    for (auto& g : stream_grads) stream_ptrs.push_back(tensor_ptrs(g));
    auto batch_ptrs = tensor_ptrs(batch_grads);
    std::vector<ForwardTrace> traces(T);
    std::vector<double> stream_loss(T, 0.0);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    TrainHistory hist;
    hist.epochs.reserve(cfg.epochs);
    const std::vector<int> val_labels = labels_of(val);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.shuffle) {
            Rng shuffle_rng(mix_seed(cfg.seed, kShuffleStream + epoch));
            shuffle_rng.shuffle(order);
        }
        const std::uint64_t epoch_mask_seed = mix_seed(cfg.seed, kMaskStream + epoch);

        double epoch_loss_sum = 0.0;
        std::size_t batch_count = 0;

        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t bn = std::min(cfg.batch_size, n - start);

            auto worker = [&](std::size_t stream) {
                zero_tensors(stream_ptrs[stream]);
                stream_loss[stream] = 0.0;
                ForwardTrace& trace = traces[stream];
                for (std::size_t k = stream; k < bn; k += T) {
                    const std::size_t idx = order[start + k];
                    const WindowedSample& sample = train.samples[idx];
                    Rng mask_rng(mix_seed(epoch_mask_seed, idx));
                    const DropoutMasks masks = sample_dropout_masks(m.spec, mask_rng);
                    const double p = forward_trace(m, sample.x, masks, trace);
                    stream_loss[stream] += bce_one(p, sample.label);
                    model_backward_into(m, trace, sample.label, stream_grads[stream]);
                }
            };
            if (T == 1) {
                worker(0);
            } else {
                std::vector<std::thread> pool;
                pool.reserve(T);
                for (std::size_t j = 0; j < T; ++j) pool.emplace_back(worker, j);
                for (auto& th : pool) th.join();
            }

            double batch_loss = 0.0;
            for (std::size_t j = 0; j < T; ++j) batch_loss += stream_loss[j];
            batch_loss /= static_cast<double>(bn);
            if (!std::isfinite(batch_loss))
                throw NumericError("fit: non-finite loss at epoch " + std::to_string(epoch + 1));

            zero_tensors(batch_ptrs);
            for (std::size_t j = 0; j < T; ++j) add_tensors(batch_ptrs, stream_ptrs[j]);
            scale_tensors(batch_ptrs, 1.0 / static_cast<double>(bn));
            adam_step(adam, m.params, batch_grads, cfg);

            epoch_loss_sum += batch_loss;
            ++batch_count;
        }

        EpochStats st;
        st.train_loss = epoch_loss_sum / static_cast<double>(batch_count);
        const Vector val_probs = predict_probs(m, val, T);
        st.val_loss = bce_loss(val_probs, val_labels);
        std::size_t correct = 0;
        for (std::size_t i = 0; i < val_probs.size(); ++i) {
            const int pred = val_probs[i] >= 0.5 ? 1 : 0;
            if (pred == val_labels[i]) ++correct;
        }
        st.val_accuracy = static_cast<double>(correct) / static_cast<double>(val_probs.size());
        hist.epochs.push_back(st);
    }
    return hist;
}

}  // namespace stallpred
