#include "stallpred/windows.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include "stallpred/errors.hpp"
#include "stallpred/rng.hpp"

namespace stallpred {

std::vector<WindowedSample> extract_windows(const TimeSeries& ts, std::size_t window_len,
                                            std::size_t horizon) {
    if (window_len == 0 || horizon == 0)
        throw std::invalid_argument("extract_windows: window_len and horizon must be >= 1");
    const std::size_t len = ts.length();
    std::vector<WindowedSample> out;
    if (len < window_len + horizon) return out;  // too short, no samples
    out.reserve(len - window_len - horizon + 1);
    for (std::size_t t = window_len - 1; t + horizon < len; ++t) {
        WindowedSample s;
        s.x = Matrix(kNumFlightParams, window_len);
        for (std::size_t f = 0; f < kNumFlightParams; ++f)
            for (std::size_t k = 0; k < window_len; ++k)
                s.x(f, k) = ts.params[f][t - window_len + 1 + k];
        s.label = ts.stall_warning[t + horizon] != 0 ? 1 : 0;
        out.push_back(std::move(s));
    }
    return out;
}

Dataset assemble_windows(const std::vector<TimeSeries>& corpus, std::size_t window_len,
                         std::size_t horizon) {
    Dataset ds;
    for (std::size_t si = 0; si < corpus.size(); ++si) {
        const TimeSeries& ts = corpus[si];
        std::vector<WindowedSample> ws = extract_windows(ts, window_len, horizon);
        for (std::size_t k = 0; k < ws.size(); ++k) {
            const std::size_t t = window_len - 1 + k;
            SampleProvenance prov;
            prov.series_index = static_cast<std::uint32_t>(si);
            prov.series_id = ts.id;
            prov.window_end = static_cast<std::uint32_t>(t);
            prov.label_index = static_cast<std::uint32_t>(t + horizon);
            bool has_warning = false;
            for (std::size_t u = t + 1 - window_len; u <= t && !has_warning; ++u)
                has_warning = ts.stall_warning[u] != 0;
            prov.window_has_warning = has_warning;
            ds.samples.push_back(std::move(ws[k]));
            ds.provenance.push_back(std::move(prov));
        }
    }
    return ds;
}

namespace {

// Maximal run of eligible windows whose dependency ranges chain-overlap
// within one series. Whatever a split takes from a component, no other
// split may touch the rest of it.
struct Component {
    std::vector<std::size_t> pos;  // pool indices, ascending window_end
    std::vector<std::size_t> neg;
};

void check_quotas(const std::size_t want_pos[3], const std::size_t got_pos[3],
                  const std::size_t want_neg[3], const std::size_t got_neg[3]) {
    for (int split = 0; split < 3; ++split) {
        if (got_pos[split] < want_pos[split]) {
            const std::size_t shortfall = want_pos[split] - got_pos[split];
            throw CapacityError("balance_and_split: insufficient positive samples, shortfall=" +
                                    std::to_string(shortfall),
                                shortfall);
        }
        if (got_neg[split] < want_neg[split]) {
            const std::size_t shortfall = want_neg[split] - got_neg[split];
            throw CapacityError("balance_and_split: insufficient negative samples, shortfall=" +
                                    std::to_string(shortfall),
                                shortfall);
        }
    }
}

}  // namespace

Splits balance_and_split(const Dataset& pool, const SplitCounts& counts, std::uint64_t seed,
                         bool segment_exclusive, std::size_t window_len, std::size_t horizon) {
    // Eligible candidates: positives as labeled; negatives additionally must
    // be free of in-window warnings.
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (pool.samples[i].label != 0)
            pos.push_back(i);
        else if (!pool.provenance[i].window_has_warning)
            neg.push_back(i);
    }

    const std::size_t want_pos[3] = {counts.train_pos, counts.val_each, counts.test_each};
    const std::size_t want_neg[3] = {counts.train_neg, counts.val_each, counts.test_each};
    std::size_t got_pos[3] = {0, 0, 0};
    std::size_t got_neg[3] = {0, 0, 0};
    std::vector<std::size_t> chosen[3];
    Rng rng(seed);

    if (!segment_exclusive) {
        rng.shuffle(pos);
        rng.shuffle(neg);
        auto place = [&](const std::vector<std::size_t>& candidates, const std::size_t want[3],
                         std::size_t got[3]) {
            for (std::size_t idx : candidates) {
                for (int split = 0; split < 3; ++split) {
                    if (got[split] >= want[split]) continue;
                    chosen[split].push_back(idx);
                    ++got[split];
                    break;
                }
            }
        };
        place(pos, want_pos, got_pos);
        place(neg, want_neg, got_neg);
    } else {
        // Group candidates into per-series overlap components. Two windows
        // conflict when their [t-window_len+1, t+horizon] ranges intersect,
        // i.e. when their end indices differ by < window_len + horizon.
        std::vector<std::size_t> eligible = pos;
        eligible.insert(eligible.end(), neg.begin(), neg.end());
        std::sort(eligible.begin(), eligible.end(), [&](std::size_t a, std::size_t b) {
            const auto& pa = pool.provenance[a];
            const auto& pb = pool.provenance[b];
            if (pa.series_index != pb.series_index) return pa.series_index < pb.series_index;
            return pa.window_end < pb.window_end;
        });
        const std::uint32_t gap = static_cast<std::uint32_t>(window_len + horizon);
        std::vector<Component> components;
        for (std::size_t k = 0; k < eligible.size(); ++k) {
            const auto& prov = pool.provenance[eligible[k]];
            const bool fresh =
                components.empty() || k == 0 ||
                pool.provenance[eligible[k - 1]].series_index != prov.series_index ||
                prov.window_end - pool.provenance[eligible[k - 1]].window_end >= gap;
            if (fresh) components.emplace_back();
            auto& comp = components.back();
            (pool.samples[eligible[k]].label != 0 ? comp.pos : comp.neg)
                .push_back(eligible[k]);
        }

        rng.shuffle(components);
        for (const Component& comp : components) {
            for (int split = 0; split < 3; ++split) {
                const std::size_t need_pos = want_pos[split] - got_pos[split];
                const std::size_t need_neg = want_neg[split] - got_neg[split];
                const std::size_t take_pos = std::min(need_pos, comp.pos.size());
                const std::size_t take_neg = std::min(need_neg, comp.neg.size());
                if (take_pos == 0 && take_neg == 0) continue;
                for (std::size_t k = 0; k < take_pos; ++k) chosen[split].push_back(comp.pos[k]);
                for (std::size_t k = 0; k < take_neg; ++k) chosen[split].push_back(comp.neg[k]);
                got_pos[split] += take_pos;
                got_neg[split] += take_neg;
                break;  // the rest of the component stays out of other splits
            }
        }
    }

    check_quotas(want_pos, got_pos, want_neg, got_neg);

    Splits out;
    Dataset* dsets[3] = {&out.train, &out.val, &out.test};
    for (int split = 0; split < 3; ++split) {
        // Deterministic order within each split.
        std::sort(chosen[split].begin(), chosen[split].end());
        for (std::size_t idx : chosen[split]) {
            dsets[split]->samples.push_back(pool.samples[idx]);
            dsets[split]->provenance.push_back(pool.provenance[idx]);
        }
    }
    return out;
}

}  // namespace stallpred
