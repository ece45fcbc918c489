#include "stallpred/tune.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stallpred/errors.hpp"
#include "stallpred/rng.hpp"
#include "stallpred/text.hpp"

namespace stallpred {

void validate(const SearchSpace& space) {
    if (space.dims.empty()) throw std::invalid_argument("search space: no dimensions");
    for (const auto& d : space.dims) {
        if (d.kind == DimKind::Categorical) {
            if (d.choices.empty())
                throw std::invalid_argument("search space: categorical dim '" + d.name +
                                            "' has no choices");
            continue;
        }
        if (!(d.low < d.high))
            throw std::invalid_argument("search space: dim '" + d.name + "' needs low < high");
        if (d.kind == DimKind::ContinuousLog && !(d.low > 0.0))
            throw std::invalid_argument("search space: log dim '" + d.name +
                                        "' must be strictly positive");
    }
}

double dim_value(const Dimension& d, double u) {
    const double uc = std::clamp(u, 0.0, 1.0);
    switch (d.kind) {
        case DimKind::ContinuousLog:
            if (uc == 0.0) return d.low;
            if (uc == 1.0) return d.high;
            return std::exp(std::log(d.low) + uc * (std::log(d.high) - std::log(d.low)));
        case DimKind::ContinuousLinear:
            if (uc == 0.0) return d.low;
            if (uc == 1.0) return d.high;
            return d.low + uc * (d.high - d.low);
        case DimKind::Integer:
            return std::clamp(std::round(d.low + uc * (d.high - d.low)), d.low, d.high);
        case DimKind::Categorical: {
            const auto k = std::min<std::size_t>(
                static_cast<std::size_t>(uc * static_cast<double>(d.choices.size())),
                d.choices.size() - 1);
            return static_cast<double>(k);
        }
    }
    return 0.0;
}

double snap_unit(const Dimension& d, double u) {
    const double uc = std::clamp(u, 0.0, 1.0);
    switch (d.kind) {
        case DimKind::ContinuousLog:
        case DimKind::ContinuousLinear:
            return uc;
        case DimKind::Integer: {
            const double v = dim_value(d, uc);
            return (v - d.low) / (d.high - d.low);
        }
        case DimKind::Categorical: {
            const double k = dim_value(d, uc);
            return (k + 0.5) / static_cast<double>(d.choices.size());
        }
    }
    return uc;
}

Vector snap_point(const SearchSpace& space, Vector unit) {
    for (std::size_t i = 0; i < space.dims.size(); ++i)
        unit[i] = snap_unit(space.dims[i], unit[i]);
    return unit;
}

Vector native_values(const SearchSpace& space, const Vector& unit) {
    Vector out(space.dims.size());
    for (std::size_t i = 0; i < space.dims.size(); ++i)
        out[i] = dim_value(space.dims[i], unit[i]);
    return out;
}

namespace {

constexpr std::size_t kCandidates = 2048;
constexpr std::size_t kRefineTop = 8;
constexpr std::size_t kRefineSamples = 16;
constexpr std::uint64_t kProposeStream = 0x300000000ULL;
constexpr std::uint64_t kInitStream = 0x400000000ULL;

constexpr int kPrimes[16] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

// Radical-inverse (Halton) coordinate for index >= 1.
double halton(std::uint64_t index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * static_cast<double>(index % static_cast<std::uint64_t>(base));
        index /= static_cast<std::uint64_t>(base);
    }
    return r;
}

Vector halton_point(std::uint64_t index, std::size_t dims) {
    Vector p(dims);
    for (std::size_t d = 0; d < dims; ++d)
        p[d] = halton(index, kPrimes[d % 16]);
    return p;
}

Vector random_point(Rng& rng, std::size_t dims) {
    Vector p(dims);
    for (auto& v : p) v = rng.uniform();
    return p;
}

}  // namespace

Vector propose_next(const GpSurrogate& s, const SearchSpace& space, std::uint64_t seed) {
    validate(space);
    const std::size_t dims = space.dims.size();
    Rng rng(mix_seed(seed, kProposeStream));
    // Seeded offset into the Halton sequence keeps proposals deterministic
    // per seed while varying the candidate cloud across iterations.
    const std::uint64_t offset = 1 + (rng.next_u64() % 100003);

    // y_best comes from the surrogate's own observations.
    double y_best = s.obs.front().objective;
    for (const auto& o : s.obs) y_best = std::max(y_best, o.objective);

    Vector best_point;
    double best_ei = -1.0;
    std::vector<std::pair<double, Vector>> scored;
    scored.reserve(kCandidates);
    for (std::size_t i = 0; i < kCandidates; ++i) {
        Vector cand = halton_point(offset + i, dims);
        const double ei = expected_improvement(s, cand, y_best);
        scored.emplace_back(ei, std::move(cand));
    }

    std::partial_sort(scored.begin(),
                      scored.begin() + static_cast<std::ptrdiff_t>(
                                           std::min(kRefineTop, scored.size())),
                      scored.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first; });

    for (std::size_t r = 0; r < std::min(kRefineTop, scored.size()); ++r) {
        Vector center = scored[r].second;
        double center_ei = scored[r].first;
        if (center_ei > best_ei) {
            best_ei = center_ei;
            best_point = center;
        }
        for (double radius : {0.05, 0.02, 0.008}) {
            for (std::size_t k = 0; k < kRefineSamples; ++k) {
                Vector trial(dims);
                for (std::size_t d = 0; d < dims; ++d)
                    trial[d] = std::clamp(center[d] + radius * rng.normal(), 0.0, 1.0);
                const double ei = expected_improvement(s, trial, y_best);
                if (ei > center_ei) {
                    center_ei = ei;
                    center = trial;
                }
            }
        }
        if (center_ei > best_ei) {
            best_ei = center_ei;
            best_point = center;
        }
    }

    if (best_ei <= 0.0) {
        // Flat acquisition landscape; explore uniformly at random.
        best_point = random_point(rng, dims);
    }
    return snap_point(space, std::move(best_point));
}

TuneResult tune(const std::function<double(const Vector&)>& objective,
                const SearchSpace& space, std::size_t budget, std::size_t init,
                std::uint64_t seed) {
    validate(space);
    if (init < 2 || budget < init)
        throw std::invalid_argument("tune: requires budget >= init >= 2");

    const std::size_t dims = space.dims.size();
    TuneResult result;
    result.trace.reserve(budget);

    auto run_trial = [&](Vector point) {
        Trial t;
        t.point = std::move(point);
        t.objective = objective(t.point);
        t.ok = std::isfinite(t.objective);
        result.trace.push_back(t);
    };

    Rng init_rng(mix_seed(seed, kInitStream));
    const std::uint64_t init_offset = 1 + (init_rng.next_u64() % 100003);
    for (std::size_t i = 0; i < init; ++i)
        run_trial(snap_point(space, halton_point(init_offset + i, dims)));

    for (std::size_t iter = init; iter < budget; ++iter) {
        std::vector<Observation> obs;
        for (const auto& t : result.trace)
            if (t.ok) obs.push_back({t.point, t.objective});
        Vector point;
        if (obs.empty()) {
            Rng rng(mix_seed(seed, kProposeStream + iter));
            point = snap_point(space, random_point(rng, dims));
        } else {
            double mean = 0.0;
            for (const auto& o : obs) mean += o.objective;
            mean /= static_cast<double>(obs.size());
            double var = 0.0;
            for (const auto& o : obs) var += (o.objective - mean) * (o.objective - mean);
            var /= static_cast<double>(obs.size());

            SeKernel kernel;
            kernel.length_scales.assign(dims, 0.2);
            kernel.signal_var = var;
            kernel.noise_var = 1e-6;
            const GpSurrogate surrogate = gp_fit(std::move(obs), kernel);
            point = propose_next(surrogate, space, mix_seed(seed, iter));
        }
        run_trial(std::move(point));
    }

    bool found = false;
    for (std::size_t i = 0; i < result.trace.size(); ++i) {
        const Trial& t = result.trace[i];
        if (!t.ok) continue;
        if (!found || t.objective > result.best_objective) {
            found = true;
            result.best_objective = t.objective;
            result.best_point = t.point;
            result.best_index = i;
        }
    }
    if (!found) throw NumericError("tune: every trial failed");
    return result;
}

std::string trace_to_csv(const SearchSpace& space, const std::vector<Trial>& trace) {
    std::string csv = "iter";
    for (const auto& d : space.dims) {
        csv += ',';
        csv += d.name;
    }
    csv += ",objective,status\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        csv += std::to_string(i);
        const Vector vals = native_values(space, trace[i].point);
        for (std::size_t d = 0; d < vals.size(); ++d) {
            csv += ',';
            if (space.dims[d].kind == DimKind::Categorical)
                csv += space.dims[d].choices[static_cast<std::size_t>(vals[d])];
            else
                csv += fmt_double(vals[d]);
        }
        csv += ',';
        csv += trace[i].ok ? fmt_double(trace[i].objective) : "nan";
        csv += ',';
        csv += trace[i].ok ? "ok" : "failed";
        csv += '\n';
    }
    return csv;
}

}  // namespace stallpred
