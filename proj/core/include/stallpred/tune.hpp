#pragma once

#include <functional>
#include <string>

#include "stallpred/gp.hpp"

namespace stallpred {

enum class DimKind { ContinuousLog, ContinuousLinear, Integer, Categorical };

struct Dimension {
    std::string name;
    DimKind kind = DimKind::ContinuousLinear;
    double low = 0.0;
    double high = 1.0;                 // bounds (native scale); unused for Categorical
    std::vector<std::string> choices;  // Categorical only
};

struct SearchSpace {
    std::vector<Dimension> dims;
};

void validate(const SearchSpace& space);  // low < high, log dims positive, ...

/// Normalized [0,1] coordinate -> native value (log/linear interpolation,
/// integers rounded, categoricals mapped to a choice index).
double dim_value(const Dimension& d, double u);

/// Canonical normalized coordinate of the value dim_value(d, u) maps to;
/// identity for continuous dims.
double snap_unit(const Dimension& d, double u);

Vector snap_point(const SearchSpace& space, Vector unit);
Vector native_values(const SearchSpace& space, const Vector& unit);

/// Argmax of expected improvement over 2048 quasi-random (Halton) candidates
/// plus seeded local refinement around the best eight, with integer and
/// categorical dims snapped afterwards. Falls back to a uniform random point
/// when every candidate has EI = 0. Deterministic per seed.
Vector propose_next(const GpSurrogate& s, const SearchSpace& space, std::uint64_t seed);

struct Trial {
    Vector point;  // normalized, snapped
    double objective = 0.0;
    bool ok = true;  // false when the objective returned a non-finite value
};

struct TuneResult {
    Vector best_point;
    double best_objective = 0.0;
    std::size_t best_index = 0;  // into trace; ties broken by earliest trial
    std::vector<Trial> trace;
};

/// Sequential model-based optimization: `init` quasi-random evaluations, then
/// budget-init propose/evaluate/refit rounds. The surrogate kernel uses
/// length scale 0.2 per normalized dim, signal variance = variance of the
/// observed objectives, noise variance 1e-6 (fixed, never refitted). Failed
/// trials stay in the trace but never enter the surrogate.
///
/// Requires budget >= init >= 2.
TuneResult tune(const std::function<double(const Vector&)>& objective,
                const SearchSpace& space, std::size_t budget, std::size_t init,
                std::uint64_t seed);

/// "iter,<dim names...>,objective,status" with native parameter values.
std::string trace_to_csv(const SearchSpace& space, const std::vector<Trial>& trace);

}  // namespace stallpred
