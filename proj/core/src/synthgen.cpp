#include "stallpred/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "stallpred/rng.hpp"

namespace stallpred {

namespace {

constexpr double kCruiseAlphaDeg = 2.5;    // trim AoA at base speed
constexpr double kAlphaClampCruise = 8.0;  // cruise guardrail, below any warning
constexpr double kMinAirspeedKt = 60.0;
constexpr double kMaxThrustN = 24000.0;
constexpr double kCruiseThrottle = 0.62;

double trim_alpha(double base_speed, double v) {
    const double r = base_speed / v;
    return kCruiseAlphaDeg * r * r;
}

// speed at which the trim relation reaches the given AoA
double speed_at_alpha(double base_speed, double alpha) {
    return base_speed * std::sqrt(kCruiseAlphaDeg / alpha);
}

void validate(const FlightProfile& p) {
    if (p.kind != ProfileKind::Cruise && p.duration_s < 40)
        throw std::invalid_argument("flight profile: stall kinds need duration_s >= 40");
    if (p.duration_s == 0) throw std::invalid_argument("flight profile: duration_s must be >= 1");
    if (!(p.warning_margin > 0.0 && p.warning_margin < 1.0))
        throw std::invalid_argument("flight profile: warning_margin must be in (0,1)");
    if (!(p.base_speed_kt > kMinAirspeedKt))
        throw std::invalid_argument("flight profile: base_speed_kt too low");
    if (!(p.stall_aoa_deg > kCruiseAlphaDeg))
        throw std::invalid_argument("flight profile: stall_aoa_deg must exceed cruise AoA");
    if (p.noise_level < 0.0)
        throw std::invalid_argument("flight profile: noise_level must be >= 0");
}

}  // namespace

TimeSeries generate_flight(const FlightProfile& p) {
    validate(p);
    Rng rng(p.seed);
    const std::size_t n = p.duration_s;

    // Deterministic longitudinal state, filled per kind.
    Vector v(n, p.base_speed_kt);        // airspeed, noise-free
    Vector alpha(n, kCruiseAlphaDeg);    // AoA, stays noise-free in the output
    Vector throttle(n, kCruiseThrottle);
    Vector elevator(n, 0.02);            // pilot elevator input proportion

    auto cruise_wander = [&](std::size_t t) {
        return 2.0 * std::sin(2.0 * 3.14159265358979323846 * static_cast<double>(t) / 97.0);
    };

    if (p.kind == ProfileKind::Cruise) {
        for (std::size_t t = 0; t < n; ++t) {
            v[t] = p.base_speed_kt + cruise_wander(t);
            alpha[t] = std::min(trim_alpha(p.base_speed_kt, v[t]), kAlphaClampCruise);
            throttle[t] = kCruiseThrottle + 0.02 * std::sin(static_cast<double>(t) / 41.0);
        }
    } else if (p.kind == ProfileKind::GradualStall) {
        // Thrust comes off over 20 s, speed bleeds away, AoA climbs along the
        // trim curve until just past the stall angle, then a recovery. The
        // deceleration is sized to the flight so the stall always develops
        // within the recording (~0.9 kt/s at the 240 s default).
        const std::size_t onset =
            static_cast<std::size_t>(static_cast<double>(n) * (0.15 + 0.10 * rng.uniform()));
        const double v_onset = p.base_speed_kt + cruise_wander(onset);
        const double v_stall = speed_at_alpha(p.base_speed_kt, 1.03 * p.stall_aoa_deg);
        const double avail =
            std::max(5.0, static_cast<double>(n) - static_cast<double>(onset) - 15.0);
        const double decay_frac = 0.75 + 0.2 * rng.uniform();
        const double decel = std::max(0.2, (v_onset - v_stall) / (avail * decay_frac));
        constexpr double kThrottleRampS = 20.0;
        constexpr double kRecoveryRateKts = 3.0;

        double cur_v = v_onset;
        bool recovering = false;
        for (std::size_t t = 0; t < n; ++t) {
            if (t < onset) {
                v[t] = p.base_speed_kt + cruise_wander(t);
                throttle[t] = kCruiseThrottle;
            } else if (!recovering) {
                const double since = static_cast<double>(t - onset);
                throttle[t] = std::max(0.12, kCruiseThrottle -
                                                 (kCruiseThrottle - 0.12) * since / kThrottleRampS);
                cur_v = std::max(v_onset - decel * since, kMinAirspeedKt);
                v[t] = cur_v;
                if (cur_v <= v_stall) recovering = true;
            } else {
                throttle[t] = 0.85;
                cur_v = std::min(cur_v + kRecoveryRateKts, p.base_speed_kt);
                v[t] = cur_v;
            }
            alpha[t] = trim_alpha(p.base_speed_kt, v[t]);
            if (t < onset) alpha[t] = std::min(alpha[t], kAlphaClampCruise);
            // pilot holds the nose up as the speed decays
            elevator[t] = 0.02 + 0.012 * std::max(0.0, alpha[t] - kCruiseAlphaDeg);
        }
    } else {  // AbruptStall
        // Sudden pull: AoA ramps from cruise past the stall angle within
        // ramp_s seconds. The window ending 10 s earlier sees plain cruise.
        const std::size_t pull =
            static_cast<std::size_t>(static_cast<double>(n) * (0.40 + 0.20 * rng.uniform()));
        const double ramp_s = 2.0 + rng.uniform();  // 2..3 s
        const double alpha_peak = 1.05 * p.stall_aoa_deg;
        const std::size_t hold = 2 + rng.below(3);  // 2..4 s at the peak
        constexpr double kRecoveryDegS = 2.0;

        for (std::size_t t = 0; t < n; ++t) {
            const double base_alpha =
                std::min(trim_alpha(p.base_speed_kt, p.base_speed_kt + cruise_wander(t)),
                         kAlphaClampCruise);
            if (t < pull) {
                v[t] = p.base_speed_kt + cruise_wander(t);
                alpha[t] = base_alpha;
            } else {
                const double since = static_cast<double>(t - pull);
                if (since <= ramp_s) {
                    alpha[t] = base_alpha + (alpha_peak - base_alpha) * since / ramp_s;
                    elevator[t] = 0.85;
                } else if (since <= ramp_s + static_cast<double>(hold)) {
                    alpha[t] = alpha_peak;
                    elevator[t] = 0.55;
                } else {
                    alpha[t] = std::max(base_alpha,
                                        alpha_peak - kRecoveryDegS *
                                                         (since - ramp_s - static_cast<double>(hold)));
                    elevator[t] = 0.02;
                }
                // the pull trades speed for AoA
                v[t] = std::max(kMinAirspeedKt,
                                p.base_speed_kt - 3.0 * std::min(since, 8.0));
                throttle[t] = kCruiseThrottle;
            }
        }
    }

    // Emit the 16 channels: observation noise on top of the clean state,
    // except AoA which stays exact (it defines the warning labels).
    TimeSeries ts;
    ts.sample_rate_hz = 1.0;
    for (auto& ch : ts.params) ch.resize(n);
    ts.stall_warning.resize(n);
    const double warn_at = p.warning_margin * p.stall_aoa_deg;
    const double s = p.noise_level;

    for (std::size_t t = 0; t < n; ++t) {
        const double sink = 130.0 * std::max(0.0, alpha[t] - kCruiseAlphaDeg);
        const double thrust = kMaxThrustN * throttle[t];
        ts.params[0][t] = std::max(kMinAirspeedKt, v[t] + 0.3 * s * rng.normal());
        ts.params[1][t] = std::max(kMinAirspeedKt, 1.08 * v[t] + 0.3 * s * rng.normal());
        ts.params[2][t] = std::clamp(elevator[t] + 0.02 * s * rng.normal(), -1.0, 1.0);
        ts.params[3][t] = std::clamp(0.02 * s * rng.normal(), -1.0, 1.0);
        ts.params[4][t] = std::clamp(0.015 * s * rng.normal(), -1.0, 1.0);
        ts.params[5][t] = alpha[t] + 0.5 + 0.1 * s * rng.normal();
        ts.params[6][t] = 1.5 * s * rng.normal();
        ts.params[7][t] = alpha[t];  // kAngleOfAttackIdx, noise-free
        ts.params[8][t] = std::clamp(throttle[t] + 0.01 * s * rng.normal(), 0.0, 1.0);
        ts.params[9][t] = std::clamp(throttle[t] + 0.01 * s * rng.normal(), 0.0, 1.0);
        ts.params[10][t] = std::max(0.0, thrust + 120.0 * s * rng.normal());
        ts.params[11][t] = std::max(0.0, thrust + 120.0 * s * rng.normal());
        ts.params[12][t] = std::max(1.0, 780.0 + 240.0 * throttle[t] + 4.0 * s * rng.normal());
        ts.params[13][t] = std::max(1.0, 780.0 + 240.0 * throttle[t] + 4.0 * s * rng.normal());
        ts.params[14][t] = 18.0 * ts.params[2][t] + 0.2 * s * rng.normal();
        ts.params[15][t] = -sink + 40.0 * s * rng.normal();
        ts.stall_warning[t] = alpha[t] >= warn_at ? 1 : 0;
    }
    return ts;
}

std::vector<TimeSeries> generate_corpus(const CorpusConfig& cfg) {
    std::vector<TimeSeries> corpus;
    corpus.reserve(cfg.gradual_flights + cfg.abrupt_flights + cfg.cruise_flights);
    std::uint64_t index = 0;
    auto emit = [&](ProfileKind kind, std::size_t count, const char* prefix) {
        for (std::size_t i = 0; i < count; ++i, ++index) {
            FlightProfile p = cfg.base;
            p.kind = kind;
            p.seed = mix_seed(cfg.seed, index);
            TimeSeries ts = generate_flight(p);
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%s_%04zu", prefix, i);
            ts.id = buf;
            corpus.push_back(std::move(ts));
        }
    };
    emit(ProfileKind::GradualStall, cfg.gradual_flights, "gradual");
    emit(ProfileKind::AbruptStall, cfg.abrupt_flights, "abrupt");
    emit(ProfileKind::Cruise, cfg.cruise_flights, "cruise");
    return corpus;
}

}  // namespace stallpred
