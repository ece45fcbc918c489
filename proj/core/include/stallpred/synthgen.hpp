#pragma once

#include <cstdint>
#include <vector>

#include "stallpred/timeseries.hpp"

namespace stallpred {

enum class ProfileKind { Cruise, GradualStall, AbruptStall };

/// Recipe for one synthetic flight. Label correctness and determinism come
/// first; the point-mass dynamics are test scaffolding, not a flight model.
struct FlightProfile {
    ProfileKind kind = ProfileKind::Cruise;
    std::size_t duration_s = 240;  // >= 40 for the stall kinds
    double base_speed_kt = 210.0;
    double stall_aoa_deg = 15.0;
    double warning_margin = 0.85;  // warning triggers at margin * stall_aoa
    double noise_level = 1.0;      // scales every per-channel jitter std
    std::uint64_t seed = 0;
};

/// Generates a 1 Hz flight. A longitudinal point-mass state evolves
/// deterministically; observation noise is added per channel on top.
///
/// Trim relation: angle of attack = 2.5 deg * (base_speed / airspeed)^2, so
/// decelerating flight raises AoA. The warning channel is exactly the
/// indicator AoA >= warning_margin * stall_aoa at every timestep; the AoA
/// channel itself carries no noise.
///
/// Per kind:
///  - cruise: airspeed wanders +-2 kt around base; AoA stays clamped below
///    8 deg, so no warning can trigger.
///  - gradual_stall: throttle ramps down over 20 s starting at a seeded
///    onset; airspeed then decays at 0.9..1.2 kt/s, so AoA climbs smoothly
///    for >= 60 s before the warning fires; a throttle-up recovery follows.
///  - abrupt_stall: a seeded elevator pulse ramps AoA from cruise past the
///    stall angle within 2..3 s (no usable precursor in the prior window),
///    short hold, then recovery at 2 deg/s.
///
/// Channel couplings: vertical speed drops ~130 fpm per degree of AoA above
/// trim; pitch tracks AoA; thrust/RPM follow throttle; control-input
/// channels jitter with noise_level. Airspeed stays above 60 kt, throttle
/// in [0,1], control inputs in [-1,1].
TimeSeries generate_flight(const FlightProfile& p);

struct CorpusConfig {
    std::size_t gradual_flights = 0;
    std::size_t abrupt_flights = 0;
    std::size_t cruise_flights = 0;
    FlightProfile base;  // kind and seed are overridden per flight
    std::uint64_t seed = 0;
};

/// Flights in deterministic order (gradual, abrupt, cruise), ids prefixed by
/// kind; per-flight seeds derive from the master seed.
std::vector<TimeSeries> generate_corpus(const CorpusConfig& cfg);

}  // namespace stallpred
