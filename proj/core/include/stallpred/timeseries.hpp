#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "stallpred/matrix.hpp"

namespace stallpred {

inline constexpr std::size_t kNumFlightParams = 16;

/// Column order of the 16 flight parameters; fixed across CSV files, window
/// matrices (row index) and standardizer statistics.
inline constexpr std::array<const char*, kNumFlightParams> kFlightParamNames = {
    "indicated_airspeed_kt",
    "true_airspeed_kt",
    "elevator_input",
    "aileron_input",
    "rudder_input",
    "pitch_deg",
    "roll_deg",
    "angle_of_attack_deg",
    "throttle_1",
    "throttle_2",
    "thrust_1_n",
    "thrust_2_n",
    "rpm_1",
    "rpm_2",
    "elevator_deflection_deg",
    "vertical_speed_fpm",
};

inline constexpr const char* kWarningColumn = "stall_warning";
inline constexpr const char* kTimeColumn = "time_s";

inline constexpr std::size_t kAngleOfAttackIdx = 7;

/// One recorded flight: 16 equal-length parameter channels plus the boolean
/// stall-warning channel.
struct TimeSeries {
    std::string id;
    double sample_rate_hz = 1.0;
    std::array<Vector, kNumFlightParams> params;
    std::vector<std::uint8_t> stall_warning;

    std::size_t length() const { return stall_warning.size(); }
};

}  // namespace stallpred
