#pragma once

#include <array>
#include <chrono>
#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace countchain {

// Simulated clock. Ticks are microseconds; nothing here touches the wall clock.
struct SimClock {
    using rep = std::int64_t;
    using period = std::micro;
    using duration = std::chrono::duration<rep, period>;
    using time_point = std::chrono::time_point<SimClock>;
    static constexpr bool is_steady = true;
};

using SimDuration = SimClock::duration;
using SimTime = SimClock::time_point;

constexpr SimDuration seconds_to_duration(double seconds) {
    const double us = seconds * 1e6;
    return SimDuration{static_cast<std::int64_t>(us < 0 ? us - 0.5 : us + 0.5)};
}

constexpr SimTime at_seconds(double seconds) { return SimTime{seconds_to_duration(seconds)}; }

constexpr double to_seconds(SimDuration d) { return static_cast<double>(d.count()) / 1e6; }

constexpr double to_seconds(SimTime t) { return to_seconds(t.time_since_epoch()); }

struct PlayerId {
    std::uint32_t value = 0;
    friend constexpr auto operator<=>(PlayerId, PlayerId) = default;
};

struct PropId {
    std::uint64_t value = 0;
    friend constexpr auto operator<=>(PropId, PropId) = default;
};

// Smallest currency unit. Balances are kept as exact integers.
using StakeUnits = std::int64_t;
using Points = std::int64_t;

using Digest = std::array<std::uint8_t, 32>;

// Sentinel threshold that no reachable point balance can hit.
inline constexpr Points kBanDisabled = std::numeric_limits<Points>::min();

struct SystemConfig {
    int num_verifiers = 14;
    StakeUnits proposition_price = 1;
    SimDuration proposition_deadline = std::chrono::seconds{2};
    SimDuration window_half_width = std::chrono::seconds{1};
    Points ban_threshold = -5;
    StakeUnits initial_prize_fund = 0;
    int total_nodes = 100;
    std::uint64_t rng_seed = 0;
};

// Thrown when a caller violates a documented precondition (bad config,
// unknown player, double resolution and so on). Expected protocol
// rejections are reported through status enums instead.
class CountChainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

void validate(const SystemConfig& cfg);

}  // namespace countchain

template <>
struct std::hash<countchain::PlayerId> {
    std::size_t operator()(countchain::PlayerId id) const noexcept { return id.value; }
};

template <>
struct std::hash<countchain::PropId> {
    std::size_t operator()(countchain::PropId id) const noexcept { return id.value; }
};
