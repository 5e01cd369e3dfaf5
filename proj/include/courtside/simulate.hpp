#pragma once

#include "courtside/match_state.hpp"
#include "courtside/win_probability.hpp"

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

namespace courtside {

struct SimulationOptions {
    /// Chance that each player wins a point on their own serve.
    PerSlot<double> serve_win{0.64, 0.64};
    /// Pre-match probability that P1 wins.
    double prior_p1 = 0.5;
    PlayerSlot first_server = PlayerSlot::P1;
    WinProbConfig config;
};

struct SimulatedMatch {
    MatchFormat format;
    std::vector<PlayerSlot> points;
    std::vector<LiveWinProbability> trace;
    MatchState final_state;
};

/// Plays a random match point by point through the engine. Deterministic for a seed.
SimulatedMatch simulate_match(const MatchFormat& format, std::uint64_t seed, const SimulationOptions& options = {});

/// Standard formats by name: "bo3" or "bo5". Throws ValidationError otherwise.
MatchFormat match_format_from_name(const std::string& name);

nlohmann::json to_json(const SimulatedMatch& match);

} // namespace courtside
