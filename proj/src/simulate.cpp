#include "courtside/simulate.hpp"

#include "courtside/errors.hpp"

#include <random>

namespace courtside {

SimulatedMatch simulate_match(const MatchFormat& format, std::uint64_t seed, const SimulationOptions& options) {
    SimulatedMatch m;
    m.format = format;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    WinProbabilityEngine engine(PreMatchProbability::fixed(options.prior_p1), options.config, format);
    auto state = new_match(format, options.first_server);
    while (!state.completed) {
        const bool server_wins = u(rng) < options.serve_win[state.server];
        const auto winner = server_wins ? state.server : other(state.server);
        m.trace.push_back(engine.on_point(state, winner));
        m.points.push_back(winner);
        state = apply_point(state, winner);
    }
    m.final_state = state;
    return m;
}

MatchFormat match_format_from_name(const std::string& name) {
    MatchFormat f;
    if (name == "bo3") f.best_of = 3;
    else if (name == "bo5") f.best_of = 5;
    else throw ValidationError("unknown match format " + name + " (expected bo3 or bo5)");
    return f;
}

nlohmann::json to_json(const SimulatedMatch& m) {
    nlohmann::json sets = nlohmann::json::array();
    for (const auto& s : m.final_state.set_scores) sets.push_back({s.p1(), s.p2()});
    return {{"best_of", m.format.best_of},
            {"points", m.points.size()},
            {"winner", m.final_state.winner ? nlohmann::json(slot_number(*m.final_state.winner)) : nlohmann::json()},
            {"set_scores", sets}};
}

} // namespace courtside
