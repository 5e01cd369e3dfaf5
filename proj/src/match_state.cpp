#include "courtside/match_state.hpp"

#include "courtside/errors.hpp"

#include <algorithm>
#include <cstdlib>

namespace courtside {

std::string to_string(FinalSetRule rule) {
    switch (rule) {
    case FinalSetRule::standard_tiebreak: return "standard_tiebreak";
    case FinalSetRule::extended_tiebreak: return "extended_tiebreak";
    case FinalSetRule::advantage_set: return "advantage_set";
    }
    return "unknown";
}

FinalSetRule final_set_rule_from_string(const std::string& name) {
    if (name == "standard_tiebreak") return FinalSetRule::standard_tiebreak;
    if (name == "extended_tiebreak") return FinalSetRule::extended_tiebreak;
    if (name == "advantage_set") return FinalSetRule::advantage_set;
    throw ConfigurationError("unknown final set rule: " + name);
}

void MatchFormat::validate() const {
    if (best_of != 3 && best_of != 5)
        throw ConfigurationError("best_of must be 3 or 5, got " + std::to_string(best_of));
    if (games_per_set <= 0) throw ConfigurationError("games_per_set must be positive");
    if (tiebreak_at <= 0) throw ConfigurationError("tiebreak_at must be positive");
    if (tiebreak_target < 7) throw ConfigurationError("tiebreak_target must be at least 7");
    if (final_set_rule == FinalSetRule::extended_tiebreak && final_tiebreak_target < 7)
        throw ConfigurationError("final_tiebreak_target must be at least 7");
}

namespace {

bool tiebreak_allowed(const MatchState& s) {
    return !(s.is_final_set() && s.format.final_set_rule == FinalSetRule::advantage_set);
}

int tiebreak_target(const MatchState& s) {
    if (s.is_final_set() && s.format.final_set_rule == FinalSetRule::extended_tiebreak)
        return s.format.final_tiebreak_target;
    return s.format.tiebreak_target;
}

void award_game(MatchState& s, PlayerSlot winner) {
    const bool was_tiebreak = s.in_tiebreak;
    s.games[winner] += 1;
    s.points = {};
    s.tiebreak_points = {};
    s.in_tiebreak = false;

    const int won = s.games[winner];
    const int lost = s.games[other(winner)];
    const bool set_over = was_tiebreak || (won >= s.format.games_per_set && won - lost >= 2);
    if (set_over) {
        s.set_scores.push_back(s.games);
        s.sets_won[winner] += 1;
        s.games = {};
        if (s.sets_won[winner] == s.format.sets_to_win()) {
            s.completed = true;
            s.winner = winner;
            return;
        }
        // After a tiebreak the receiver of its first point opens the next set.
        s.server = was_tiebreak ? other(s.tiebreak_first_server) : other(s.server);
        return;
    }

    s.server = other(s.server);
    if (tiebreak_allowed(s) && s.games.p1() == s.format.tiebreak_at &&
        s.games.p2() == s.format.tiebreak_at) {
        s.in_tiebreak = true;
        s.tiebreak_first_server = s.server;
    }
}

} // namespace

MatchState new_match(const MatchFormat& format, PlayerSlot initial_server) {
    format.validate();
    MatchState s;
    s.format = format;
    s.server = initial_server;
    s.tiebreak_first_server = initial_server;
    return s;
}

MatchState apply_point(const MatchState& state, PlayerSlot point_winner) {
    if (state.completed) throw TerminalStateError("match is already completed");
    MatchState s = state;
    s.points_played_total += 1;
    const PlayerSlot loser = other(point_winner);

    if (s.in_tiebreak) {
        s.tiebreak_points[point_winner] += 1;
        const int won = s.tiebreak_points[point_winner];
        if (won >= tiebreak_target(s) && won - s.tiebreak_points[loser] >= 2) {
            award_game(s, point_winner);
        } else if ((s.tiebreak_points.p1() + s.tiebreak_points.p2()) % 2 == 1) {
            // 1 point, then alternating pairs
            s.server = other(s.server);
        }
        return s;
    }

    s.points[point_winner] += 1;
    const int won = s.points[point_winner];
    const int lost = s.points[loser];
    if (won >= 4 && won - lost >= 2) {
        award_game(s, point_winner);
    } else if (won == 4 && lost == 4) {
        s.points = {{3, 3}};
    }
    return s;
}

PointContext point_context(const MatchState& state) {
    if (state.completed) throw TerminalStateError("no point context for a completed match");
    PointContext ctx;
    ctx.server = state.server;
    for (PlayerSlot slot : {PlayerSlot::P1, PlayerSlot::P2}) {
        const MatchState next = apply_point(state, slot);
        const bool wins_game = next.games[slot] > state.games[slot] ||
                               next.sets_won[slot] > state.sets_won[slot];
        const bool wins_set = next.sets_won[slot] > state.sets_won[slot];
        ctx.break_point[slot] = wins_game && slot != state.server;
        ctx.set_point[slot] = wins_set;
        ctx.match_point[slot] = next.completed && next.winner == slot;
    }
    return ctx;
}

int remaining_points_to_win(const MatchState& state, PlayerSlot slot) {
    if (state.completed) throw TerminalStateError("no remaining points for a completed match");
    MatchState s = state;
    int count = 0;
    while (!s.completed) {
        s = apply_point(s, slot);
        ++count;
    }
    return count;
}

int fresh_match_points_to_win(const MatchFormat& format) {
    return remaining_points_to_win(new_match(format, PlayerSlot::P1), PlayerSlot::P1);
}

double completion_fraction(const MatchState& state, int expected_total_points) {
    if (expected_total_points <= 0)
        throw ConfigurationError("expected_total_points must be positive");
    return std::min(1.0, static_cast<double>(state.points_played_total) / expected_total_points);
}

std::optional<std::string> check_invariants(const MatchState& s) {
    const int need = s.format.sets_to_win();
    for (PlayerSlot p : {PlayerSlot::P1, PlayerSlot::P2}) {
        if (s.sets_won[p] < 0 || s.games[p] < 0 || s.points[p] < 0 || s.tiebreak_points[p] < 0)
            return "negative counter";
        if (s.sets_won[p] > need) return "sets_won exceeds sets needed";
    }
    if (s.completed) {
        if (!s.winner) return "completed without winner";
        if (s.sets_won[*s.winner] != need) return "winner has not won enough sets";
        if (s.sets_won[other(*s.winner)] >= need) return "loser has too many sets";
        if (s.games != PerSlot<int>{} || s.points != PerSlot<int>{}) return "completed with live game";
        return std::nullopt;
    }
    if (s.winner) return "winner set on live match";
    if (s.sets_won.p1() >= need || s.sets_won.p2() >= need) return "set count reached but not completed";
    if (static_cast<int>(s.set_scores.size()) != s.sets_won.p1() + s.sets_won.p2())
        return "set score history length mismatch";

    const int a = s.points.p1();
    const int b = s.points.p2();
    if (s.in_tiebreak) {
        if (a != 0 || b != 0) return "regular points during tiebreak";
        if (s.games.p1() != s.format.tiebreak_at || s.games.p2() != s.format.tiebreak_at)
            return "tiebreak at wrong game score";
        if (!tiebreak_allowed(s)) return "tiebreak in advantage set";
        const int target = tiebreak_target(s);
        const int x = s.tiebreak_points.p1();
        const int y = s.tiebreak_points.p2();
        if ((x >= target && x - y >= 2) || (y >= target && y - x >= 2)) return "unawarded tiebreak";
        // Tiebreak rotation: first server, then pairs.
        const int played = x + y;
        const bool first_serves = played == 0 || ((played - 1) / 2) % 2 == 1;
        const PlayerSlot expect = first_serves ? s.tiebreak_first_server : other(s.tiebreak_first_server);
        if (s.server != expect) return "tiebreak serving rotation broken";
    } else {
        if (s.tiebreak_points != PerSlot<int>{}) return "tiebreak points outside tiebreak";
        const bool regular = a <= 3 && b <= 3;
        const bool advantage = (a == 4 && b == 3) || (a == 3 && b == 4);
        if (!regular && !advantage) return "illegal game score";
        const int g1 = s.games.p1();
        const int g2 = s.games.p2();
        const int gps = s.format.games_per_set;
        if ((g1 >= gps && g1 - g2 >= 2) || (g2 >= gps && g2 - g1 >= 2)) return "unawarded set";
        if (tiebreak_allowed(s) && (g1 > s.format.tiebreak_at || g2 > s.format.tiebreak_at))
            return "games beyond tiebreak trigger";
        if (tiebreak_allowed(s) && g1 == s.format.tiebreak_at && g2 == s.format.tiebreak_at)
            return "missed tiebreak trigger";
    }
    return std::nullopt;
}

std::string point_display(const MatchState& s) {
    if (s.in_tiebreak)
        return std::to_string(s.tiebreak_points.p1()) + "-" + std::to_string(s.tiebreak_points.p2());
    static const char* names[] = {"0", "15", "30", "40"};
    const int a = s.points.p1();
    const int b = s.points.p2();
    if (a == 4) return "AD-40";
    if (b == 4) return "40-AD";
    return std::string(names[a]) + "-" + names[b];
}

} // namespace courtside
