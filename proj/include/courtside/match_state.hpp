#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace courtside {

enum class PlayerSlot : std::uint8_t { P1 = 0, P2 = 1 };

constexpr PlayerSlot other(PlayerSlot slot) noexcept {
    return slot == PlayerSlot::P1 ? PlayerSlot::P2 : PlayerSlot::P1;
}

constexpr std::size_t index(PlayerSlot slot) noexcept { return static_cast<std::size_t>(slot); }

constexpr PlayerSlot slot_from_number(int one_based) {
    return one_based == 2 ? PlayerSlot::P2 : PlayerSlot::P1;
}

constexpr int slot_number(PlayerSlot slot) noexcept { return static_cast<int>(slot) + 1; }

/// A value for each of the two players, indexed by PlayerSlot.
template <class T>
struct PerSlot {
    std::array<T, 2> v{};

    constexpr T& operator[](PlayerSlot s) noexcept { return v[index(s)]; }
    constexpr const T& operator[](PlayerSlot s) const noexcept { return v[index(s)]; }
    constexpr T& p1() noexcept { return v[0]; }
    constexpr T& p2() noexcept { return v[1]; }
    constexpr const T& p1() const noexcept { return v[0]; }
    constexpr const T& p2() const noexcept { return v[1]; }

    friend constexpr bool operator==(const PerSlot&, const PerSlot&) = default;
};

enum class FinalSetRule { standard_tiebreak, extended_tiebreak, advantage_set };

std::string to_string(FinalSetRule rule);
FinalSetRule final_set_rule_from_string(const std::string& name);

struct MatchFormat {
    int best_of = 3;
    int games_per_set = 6;
    /// Tiebreak starts when both players reach this many games.
    int tiebreak_at = 6;
    int tiebreak_target = 7;
    FinalSetRule final_set_rule = FinalSetRule::extended_tiebreak;
    int final_tiebreak_target = 10;

    int sets_to_win() const noexcept { return (best_of + 1) / 2; }

    /// Throws ConfigurationError when a parameter is out of domain.
    void validate() const;

    static MatchFormat best_of_three() { return MatchFormat{}; }
    static MatchFormat best_of_five() {
        MatchFormat f;
        f.best_of = 5;
        return f;
    }

    friend bool operator==(const MatchFormat&, const MatchFormat&) = default;
};

/// Score of a singles match. Plain value; transitions never mutate their input.
///
/// Regular-game points are kept in the normalized range {0..3}x{0..3} plus the
/// two advantage states (4,3) and (3,4); deuce always folds back to (3,3).
/// Tiebreak points are raw counts and live in `tiebreak_points`.
struct MatchState {
    MatchFormat format;
    PerSlot<int> sets_won;
    PerSlot<int> games;
    PerSlot<int> points;
    bool in_tiebreak = false;
    PerSlot<int> tiebreak_points;
    PlayerSlot server = PlayerSlot::P1;
    /// Server of the first point of the current (or most recent) tiebreak.
    PlayerSlot tiebreak_first_server = PlayerSlot::P1;
    int points_played_total = 0;
    bool completed = false;
    std::optional<PlayerSlot> winner;
    /// Final game score of each completed set, in order.
    std::vector<PerSlot<int>> set_scores;

    int current_set_number() const noexcept { return sets_won.p1() + sets_won.p2() + 1; }
    int current_game_number() const noexcept { return games.p1() + games.p2() + 1; }
    bool is_final_set() const noexcept {
        return sets_won.p1() + sets_won.p2() == format.best_of - 1;
    }

    friend bool operator==(const MatchState&, const MatchState&) = default;
};

struct PointContext {
    PerSlot<bool> break_point;
    PerSlot<bool> set_point;
    PerSlot<bool> match_point;
    PlayerSlot server = PlayerSlot::P1;

    bool any_break_point() const noexcept { return break_point.p1() || break_point.p2(); }
    bool any_set_point() const noexcept { return set_point.p1() || set_point.p2(); }
    bool any_match_point() const noexcept { return match_point.p1() || match_point.p2(); }
};

MatchState new_match(const MatchFormat& format, PlayerSlot initial_server);

/// Successor state after `point_winner` wins one point.
MatchState apply_point(const MatchState& state, PlayerSlot point_winner);

PointContext point_context(const MatchState& state);

/// Fewest consecutive points `slot` needs to win the match from `state`.
int remaining_points_to_win(const MatchState& state, PlayerSlot slot);

/// Same quantity for a fresh match of `format`.
int fresh_match_points_to_win(const MatchFormat& format);

double completion_fraction(const MatchState& state, int expected_total_points);

/// First violated invariant, if any. Used by property tests and feed validation.
std::optional<std::string> check_invariants(const MatchState& state);

/// Display score of the current game ("15-30", "40-AD", "5-4" in a tiebreak).
std::string point_display(const MatchState& state);

} // namespace courtside
