#pragma once

#include "courtside/match_state.hpp"

#include <nlohmann/json.hpp>

#include <memory>
#include <optional>
#include <string>

namespace courtside {

struct PreMatchFeatures {
    struct Player {
        double age = 0.0;
        double power_index = 0.0;
        double recent_form = 0.0;
        double surface_preference = 0.0;
        double historical_win_ratio = 0.0;
    };
    struct HeadToHead {
        int matches = 0;
        PerSlot<int> sets_won;
        /// Share of head-to-head games won by P1.
        double game_ratio = 0.5;
    };

    PerSlot<Player> players;
    std::optional<HeadToHead> head_to_head;

    /// Throws ValidationError on out-of-range ratios or counts.
    void validate() const;
};

enum class PriorSource { provider, stub, config_override };
std::string to_string(PriorSource source);

enum class PreMatchModel { no_head_to_head, head_to_head };

struct PreMatchProbability {
    PerSlot<double> win;
    std::string model_id;
    PriorSource source = PriorSource::stub;

    static PreMatchProbability fixed(double p1_wins);
};

/// Pre-match model boundary. Implementations may throw on failure.
class PreMatchProvider {
public:
    virtual ~PreMatchProvider() = default;
    /// Probability that P1 wins under the given model variant.
    virtual double p1_wins(const PreMatchFeatures& features, PreMatchModel model) const = 0;
    virtual std::string model_id(PreMatchModel model) const = 0;
};

/// Logistic over weighted per-feature differences (P1 minus P2).
class LogisticStubProvider final : public PreMatchProvider {
public:
    struct Weights {
        double age = -0.03;
        double power_index = 0.4;
        double recent_form = 2.0;
        double surface_preference = 1.5;
        double historical_win_ratio = 3.0;
        /// Applied to the head-to-head set share difference.
        double h2h_sets = 1.0;
        /// Applied to (game_ratio - 0.5).
        double h2h_game_ratio = 2.0;
    };

    LogisticStubProvider() = default;
    explicit LogisticStubProvider(Weights weights) : weights_(weights) {}

    double p1_wins(const PreMatchFeatures& features, PreMatchModel model) const override;
    std::string model_id(PreMatchModel model) const override;

private:
    Weights weights_;
};

/// Picks the head-to-head variant iff features carry a head-to-head block.
/// Falls back to the logistic stub when the provider throws.
PreMatchProbability prematch_probability(const PreMatchFeatures& features,
                                         const PreMatchProvider& provider);

struct ContextWeights {
    double base = 1.0;
    double break_point = 2.0;
    double set_point = 2.5;
    double match_point = 3.0;
};

struct WinProbConfig {
    double alpha = 1.0;
    double beta = 1.0;
    double lambda = 1.0;
    ContextWeights context;
    int expected_points_best_of_three = 180;
    int expected_points_best_of_five = 270;
    double momentum_floor = 1e-6;
    double momentum_init_offset = 1.0;
    /// Publish the renormalized pair (true) or the raw boosted pair (false).
    bool normalize_output = true;

    int expected_total_points(const MatchFormat& format) const noexcept {
        return format.best_of == 5 ? expected_points_best_of_five : expected_points_best_of_three;
    }
    void validate() const;
};

struct MomentumTrack {
    PerSlot<double> raw;
    int last_updated_point = 0;
};

struct LiveWinProbability {
    int point_index = 0;
    PlayerSlot point_winner = PlayerSlot::P1;
    PreMatchProbability static_prior;
    PerSlot<double> momentum_raw;
    PerSlot<double> momentum_decayed;
    PerSlot<double> momentum_scaled;
    double completion = 0.0;
    double blend_weight = 0.0;
    PerSlot<double> live;
    PerSlot<int> sets_won;
    int sets_to_win = 0;
    PerSlot<double> boosted_raw;
    PerSlot<double> normalized;
};

/// g(context): compounding pressure multipliers over the base weight.
double context_gain(const PointContext& context, const WinProbConfig& config);

PerSlot<double> momentum_delta(const PointContext& context, PlayerSlot winner,
                               const WinProbConfig& config);

MomentumTrack update_momentum(const MomentumTrack& track, const PerSlot<double>& delta,
                              const WinProbConfig& config);

PerSlot<double> decay_momentum(const MomentumTrack& track, double completion,
                               const WinProbConfig& config);

PerSlot<double> scale_momentum(const PerSlot<double>& decayed);

/// 1 - min(remaining) / fresh-match remaining, clamped to [0, 1].
double blend_weight(const MatchState& state);

PerSlot<double> live_probability(const PerSlot<double>& static_prior,
                                 const PerSlot<double>& momentum_scaled, double w);

PerSlot<double> set_boost(const PerSlot<double>& live, const PerSlot<int>& sets_won,
                          int total_sets_to_win);

PerSlot<double> normalize_pair(const PerSlot<double>& boosted);

/// Per-match live likelihood engine. Single writer: feed points in order.
class WinProbabilityEngine {
public:
    WinProbabilityEngine(PreMatchProbability prior, WinProbConfig config, MatchFormat format);

    LiveWinProbability on_point(const MatchState& before, PlayerSlot point_winner);

    const MomentumTrack& momentum() const noexcept { return track_; }
    const PreMatchProbability& prior() const noexcept { return prior_; }
    const WinProbConfig& config() const noexcept { return config_; }

private:
    PreMatchProbability prior_;
    WinProbConfig config_;
    MatchFormat format_;
    int fresh_points_;
    MomentumTrack track_;
};

nlohmann::json to_json(const LiveWinProbability& record);
nlohmann::json to_json(const PreMatchProbability& prior);
WinProbConfig win_prob_config_from_json(const nlohmann::json& doc);

} // namespace courtside
