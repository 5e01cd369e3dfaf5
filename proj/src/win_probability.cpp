#include "courtside/win_probability.hpp"

#include "courtside/errors.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace courtside {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

constexpr double kProbabilityClamp = 1e-9;

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

// Blend weight for any state, treating a finished match as fully decided.
double blend_weight_any(const MatchState& state, int fresh_points) {
    if (state.completed) return 1.0;
    const int remaining = std::min(remaining_points_to_win(state, PlayerSlot::P1),
                                   remaining_points_to_win(state, PlayerSlot::P2));
    return std::clamp(1.0 - static_cast<double>(remaining) / fresh_points, 0.0, 1.0);
}

} // namespace

void PreMatchFeatures::validate() const {
    for (const auto& p : players.v) {
        if (!in_unit(p.historical_win_ratio)) throw ValidationError("historical_win_ratio outside [0,1]");
        if (p.age < 0.0) throw ValidationError("negative age");
    }
    if (head_to_head) {
        if (head_to_head->matches <= 0)
            throw ValidationError("head-to-head block requires at least one match");
        if (head_to_head->sets_won.p1() < 0 || head_to_head->sets_won.p2() < 0)
            throw ValidationError("negative head-to-head set count");
        if (!in_unit(head_to_head->game_ratio)) throw ValidationError("game_ratio outside [0,1]");
    }
}

std::string to_string(PriorSource source) {
    switch (source) {
    case PriorSource::provider: return "provider";
    case PriorSource::stub: return "stub";
    case PriorSource::config_override: return "config_override";
    }
    return "unknown";
}

PreMatchProbability PreMatchProbability::fixed(double p1_wins) {
    PreMatchProbability p;
    p.win = {{p1_wins, 1.0 - p1_wins}};
    p.model_id = "fixed";
    p.source = PriorSource::config_override;
    return p;
}

double LogisticStubProvider::p1_wins(const PreMatchFeatures& f, PreMatchModel model) const {
    const auto& a = f.players.p1();
    const auto& b = f.players.p2();
    double z = weights_.age * (a.age - b.age) + weights_.power_index * (a.power_index - b.power_index) +
               weights_.recent_form * (a.recent_form - b.recent_form) +
               weights_.surface_preference * (a.surface_preference - b.surface_preference) +
               weights_.historical_win_ratio * (a.historical_win_ratio - b.historical_win_ratio);
    if (model == PreMatchModel::head_to_head && f.head_to_head) {
        const auto& h = *f.head_to_head;
        const int sets = h.sets_won.p1() + h.sets_won.p2();
        if (sets > 0)
            z += weights_.h2h_sets * static_cast<double>(h.sets_won.p1() - h.sets_won.p2()) / sets;
        z += weights_.h2h_game_ratio * (h.game_ratio - 0.5);
    }
    return logistic(z);
}

std::string LogisticStubProvider::model_id(PreMatchModel model) const {
    return model == PreMatchModel::head_to_head ? "stub-h2h" : "stub-nh";
}

PreMatchProbability prematch_probability(const PreMatchFeatures& features,
                                         const PreMatchProvider& provider) {
    features.validate();
    const PreMatchModel model =
        features.head_to_head ? PreMatchModel::head_to_head : PreMatchModel::no_head_to_head;
    PreMatchProbability out;
    double p = 0.5;
    try {
        p = provider.p1_wins(features, model);
        if (!std::isfinite(p) || p < 0.0 || p > 1.0) throw ProviderError("probability out of range");
        out.model_id = provider.model_id(model);
        out.source = dynamic_cast<const LogisticStubProvider*>(&provider) ? PriorSource::stub
                                                                          : PriorSource::provider;
    } catch (const std::exception&) {
        const LogisticStubProvider stub;
        p = stub.p1_wins(features, model);
        out.model_id = stub.model_id(model);
        out.source = PriorSource::stub;
    }
    p = std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
    out.win = {{p, 1.0 - p}};
    return out;
}

void WinProbConfig::validate() const {
    if (alpha < 0.0 || beta < 0.0) throw ConfigurationError("alpha and beta must be non-negative");
    if (lambda < 0.0) throw ConfigurationError("lambda must be non-negative");
    if (context.base < 1.0 || context.break_point < 1.0 || context.set_point < 1.0 ||
        context.match_point < 1.0)
        throw ConfigurationError("context multipliers must be at least 1");
    if (momentum_floor <= 0.0) throw ConfigurationError("momentum_floor must be positive");
    if (momentum_init_offset <= 0.0) throw ConfigurationError("momentum_init_offset must be positive");
    if (expected_points_best_of_three <= 0 || expected_points_best_of_five <= 0)
        throw ConfigurationError("expected total points must be positive");
}

double context_gain(const PointContext& context, const WinProbConfig& config) {
    double g = config.context.base;
    if (context.any_break_point()) g *= config.context.break_point;
    if (context.any_set_point()) g *= config.context.set_point;
    if (context.any_match_point()) g *= config.context.match_point;
    return g;
}

PerSlot<double> momentum_delta(const PointContext& context, PlayerSlot winner,
                               const WinProbConfig& config) {
    const double g = context_gain(context, config);
    PerSlot<double> delta;
    delta[winner] = config.alpha * g;
    delta[other(winner)] = -config.beta * g;
    return delta;
}

MomentumTrack update_momentum(const MomentumTrack& track, const PerSlot<double>& delta,
                              const WinProbConfig& config) {
    MomentumTrack next = track;
    for (std::size_t i = 0; i < 2; ++i)
        next.raw.v[i] = std::max(config.momentum_floor, track.raw.v[i] + delta.v[i]);
    next.last_updated_point = track.last_updated_point + 1;
    return next;
}

PerSlot<double> decay_momentum(const MomentumTrack& track, double completion,
                               const WinProbConfig& config) {
    const double factor = std::exp(-config.lambda * completion);
    return {{track.raw.p1() * factor, track.raw.p2() * factor}};
}

PerSlot<double> scale_momentum(const PerSlot<double>& decayed) {
    const double total = decayed.p1() + decayed.p2();
    assert(total > 0.0);
    if (decayed.p1() == decayed.p2()) return {{0.5, 0.5}};
    const double x = decayed.p1() / total;
    return {{x, 1.0 - x}};
}

double blend_weight(const MatchState& state) {
    if (state.completed) throw TerminalStateError("no blend weight for a completed match");
    return blend_weight_any(state, fresh_match_points_to_win(state.format));
}

PerSlot<double> live_probability(const PerSlot<double>& static_prior,
                                 const PerSlot<double>& momentum_scaled, double w) {
    PerSlot<double> live;
    for (std::size_t i = 0; i < 2; ++i)
        live.v[i] = static_prior.v[i] * (1.0 - w) + momentum_scaled.v[i] * w;
    return live;
}

PerSlot<double> set_boost(const PerSlot<double>& live, const PerSlot<int>& sets_won,
                          int total_sets_to_win) {
    PerSlot<double> boosted;
    for (std::size_t i = 0; i < 2; ++i)
        boosted.v[i] = live.v[i] * (1.0 + static_cast<double>(sets_won.v[i]) / total_sets_to_win);
    return boosted;
}

PerSlot<double> normalize_pair(const PerSlot<double>& boosted) {
    const double total = boosted.p1() + boosted.p2();
    if (!(total > 0.0)) throw std::logic_error("cannot normalize an all-zero pair");
    if (boosted.p1() == boosted.p2()) return {{0.5, 0.5}};
    const double x = boosted.p1() / total;
    return {{x, 1.0 - x}};
}

WinProbabilityEngine::WinProbabilityEngine(PreMatchProbability prior, WinProbConfig config,
                                           MatchFormat format)
    : prior_(std::move(prior)), config_(config), format_(format) {
    config_.validate();
    format_.validate();
    fresh_points_ = fresh_match_points_to_win(format_);
    for (std::size_t i = 0; i < 2; ++i)
        track_.raw.v[i] = config_.momentum_init_offset + prior_.win.v[i];
}

LiveWinProbability WinProbabilityEngine::on_point(const MatchState& before, PlayerSlot point_winner) {
    if (before.completed) throw TerminalStateError("match is already completed");
    LiveWinProbability r;
    r.static_prior = prior_;
    r.point_winner = point_winner;

    const PointContext ctx = point_context(before);
    track_ = update_momentum(track_, momentum_delta(ctx, point_winner, config_), config_);
    r.momentum_raw = track_.raw;
    r.completion = completion_fraction(before, config_.expected_total_points(format_));
    r.momentum_decayed = decay_momentum(track_, r.completion, config_);
    r.momentum_scaled = scale_momentum(r.momentum_decayed);

    const MatchState after = apply_point(before, point_winner);
    r.point_index = after.points_played_total;
    r.blend_weight = blend_weight_any(after, fresh_points_);
    r.live = live_probability(prior_.win, r.momentum_scaled, r.blend_weight);
    r.sets_won = after.sets_won;
    r.sets_to_win = format_.sets_to_win();
    r.boosted_raw = set_boost(r.live, r.sets_won, r.sets_to_win);
    r.normalized = normalize_pair(r.boosted_raw);
    return r;
}

namespace {
nlohmann::json pair(const PerSlot<double>& p) { return nlohmann::json::array({p.p1(), p.p2()}); }
} // namespace

nlohmann::json to_json(const PreMatchProbability& prior) {
    return {{"win", pair(prior.win)}, {"model_id", prior.model_id}, {"source", to_string(prior.source)}};
}

nlohmann::json to_json(const LiveWinProbability& r) {
    return {
        {"point_index", r.point_index},
        {"point_winner", slot_number(r.point_winner)},
        {"static_prior", to_json(r.static_prior)},
        {"momentum_raw", pair(r.momentum_raw)},
        {"momentum_decayed", pair(r.momentum_decayed)},
        {"momentum_scaled", pair(r.momentum_scaled)},
        {"completion", r.completion},
        {"blend_weight", r.blend_weight},
        {"live", pair(r.live)},
        {"sets_won", nlohmann::json::array({r.sets_won.p1(), r.sets_won.p2()})},
        {"sets_to_win", r.sets_to_win},
        {"boosted_raw", pair(r.boosted_raw)},
        {"normalized", pair(r.normalized)},
    };
}

WinProbConfig win_prob_config_from_json(const nlohmann::json& doc) {
    WinProbConfig c;
    c.alpha = doc.value("alpha", c.alpha);
    c.beta = doc.value("beta", c.beta);
    c.lambda = doc.value("lambda", c.lambda);
    if (doc.contains("context_weights")) {
        const auto& w = doc["context_weights"];
        c.context.base = w.value("base", c.context.base);
        c.context.break_point = w.value("break_point", c.context.break_point);
        c.context.set_point = w.value("set_point", c.context.set_point);
        c.context.match_point = w.value("match_point", c.context.match_point);
    }
    if (doc.contains("expected_total_points")) {
        const auto& e = doc["expected_total_points"];
        c.expected_points_best_of_three = e.value("bo3", c.expected_points_best_of_three);
        c.expected_points_best_of_five = e.value("bo5", c.expected_points_best_of_five);
    }
    c.momentum_floor = doc.value("momentum_floor", c.momentum_floor);
    c.momentum_init_offset = doc.value("momentum_init_offset", c.momentum_init_offset);
    c.normalize_output = doc.value("normalize_output", c.normalize_output);
    c.validate();
    return c;
}

} // namespace courtside
