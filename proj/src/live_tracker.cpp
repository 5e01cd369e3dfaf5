#include "courtside/live_tracker.hpp"

#include "courtside/errors.hpp"

namespace courtside {

std::optional<PreMatchFeatures> prematch_features_from_feeds(const FeedHub& hub,
                                                             const std::string& match_id) {
    const auto stats = hub.find_snapshot(FeedKind::PlayerStats, match_id);
    if (!stats) return std::nullopt;
    PreMatchFeatures f;
    const auto& players = stats->latest.payload["players"];
    for (std::size_t i = 0; i < 2; ++i) {
        const auto& p = players[i];
        auto& out = f.players.v[i];
        out.age = p.value("age", 0.0);
        out.recent_form = p.value("recent_form", 0.0);
        out.surface_preference = p.value("surface_preference", 0.0);
        out.historical_win_ratio = p.value("historical_win_ratio", 0.0);
    }
    if (const auto wpi = hub.find_snapshot(FeedKind::PowerIndex, match_id)) {
        const auto& values = wpi->latest.payload["values"];
        for (std::size_t i = 0; i < 2 && i < values.size(); ++i) f.players.v[i].power_index = values[i];
    }
    if (const auto h2h = hub.find_snapshot(FeedKind::HeadToHead, match_id)) {
        const auto& p = h2h->latest.payload;
        if (p.value("matches", 0) > 0) {
            PreMatchFeatures::HeadToHead h;
            h.matches = p["matches"];
            h.sets_won = {{p["sets_won"][0].get<int>(), p["sets_won"][1].get<int>()}};
            h.game_ratio = p.value("game_ratio", 0.5);
            f.head_to_head = h;
        }
    }
    return f;
}

MatchFormat match_format_from_feeds(const FeedHub& hub, const std::string& match_id) {
    MatchFormat format;
    if (const auto logistics = hub.find_snapshot(FeedKind::MatchLogistics, match_id)) {
        const auto& p = logistics->latest.payload;
        format.best_of = p.value("best_of", 3);
        if (p.contains("final_set_rule"))
            format.final_set_rule = final_set_rule_from_string(p["final_set_rule"].get<std::string>());
    }
    format.validate();
    return format;
}

nlohmann::json scores_payload(const MatchState& s) {
    nlohmann::json set_scores = nlohmann::json::array();
    for (const auto& g : s.set_scores) set_scores.push_back({g.p1(), g.p2()});
    return {
        {"sets", {s.sets_won.p1(), s.sets_won.p2()}},
        {"games", {s.games.p1(), s.games.p2()}},
        {"points", s.in_tiebreak ? nlohmann::json{s.tiebreak_points.p1(), s.tiebreak_points.p2()}
                                 : nlohmann::json{s.points.p1(), s.points.p2()}},
        {"point_display", point_display(s)},
        {"in_tiebreak", s.in_tiebreak},
        {"server", slot_number(s.server)},
        {"points_played", s.points_played_total},
        {"completed", s.completed},
        {"winner", s.winner ? nlohmann::json(slot_number(*s.winner)) : nlohmann::json(nullptr)},
        {"set_scores", std::move(set_scores)},
        {"best_of", s.format.best_of},
    };
}

LiveTracker::LiveTracker(FeedHub& hub, WinProbConfig config,
                         std::shared_ptr<const PreMatchProvider> provider)
    : hub_(hub), config_(config), provider_(std::move(provider)) {
    config_.validate();
    if (!provider_) provider_ = std::make_shared<LogisticStubProvider>();
    subscription_ = hub_.subscribe(FeedKind::SlamPointByPoint, std::nullopt,
                                   [this](const FeedEvent& e) { on_point(e); });
}

void LiveTracker::on_point(const FeedEvent& e) {
    std::lock_guard lock(mutex_);
    auto it = runs_.find(e.match_id);
    if (it == runs_.end()) {
        Run run;
        const auto format = match_format_from_feeds(hub_, e.match_id);
        run.state = new_match(format, slot_from_number(e.payload.value("server", 1)));
        const auto features = prematch_features_from_feeds(hub_, e.match_id);
        const auto prior = features ? prematch_probability(*features, *provider_)
                                    : PreMatchProbability::fixed(0.5);
        run.engine = std::make_unique<WinProbabilityEngine>(prior, config_, format);
        it = runs_.emplace(e.match_id, std::move(run)).first;
    }
    Run& run = it->second;
    if (run.state.completed) {
        ++inconsistencies_;
        return;
    }
    if (e.payload["set"].get<int>() != run.state.current_set_number() ||
        e.payload["game"].get<int>() != run.state.current_game_number())
        ++inconsistencies_;

    const auto winner = slot_from_number(e.payload["winner"].get<int>());
    const auto record = run.engine->on_point(run.state, winner);
    run.state = apply_point(run.state, winner);
    run.trace.push_back(record);

    hub_.publish(FeedEvent{FeedKind::Scores, e.match_id,
                           static_cast<std::uint64_t>(run.state.points_played_total), e.timestamp_ms,
                           scores_payload(run.state)});
    hub_.publish(FeedEvent{FeedKind::LikelihoodToWin, e.match_id,
                           static_cast<std::uint64_t>(record.point_index), e.timestamp_ms,
                           likelihood_payload(record, config_)});
}

nlohmann::json likelihood_payload(const LiveWinProbability& record, const WinProbConfig& config) {
    auto l2w = to_json(record);
    l2w["published"] = config.normalize_output ? l2w["normalized"] : l2w["boosted_raw"];
    return l2w;
}

std::optional<MatchState> LiveTracker::state(const std::string& match_id) const {
    std::lock_guard lock(mutex_);
    auto it = runs_.find(match_id);
    if (it == runs_.end()) return std::nullopt;
    return it->second.state;
}

std::vector<LiveWinProbability> LiveTracker::trace(const std::string& match_id) const {
    std::lock_guard lock(mutex_);
    auto it = runs_.find(match_id);
    return it == runs_.end() ? std::vector<LiveWinProbability>{} : it->second.trace;
}

std::size_t LiveTracker::inconsistencies() const {
    std::lock_guard lock(mutex_);
    return inconsistencies_;
}

} // namespace courtside
