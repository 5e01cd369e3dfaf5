#pragma once

#include "courtside/feed_hub.hpp"
#include "courtside/match_state.hpp"
#include "courtside/win_probability.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace courtside {

/// Pre-match features assembled from PlayerStats, PowerIndex and HeadToHead
/// snapshots. nullopt when PlayerStats is missing.
std::optional<PreMatchFeatures> prematch_features_from_feeds(const FeedHub& hub,
                                                             const std::string& match_id);

/// Format from the MatchLogistics snapshot; best-of-three defaults otherwise.
MatchFormat match_format_from_feeds(const FeedHub& hub, const std::string& match_id);

nlohmann::json scores_payload(const MatchState& state);

/// LikelihoodToWin event payload: the full record plus the published pair.
nlohmann::json likelihood_payload(const LiveWinProbability& record, const WinProbConfig& config);

/// Drives the scoring state machine and the win-probability engine from the
/// point-by-point feed, publishing one Scores and one LikelihoodToWin event
/// per point. Timestamps are copied from the source event.
class LiveTracker {
public:
    LiveTracker(FeedHub& hub, WinProbConfig config,
                std::shared_ptr<const PreMatchProvider> provider = nullptr);

    std::optional<MatchState> state(const std::string& match_id) const;
    std::vector<LiveWinProbability> trace(const std::string& match_id) const;
    /// Point events whose set/game labels disagreed with the tracked score,
    /// plus events received after the match completed.
    std::size_t inconsistencies() const;
    const WinProbConfig& config() const noexcept { return config_; }

private:
    struct Run {
        MatchState state;
        std::unique_ptr<WinProbabilityEngine> engine;
        std::vector<LiveWinProbability> trace;
    };

    void on_point(const FeedEvent& event);

    FeedHub& hub_;
    WinProbConfig config_;
    std::shared_ptr<const PreMatchProvider> provider_;
    mutable std::mutex mutex_;
    std::map<std::string, Run> runs_;
    std::size_t inconsistencies_ = 0;
    Subscription subscription_;
};

} // namespace courtside
