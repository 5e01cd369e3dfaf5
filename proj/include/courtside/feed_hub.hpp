#pragma once

#include <nlohmann/json.hpp>

#include <array>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

namespace courtside {

enum class FeedKind {
    HeadToHead,
    MatchStats,
    Scores,
    LikelihoodToWin,
    PowerIndex,
    PlayerStats,
    Draw,
    MatchLogistics,
    SlamPointByPoint,
};

inline constexpr std::array<FeedKind, 9> kAllFeedKinds = {
    FeedKind::HeadToHead, FeedKind::MatchStats,  FeedKind::Scores,
    FeedKind::LikelihoodToWin, FeedKind::PowerIndex, FeedKind::PlayerStats,
    FeedKind::Draw,       FeedKind::MatchLogistics, FeedKind::SlamPointByPoint,
};

std::string_view to_string(FeedKind kind);
/// Throws ValidationError for an unknown name.
FeedKind feed_kind_from_string(std::string_view name);

struct FeedEvent {
    FeedKind kind = FeedKind::Scores;
    std::string match_id;
    std::uint64_t sequence = 0;
    std::int64_t timestamp_ms = 0;
    nlohmann::json payload;
};

/// Replay-file record: {"kind","match_id","seq","ts_ms","payload"}.
nlohmann::json to_json(const FeedEvent& event);
FeedEvent feed_event_from_json(const nlohmann::json& record);

/// Throws ValidationError when `payload` misses a required field of `kind`.
void validate_payload(FeedKind kind, const nlohmann::json& payload);

/// Latest consistent state of one topic.
struct FeedSnapshot {
    FeedKind kind = FeedKind::Scores;
    std::string match_id;
    FeedEvent latest;
    /// SlamPointByPoint only: point payloads keyed by set, then game.
    std::map<int, std::map<int, std::vector<nlohmann::json>>> points;
    std::size_t point_count = 0;

    std::uint64_t sequence() const noexcept { return latest.sequence; }
    nlohmann::json to_json() const;
};

using FeedHandler = std::function<void(const FeedEvent&)>;

struct SubscribeOptions {
    /// Deliver the topic's latest event before live events.
    bool snapshot_first = false;
};

class FeedHub;

/// Handle to a live subscription; cancels on destruction.
class Subscription {
public:
    Subscription() = default;
    Subscription(Subscription&&) noexcept = default;
    Subscription& operator=(Subscription&& other) noexcept;
    Subscription(const Subscription&) = delete;
    Subscription& operator=(const Subscription&) = delete;
    ~Subscription() { cancel(); }

    void cancel() noexcept;
    bool active() const noexcept;

private:
    friend class FeedHub;
    explicit Subscription(std::shared_ptr<std::atomic<bool>> flag) : active_(std::move(flag)) {}
    std::shared_ptr<std::atomic<bool>> active_;
};

/// In-process publish/subscribe hub. Topics are (kind, match_id) pairs with
/// gapless per-topic sequences starting at 1. Publishing is linearizable per
/// topic; snapshot reads never block on a publisher's delivery.
class FeedHub {
public:
    FeedHub() = default;
    FeedHub(const FeedHub&) = delete;
    FeedHub& operator=(const FeedHub&) = delete;

    /// Throws ValidationError (bad payload) or OrderingError (sequence).
    void publish(FeedEvent event);

    /// `match_id` = nullopt subscribes to every match of `kind`.
    [[nodiscard]] Subscription subscribe(FeedKind kind, std::optional<std::string> match_id,
                                         FeedHandler handler, SubscribeOptions options = {});

    /// Throws NotFoundError for an unknown topic.
    std::shared_ptr<const FeedSnapshot> snapshot(FeedKind kind, std::string_view match_id) const;
    std::shared_ptr<const FeedSnapshot> find_snapshot(FeedKind kind,
                                                      std::string_view match_id) const noexcept;

    std::uint64_t last_sequence(FeedKind kind, std::string_view match_id) const noexcept;
    std::vector<std::string> match_ids() const;

    /// Every snapshot, ordered by (kind, match_id); the replay-determinism witness.
    nlohmann::json dump_snapshots() const;

private:
    struct Subscriber {
        FeedHandler handler;
        std::shared_ptr<std::atomic<bool>> active;
    };
    struct Topic {
        std::mutex publish_mutex;
        std::shared_ptr<const FeedSnapshot> snap;  // accessed with std::atomic_load/store
        std::vector<std::shared_ptr<Subscriber>> subscribers;
    };
    using TopicKey = std::pair<int, std::string>;

    std::shared_ptr<Topic> topic(FeedKind kind, const std::string& match_id, bool create) const;
    std::vector<std::shared_ptr<Subscriber>> wildcard_subscribers(FeedKind kind) const;
    static void deliver(const std::vector<std::shared_ptr<Subscriber>>& subs, const FeedEvent& e);

    mutable std::shared_mutex topics_mutex_;
    mutable std::map<TopicKey, std::shared_ptr<Topic>, std::less<>> topics_;
    mutable std::mutex subs_mutex_;
    std::map<int, std::vector<std::shared_ptr<Subscriber>>> wildcard_;
};

/// Multi-producer queue adapter for consumers that want a pull-style stream.
class EventQueue {
public:
    void push(FeedEvent e);
    /// Waits up to `timeout`; nullopt on timeout or after close() drains.
    std::optional<FeedEvent> pop_for(std::chrono::milliseconds timeout);
    void close();
    bool closed() const;

private:
    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<FeedEvent> items_;
    bool closed_ = false;
};

/// Parses and validates a newline-delimited replay stream. Blank lines are
/// skipped. Throws ParseError (with line number) on a malformed record and
/// OrderingError on a per-topic sequence gap; nothing is returned partially.
std::vector<FeedEvent> load_replay(std::istream& in);
std::vector<FeedEvent> load_replay(const std::filesystem::path& path);

inline constexpr double kAsFastAsPossible = std::numeric_limits<double>::infinity();

/// Publishes `events` in order, sleeping recorded timestamp deltas divided by
/// `speed_multiplier` between them.
void run_replay(FeedHub& hub, const std::vector<FeedEvent>& events, double speed_multiplier);

} // namespace courtside
