#include "courtside/errors.hpp"
#include "courtside/feed_hub.hpp"
#include "courtside/live_tracker.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

using namespace courtside;

namespace {

FeedEvent scores(const std::string& match, std::uint64_t seq) {
    return FeedEvent{FeedKind::Scores, match, seq, static_cast<std::int64_t>(1000 + seq),
                     {{"sets", {0, 0}}, {"games", {0, 0}}, {"points_played", seq},
                      {"completed", false}}};
}

const std::string kM1 = COURTSIDE_SOURCE_DIR "/data/replay/m1_alcaraz_sinner_bo5.ndjson";
const std::string kM2 = COURTSIDE_SOURCE_DIR "/data/replay/m2_sabalenka_swiatek_bo3.ndjson";

} // namespace

TEST(FeedKinds, NineKindsRoundTrip) {
    EXPECT_EQ(kAllFeedKinds.size(), 9u);
    for (auto k : kAllFeedKinds) EXPECT_EQ(feed_kind_from_string(to_string(k)), k);
    EXPECT_THROW(feed_kind_from_string("Weather"), ValidationError);
}

TEST(Publish, FirstEventCreatesSnapshot) {
    FeedHub hub;
    hub.publish(scores("M", 1));
    EXPECT_EQ(hub.snapshot(FeedKind::Scores, "M")->sequence(), 1u);
    EXPECT_EQ(hub.match_ids(), std::vector<std::string>{"M"});
}

TEST(Publish, RejectsRegressionAndGap) {
    FeedHub hub;
    hub.publish(scores("M", 1));
    EXPECT_THROW(hub.publish(scores("M", 1)), OrderingError);
    EXPECT_THROW(hub.publish(scores("M", 3)), OrderingError);
    EXPECT_THROW(hub.publish(scores("N", 2)), OrderingError);
    EXPECT_EQ(hub.snapshot(FeedKind::Scores, "M")->sequence(), 1u);
}

TEST(Publish, RejectsSchemaViolation) {
    FeedHub hub;
    auto e = scores("M", 1);
    e.payload.erase("games");
    EXPECT_THROW(hub.publish(e), ValidationError);
    e = FeedEvent{FeedKind::SlamPointByPoint, "M", 1, 0, {{"set", 1}, {"game", 1}, {"winner", 3}}};
    EXPECT_THROW(hub.publish(e), ValidationError);
    EXPECT_EQ(hub.find_snapshot(FeedKind::Scores, "M"), nullptr);
}

TEST(Snapshot, UnknownTopicIsNotFound) {
    FeedHub hub;
    EXPECT_THROW(hub.snapshot(FeedKind::Draw, "nope"), NotFoundError);
    EXPECT_EQ(hub.last_sequence(FeedKind::Draw, "nope"), 0u);
}

TEST(Subscribe, SnapshotFirstThenLive) {
    FeedHub hub;
    for (std::uint64_t i = 1; i <= 5; ++i) hub.publish(scores("M", i));
    std::vector<std::uint64_t> seen;
    auto sub = hub.subscribe(FeedKind::Scores, std::string("M"),
                             [&](const FeedEvent& e) { seen.push_back(e.sequence); },
                             {.snapshot_first = true});
    hub.publish(scores("M", 6));
    hub.publish(scores("M", 7));
    EXPECT_EQ(seen, (std::vector<std::uint64_t>{5, 6, 7}));
}

TEST(Subscribe, LiveOnlyByDefaultAndCancelStops) {
    FeedHub hub;
    hub.publish(scores("M", 1));
    int count = 0;
    auto sub = hub.subscribe(FeedKind::Scores, std::string("M"), [&](const FeedEvent&) { ++count; });
    hub.publish(scores("M", 2));
    sub.cancel();
    EXPECT_FALSE(sub.active());
    hub.publish(scores("M", 3));
    EXPECT_EQ(count, 1);
}

TEST(Subscribe, WildcardSeesEveryMatch) {
    FeedHub hub;
    hub.publish(scores("A", 1));
    std::vector<std::string> seen;
    auto sub = hub.subscribe(FeedKind::Scores, std::nullopt,
                             [&](const FeedEvent& e) { seen.push_back(e.match_id + std::to_string(e.sequence)); },
                             {.snapshot_first = true});
    hub.publish(scores("B", 1));
    hub.publish(scores("A", 2));
    EXPECT_EQ(seen, (std::vector<std::string>{"A1", "B1", "A2"}));
}

// Several publishers on distinct topics, several subscribers: every
// subscriber sees each topic's events exactly once, in sequence order, and
// all subscribers agree on per-topic order.
TEST(Subscribe, ConcurrentDeliveryIsOrderedAndExactlyOnce) {
    FeedHub hub;
    constexpr int kTopics = 4;
    constexpr int kEvents = 500;
    constexpr int kSubscribers = 6;
    std::vector<std::vector<std::vector<std::uint64_t>>> seen(
        kSubscribers, std::vector<std::vector<std::uint64_t>>(kTopics));
    std::vector<std::mutex> locks(kSubscribers);
    std::vector<Subscription> subs;
    for (int s = 0; s < kSubscribers; ++s)
        subs.push_back(hub.subscribe(FeedKind::LikelihoodToWin, std::nullopt, [&, s](const FeedEvent& e) {
            std::lock_guard lock(locks[s]);
            seen[s][std::stoi(e.match_id)].push_back(e.sequence);
        }));
    std::vector<std::thread> publishers;
    for (int t = 0; t < kTopics; ++t)
        publishers.emplace_back([&, t] {
            for (std::uint64_t i = 1; i <= kEvents; ++i)
                hub.publish({FeedKind::LikelihoodToWin, std::to_string(t), i, 0,
                             {{"point_index", i}, {"live", {0.5, 0.5}}, {"normalized", {0.5, 0.5}}}});
        });
    for (auto& p : publishers) p.join();
    for (int s = 0; s < kSubscribers; ++s)
        for (int t = 0; t < kTopics; ++t) {
            ASSERT_EQ(seen[s][t].size(), static_cast<std::size_t>(kEvents));
            for (int i = 0; i < kEvents; ++i) ASSERT_EQ(seen[s][t][i], static_cast<std::uint64_t>(i + 1));
            ASSERT_EQ(seen[s][t], seen[0][t]);
        }
}

TEST(Snapshot, NeverTornUnderConcurrentPublish) {
    FeedHub hub;
    std::atomic<bool> done{false};
    std::thread writer([&] {
        for (std::uint64_t i = 1; i <= 3000; ++i) hub.publish(scores("M", i));
        done = true;
    });
    std::uint64_t last = 0;
    std::size_t reads = 0;
    while (!done || reads == 0) {
        if (auto s = hub.find_snapshot(FeedKind::Scores, "M")) {
            ASSERT_EQ(s->sequence(), s->latest.payload["points_played"].get<std::uint64_t>());
            ASSERT_GE(s->sequence(), last);
            last = s->sequence();
        }
        ++reads;
    }
    writer.join();
    EXPECT_EQ(hub.snapshot(FeedKind::Scores, "M")->sequence(), 3000u);
}

TEST(EventQueue, PopAndClose) {
    EventQueue q;
    q.push(scores("M", 1));
    auto e = q.pop_for(std::chrono::milliseconds(10));
    ASSERT_TRUE(e);
    EXPECT_EQ(e->sequence, 1u);
    EXPECT_FALSE(q.pop_for(std::chrono::milliseconds(5)));
    q.close();
    EXPECT_TRUE(q.closed());
    EXPECT_FALSE(q.pop_for(std::chrono::milliseconds(1000)));
}

TEST(Replay, EmptyStreamIsNoOp) {
    std::istringstream in("\n\n");
    const auto events = load_replay(in);
    EXPECT_TRUE(events.empty());
    FeedHub hub;
    run_replay(hub, events, 1.0);
    EXPECT_TRUE(hub.match_ids().empty());
}

TEST(Replay, MalformedRecordReportsLine) {
    std::istringstream in(
        R"({"kind":"Draw","match_id":"M","seq":1,"ts_ms":0,"payload":{"round":"QF","players":[]}})"
        "\n{not json}\n");
    try {
        (void)load_replay(in);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    std::istringstream bad_kind(R"({"kind":"Nope","match_id":"M","seq":1,"ts_ms":0,"payload":{}})");
    EXPECT_THROW((void)load_replay(bad_kind), ParseError);
}

TEST(Replay, GapRejectedBeforeAnyPublish) {
    std::istringstream in(
        R"({"kind":"Draw","match_id":"M","seq":1,"ts_ms":0,"payload":{"round":"QF","players":[]}})"
        "\n"
        R"({"kind":"Draw","match_id":"M","seq":3,"ts_ms":0,"payload":{"round":"QF","players":[]}})"
        "\n");
    FeedHub hub;
    EXPECT_THROW(run_replay(hub, load_replay(in), kAsFastAsPossible), OrderingError);
    EXPECT_TRUE(hub.match_ids().empty());
}

TEST(Replay, FixtureDrivesTrackerConsistently) {
    FeedHub hub;
    LiveTracker tracker(hub, WinProbConfig{});
    run_replay(hub, load_replay(std::filesystem::path(kM1)), kAsFastAsPossible);
    EXPECT_EQ(tracker.inconsistencies(), 0u);
    const auto state = tracker.state("M1");
    ASSERT_TRUE(state);
    EXPECT_TRUE(state->completed);
    EXPECT_EQ(state->winner, PlayerSlot::P2);
    // Set scores written by the independent fixture generator.
    const std::vector<PerSlot<int>> expect{{{6, 3}}, {{4, 6}}, {{6, 4}}, {{6, 7}}, {{4, 6}}};
    EXPECT_EQ(state->set_scores, expect);
    const auto slam = hub.snapshot(FeedKind::SlamPointByPoint, "M1");
    const auto sc = hub.snapshot(FeedKind::Scores, "M1");
    EXPECT_EQ(slam->point_count, sc->latest.payload["points_played"].get<std::size_t>());
    EXPECT_EQ(hub.snapshot(FeedKind::LikelihoodToWin, "M1")->sequence(), slam->point_count);
    EXPECT_EQ(slam->points.size(), 5u);
}

TEST(Replay, FinalSnapshotsIndependentOfSpeed) {
    const auto events = load_replay(std::filesystem::path(kM2));
    auto run = [&](double speed) {
        FeedHub hub;
        LiveTracker tracker(hub, WinProbConfig{});
        run_replay(hub, events, speed);
        nlohmann::json trace = nlohmann::json::array();
        for (const auto& r : tracker.trace("M2")) trace.push_back(to_json(r));
        return std::pair{hub.dump_snapshots().dump(), trace.dump()};
    };
    const auto fast = run(kAsFastAsPossible);
    const auto paced = run(4.0);
    EXPECT_EQ(fast.first, paced.first);
    EXPECT_EQ(fast.second, paced.second);
}
