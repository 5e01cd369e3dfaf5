#include "courtside/errors.hpp"
#include "courtside/providers.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <cmath>
#include <thread>

using namespace courtside;
using namespace std::chrono_literals;

namespace {

CompletionRequest request(std::string prompt, std::chrono::milliseconds budget = 1000ms, int max_tokens = 128) {
    CompletionRequest r;
    r.prompt = std::move(prompt);
    r.max_completion_tokens = max_tokens;
    r.deadline = Clock::now() + budget;
    return r;
}

double norm(const Embedding& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

} // namespace

TEST(Cosine, ZeroVectorIsZero) {
    EXPECT_DOUBLE_EQ(cosine({0, 0}, {1, 0}), 0.0);
    EXPECT_DOUBLE_EQ(cosine({1, 0}, {1, 0}), 1.0);
    EXPECT_NEAR(cosine({1, 1}, {1, 0}), std::sqrt(0.5), 1e-15);
}

TEST(JudgeVerdict, PassMarkAppliesToBothDimensions) {
    EXPECT_FALSE(JudgeVerdict::make(79, 95, "", "").passed);
    EXPECT_FALSE(JudgeVerdict::make(95, 79, "", "").passed);
    EXPECT_TRUE(JudgeVerdict::make(80, 80, "", "").passed);
}

TEST(MockJudge, FactualnessCountsSupportedNumbers) {
    const auto v = MockJudge::score("How many aces has Sinner hit?", "Jannik Sinner aces: 14",
                                    "Jannik Sinner has hit 14 aces.");
    EXPECT_EQ(v.factualness, 100);
    EXPECT_EQ(v.relevance, 100);
    EXPECT_TRUE(v.passed);
    const auto fab = MockJudge::score("How many aces has Sinner hit?", "Jannik Sinner aces: 14",
                                      "Jannik Sinner has hit 15 aces.");
    EXPECT_EQ(fab.factualness, 0);
    EXPECT_FALSE(fab.passed);
}

TEST(MockJudge, RelevanceIsTwiceLemmaOverlap) {
    // Question content lemmas: ace, sinner, hit. Answer mentions one of three.
    const auto v = MockJudge::score("How many aces has Sinner hit?", "", "He has some aces.");
    EXPECT_EQ(v.relevance, 66);
}

TEST(MockJudge, ScriptedVerdictsThenFailure) {
    MockJudge judge;
    judge.push_verdict(79, 95);
    judge.push_failure();
    const auto v = judge.judge("q?", "", "a");
    EXPECT_EQ(v.factualness, 79);
    EXPECT_FALSE(v.passed);
    EXPECT_THROW(judge.judge("q?", "", "a"), ProviderError);
    EXPECT_THROW(judge.judge("q?", "", " "), ValidationError);
}

TEST(MockCompletion, DefaultResponderPicksBestFact) {
    const std::string prompt = "Answer.\nFacts:\n- Carlos Alcaraz aces: 12\n- Jannik Sinner aces: 14\n"
                               "Question: How many aces has Sinner hit?\nAnswer:";
    EXPECT_EQ(MockCompletionProvider::default_answer(prompt), "Jannik Sinner aces: 14.");
}

TEST(MockCompletion, ScriptedBehaviorsInOrder) {
    auto rec = std::make_shared<CallRecorder>();
    MockCompletionProvider llm(rec);
    llm.script().push(MockBehavior::respond("one two three four five"));
    llm.script().push(MockBehavior::error());
    llm.script().push(MockBehavior::hang());
    const auto r = llm.complete(request("hello world", 1000ms, 3));
    EXPECT_EQ(r.text, "one two three");
    EXPECT_EQ(r.prompt_token_count, 2);
    EXPECT_EQ(r.completion_token_count, 3);
    EXPECT_THROW(llm.complete(request("x")), ProviderError);
    const auto start = Clock::now();
    EXPECT_THROW(llm.complete(request("x", 60ms)), ProviderTimeout);
    EXPECT_GE(Clock::now() - start, 55ms);
    EXPECT_EQ(rec->count("complete"), 3u);
    EXPECT_EQ(llm.script().pending(), 0u);
}

TEST(MockCompletion, DelayPastDeadlineTimesOut) {
    MockCompletionProvider llm;
    llm.script().push(MockBehavior::respond("late", 200ms));
    const auto start = Clock::now();
    EXPECT_THROW(llm.complete(request("x", 40ms)), ProviderTimeout);
    EXPECT_LT(Clock::now() - start, 150ms);
}

TEST(MockCompletion, FixedHangIgnoresDeadline) {
    MockCompletionProvider llm;
    llm.script().push(MockBehavior::hang(80ms));
    const auto start = Clock::now();
    EXPECT_THROW(llm.complete(request("x", 10ms)), ProviderTimeout);
    EXPECT_GE(Clock::now() - start, 75ms);
}

TEST(MockEmbedder, DeterministicUnitVectors) {
    MockEmbedder e;
    const auto a = e.embed("How many aces has Sinner hit?");
    EXPECT_EQ(a.size(), 384u);
    EXPECT_NEAR(norm(a), 1.0, 1e-12);
    EXPECT_EQ(a, e.embed("how many ACES has sinner hit"));
    EXPECT_GT(cosine(a, e.embed("Sinner aces")), cosine(a, e.embed("Where can I park?")));
    EXPECT_NEAR(norm(e.embed("?!")), 1.0, 1e-12);
    EXPECT_THROW(e.embed(""), ValidationError);
}

TEST(RemoteJudge, ParsesRubricReply) {
    const auto v = RemoteJudge::parse("FACTUALNESS: 90\nFACTUALNESS_REASON: ok\nrelevance: 85\n");
    EXPECT_EQ(v.factualness, 90);
    EXPECT_EQ(v.relevance, 85);
    EXPECT_EQ(v.relevance_explanation, "no explanation given");
    EXPECT_TRUE(v.passed);
    EXPECT_THROW(RemoteJudge::parse("I think it is fine"), ProviderError);
    EXPECT_NE(RemoteJudge::rubric("q", "ctx", "a").find("Context:\nctx"), std::string::npos);
}

TEST(ProviderConfig, ParsesAndValidates) {
    const auto c = provider_config_from_json({{"mode", "mock"}, {"mock_latency_ms", 3}});
    EXPECT_EQ(c.mock_latency, 3ms);
    EXPECT_THROW(provider_config_from_json({{"mode", "cloud"}}), ConfigurationError);
    EXPECT_THROW(provider_config_from_json({{"mode", "remote"}}), ConfigurationError);
    const auto p = make_providers(c);
    ASSERT_TRUE(p.recorder);
    (void)p.completion->complete(request("Question: aces"));
    (void)p.judge->judge("aces?", "", "12 aces");
    EXPECT_EQ(p.recorder->count("complete"), 1u);
    EXPECT_EQ(p.recorder->count("judge"), 1u);
}

class RemoteFixture : public ::testing::Test {
protected:
    void SetUp() override {
        server_.Post("/complete", [](const httplib::Request& req, httplib::Response& res) {
            const auto body = nlohmann::json::parse(req.body);
            if (body["prompt"] == "slow") std::this_thread::sleep_for(300ms);
            res.set_content(nlohmann::json{{"text", "echo " + body["prompt"].get<std::string>()},
                                           {"prompt_tokens", 7}}
                                .dump(),
                            "application/json");
        });
        server_.Post("/embed", [](const httplib::Request& req, httplib::Response& res) {
            const auto body = nlohmann::json::parse(req.body);
            if (body["text"] == "bad") {
                res.status = 500;
                return;
            }
            res.set_content(R"({"vector":[3,4,0]})", "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    void TearDown() override {
        server_.stop();
        thread_.join();
    }
    RemoteEndpoint endpoint() const { return {"http://127.0.0.1:" + std::to_string(port_), 2000ms}; }

    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
};

TEST_F(RemoteFixture, CompletionRoundTrip) {
    RemoteCompletionProvider llm(endpoint());
    const auto r = llm.complete(request("hi"));
    EXPECT_EQ(r.text, "echo hi");
    EXPECT_EQ(r.prompt_token_count, 7);
    EXPECT_EQ(r.completion_token_count, 2);
}

TEST_F(RemoteFixture, CompletionHonorsDeadline) {
    RemoteCompletionProvider llm(endpoint());
    const auto start = Clock::now();
    EXPECT_THROW(llm.complete(request("slow", 100ms)), ProviderTimeout);
    EXPECT_LT(Clock::now() - start, 280ms);
}

TEST_F(RemoteFixture, EmbedderNormalizesAndChecksDimension) {
    RemoteEmbedder e(endpoint(), 3);
    const auto v = e.embed("x");
    EXPECT_DOUBLE_EQ(v[0], 0.6);
    EXPECT_DOUBLE_EQ(v[1], 0.8);
    EXPECT_THROW(RemoteEmbedder(endpoint(), 4).embed("x"), ProviderError);
    EXPECT_THROW(e.embed("bad"), ProviderError);
}

TEST(Remote, UnreachableIsProviderError) {
    RemoteCompletionProvider llm({"http://127.0.0.1:1", 200ms});
    EXPECT_THROW(llm.complete(request("x")), ProviderError);
}
