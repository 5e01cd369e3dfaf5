#include "courtside/agent_graph.hpp"
#include "courtside/errors.hpp"
#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <thread>

using namespace courtside;
using namespace std::chrono_literals;

namespace {

struct Harness {
    std::unique_ptr<fixtures::LoadedHub> loaded = fixtures::load(fixtures::kM1);
    std::shared_ptr<CallRecorder> recorder = std::make_shared<CallRecorder>();
    std::shared_ptr<MockCompletionProvider> llm = std::make_shared<MockCompletionProvider>(recorder);
    std::shared_ptr<MockJudge> judge = std::make_shared<MockJudge>(recorder);
    std::shared_ptr<AgentServices> services = std::make_shared<AgentServices>();

    explicit Harness(std::chrono::milliseconds deadline = 6000ms) {
        services->hub = loaded->hub.get();
        services->synthesizer =
            std::make_shared<DataSynthesizer>(load_patterns(fixtures::kSource / "data/synth/patterns.json"));
        services->llm = llm;
        services->embedder = std::make_shared<MockEmbedder>();
        services->judge = judge;
        services->rules = std::make_shared<CorrectionRules>(
            CorrectionRules::load(fixtures::kSource / "data/agents/corrections.json"));
        services->corpora = std::make_shared<CorpusCache>();
        services->config.answer_deadline = deadline;
    }

    GraphOutcome ask(const std::string& q, QueryCategory c, const std::string& match = "M1") {
        AgentGraph g(services);
        return g.run({q, c, match, Clock::now()});
    }
};

const CorrectionRules& rules() {
    static const auto r = CorrectionRules::load(fixtures::kSource / "data/agents/corrections.json");
    return r;
}

} // namespace

TEST(Corrections, GroupThousands) {
    EXPECT_EQ(group_thousands("12345 fans", ","), "12,345 fans");
    EXPECT_EQ(group_thousands("1234567", ","), "1,234,567");
    EXPECT_EQ(group_thousands("123456", ","), "123,456");
    EXPECT_EQ(group_thousands("In 2025 he", ","), "In 2025 he");
    EXPECT_EQ(group_thousands("pi is 3.14159", ","), "pi is 3.14159");
    EXPECT_EQ(group_thousands("15,000 seats", ","), "15,000 seats");
}

TEST(Corrections, EachRuleAndLog) {
    std::vector<Correction> log;
    EXPECT_EQ(rules().apply("Sinner has 1 aces.", &log), "Sinner has 1 ace.");
    ASSERT_EQ(log.size(), 1u);
    EXPECT_EQ(log[0].rule_id, "plural_singular_count");
    EXPECT_EQ(log[0].before, "Sinner has 1 aces.");
    EXPECT_EQ(rules().apply("The QF crowd of 14979 watched"), "The Quarterfinals crowd of 14,979 watched");
    EXPECT_EQ(rules().apply("Next is the R16 then SF."), "Next is the Round of 16 then Semifinals.");
    EXPECT_EQ(rules().apply("Jannik Sinner aces: 14."), "Jannik Sinner has 14 aces.");
    EXPECT_EQ(rules().apply("Jannik Sinner aces: 1."), "Jannik Sinner has 1 ace.");
    log.clear();
    EXPECT_EQ(rules().apply("Nothing to fix here.", &log), "Nothing to fix here.");
    EXPECT_TRUE(log.empty());
}

TEST(Corrections, Idempotent) {
    for (const char* s : {"Sinner has 1 aces.", "The QF crowd of 14979 watched", "Jannik Sinner aces: 1.",
                          "one winners and 1 double faults in 1234567 points", "R16 and SF and QF"}) {
        const auto once = rules().apply(s);
        EXPECT_EQ(rules().apply(once), once) << s;
    }
}

TEST(Corrections, BadRulesRejected) {
    EXPECT_THROW(CorrectionRules::from_json(nlohmann::json::parse(
                     R"([{"id":"x","kind":"reorder","pattern":"(","replacement":"","rationale":"r"}])")),
                 ConfigurationError);
    EXPECT_THROW(CorrectionRules::from_json(nlohmann::json::parse(R"([{"id":"x","kind":"spell","rationale":"r"}])")),
                 ConfigurationError);
}

TEST(Prompt, LayoutAndToolLines) {
    EXPECT_EQ(build_prompt("Do it.", {"a: 1", "b: 2"}, "q?"), "Do it.\nFacts:\n- a: 1\n- b: 2\nQuestion: q?\nAnswer:");
    const auto lines = tool_fact_lines({{"aces", 3}, {"court", "Centre Court"}, {"pct", 62.5}});
    EXPECT_EQ(lines, (std::vector<std::string>{"aces: 3", "court: Centre Court", "pct: 62.5"}));
}

TEST(ToolSelection, ScopedToNamedPlayer) {
    Harness h;
    AgentGraph g(h.services);
    auto ctx = g.a1_init({"How many aces has Sinner hit?", QueryCategory::MatchStatistics, "M1", Clock::now()});
    g.a2_select_tool(ctx);
    ASSERT_TRUE(ctx.tool_output);
    EXPECT_EQ(ctx.tool_output->at("Jannik Sinner aces"), 14);
    EXPECT_FALSE(ctx.tool_output->contains("Carlos Alcaraz aces"));

    auto both = g.a1_init({"How many aces?", QueryCategory::MatchStatistics, "M1", Clock::now()});
    g.a2_select_tool(both);
    EXPECT_EQ(both.tool_output->at("Carlos Alcaraz aces"), 12);

    auto missing = g.a1_init({"How many aces?", QueryCategory::MatchStatistics, "NOPE", Clock::now()});
    g.a2_select_tool(missing);
    EXPECT_FALSE(missing.tool_output);
}

TEST(Generate, ToolTierAnswersAndPassesJudge) {
    Harness h;
    const auto out = h.ask("How many aces has Sinner hit?", QueryCategory::MatchStatistics);
    EXPECT_EQ(out.kind, GraphOutcome::Kind::answered);
    EXPECT_EQ(out.context.answer_path, AnswerPath::tool_llm);
    EXPECT_EQ(out.context.chosen_answer, "Jannik Sinner has 14 aces.");
    ASSERT_TRUE(out.context.judge);
    EXPECT_TRUE(out.context.judge->passed);
    EXPECT_EQ(out.context.corrections.size(), 1u);
    EXPECT_GT(out.context.prompt_tokens, 0);
}

TEST(Generate, PromptVariantFollowsQuestionForm) {
    Harness h;
    (void)h.ask("Why is Sinner winning?", QueryCategory::Predictions);
    (void)h.ask("How many aces has Sinner hit?", QueryCategory::MatchStatistics);
    (void)h.ask("How is Sinner serving?", QueryCategory::MatchStatistics);
    const auto calls = h.recorder->calls();
    std::vector<std::string> prompts;
    for (const auto& c : calls)
        if (c.kind == "complete") prompts.push_back(c.prompt);
    ASSERT_EQ(prompts.size(), 3u);
    const AgentGraphConfig cfg;
    EXPECT_EQ(prompts[0].rfind(cfg.explain_instruction, 0), 0u);
    EXPECT_EQ(prompts[1].rfind(cfg.terse_instruction, 0), 0u);
    EXPECT_EQ(prompts[2].rfind(cfg.explain_instruction, 0), 0u);
}

TEST(JudgeGate, ScriptedVerdicts) {
    const std::vector<std::tuple<int, int, AnswerPath>> cases{
        {79, 95, AnswerPath::synth_raw}, {95, 79, AnswerPath::synth_raw}, {80, 80, AnswerPath::tool_llm}};
    for (const auto& [f, r, path] : cases) {
        Harness h;
        h.judge->push_verdict(f, r);
        const auto out = h.ask("How many aces has Sinner hit?", QueryCategory::MatchStatistics);
        EXPECT_EQ(out.context.answer_path, path) << f << "," << r;
        ASSERT_TRUE(out.context.judge);
        EXPECT_EQ(out.context.judge->factualness, f);
        if (path == AnswerPath::synth_raw) {
            EXPECT_EQ(out.context.chosen_answer.rfind("Closest available fact: ", 0), 0u);
        }
    }
}

TEST(JudgeGate, FailureReroutes) {
    Harness h;
    h.judge->push_failure();
    const auto out = h.ask("How many aces has Sinner hit?", QueryCategory::MatchStatistics);
    EXPECT_EQ(out.context.answer_path, AnswerPath::synth_raw);
    EXPECT_EQ(out.context.chosen_answer, "Closest available fact: Jannik Sinner has hit 14 aces so far.");
}

TEST(JudgeGate, SlowJudgeBoundedByGrace) {
    Harness h(400ms);
    h.judge->set_delay(5000ms);
    const auto start = Clock::now();
    const auto out = h.ask("How many aces has Sinner hit?", QueryCategory::MatchStatistics);
    EXPECT_LT(Clock::now() - start, 400ms + 250ms);
    EXPECT_EQ(out.context.answer_path, AnswerPath::synth_raw);
}

TEST(Tiers, SummarizeWhenToolTierFails) {
    Harness h;
    h.llm->script().push(MockBehavior::error());
    const auto out = h.ask("How many aces has Sinner hit?", QueryCategory::MatchStatistics);
    EXPECT_EQ(out.context.answer_path, AnswerPath::synth_summarize);
    EXPECT_TRUE(out.context.judge && out.context.judge->passed);
    EXPECT_NE(out.context.chosen_answer.find("14"), std::string::npos);
}

TEST(Tiers, RawFactWhenBothProviderTiersFail) {
    Harness h;
    h.llm->script().push(MockBehavior::error());
    h.llm->script().push(MockBehavior::error());
    const auto out = h.ask("How many aces has Sinner hit?", QueryCategory::MatchStatistics);
    EXPECT_EQ(out.context.answer_path, AnswerPath::synth_raw);
    EXPECT_FALSE(out.context.judge);
}

TEST(Tiers, NoneBelowPrecision) {
    Harness h;
    h.llm->script().set_default(MockBehavior::error());
    const auto out = h.ask("Tell me something about the crowd noise", QueryCategory::LivePointByPoint);
    EXPECT_EQ(out.kind, GraphOutcome::Kind::no_answer);
    EXPECT_EQ(out.context.answer_path, AnswerPath::none);
    EXPECT_TRUE(out.context.chosen_answer.empty());
}

TEST(Tiers, HangReturnsByDeadline) {
    Harness h(300ms);
    h.llm->script().set_default(MockBehavior::hang(3000ms));
    const auto start = Clock::now();
    const auto out = h.ask("How many aces has Sinner hit?", QueryCategory::MatchStatistics);
    const auto took = Clock::now() - start;
    EXPECT_GE(took, 290ms);
    EXPECT_LT(took, 300ms + 250ms);
    EXPECT_EQ(out.context.answer_path, AnswerPath::synth_raw);
}

TEST(Graph, DetectsSharedInstance) {
    Harness h(300ms);
    h.llm->script().set_default(MockBehavior::hang());
    AgentGraph g(h.services);
    std::thread t([&] { (void)g.run({"How many aces?", QueryCategory::MatchStatistics, "M1", Clock::now()}); });
    std::this_thread::sleep_for(50ms);
    EXPECT_THROW(g.run({"How many aces?", QueryCategory::MatchStatistics, "M1", Clock::now()}), std::logic_error);
    t.join();
    EXPECT_EQ(g.runs(), 1u);
}

TEST(Pool, CapacityFallbackRunsNoAgent) {
    Harness h;
    GraphPool pool(2, h.services);
    {
        auto a = pool.try_acquire();
        auto b = pool.try_acquire();
        ASSERT_TRUE(a && b);
        EXPECT_FALSE(pool.try_acquire());
        EXPECT_EQ(pool.in_use(), 2u);
        const auto out = pool.run({"How many aces?", QueryCategory::MatchStatistics, "M1", Clock::now()});
        EXPECT_EQ(out.kind, GraphOutcome::Kind::capacity_fallback);
        EXPECT_EQ(h.recorder->total(), 0u);
    }
    EXPECT_EQ(pool.in_use(), 0u);
    EXPECT_EQ(pool.peak_in_use(), 2u);
    const auto out = pool.run({"How many aces?", QueryCategory::MatchStatistics, "M1", Clock::now()});
    EXPECT_EQ(out.kind, GraphOutcome::Kind::answered);
}

TEST(Pool, ConcurrentRequestsNeverShareInstances) {
    Harness h;
    GraphPool pool(4, h.services);
    std::atomic<int> answered{0}, fallback{0}, errors{0};
    std::vector<std::thread> threads;
    for (int i = 0; i < 16; ++i) {
        threads.emplace_back([&] {
            try {
                const auto out = pool.run({"How many aces has Sinner hit?", QueryCategory::MatchStatistics, "M1",
                                           Clock::now()});
                (out.kind == GraphOutcome::Kind::capacity_fallback ? fallback : answered)++;
            } catch (...) {
                ++errors;
            }
        });
    }
    for (auto& t : threads) t.join();
    EXPECT_EQ(errors.load(), 0);
    EXPECT_EQ(answered + fallback, 16);
    EXPECT_LE(pool.peak_in_use(), 4u);
}

TEST(CorpusCache, RebuildsWhenFeedsAdvance) {
    Harness h;
    auto& cache = *h.services->corpora;
    const auto& synth = *h.services->synthesizer;
    const auto& emb = *h.services->embedder;
    const auto a = cache.get(*h.loaded->hub, "M1", synth, emb);
    const auto b = cache.get(*h.loaded->hub, "M1", synth, emb);
    EXPECT_EQ(a, b);
    EXPECT_EQ(cache.builds(), 1u);
    auto stats = h.loaded->hub->snapshot(FeedKind::MatchStats, "M1")->latest;
    stats.sequence += 1;
    h.loaded->hub->publish(stats);
    const auto c = cache.get(*h.loaded->hub, "M1", synth, emb);
    EXPECT_NE(a, c);
    EXPECT_EQ(cache.builds(), 2u);
    EXPECT_EQ(a->facts.size(), c->facts.size());
}

TEST(Context, JsonShape) {
    Harness h;
    const auto out = h.ask("How many aces has Sinner hit?", QueryCategory::MatchStatistics);
    const auto j = to_json(out.context);
    EXPECT_EQ(j["answer_path"], "tool_llm");
    EXPECT_EQ(j["category"], "MatchStatistics");
    for (const char* k : {"A1", "A2", "A3", "A4", "A5"}) EXPECT_TRUE(j["timings_ms"].contains(k)) << k;
}
