#include "courtside/errors.hpp"
#include "courtside/synthesizer.hpp"
#include "support/fixtures.hpp"

#include <gtest/gtest.h>

using namespace courtside;
using nlohmann::json;

namespace {

const auto kPatterns = fixtures::kSource / "data/synth/patterns.json";

struct M1 {
    std::unique_ptr<fixtures::LoadedHub> loaded = fixtures::load(fixtures::kM1);
    json view = build_match_view(*loaded->hub, "M1");
    MatchContext ctx = match_context_from_feeds(*loaded->hub, "M1");
    DataSynthesizer synth{load_patterns(kPatterns)};
};

const M1& m1() {
    static const M1 m;
    return m;
}

json pattern(std::string id, std::string tmpl, std::vector<std::string> required) {
    return {{"id", id},
            {"category", "MatchStatistics"},
            {"scope", "match"},
            {"trigger_lemmas", {"ace"}},
            {"template", tmpl},
            {"required_fields", required},
            {"applicable_feeds", {"MatchStats"}}};
}

} // namespace

TEST(Thresholds, TableBoundaries) {
    const CategoryThresholds t;
    using C = QueryCategory;
    using M = ThresholdMode;
    const std::vector<std::tuple<C, double, double>> table{
        {C::MatchStatistics, 0.69, 0.4}, {C::PlayerStatistics, 0.65, 0.4}, {C::Predictions, 0.56, 0.4},
        {C::Biographies, 0.66, 0.45},    {C::Logistics, 0.48, 0.4},        {C::LivePointByPoint, 0.80, 0.4},
    };
    for (const auto& [c, p, r] : table) {
        EXPECT_TRUE(threshold_check(p, c, M::singular_answer, t)) << to_string(c);
        EXPECT_FALSE(threshold_check(p - 0.001, c, M::singular_answer, t)) << to_string(c);
        EXPECT_TRUE(threshold_check(r, c, M::llm_summarize, t)) << to_string(c);
        EXPECT_FALSE(threshold_check(r - 0.001, c, M::llm_summarize, t)) << to_string(c);
    }
    EXPECT_FALSE(threshold_check(0.79, C::LivePointByPoint, M::singular_answer));
    EXPECT_FALSE(threshold_check(0.689, C::MatchStatistics, M::singular_answer));
}

TEST(Thresholds, FromJsonValidates) {
    const auto t = CategoryThresholds::from_json({{"Logistics", {{"precision", 0.5}, {"recall", 0.3}}}});
    EXPECT_DOUBLE_EQ(t.precision(QueryCategory::Logistics), 0.5);
    EXPECT_DOUBLE_EQ(t.precision(QueryCategory::MatchStatistics), 0.69);
    EXPECT_THROW(CategoryThresholds::from_json({{"Logistics", {{"precision", 0.3}, {"recall", 0.5}}}}),
                 ConfigurationError);
    EXPECT_THROW(CategoryThresholds::from_json({{"Weather", {{"precision", 0.5}, {"recall", 0.3}}}}),
                 ConfigurationError);
}

TEST(Patterns, LoadValidation) {
    EXPECT_NO_THROW(patterns_from_json(json::array({pattern("A", "{match.x} aces", {"match.x"})})));
    EXPECT_THROW(patterns_from_json(json::array({pattern("A", "{match.x} aces", {})})), ConfigurationError);
    EXPECT_THROW(patterns_from_json(json::array({pattern("A", "x", {}), pattern("A", "y", {})})),
                 ConfigurationError);
    auto upper = pattern("B", "x", {});
    upper["trigger_lemmas"] = {"Ace"};
    EXPECT_THROW(patterns_from_json(json::array({upper})), ConfigurationError);
    const auto sorted = patterns_from_json(json::array({pattern("B", "x", {}), pattern("A", "y", {})}));
    EXPECT_EQ(sorted.front().id, "A");
    EXPECT_EQ(load_patterns(kPatterns).size(), m1().synth.patterns().size());
}

TEST(Template, FillsDottedPaths) {
    const json doc{{"match", {{"court", "Centre Court"}, {"n", 3}, {"pct", 62.5}, {"gone", nullptr}}}};
    EXPECT_EQ(fill_template("On {match.court}, {match.n} sets", doc), "On Centre Court, 3 sets");
    EXPECT_EQ(fill_template("{match.pct}%", doc), "62.5%");
    EXPECT_FALSE(fill_template("{match.gone}", doc));
    EXPECT_FALSE(fill_template("{match.missing}", doc));
}

TEST(Light, AnswersNamedPlayer) {
    const auto& m = m1();
    const auto a = m.synth.synthesize_light("How many aces has Sinner hit?", QueryCategory::MatchStatistics, m.view,
                                            m.ctx);
    ASSERT_TRUE(a);
    EXPECT_EQ(a->text, "Jannik Sinner has hit 14 aces so far.");
    EXPECT_FALSE(a->source_fields.empty());
}

TEST(Light, BothPlayersWhenNoneNamed) {
    const auto& m = m1();
    const auto a = m.synth.synthesize_light("How many aces?", QueryCategory::MatchStatistics, m.view, m.ctx);
    ASSERT_TRUE(a);
    EXPECT_NE(a->text.find("Carlos Alcaraz"), std::string::npos);
    EXPECT_NE(a->text.find("Jannik Sinner"), std::string::npos);
    EXPECT_NE(a->text.find("12"), std::string::npos);
    EXPECT_NE(a->text.find("14"), std::string::npos);
}

TEST(Light, NoneWhenNothingHitsOrFeedMissing) {
    const auto& m = m1();
    EXPECT_FALSE(m.synth.synthesize_light("zzz", QueryCategory::LivePointByPoint, m.view, m.ctx));
    FeedHub empty;
    const auto view = build_match_view(empty, "M1");
    EXPECT_TRUE(view["feeds"].empty());
    EXPECT_FALSE(m.synth.synthesize_light("How many aces?", QueryCategory::MatchStatistics, view, m.ctx));
    EXPECT_TRUE(m.synth.generate_fact_corpus(view).empty());
}

TEST(Light, SegmentScopeFollowsSetAndGame) {
    const auto& m = m1();
    const auto a = m.synth.synthesize_light("What happened in set 2 game 3?", QueryCategory::LivePointByPoint,
                                            m.view, m.ctx);
    ASSERT_TRUE(a);
    EXPECT_EQ(a->text.rfind("Set 2 game 3 ", 0), 0u) << a->text;
}

TEST(Corpus, EveryFactFullyBound) {
    const auto& m = m1();
    const auto facts = m.synth.generate_fact_corpus(m.view);
    ASSERT_FALSE(facts.empty());
    for (const auto& f : facts) {
        EXPECT_EQ(f.text.find('{'), std::string::npos) << f.text;
        EXPECT_FALSE(f.pattern_id.empty());
    }
    EXPECT_EQ(facts.size(), m.synth.generate_fact_corpus(m.view).size());
}

TEST(Heavy, BestMatchAndFilters) {
    const auto& m = m1();
    MockEmbedder emb;
    const auto corpus = m.synth.build_corpus(m.view, emb);
    ASSERT_EQ(corpus.facts.size(), corpus.embeddings.size());
    const auto best = match_fact_heavy("How many aces has Sinner hit?", corpus, emb);
    EXPECT_EQ(best.text, "Jannik Sinner has hit 14 aces so far.");
    EXPECT_TRUE(threshold_check(*best.similarity, QueryCategory::MatchStatistics, ThresholdMode::singular_answer));

    const auto top = top_facts(emb.embed("How tall is Alcaraz?"), corpus, 3, QueryCategory::Biographies);
    ASSERT_EQ(top.size(), 3u);
    for (const auto& f : top) EXPECT_EQ(f.category, QueryCategory::Biographies);
    EXPECT_GE(*top[0].similarity, *top[1].similarity);
    EXPECT_EQ(top[0].text, "Carlos Alcaraz is 183 cm tall.");

    EXPECT_THROW(match_fact_heavy("x", FactCorpus{}, emb), NotFoundError);
}

TEST(Heavy, TiesKeepCorpusOrder) {
    FactCorpus c;
    for (const char* t : {"a", "b", "c"}) {
        c.facts.push_back({t, QueryCategory::Logistics, "P", {}, std::nullopt});
        c.embeddings.push_back({1.0, 0.0});
    }
    const auto top = top_facts({1.0, 0.0}, c, 3);
    EXPECT_EQ(top[0].text, "a");
    EXPECT_EQ(top[1].text, "b");
    EXPECT_EQ(top[2].text, "c");
}
