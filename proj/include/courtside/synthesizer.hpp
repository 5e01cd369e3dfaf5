#pragma once

#include "courtside/category.hpp"
#include "courtside/feed_hub.hpp"
#include "courtside/match_context.hpp"
#include "courtside/providers.hpp"

#include <array>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace courtside {

// ---------------------------------------------------------------------------
// Factual thresholds

enum class ThresholdMode { singular_answer, llm_summarize };

struct CategoryThresholds {
    struct Pair {
        double precision;
        double recall;
    };
    std::array<Pair, kCategoryCount> values{{
        {0.69, 0.4},  // MatchStatistics
        {0.65, 0.4},  // PlayerStatistics
        {0.56, 0.4},  // Predictions
        {0.66, 0.45}, // Biographies
        {0.48, 0.4},  // Logistics
        {0.80, 0.4},  // LivePointByPoint
    }};

    double precision(QueryCategory c) const { return values[category_index(c)].precision; }
    double recall(QueryCategory c) const { return values[category_index(c)].recall; }
    /// Throws ConfigurationError unless 0 <= recall <= precision <= 1 everywhere.
    void validate() const;

    /// `{"<Category>": {"precision": p, "recall": r}, ...}`; missing entries keep defaults.
    static CategoryThresholds from_json(const nlohmann::json& j);
};

bool threshold_check(double similarity, QueryCategory category, ThresholdMode mode,
                     const CategoryThresholds& thresholds = {});

// ---------------------------------------------------------------------------
// Patterns

enum class PatternScope { match, player, segment };

struct SynthesisPattern {
    std::string id;
    QueryCategory category = QueryCategory::MatchStatistics;
    PatternScope scope = PatternScope::match;
    std::vector<std::string> trigger_lemmas;  // as authored
    std::string template_text;
    std::vector<std::string> required_fields;
    std::vector<FeedKind> applicable_feeds;

    /// Placeholder paths in template order, e.g. "player.stats.aces".
    std::vector<std::string> placeholders() const;
};

/// Reads the pattern document (a JSON array). Throws ConfigurationError when
/// a placeholder lacks a required field, a trigger is not lowercase, or ids
/// repeat. Patterns are returned sorted by id.
std::vector<SynthesisPattern> load_patterns(const std::filesystem::path& path);
std::vector<SynthesisPattern> patterns_from_json(const nlohmann::json& j);

/// Flattened per-match document the patterns bind against: "match",
/// "players" (two entries), "segments" (one per played game) and "feeds".
/// Returns an object with empty "feeds" for an unknown match.
nlohmann::json build_match_view(const FeedHub& hub, const std::string& match_id);

/// Fills `{dotted.path}` placeholders from `doc`; nullopt when any is absent
/// or null.
std::optional<std::string> fill_template(std::string_view template_text, const nlohmann::json& doc);

struct FactCandidate {
    std::string text;
    QueryCategory category = QueryCategory::MatchStatistics;
    std::string pattern_id;
    std::vector<std::string> source_fields;  // resolved paths into the match view
    std::optional<double> similarity;
};

struct FactCorpus {
    std::vector<FactCandidate> facts;
    std::vector<Embedding> embeddings;  // parallel to facts
};

struct LightAnswer {
    std::string text;
    std::string pattern_id;
    std::vector<std::string> source_fields;
};

class DataSynthesizer {
public:
    DataSynthesizer(std::vector<SynthesisPattern> patterns, CategoryThresholds thresholds = {},
                    std::string disclaimer = "Closest available fact: ");

    const std::vector<SynthesisPattern>& patterns() const noexcept { return patterns_; }
    const CategoryThresholds& thresholds() const noexcept { return thresholds_; }
    const std::string& disclaimer() const noexcept { return disclaimer_; }

    /// Best-matching pattern of `category` filled from `view`. Player-scoped
    /// patterns answer for the player named in the query, or for both players
    /// when none or both are named.
    std::optional<LightAnswer> synthesize_light(std::string_view query, QueryCategory category,
                                                const nlohmann::json& view, const MatchContext& ctx) const;

    /// Every pattern under every satisfiable binding, in pattern then binding order.
    std::vector<FactCandidate> generate_fact_corpus(const nlohmann::json& view) const;

    FactCorpus build_corpus(const nlohmann::json& view, const EmbeddingProvider& embedder) const;

    /// Pattern chosen by trigger hits for `category`; nullopt when nothing hits.
    const SynthesisPattern* select_pattern(std::string_view query, QueryCategory category) const;

private:
    std::vector<SynthesisPattern> patterns_;
    CategoryThresholds thresholds_;
    std::string disclaimer_;
};

/// Highest cosine similarity to the query; ties go to the earliest fact.
/// Throws NotFoundError on an empty corpus.
FactCandidate match_fact_heavy(std::string_view query, const FactCorpus& corpus,
                               const EmbeddingProvider& embedder);

/// The `k` most similar facts (stable for ties), optionally limited to one category.
std::vector<FactCandidate> top_facts(const Embedding& query, const FactCorpus& corpus, std::size_t k,
                                     std::optional<QueryCategory> category = std::nullopt);

} // namespace courtside
