#pragma once

#include "courtside/category.hpp"
#include "courtside/feed_hub.hpp"
#include "courtside/providers.hpp"
#include "courtside/synthesizer.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace courtside {

enum class AnswerPath { tool_llm, synth_summarize, synth_raw, none };

std::string_view to_string(AnswerPath p);

struct Correction {
    std::string rule_id;
    std::string before;
    std::string after;
    std::string rationale;
};

struct CorrectionRule {
    enum class Kind { plural, number_format, round_name, reorder };
    std::string id;
    Kind kind = Kind::plural;
    std::string pattern;
    std::string replacement;
    std::string rationale;
    std::regex re;  // unused for number_format
};

/// Ordered post-generation rewrite rules.
class CorrectionRules {
public:
    CorrectionRules() = default;
    explicit CorrectionRules(std::vector<CorrectionRule> rules, std::string thousands_separator = ",");

    /// JSON array of {id, kind, pattern, replacement, rationale}. Throws ConfigurationError.
    static CorrectionRules load(const std::filesystem::path& path);
    static CorrectionRules from_json(const nlohmann::json& j);

    /// Applies every rule in order; each rule that changes the text is logged.
    std::string apply(const std::string& text, std::vector<Correction>* log = nullptr) const;

    const std::vector<CorrectionRule>& rules() const noexcept { return rules_; }

private:
    std::vector<CorrectionRule> rules_;
    std::string separator_ = ",";
};

/// Digit runs of five or more (outside decimals) get thousands separators.
std::string group_thousands(const std::string& text, const std::string& separator);

struct AgentGraphConfig {
    std::chrono::milliseconds answer_deadline{6000};
    std::chrono::milliseconds grace{250};
    /// A provider call is not started with less time than this left.
    std::chrono::milliseconds min_provider_budget{50};
    std::size_t summary_facts = 3;
    int max_completion_tokens = 96;
    std::string terse_instruction =
        "You are a tennis match assistant. Answer the question in one sentence using only the facts below.";
    std::string explain_instruction =
        "You are a tennis match assistant. Explain the answer in one or two sentences using only the facts below.";
    std::string summarize_instruction =
        "You are a tennis match assistant. Summarize the facts below into one sentence that answers the question.";

    static AgentGraphConfig from_json(const nlohmann::json& j);
};

/// Per-match fact corpora, rebuilt when any feed of the match advances and
/// swapped in atomically.
class CorpusCache {
public:
    std::shared_ptr<const FactCorpus> get(const FeedHub& hub, const std::string& match_id,
                                          const DataSynthesizer& synth, const EmbeddingProvider& embedder);
    std::size_t builds() const noexcept { return builds_.load(); }

private:
    struct Entry {
        std::string signature;
        std::shared_ptr<const FactCorpus> corpus;
    };
    std::mutex mutex_;
    std::map<std::string, Entry> entries_;
    std::atomic<std::size_t> builds_{0};
};

struct AgentServices {
    const FeedHub* hub = nullptr;
    std::shared_ptr<const DataSynthesizer> synthesizer;
    std::shared_ptr<CompletionProvider> llm;
    std::shared_ptr<const EmbeddingProvider> embedder;
    std::shared_ptr<JudgeProvider> judge;
    std::shared_ptr<const CorrectionRules> rules;
    std::shared_ptr<CorpusCache> corpora;
    AgentGraphConfig config;
};

struct GraphRequest {
    std::string query;  // sanitized
    QueryCategory category = QueryCategory::MatchStatistics;
    std::string match_id;
    Clock::time_point arrival = Clock::now();
};

struct AgentContext {
    std::string query;
    QueryCategory category = QueryCategory::MatchStatistics;
    std::string match_id;
    std::optional<nlohmann::json> tool_output;
    std::vector<FactCandidate> candidates;
    std::string chosen_answer;
    std::string judged_context;  // document the answer was generated from
    AnswerPath answer_path = AnswerPath::none;
    std::optional<JudgeVerdict> judge;
    std::vector<Correction> corrections;
    std::vector<std::pair<std::string, double>> timings;  // agent -> ms
    Clock::time_point deadline;
    int prompt_tokens = 0;
    int completion_tokens = 0;
    std::vector<std::string> notes;  // tier failures, for diagnostics
    bool provider_failure = false;   // some provider call timed out or failed
};

struct GraphOutcome {
    enum class Kind { answered, no_answer, capacity_fallback };
    Kind kind = Kind::no_answer;
    AgentContext context;
};

/// Prompt layout shared with the mock completion provider.
std::string build_prompt(const std::string& instruction, const std::vector<std::string>& facts,
                         const std::string& question);

/// Flattens a tool output into "key: value" fact lines.
std::vector<std::string> tool_fact_lines(const nlohmann::json& tool_output);

/// One reusable graph instance; owned by a single request at a time.
class AgentGraph {
public:
    explicit AgentGraph(std::shared_ptr<const AgentServices> services);

    AgentContext a1_init(const GraphRequest& request) const;
    void a2_select_tool(AgentContext& ctx) const;
    void a3_generate(AgentContext& ctx) const;
    void a4_judge(AgentContext& ctx) const;
    void a5_correct(AgentContext& ctx) const;

    GraphOutcome run(const GraphRequest& request);
    void reset();

    std::uint64_t runs() const noexcept { return runs_; }

private:
    std::shared_ptr<const AgentServices> services_;
    std::atomic<bool> busy_{false};
    std::uint64_t runs_ = 0;
};

/// Preallocated graph instances handed out one request at a time.
class GraphPool {
public:
    GraphPool(std::size_t capacity, std::shared_ptr<const AgentServices> services);

    class Lease {
    public:
        Lease(Lease&& other) noexcept : pool_(other.pool_), graph_(other.graph_) { other.graph_ = nullptr; }
        Lease(const Lease&) = delete;
        Lease& operator=(const Lease&) = delete;
        Lease& operator=(Lease&&) = delete;
        ~Lease();
        AgentGraph& graph() { return *graph_; }
        AgentGraph* operator->() { return graph_; }

    private:
        friend class GraphPool;
        Lease(GraphPool* pool, AgentGraph* graph) : pool_(pool), graph_(graph) {}
        GraphPool* pool_;
        AgentGraph* graph_;
    };

    /// nullopt when every instance is in use.
    std::optional<Lease> try_acquire();

    /// Runs the request on a free instance, or returns the capacity fallback
    /// without executing any agent.
    GraphOutcome run(const GraphRequest& request);

    std::size_t capacity() const noexcept { return graphs_.size(); }
    std::size_t in_use() const;
    std::size_t peak_in_use() const noexcept { return peak_.load(); }

private:
    void release(AgentGraph* g);

    std::vector<std::unique_ptr<AgentGraph>> graphs_;
    mutable std::mutex mutex_;
    std::vector<AgentGraph*> free_;
    std::atomic<std::size_t> peak_{0};
};

nlohmann::json to_json(const AgentContext& ctx);

} // namespace courtside
