#pragma once

#include "courtside/agent_graph.hpp"
#include "courtside/category.hpp"
#include "courtside/classifier.hpp"
#include "courtside/feed_hub.hpp"
#include "courtside/providers.hpp"
#include "courtside/safety.hpp"
#include "courtside/synthesizer.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace courtside {

enum class SourcePath {
    cache,
    synth_light,
    synth_summarize,
    synth_raw,
    tool_llm,
    knowledge_base,
    blocked_message,
    capacity_fallback,
    no_answer_fallback,
};

std::string_view to_string(SourcePath p);
/// True for synth_raw and the fallbacks.
bool degraded_path(SourcePath p);

struct ChatRequest {
    std::string session_id;
    std::string match_id;
    std::string text;
    std::optional<QueryCategory> selected_category;
    std::optional<std::string> selected_subquestion_id;
    std::optional<std::string> confirmation_token;
};

/// Throws ValidationError on a malformed body.
ChatRequest chat_request_from_json(const nlohmann::json& j);

struct ConfirmationPrompt {
    std::string token;
    std::string message;
    QueryCategory selected = QueryCategory::MatchStatistics;
    QueryCategory suggested = QueryCategory::MatchStatistics;
};

struct FinalResponse {
    std::string answer;
    SourcePath source_path = SourcePath::no_answer_fallback;
    /// Path that produced a cached answer; equals source_path otherwise.
    SourcePath origin_path = SourcePath::no_answer_fallback;
    bool degraded = true;
    std::optional<QueryCategory> category;
    std::optional<JudgeVerdict> judge;
    int corrections_count = 0;
    int prompt_tokens = 0;
    int completion_tokens = 0;
    std::vector<std::pair<std::string, double>> timings;  // stage -> ms
    std::optional<ConfirmationPrompt> needs_confirmation;
};

nlohmann::json to_json(const FinalResponse& r);

// ---------------------------------------------------------------------------

/// Fixed-TTL response cache.
class TtlCache {
public:
    explicit TtlCache(std::chrono::milliseconds ttl) : ttl_(ttl) {}

    std::optional<FinalResponse> lookup(const std::string& key, Clock::time_point now = Clock::now()) const;
    void store(const std::string& key, FinalResponse value, Clock::time_point now = Clock::now());
    std::chrono::milliseconds ttl() const noexcept { return ttl_; }
    std::size_t size() const;

private:
    struct Entry {
        std::shared_ptr<const FinalResponse> value;
        Clock::time_point expires_at;
    };
    std::chrono::milliseconds ttl_;
    mutable std::mutex mutex_;
    std::map<std::string, Entry> entries_;
};

/// `hash(match_id, normalized text, selections)` as a printable key.
std::string cache_key(const ChatRequest& request);

/// FAQ-style stub consulted when a query falls outside the six categories.
class KnowledgeBase {
public:
    struct Entry {
        std::string id;
        std::vector<std::vector<std::string>> keywords;  // lemma sequences
        std::string answer;
    };

    KnowledgeBase() = default;
    KnowledgeBase(std::vector<Entry> entries, std::string fallback);

    /// `{"fallback": ..., "entries": [{"id", "keywords", "answer"}]}`.
    static KnowledgeBase load(const std::filesystem::path& path);

    /// Entry with the most keyword hits (earliest on ties); nullopt with none.
    std::optional<std::string> answer(std::string_view query) const;
    const std::string& fallback() const noexcept { return fallback_; }
    bool empty() const noexcept { return entries_.empty(); }

private:
    std::vector<Entry> entries_;
    std::string fallback_;
};

struct Subquestion {
    std::string id;
    std::string text;
    QueryCategory category = QueryCategory::MatchStatistics;
    std::string canonical;  // lemma sequence joined by spaces
};

/// Category tiles and their predefined subquestions.
class SubquestionCatalog {
public:
    struct Tile {
        std::string id;
        std::string label;
        QueryCategory category = QueryCategory::MatchStatistics;
        std::vector<Subquestion> subquestions;
    };

    SubquestionCatalog() = default;
    explicit SubquestionCatalog(std::vector<Tile> tiles);
    static SubquestionCatalog load(const std::filesystem::path& path);

    const Subquestion* find(std::string_view id) const;
    /// Subquestion whose lemma form equals that of `text`.
    const Subquestion* match_text(std::string_view text) const;
    /// Tile label for `category`, or its internal name when no tile maps to it.
    std::string label(QueryCategory category) const;
    const std::vector<Tile>& tiles() const noexcept { return tiles_; }
    nlohmann::json to_json() const;

private:
    std::vector<Tile> tiles_;
};

// ---------------------------------------------------------------------------

struct GatewayConfig {
    std::size_t max_input_chars = 100;
    std::chrono::milliseconds cache_ttl{2000};
    std::chrono::milliseconds confirmation_ttl{300000};
    std::size_t pool_capacity = 100;
    std::string no_answer_message =
        "Sorry, I can't answer that yet. Try one of the suggested questions, or ask about the players or the score.";
    std::string capacity_message = "We're handling a lot of questions right now. Please try again in a moment.";
    std::string confirmation_message =
        "Your question looks like it is about {suggested} rather than {selected}. Which would you like?";
};

struct GatewayDeps {
    FeedHub* hub = nullptr;
    std::shared_ptr<const SafetyPipeline> safety;
    std::shared_ptr<const QueryClassifier> classifier;
    std::shared_ptr<const AgentServices> agents;  // includes the synthesizer
    std::shared_ptr<const KnowledgeBase> kb;
    std::shared_ptr<const SubquestionCatalog> catalog;
    GatewayConfig config;
};

/// Middleware, extension stage and post-processing behind POST /v1/chat.
/// Safe for concurrent use.
class Gateway {
public:
    explicit Gateway(GatewayDeps deps);

    /// Throws ValidationError for oversized or empty input and unknown
    /// subquestions; every other failure becomes a no-answer response.
    FinalResponse handle_chat(const ChatRequest& request, Clock::time_point arrival = Clock::now());

    /// Requests that went past the cache and coalescing.
    std::uint64_t executions() const noexcept { return executions_.load(); }
    std::uint64_t requests() const noexcept { return requests_.load(); }
    const GraphPool& pool() const noexcept { return pool_; }
    const GatewayConfig& config() const noexcept { return deps_.config; }
    const SubquestionCatalog& catalog() const noexcept { return *deps_.catalog; }
    std::optional<QueryCategory> last_category(const std::string& session_id);

private:
    struct Pending {
        std::string token;
        std::string text;  // sanitized
        std::string match_id;
        QueryCategory selected;
        QueryCategory suggested;
        Clock::time_point expires_at;
    };
    struct Session {
        std::optional<Pending> pending;
        std::optional<QueryCategory> last_category;
    };

    FinalResponse execute(const ChatRequest& request, const std::string& text, Clock::time_point arrival);
    std::optional<Pending> take_pending(const ChatRequest& request);
    std::string new_token();

    GatewayDeps deps_;
    GraphPool pool_;
    TtlCache cache_;
    std::mutex inflight_mutex_;
    std::map<std::string, std::shared_future<FinalResponse>> inflight_;
    std::mutex sessions_mutex_;
    std::map<std::string, Session> sessions_;
    std::atomic<std::uint64_t> executions_{0};
    std::atomic<std::uint64_t> requests_{0};
    std::mutex rng_mutex_;
    std::mt19937_64 rng_{std::random_device{}()};
};

} // namespace courtside
