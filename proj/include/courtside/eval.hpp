#pragma once

#include "courtside/category.hpp"
#include "courtside/gateway.hpp"
#include "courtside/providers.hpp"
#include "courtside/safety.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace courtside {

enum class AnswerableBy { light, heavy, llm, kb };

std::string_view to_string(AnswerableBy a);
AnswerableBy answerable_by_from_string(std::string_view s);

struct GoldQuestion {
    std::string id;
    std::string text;
    /// Empty for questions that belong to the knowledge base.
    std::optional<QueryCategory> category;
    std::string gold_answer;
    std::string match_id;
    AnswerableBy answerable_by = AnswerableBy::light;
    std::optional<std::string> subquestion_id;
};

/// One JSON object per line; blank lines and `#` comments skipped.
/// Throws ParseError carrying the line number.
std::vector<GoldQuestion> load_gold(const std::filesystem::path& path);
std::vector<GoldQuestion> load_gold(std::istream& in);

/// Mean, sample standard deviation and maximum.
struct SummaryStats {
    std::size_t n = 0;
    double mean = 0;
    double stddev = 0;
    double max = 0;
};

SummaryStats summarize(const std::vector<double>& samples);
/// Nearest-rank percentile, `p` in (0, 100]. Zero for no samples.
double percentile(std::vector<double> samples, double p);

/// Something that answers chat requests: the gateway in-process or over HTTP.
class ChatClient {
public:
    virtual ~ChatClient() = default;
    /// Throws ValidationError for a rejected request and ProviderError when
    /// the service cannot be reached.
    virtual FinalResponse send(const ChatRequest& request) = 0;
};

class InProcessClient : public ChatClient {
public:
    explicit InProcessClient(Gateway& gateway) : gateway_(gateway) {}
    FinalResponse send(const ChatRequest& request) override { return gateway_.handle_chat(request); }

private:
    Gateway& gateway_;
};

/// POST /v1/chat on a running server.
class HttpChatClient : public ChatClient {
public:
    HttpChatClient(std::string host, int port, std::chrono::milliseconds timeout = std::chrono::seconds(30));
    FinalResponse send(const ChatRequest& request) override;

private:
    std::string host_;
    int port_;
    std::chrono::milliseconds timeout_;
};

FinalResponse final_response_from_json(const nlohmann::json& j);

/// True when the answer came out of the agent graph, i.e. a completion
/// provider was asked for it.
bool provider_path(SourcePath origin);

struct GoldResult {
    GoldQuestion question;
    std::optional<FinalResponse> response;
    std::string error;
    double latency_ms = 0;
    /// Answer scored against the gold answer.
    std::optional<JudgeVerdict> verdict;
};

struct ClassMetrics {
    std::size_t support = 0;
    std::size_t predicted = 0;
    std::size_t correct = 0;
    double precision = 0;
    double recall = 0;
};

struct EvalReport {
    std::size_t total = 0;
    std::size_t errors = 0;
    std::map<std::string, std::size_t> path_counts;  // origin path
    std::size_t shielded = 0;
    std::size_t provider_answers = 0;
    std::size_t knowledge_base = 0;
    std::size_t judge_passed = 0;
    std::size_t judge_passed_provider = 0;
    double shield_rate = 0;
    double kb_rate = 0;
    /// Passing answers over every question, and over provider-path answers.
    double judge_pass_rate_all = 0;
    double judge_pass_rate_provider = 0;
    SummaryStats latency_ms;
    std::map<std::string, SummaryStats> latency_by_path;
    SummaryStats prompt_tokens;
    SummaryStats completion_tokens;
    SummaryStats total_tokens;
    /// Keyed by category name, plus "KnowledgeBase" for abstentions.
    std::map<std::string, ClassMetrics> classifier;
    double classifier_accuracy = 0;
    std::size_t classified = 0;
    /// Gold questions are clean, so any block is a false positive.
    std::size_t hap_false_positives = 0;
    std::vector<GoldResult> results;
};

struct EvalOptions {
    /// Scores answers against gold; null skips judging.
    std::shared_ptr<JudgeProvider> judge;
    std::string session_prefix = "eval";
};

/// Sends each question in order and aggregates. Per-question failures are
/// recorded and the run continues.
EvalReport run_gold(const std::vector<GoldQuestion>& gold, ChatClient& client, const EvalOptions& options = {});
/// Recomputes every aggregate from `report.results`.
void aggregate(EvalReport& report);

nlohmann::json to_json(const EvalReport& report, bool include_results = false);
/// Plain-text tables, with reference figures printed for comparison.
std::string format_report(const EvalReport& report);

// ---------------------------------------------------------------------------

struct SafetySweep {
    std::size_t lexicon_probes = 0;
    std::size_t lexicon_blocked = 0;
    std::size_t clean_sentences = 0;
    std::size_t clean_blocked = 0;
    std::vector<std::string> misses;
    std::vector<std::string> false_positives;
};

/// Embeds every profanity and slur term in carrier sentences and runs the
/// clean corpus through `pipeline`.
SafetySweep safety_sweep(const SafetyPipeline& pipeline, const std::vector<std::string>& clean_corpus,
                         const MatchContext& context);

// ---------------------------------------------------------------------------

struct LoadOptions {
    double rps = 120;
    std::chrono::milliseconds duration{60000};
    std::size_t workers = 256;
    std::uint64_t seed = 1;
    std::vector<std::string> match_ids{"M1", "M2"};
};

struct LoadReport {
    double target_rps = 0;
    double achieved_rps = 0;
    std::size_t sent = 0;
    std::size_t completed = 0;
    std::size_t errors = 0;
    std::size_t degraded = 0;
    std::map<std::string, std::size_t> path_counts;
    /// Latency from the scheduled send time, so queueing in the generator counts.
    double p50_ms = 0;
    double p95_ms = 0;
    double p99_ms = 0;
    double max_ms = 0;
    /// Largest lag between a scheduled and actual send.
    double max_send_lag_ms = 0;
    std::vector<double> latencies_ms;
    std::vector<std::string> error_messages;  // first few
};

/// Mixed request generator: mostly predefined subquestions and shieldable
/// free text, some knowledge-base and model-path questions.
std::vector<ChatRequest> load_mix(const SubquestionCatalog& catalog, const std::vector<std::string>& match_ids,
                                  std::size_t count, std::uint64_t seed);

/// Open-loop load: request i is due at start + i / rps whatever happened to
/// earlier requests.
LoadReport run_load(ChatClient& client, const std::vector<ChatRequest>& mix, const LoadOptions& options);

nlohmann::json to_json(const LoadReport& report);
std::string format_load_report(const LoadReport& report);

} // namespace courtside
