#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace courtside {

using Clock = std::chrono::steady_clock;

struct CompletionRequest {
    std::string prompt;
    int max_completion_tokens = 128;
    Clock::time_point deadline = Clock::now() + std::chrono::seconds(6);
};

struct CompletionResult {
    std::string text;
    int prompt_token_count = 0;
    int completion_token_count = 0;
    double latency_ms = 0.0;
};

/// Generative model boundary. Implementations must either return before the
/// request deadline or throw ProviderTimeout; transport failures throw
/// ProviderError.
class CompletionProvider {
public:
    virtual ~CompletionProvider() = default;
    virtual CompletionResult complete(const CompletionRequest& request) = 0;
};

using Embedding = std::vector<double>;

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    /// Unit-norm vector of dimension(). Throws ValidationError on empty text.
    virtual Embedding embed(std::string_view text) const = 0;
    virtual std::size_t dimension() const = 0;
};

/// Cosine similarity; 0 when either vector is all zero.
double cosine(const Embedding& a, const Embedding& b);

struct JudgeVerdict {
    int factualness = 0;
    int relevance = 0;
    std::string factualness_explanation;
    std::string relevance_explanation;
    bool passed = false;

    static constexpr int kPassMark = 80;
    static JudgeVerdict make(int factualness, int relevance, std::string factual_why,
                             std::string relevance_why);
};

nlohmann::json to_json(const JudgeVerdict& v);

class JudgeProvider {
public:
    virtual ~JudgeProvider() = default;
    virtual JudgeVerdict judge(std::string_view question, std::string_view context_document,
                               std::string_view answer) = 0;
};

// ---------------------------------------------------------------------------
// Call recording

struct ProviderCall {
    std::string kind;  // "complete", "embed", "judge"
    std::string prompt;
    Clock::time_point at;
};

class CallRecorder {
public:
    void record(std::string kind, std::string prompt);
    std::vector<ProviderCall> calls() const;
    std::size_t count(std::string_view kind) const;
    std::size_t total() const;
    void clear();

private:
    mutable std::mutex mutex_;
    std::vector<ProviderCall> calls_;
};

// ---------------------------------------------------------------------------
// Mocks

struct MockBehavior {
    enum class Kind { respond, timeout, error };
    Kind kind = Kind::respond;
    /// Empty text on a respond behavior means "use the default responder".
    std::string text;
    std::chrono::milliseconds delay{0};

    static MockBehavior respond(std::string text, std::chrono::milliseconds delay = {}) {
        return {Kind::respond, std::move(text), delay};
    }
    /// Zero duration sleeps until the request deadline; a positive duration
    /// sleeps that long regardless of the deadline, like a stuck upstream.
    static MockBehavior hang(std::chrono::milliseconds duration = {}) { return {Kind::timeout, {}, duration}; }
    static MockBehavior error(std::string message = "scripted failure") {
        return {Kind::error, std::move(message), {}};
    }
};

/// Ordered behaviors consumed one per call, then the default behavior.
class MockScript {
public:
    explicit MockScript(MockBehavior fallback = MockBehavior::respond({}))
        : default_(std::move(fallback)) {}

    void push(MockBehavior b);
    void set_default(MockBehavior b);
    MockBehavior next();
    std::size_t pending() const;

private:
    mutable std::mutex mutex_;
    std::deque<MockBehavior> queue_;
    MockBehavior default_;
};

/// Whitespace token count, as used by the mock tokenizer.
int whitespace_tokens(std::string_view s);

/// Offline completion provider. Unscripted calls answer with the default
/// responder, which picks the prompt fact line that best overlaps the
/// question and states it as one sentence.
class MockCompletionProvider : public CompletionProvider {
public:
    using Responder = std::function<std::string(const std::string& prompt)>;

    explicit MockCompletionProvider(std::shared_ptr<CallRecorder> recorder = nullptr);

    CompletionResult complete(const CompletionRequest& request) override;

    MockScript& script() { return script_; }
    void set_responder(Responder r) { responder_ = std::move(r); }
    const std::shared_ptr<CallRecorder>& recorder() const { return recorder_; }

    static std::string default_answer(const std::string& prompt);

private:
    MockScript script_;
    Responder responder_;
    std::shared_ptr<CallRecorder> recorder_;
};

/// Hashed bag of content lemmas. Each lemma adds a signed unit to
/// `kProbes` pseudo-random buckets, so a single bucket collision between two
/// words moves their similarity by at most 1/kProbes.
class MockEmbedder : public EmbeddingProvider {
public:
    explicit MockEmbedder(std::size_t dimension = 384,
                          std::shared_ptr<CallRecorder> recorder = nullptr);
    Embedding embed(std::string_view text) const override;
    std::size_t dimension() const override { return dimension_; }
    static constexpr unsigned kProbes = 4;
    std::size_t bucket(std::string_view lemma, unsigned probe = 0) const;

private:
    std::size_t dimension_;
    std::shared_ptr<CallRecorder> recorder_;
};

/// Deterministic judge.
/// factualness: share of the answer's numbers that also appear in the
/// context (100 when the answer states no number).
/// relevance: twice the share of the question's content lemmas found in the
/// answer, capped at 100.
/// Scripted verdicts, when queued, take precedence in order.
class MockJudge : public JudgeProvider {
public:
    explicit MockJudge(std::shared_ptr<CallRecorder> recorder = nullptr);

    JudgeVerdict judge(std::string_view question, std::string_view context_document,
                       std::string_view answer) override;

    void push_verdict(int factualness, int relevance);
    void push_failure();
    /// Latency added to every call, scripted or not.
    void set_delay(std::chrono::milliseconds d) { delay_ms_ = d.count(); }

    static JudgeVerdict score(std::string_view question, std::string_view context_document,
                              std::string_view answer);

private:
    std::mutex mutex_;
    std::deque<std::optional<std::pair<int, int>>> scripted_;
    std::atomic<long long> delay_ms_{0};
    std::shared_ptr<CallRecorder> recorder_;
};

// ---------------------------------------------------------------------------
// Remote adapters (minimal JSON-over-HTTP contract)

struct RemoteEndpoint {
    std::string base_url;  // e.g. "http://127.0.0.1:9000"
    std::chrono::milliseconds request_timeout{10000};
};

/// POST /complete {prompt, max_tokens} -> {text, prompt_tokens, completion_tokens}
class RemoteCompletionProvider : public CompletionProvider {
public:
    explicit RemoteCompletionProvider(RemoteEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
    CompletionResult complete(const CompletionRequest& request) override;

private:
    RemoteEndpoint endpoint_;
};

/// POST /embed {text} -> {vector: [...]}
class RemoteEmbedder : public EmbeddingProvider {
public:
    RemoteEmbedder(RemoteEndpoint endpoint, std::size_t dimension)
        : endpoint_(std::move(endpoint)), dimension_(dimension) {}
    Embedding embed(std::string_view text) const override;
    std::size_t dimension() const override { return dimension_; }

private:
    RemoteEndpoint endpoint_;
    std::size_t dimension_;
};

/// Prompts a completion provider with a fixed rubric and parses the scores.
class RemoteJudge : public JudgeProvider {
public:
    RemoteJudge(std::shared_ptr<CompletionProvider> model,
                std::chrono::milliseconds budget = std::chrono::milliseconds(3000))
        : model_(std::move(model)), budget_(budget) {}

    JudgeVerdict judge(std::string_view question, std::string_view context_document,
                       std::string_view answer) override;

    static std::string rubric(std::string_view question, std::string_view context_document,
                              std::string_view answer);
    /// Throws ProviderError when either score line is missing.
    static JudgeVerdict parse(std::string_view reply);

private:
    std::shared_ptr<CompletionProvider> model_;
    std::chrono::milliseconds budget_;
};

// ---------------------------------------------------------------------------

struct ProviderConfig {
    std::string mode = "mock";  // "mock" | "remote"
    RemoteEndpoint remote;
    std::size_t embedding_dimension = 384;
    /// Mock completion latency for unscripted calls.
    std::chrono::milliseconds mock_latency{10};
};

ProviderConfig provider_config_from_json(const nlohmann::json& j);

struct Providers {
    std::shared_ptr<CompletionProvider> completion;
    std::shared_ptr<EmbeddingProvider> embedder;
    std::shared_ptr<JudgeProvider> judge;
    std::shared_ptr<CallRecorder> recorder;  // set for mock mode
};

Providers make_providers(const ProviderConfig& config);

} // namespace courtside
