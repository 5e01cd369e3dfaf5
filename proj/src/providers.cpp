#include "courtside/providers.hpp"

#include "courtside/errors.hpp"
#include "courtside/text.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <thread>

namespace courtside {

double cosine(const Embedding& a, const Embedding& b) {
    if (a.size() != b.size()) throw std::invalid_argument("cosine: dimension mismatch");
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0 || nb == 0) return 0.0;
    return dot / std::sqrt(na * nb);
}

JudgeVerdict JudgeVerdict::make(int factualness, int relevance, std::string factual_why,
                                std::string relevance_why) {
    JudgeVerdict v;
    v.factualness = std::clamp(factualness, 0, 100);
    v.relevance = std::clamp(relevance, 0, 100);
    v.factualness_explanation = std::move(factual_why);
    v.relevance_explanation = std::move(relevance_why);
    v.passed = v.factualness >= kPassMark && v.relevance >= kPassMark;
    return v;
}

nlohmann::json to_json(const JudgeVerdict& v) {
    return {{"factualness", v.factualness},
            {"relevance", v.relevance},
            {"factualness_explanation", v.factualness_explanation},
            {"relevance_explanation", v.relevance_explanation},
            {"passed", v.passed}};
}

// ---------------------------------------------------------------------------

void CallRecorder::record(std::string kind, std::string prompt) {
    std::lock_guard lock(mutex_);
    calls_.push_back({std::move(kind), std::move(prompt), Clock::now()});
}

std::vector<ProviderCall> CallRecorder::calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

std::size_t CallRecorder::count(std::string_view kind) const {
    std::lock_guard lock(mutex_);
    return static_cast<std::size_t>(
        std::count_if(calls_.begin(), calls_.end(), [&](const auto& c) { return c.kind == kind; }));
}

std::size_t CallRecorder::total() const {
    std::lock_guard lock(mutex_);
    return calls_.size();
}

void CallRecorder::clear() {
    std::lock_guard lock(mutex_);
    calls_.clear();
}

void MockScript::push(MockBehavior b) {
    std::lock_guard lock(mutex_);
    queue_.push_back(std::move(b));
}

void MockScript::set_default(MockBehavior b) {
    std::lock_guard lock(mutex_);
    default_ = std::move(b);
}

MockBehavior MockScript::next() {
    std::lock_guard lock(mutex_);
    if (queue_.empty()) return default_;
    auto b = std::move(queue_.front());
    queue_.pop_front();
    return b;
}

std::size_t MockScript::pending() const {
    std::lock_guard lock(mutex_);
    return queue_.size();
}

int whitespace_tokens(std::string_view s) {
    std::istringstream in{std::string(s)};
    int n = 0;
    for (std::string w; in >> w;) ++n;
    return n;
}

namespace {

std::string truncate_tokens(const std::string& s, int max_tokens) {
    std::istringstream in(s);
    std::vector<std::string> words;
    for (std::string w; in >> w;) words.push_back(w);
    if (max_tokens < 0 || static_cast<int>(words.size()) <= max_tokens) return s;
    words.resize(static_cast<std::size_t>(max_tokens));
    return text::join(words, " ");
}

std::set<std::string> lemma_set(std::string_view s) {
    const auto v = text::content_lemmas(s);
    return {v.begin(), v.end()};
}

} // namespace

MockCompletionProvider::MockCompletionProvider(std::shared_ptr<CallRecorder> recorder)
    : responder_(&MockCompletionProvider::default_answer), recorder_(std::move(recorder)) {}

CompletionResult MockCompletionProvider::complete(const CompletionRequest& request) {
    const auto start = Clock::now();
    if (recorder_) recorder_->record("complete", request.prompt);
    const auto behavior = script_.next();
    switch (behavior.kind) {
    case MockBehavior::Kind::error:
        throw ProviderError(behavior.text);
    case MockBehavior::Kind::timeout:
        if (behavior.delay.count() > 0) std::this_thread::sleep_for(behavior.delay);
        else std::this_thread::sleep_until(request.deadline);
        throw ProviderTimeout("mock completion hung past the deadline");
    case MockBehavior::Kind::respond:
        break;
    }
    if (start + behavior.delay > request.deadline) {
        std::this_thread::sleep_until(request.deadline);
        throw ProviderTimeout("mock completion delay exceeds the deadline");
    }
    std::this_thread::sleep_for(behavior.delay);
    CompletionResult r;
    r.text = truncate_tokens(behavior.text.empty() ? responder_(request.prompt) : behavior.text,
                             request.max_completion_tokens);
    r.prompt_token_count = whitespace_tokens(request.prompt);
    r.completion_token_count = whitespace_tokens(r.text);
    r.latency_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    return r;
}

std::string MockCompletionProvider::default_answer(const std::string& prompt) {
    // Prompt layout: ... "Facts:" then "- fact" lines ... "Question: q"
    std::istringstream in(prompt);
    std::vector<std::string> facts;
    std::string question;
    bool in_facts = false;
    for (std::string line; std::getline(in, line);) {
        if (line.rfind("Facts:", 0) == 0) {
            in_facts = true;
        } else if (line.rfind("Question:", 0) == 0) {
            question = text::trim(line.substr(9));
            in_facts = false;
        } else if (in_facts && line.rfind("- ", 0) == 0) {
            facts.push_back(text::trim(line.substr(2)));
        }
    }
    if (facts.empty()) return "I do not have that information right now.";
    const auto q = lemma_set(question);
    std::size_t best = 0, best_hits = 0;
    for (std::size_t i = 0; i < facts.size(); ++i) {
        std::size_t hits = 0;
        for (const auto& l : lemma_set(facts[i])) hits += q.count(l);
        if (hits > best_hits) best = i, best_hits = hits;
    }
    std::string answer = facts[best];
    if (!answer.empty() && answer.back() != '.') answer += '.';
    return answer;
}

MockEmbedder::MockEmbedder(std::size_t dimension, std::shared_ptr<CallRecorder> recorder)
    : dimension_(dimension), recorder_(std::move(recorder)) {
    if (dimension_ == 0) throw ConfigurationError("embedding dimension must be positive");
}

namespace {

std::uint64_t fnv1a(std::string_view lemma, unsigned probe) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : lemma) {
        h ^= c;
        h *= 1099511628211ull;
    }
    h ^= probe + 1;
    h *= 1099511628211ull;
    return h ^ (h >> 29);
}

} // namespace

std::size_t MockEmbedder::bucket(std::string_view lemma, unsigned probe) const {
    return static_cast<std::size_t>(fnv1a(lemma, probe) % dimension_);
}

Embedding MockEmbedder::embed(std::string_view s) const {
    if (text::trim(s).empty()) throw ValidationError("cannot embed empty text");
    if (recorder_) recorder_->record("embed", std::string(s));
    Embedding v(dimension_, 0.0);
    for (const auto& l : text::content_lemmas(s)) {
        for (unsigned k = 0; k < kProbes; ++k) {
            const auto h = fnv1a(l, k);
            v[h % dimension_] += (h >> 63) ? -1.0 : 1.0;
        }
    }
    double norm = 0;
    for (double x : v) norm += x * x;
    if (norm == 0) {
        // Punctuation-only text: a fixed direction keeps the contract.
        v[0] = 1.0;
        return v;
    }
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
}

MockJudge::MockJudge(std::shared_ptr<CallRecorder> recorder) : recorder_(std::move(recorder)) {}

void MockJudge::push_verdict(int factualness, int relevance) {
    std::lock_guard lock(mutex_);
    scripted_.emplace_back(std::pair{factualness, relevance});
}

void MockJudge::push_failure() {
    std::lock_guard lock(mutex_);
    scripted_.emplace_back(std::nullopt);
}

JudgeVerdict MockJudge::judge(std::string_view question, std::string_view context_document,
                              std::string_view answer) {
    if (text::trim(answer).empty() || text::trim(question).empty())
        throw ValidationError("judge requires a question and an answer");
    if (recorder_) recorder_->record("judge", std::string(answer));
    if (const auto d = delay_ms_.load(); d > 0) std::this_thread::sleep_for(std::chrono::milliseconds(d));
    {
        std::lock_guard lock(mutex_);
        if (!scripted_.empty()) {
            auto s = scripted_.front();
            scripted_.pop_front();
            if (!s) throw ProviderError("scripted judge failure");
            return JudgeVerdict::make(s->first, s->second, "scripted factualness",
                                      "scripted relevance");
        }
    }
    return score(question, context_document, answer);
}

JudgeVerdict MockJudge::score(std::string_view question, std::string_view context_document,
                              std::string_view answer) {
    const auto answer_numbers = text::numbers(answer);
    const auto context_numbers = text::numbers(context_document);
    const std::set<std::string> ctx(context_numbers.begin(), context_numbers.end());
    int factual = 100;
    std::string factual_why = "the answer states no figures";
    if (!answer_numbers.empty()) {
        std::size_t supported = 0;
        std::vector<std::string> missing;
        for (const auto& n : answer_numbers) {
            if (ctx.count(n)) ++supported;
            else missing.push_back(n);
        }
        factual = static_cast<int>(100 * supported / answer_numbers.size());
        factual_why = missing.empty() ? "every figure in the answer appears in the context"
                                      : "figures not found in the context: " + text::join(missing, ", ");
    }

    const auto q = lemma_set(question);
    const auto a = lemma_set(answer);
    std::size_t overlap = 0;
    for (const auto& l : q) overlap += a.count(l);
    const int relevance =
        q.empty() ? 0 : static_cast<int>(std::min<std::size_t>(100, 200 * overlap / q.size()));
    const std::string relevance_why = std::to_string(overlap) + " of " + std::to_string(q.size()) +
                                      " question terms are addressed";
    return JudgeVerdict::make(factual, relevance, factual_why, relevance_why);
}

// ---------------------------------------------------------------------------

std::string RemoteJudge::rubric(std::string_view question, std::string_view context_document,
                                std::string_view answer) {
    std::string p;
    p += "Rate the answer on two dimensions from 0 to 100.\n";
    p += "Factualness: fidelity of the answer to the context.\n";
    p += "Relevance: how directly the answer addresses the question.\n";
    p += "Reply with exactly four lines:\n";
    p += "FACTUALNESS: <score>\nFACTUALNESS_REASON: <one sentence>\n";
    p += "RELEVANCE: <score>\nRELEVANCE_REASON: <one sentence>\n\n";
    p += "Context:\n" + std::string(context_document) + "\n\n";
    p += "Question: " + std::string(question) + "\n";
    p += "Answer: " + std::string(answer) + "\n";
    return p;
}

JudgeVerdict RemoteJudge::parse(std::string_view reply) {
    std::optional<int> f, r;
    std::string fw, rw;
    std::istringstream in{std::string(reply)};
    auto value_after = [](const std::string& line, std::string_view key) -> std::optional<std::string> {
        const auto upper = [&] {
            std::string u = line;
            for (auto& c : u) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            return u;
        }();
        if (upper.rfind(key, 0) != 0) return std::nullopt;
        return text::trim(line.substr(key.size()));
    };
    for (std::string line; std::getline(in, line);) {
        line = text::trim(line);
        if (auto v = value_after(line, "FACTUALNESS_REASON:")) fw = *v;
        else if (auto v2 = value_after(line, "RELEVANCE_REASON:")) rw = *v2;
        else if (auto v3 = value_after(line, "FACTUALNESS:")) {
            try { f = std::stoi(*v3); } catch (const std::exception&) {}
        } else if (auto v4 = value_after(line, "RELEVANCE:")) {
            try { r = std::stoi(*v4); } catch (const std::exception&) {}
        }
    }
    if (!f || !r) throw ProviderError("judge reply lacks parseable scores");
    if (fw.empty()) fw = "no explanation given";
    if (rw.empty()) rw = "no explanation given";
    return JudgeVerdict::make(*f, *r, fw, rw);
}

JudgeVerdict RemoteJudge::judge(std::string_view question, std::string_view context_document,
                                std::string_view answer) {
    if (text::trim(answer).empty()) throw ValidationError("judge requires an answer");
    CompletionRequest req;
    req.prompt = rubric(question, context_document, answer);
    req.max_completion_tokens = 96;
    req.deadline = Clock::now() + budget_;
    return parse(model_->complete(req).text);
}

ProviderConfig provider_config_from_json(const nlohmann::json& j) {
    ProviderConfig c;
    c.mode = j.value("mode", c.mode);
    if (c.mode != "mock" && c.mode != "remote")
        throw ConfigurationError("provider mode must be mock or remote");
    c.remote.base_url = j.value("remote_base_url", std::string{});
    c.remote.request_timeout = std::chrono::milliseconds(j.value("request_timeout_ms", 10000));
    c.embedding_dimension = j.value("embedding_dimension", std::size_t{384});
    c.mock_latency = std::chrono::milliseconds(j.value("mock_latency_ms", 10));
    if (c.mode == "remote" && c.remote.base_url.empty())
        throw ConfigurationError("remote provider mode needs remote_base_url");
    return c;
}

Providers make_providers(const ProviderConfig& config) {
    Providers p;
    if (config.mode == "remote") {
        auto completion = std::make_shared<RemoteCompletionProvider>(config.remote);
        p.completion = completion;
        p.embedder = std::make_shared<RemoteEmbedder>(config.remote, config.embedding_dimension);
        p.judge = std::make_shared<RemoteJudge>(completion);
        return p;
    }
    p.recorder = std::make_shared<CallRecorder>();
    auto completion = std::make_shared<MockCompletionProvider>(p.recorder);
    completion->script().set_default(MockBehavior::respond({}, config.mock_latency));
    p.completion = completion;
    p.embedder = std::make_shared<MockEmbedder>(config.embedding_dimension);
    p.judge = std::make_shared<MockJudge>(p.recorder);
    return p;
}

} // namespace courtside
