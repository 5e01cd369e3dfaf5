#include "courtside/gateway.hpp"

#include "courtside/errors.hpp"
#include "courtside/match_context.hpp"
#include "courtside/text.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

namespace courtside {

using nlohmann::json;

namespace {

double ms_since(Clock::time_point t) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t).count();
}

std::string normalized(std::string_view text) {
    return text::join(text::lemmas(text), " ");
}

/// Occurrences of each lemma sequence in `lemmas`, counted once per term.
int term_hits(const std::vector<std::string>& lemmas, const std::vector<std::vector<std::string>>& terms) {
    int hits = 0;
    for (const auto& t : terms) {
        if (t.empty() || t.size() > lemmas.size()) continue;
        for (std::size_t i = 0; i + t.size() <= lemmas.size(); ++i) {
            if (std::equal(t.begin(), t.end(), lemmas.begin() + static_cast<std::ptrdiff_t>(i))) {
                ++hits;
                break;
            }
        }
    }
    return hits;
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
    for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size())
        s.replace(pos, from.size(), to);
    return s;
}

} // namespace

std::string_view to_string(SourcePath p) {
    switch (p) {
    case SourcePath::cache: return "cache";
    case SourcePath::synth_light: return "synth_light";
    case SourcePath::synth_summarize: return "synth_summarize";
    case SourcePath::synth_raw: return "synth_raw";
    case SourcePath::tool_llm: return "tool_llm";
    case SourcePath::knowledge_base: return "knowledge_base";
    case SourcePath::blocked_message: return "blocked_message";
    case SourcePath::capacity_fallback: return "capacity_fallback";
    case SourcePath::no_answer_fallback: return "no_answer_fallback";
    }
    return "?";
}

bool degraded_path(SourcePath p) {
    return p == SourcePath::synth_raw || p == SourcePath::capacity_fallback || p == SourcePath::no_answer_fallback;
}

ChatRequest chat_request_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("chat request must be a JSON object");
    ChatRequest r;
    try {
        r.session_id = j.value("session_id", std::string{});
        r.match_id = j.value("match_id", std::string{});
        r.text = j.value("text", std::string{});
        if (j.contains("selected_category") && !j["selected_category"].is_null())
            r.selected_category = category_from_string(j["selected_category"].get<std::string>());
        if (j.contains("selected_subquestion_id") && !j["selected_subquestion_id"].is_null())
            r.selected_subquestion_id = j["selected_subquestion_id"].get<std::string>();
        if (j.contains("confirmation_token") && !j["confirmation_token"].is_null())
            r.confirmation_token = j["confirmation_token"].get<std::string>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("chat request: ") + e.what());
    }
    return r;
}

json to_json(const FinalResponse& r) {
    json timings = json::object();
    for (const auto& [k, v] : r.timings) timings[k] = v;
    json out{{"answer", r.answer},
             {"source_path", to_string(r.source_path)},
             {"origin_path", to_string(r.origin_path)},
             {"degraded", r.degraded},
             {"category", r.category ? json(to_string(*r.category)) : json(nullptr)},
             {"judge", r.judge ? to_json(*r.judge) : json(nullptr)},
             {"corrections_count", r.corrections_count},
             {"tokens", {{"prompt", r.prompt_tokens}, {"completion", r.completion_tokens}}},
             {"timings_ms", timings},
             {"needs_confirmation", nullptr}};
    if (r.needs_confirmation) {
        const auto& c = *r.needs_confirmation;
        out["needs_confirmation"] = {{"token", c.token},
                                     {"message", c.message},
                                     {"options", {to_string(c.selected), to_string(c.suggested)}},
                                     {"selected", to_string(c.selected)},
                                     {"suggested", to_string(c.suggested)}};
    }
    return out;
}

// ---------------------------------------------------------------------------

std::optional<FinalResponse> TtlCache::lookup(const std::string& key, Clock::time_point now) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end() || now >= it->second.expires_at) return std::nullopt;
    return *it->second.value;
}

void TtlCache::store(const std::string& key, FinalResponse value, Clock::time_point now) {
    std::lock_guard lock(mutex_);
    // Drop expired entries opportunistically so the map stays small.
    for (auto it = entries_.begin(); it != entries_.end();) {
        if (now >= it->second.expires_at) it = entries_.erase(it);
        else ++it;
    }
    entries_[key] = Entry{std::make_shared<const FinalResponse>(std::move(value)), now + ttl_};
}

std::size_t TtlCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

std::string cache_key(const ChatRequest& r) {
    std::string canon = r.match_id;
    canon += '\x1f';
    canon += normalized(r.text);
    canon += '\x1f';
    canon += r.selected_category ? std::string(to_string(*r.selected_category)) : "";
    canon += '\x1f';
    canon += r.selected_subquestion_id.value_or("");
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------

KnowledgeBase::KnowledgeBase(std::vector<Entry> entries, std::string fallback)
    : entries_(std::move(entries)), fallback_(std::move(fallback)) {}

KnowledgeBase KnowledgeBase::load(const std::filesystem::path& path) {
    try {
        const auto j = json::parse(text::read_file(path));
        std::vector<Entry> entries;
        for (const auto& e : j.at("entries")) {
            Entry entry{e.at("id"), {}, e.at("answer")};
            for (const auto& k : e.at("keywords")) entry.keywords.push_back(text::lemmas(k.get<std::string>()));
            entries.push_back(std::move(entry));
        }
        return KnowledgeBase(std::move(entries), j.value("fallback", std::string{}));
    } catch (const json::exception& e) {
        throw ConfigurationError(path.string() + ": " + e.what());
    }
}

std::optional<std::string> KnowledgeBase::answer(std::string_view query) const {
    const auto lemmas = text::lemmas(query);
    int best = 0;
    const Entry* chosen = nullptr;
    for (const auto& e : entries_) {
        const int hits = term_hits(lemmas, e.keywords);
        if (hits > best) {
            best = hits;
            chosen = &e;
        }
    }
    if (!chosen) return std::nullopt;
    return chosen->answer;
}

SubquestionCatalog::SubquestionCatalog(std::vector<Tile> tiles) : tiles_(std::move(tiles)) {
    std::set<std::string> ids;
    for (auto& t : tiles_) {
        for (auto& q : t.subquestions) {
            if (!ids.insert(q.id).second) throw ConfigurationError("duplicate subquestion id " + q.id);
            q.category = t.category;
            q.canonical = normalized(q.text);
        }
    }
}

SubquestionCatalog SubquestionCatalog::load(const std::filesystem::path& path) {
    try {
        const auto j = json::parse(text::read_file(path));
        std::vector<Tile> tiles;
        for (const auto& t : j.at("tiles")) {
            Tile tile{t.at("id"), t.at("label"), category_from_string(t.at("category").get<std::string>()), {}};
            for (const auto& q : t.at("subquestions")) tile.subquestions.push_back({q.at("id"), q.at("text"), {}, {}});
            tiles.push_back(std::move(tile));
        }
        return SubquestionCatalog(std::move(tiles));
    } catch (const json::exception& e) {
        throw ConfigurationError(path.string() + ": " + e.what());
    } catch (const ValidationError& e) {
        throw ConfigurationError(path.string() + ": " + e.what());
    }
}

const Subquestion* SubquestionCatalog::find(std::string_view id) const {
    for (const auto& t : tiles_)
        for (const auto& q : t.subquestions)
            if (q.id == id) return &q;
    return nullptr;
}

const Subquestion* SubquestionCatalog::match_text(std::string_view text) const {
    const auto canon = normalized(text);
    if (canon.empty()) return nullptr;
    for (const auto& t : tiles_)
        for (const auto& q : t.subquestions)
            if (q.canonical == canon) return &q;
    return nullptr;
}

std::string SubquestionCatalog::label(QueryCategory category) const {
    for (const auto& t : tiles_)
        if (t.category == category) return t.label;
    return std::string(to_string(category));
}

json SubquestionCatalog::to_json() const {
    json tiles = json::array();
    for (const auto& t : tiles_) {
        json qs = json::array();
        for (const auto& q : t.subquestions) qs.push_back({{"id", q.id}, {"text", q.text}});
        tiles.push_back({{"id", t.id}, {"label", t.label}, {"category", to_string(t.category)}, {"subquestions", qs}});
    }
    return {{"tiles", tiles}};
}

// ---------------------------------------------------------------------------

Gateway::Gateway(GatewayDeps deps)
    : deps_(std::move(deps)), pool_(deps_.config.pool_capacity, deps_.agents), cache_(deps_.config.cache_ttl) {
    if (!deps_.hub || !deps_.safety || !deps_.classifier || !deps_.agents)
        throw ConfigurationError("gateway dependencies incomplete");
    if (!deps_.catalog) deps_.catalog = std::make_shared<SubquestionCatalog>();
}

std::string Gateway::new_token() {
    std::lock_guard lock(rng_mutex_);
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng_()),
                  static_cast<unsigned long long>(rng_()));
    return buf;
}

std::optional<QueryCategory> Gateway::last_category(const std::string& session_id) {
    std::lock_guard lock(sessions_mutex_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) return std::nullopt;
    return it->second.last_category;
}

std::optional<Gateway::Pending> Gateway::take_pending(const ChatRequest& request) {
    if (!request.confirmation_token) return std::nullopt;
    std::lock_guard lock(sessions_mutex_);
    auto it = sessions_.find(request.session_id);
    if (it == sessions_.end() || !it->second.pending) return std::nullopt;
    auto pending = *it->second.pending;
    if (pending.token != *request.confirmation_token || pending.match_id != request.match_id) return std::nullopt;
    it->second.pending.reset();
    if (Clock::now() >= pending.expires_at) return std::nullopt;
    return pending;
}

FinalResponse Gateway::handle_chat(const ChatRequest& original, Clock::time_point arrival) {
    ++requests_;
    const auto t_cache = Clock::now();
    ChatRequest request = original;
    if (text::utf8_length(request.text) > deps_.config.max_input_chars)
        throw ValidationError("input exceeds the " + std::to_string(deps_.config.max_input_chars) +
                              " character limit");
    if (request.selected_subquestion_id) {
        const auto* sq = deps_.catalog->find(*request.selected_subquestion_id);
        if (!sq) throw ValidationError("unknown subquestion " + *request.selected_subquestion_id);
        request.text = sq->text;
        request.selected_category = sq->category;
    } else if (text::trim(request.text).empty()) {
        throw ValidationError("text is empty");
    }

    // Confirmation replies depend on session state and bypass the cache.
    if (request.confirmation_token) {
        ++executions_;
        auto r = execute(request, request.text, arrival);
        r.timings.insert(r.timings.begin(), {"cache", 0.0});
        return r;
    }

    const auto key = cache_key(request);
    auto serve_cached = [&](FinalResponse r) {
        r.source_path = SourcePath::cache;
        r.prompt_tokens = r.completion_tokens = 0;
        r.timings = {{"cache", ms_since(t_cache)}, {"safety", 0.0}, {"classify", 0.0}, {"extension", 0.0},
                     {"post", 0.0}};
        return r;
    };
    if (auto hit = cache_.lookup(key)) return serve_cached(std::move(*hit));

    std::promise<FinalResponse> promise;
    std::shared_future<FinalResponse> leader_result;
    bool leader = false;
    {
        std::lock_guard lock(inflight_mutex_);
        auto it = inflight_.find(key);
        if (it != inflight_.end()) {
            leader_result = it->second;
        } else {
            // Re-check under the lock: a leader may have just finished.
            if (auto hit = cache_.lookup(key)) return serve_cached(std::move(*hit));
            leader_result = promise.get_future().share();
            inflight_.emplace(key, leader_result);
            leader = true;
        }
    }

    if (!leader) {
        auto shared = leader_result.get();
        // Blocked and confirmation outcomes are per-request; run those ourselves.
        if (shared.source_path != SourcePath::blocked_message && !shared.needs_confirmation)
            return serve_cached(std::move(shared));
        ++executions_;
        auto r = execute(request, request.text, arrival);
        r.timings.insert(r.timings.begin(), {"cache", ms_since(t_cache)});
        return r;
    }

    ++executions_;
    const double cache_ms = ms_since(t_cache);
    FinalResponse r;
    try {
        r = execute(request, request.text, arrival);
    } catch (...) {
        r = FinalResponse{};
        r.answer = deps_.kb && !deps_.kb->fallback().empty() ? deps_.kb->fallback() : deps_.config.no_answer_message;
    }
    r.timings.insert(r.timings.begin(), {"cache", cache_ms});
    if (r.source_path != SourcePath::blocked_message && !r.needs_confirmation) cache_.store(key, r);
    promise.set_value(r);
    {
        std::lock_guard lock(inflight_mutex_);
        inflight_.erase(key);
    }
    return r;
}

FinalResponse Gateway::execute(const ChatRequest& request, const std::string& text_in, Clock::time_point arrival) {
    FinalResponse r;
    double safety_ms = 0, classify_ms = 0, extension_ms = 0;
    const auto no_answer = [&] {
        return deps_.kb && !deps_.kb->fallback().empty() ? deps_.kb->fallback() : deps_.config.no_answer_message;
    };
    auto finish = [&](SourcePath path, std::string answer, Clock::time_point post_start) {
        r.answer = std::move(answer);
        r.source_path = r.origin_path = path;
        r.degraded = r.degraded || degraded_path(path);
        r.timings = {{"safety", safety_ms}, {"classify", classify_ms}, {"extension", extension_ms},
                     {"post", ms_since(post_start)}};
        return r;
    };
    r.degraded = false;

    try {
        // Safety.
        auto t = Clock::now();
        const auto mctx = match_context_from_feeds(*deps_.hub, request.match_id);
        const auto safety = deps_.safety->run(text_in, mctx);
        safety_ms = ms_since(t);
        if (!safety.passed()) {
            r.degraded = false;
            return finish(SourcePath::blocked_message, safety.message, Clock::now());
        }
        std::string query = safety.sanitized_text;

        // Category resolution.
        t = Clock::now();
        std::optional<QueryCategory> category;
        const auto pending = take_pending(request);
        if (pending) {
            query = pending->text;
            category = request.selected_category.value_or(pending->selected);
        } else if (request.selected_subquestion_id) {
            category = request.selected_category;
        } else {
            const auto out = deps_.classifier->classify(query);
            const auto routed = route(out, deps_.classifier->threshold());
            if (request.selected_category) {
                if (routed && *routed != *request.selected_category) {
                    ConfirmationPrompt prompt;
                    prompt.token = new_token();
                    prompt.selected = *request.selected_category;
                    prompt.suggested = *routed;
                    prompt.message = replace_all(
                        replace_all(deps_.config.confirmation_message, "{suggested}", deps_.catalog->label(*routed)),
                        "{selected}", deps_.catalog->label(*request.selected_category));
                    {
                        std::lock_guard lock(sessions_mutex_);
                        sessions_[request.session_id].pending =
                            Pending{prompt.token, query, request.match_id, prompt.selected, prompt.suggested,
                                    Clock::now() + deps_.config.confirmation_ttl};
                    }
                    classify_ms = ms_since(t);
                    r.category = request.selected_category;
                    r.needs_confirmation = prompt;
                    return finish(SourcePath::no_answer_fallback, prompt.message, Clock::now());
                }
                category = request.selected_category;
            } else {
                category = routed;
            }
        }
        classify_ms = ms_since(t);
        r.category = category;
        {
            std::lock_guard lock(sessions_mutex_);
            sessions_[request.session_id].last_category = category;
        }

        if (category) {
            // Shield: answer from the feeds without a model call when a pattern fits.
            t = Clock::now();
            const auto& agents = *deps_.agents;
            const auto view = build_match_view(*deps_.hub, request.match_id);
            if (auto light = agents.synthesizer->synthesize_light(query, *category, view, mctx)) {
                std::vector<Correction> log;
                auto answer = agents.rules->apply(light->text, &log);
                r.corrections_count = static_cast<int>(log.size());
                extension_ms = ms_since(t);
                return finish(SourcePath::synth_light, std::move(answer), Clock::now());
            }

            const auto outcome = pool_.run(GraphRequest{query, *category, request.match_id, arrival});
            extension_ms = ms_since(t);
            const auto post = Clock::now();
            if (outcome.kind == GraphOutcome::Kind::capacity_fallback)
                return finish(SourcePath::capacity_fallback, deps_.config.capacity_message, post);
            const auto& ctx = outcome.context;
            r.degraded = ctx.provider_failure;
            r.prompt_tokens = ctx.prompt_tokens;
            r.completion_tokens = ctx.completion_tokens;
            if (outcome.kind == GraphOutcome::Kind::answered) {
                r.judge = ctx.judge;
                r.corrections_count = static_cast<int>(ctx.corrections.size());
                SourcePath path = SourcePath::synth_raw;
                if (ctx.answer_path == AnswerPath::tool_llm) path = SourcePath::tool_llm;
                else if (ctx.answer_path == AnswerPath::synth_summarize) path = SourcePath::synth_summarize;
                return finish(path, ctx.chosen_answer, post);
            }
        }

        // Knowledge base: classifier abstention or no answer from the graph.
        const auto post = Clock::now();
        if (deps_.kb) {
            if (auto a = deps_.kb->answer(query)) return finish(SourcePath::knowledge_base, *a, post);
        }
        return finish(SourcePath::no_answer_fallback, no_answer(), post);
    } catch (const std::exception&) {
        r = FinalResponse{};
        return finish(SourcePath::no_answer_fallback, no_answer(), Clock::now());
    }
}

} // namespace courtside
