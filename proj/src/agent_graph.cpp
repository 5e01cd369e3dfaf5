#include "courtside/agent_graph.hpp"

#include "courtside/errors.hpp"
#include "courtside/match_context.hpp"
#include "courtside/text.hpp"

#include <algorithm>
#include <future>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace courtside {

using nlohmann::json;

std::string_view to_string(AnswerPath p) {
    switch (p) {
    case AnswerPath::tool_llm: return "tool_llm";
    case AnswerPath::synth_summarize: return "synth_summarize";
    case AnswerPath::synth_raw: return "synth_raw";
    case AnswerPath::none: return "none";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// A5 rules

std::string group_thousands(const std::string& s, const std::string& sep) {
    std::string out;
    std::size_t i = 0;
    while (i < s.size()) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
            out += s[i++];
            continue;
        }
        std::size_t j = i;
        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
        const bool after_point = i > 0 && (s[i - 1] == '.' || s[i - 1] == ',');
        const bool before_sep = j + 1 < s.size() && (s[j] == ',' && std::isdigit(static_cast<unsigned char>(s[j + 1])));
        const auto run = s.substr(i, j - i);
        if (run.size() >= 5 && !after_point && !before_sep) {
            for (std::size_t k = 0; k < run.size(); ++k) {
                if (k > 0 && (run.size() - k) % 3 == 0) out += sep;
                out += run[k];
            }
        } else {
            out += run;
        }
        i = j;
    }
    return out;
}

CorrectionRules::CorrectionRules(std::vector<CorrectionRule> rules, std::string thousands_separator)
    : rules_(std::move(rules)), separator_(std::move(thousands_separator)) {}

CorrectionRules CorrectionRules::from_json(const json& j) {
    const auto& list = j.is_array() ? j : j.at("rules");
    std::vector<CorrectionRule> rules;
    for (const auto& item : list) {
        CorrectionRule r;
        try {
            r.id = item.at("id");
            const auto kind = item.at("kind").get<std::string>();
            if (kind == "plural") r.kind = CorrectionRule::Kind::plural;
            else if (kind == "number_format") r.kind = CorrectionRule::Kind::number_format;
            else if (kind == "round_name") r.kind = CorrectionRule::Kind::round_name;
            else if (kind == "reorder") r.kind = CorrectionRule::Kind::reorder;
            else throw ConfigurationError("rule " + r.id + ": unknown kind " + kind);
            r.pattern = item.value("pattern", std::string{});
            r.replacement = item.value("replacement", std::string{});
            r.rationale = item.at("rationale");
            if (r.kind != CorrectionRule::Kind::number_format) r.re = std::regex(r.pattern);
        } catch (const json::exception& e) {
            throw ConfigurationError("correction rule " + r.id + ": " + e.what());
        } catch (const std::regex_error& e) {
            throw ConfigurationError("correction rule " + r.id + ": " + e.what());
        }
        rules.push_back(std::move(r));
    }
    const auto sep = j.is_object() ? j.value("thousands_separator", std::string(",")) : std::string(",");
    return CorrectionRules(std::move(rules), sep);
}

CorrectionRules CorrectionRules::load(const std::filesystem::path& path) {
    try {
        return from_json(json::parse(text::read_file(path)));
    } catch (const json::parse_error& e) {
        throw ConfigurationError(path.string() + ": " + e.what());
    }
}

std::string CorrectionRules::apply(const std::string& input, std::vector<Correction>* log) const {
    std::string s = input;
    for (const auto& r : rules_) {
        std::string next = r.kind == CorrectionRule::Kind::number_format ? group_thousands(s, separator_)
                                                                          : std::regex_replace(s, r.re, r.replacement);
        if (next != s) {
            if (log) log->push_back({r.id, s, next, r.rationale});
            s = std::move(next);
        }
    }
    return s;
}

// ---------------------------------------------------------------------------

AgentGraphConfig AgentGraphConfig::from_json(const json& j) {
    AgentGraphConfig c;
    c.answer_deadline = std::chrono::milliseconds(j.value("answer_deadline_ms", 6000));
    c.grace = std::chrono::milliseconds(j.value("grace_ms", 250));
    c.min_provider_budget = std::chrono::milliseconds(j.value("min_provider_budget_ms", 50));
    c.summary_facts = j.value("summary_facts", c.summary_facts);
    c.max_completion_tokens = j.value("max_completion_tokens", c.max_completion_tokens);
    c.terse_instruction = j.value("terse_instruction", c.terse_instruction);
    c.explain_instruction = j.value("explain_instruction", c.explain_instruction);
    c.summarize_instruction = j.value("summarize_instruction", c.summarize_instruction);
    if (c.answer_deadline.count() <= 0 || c.grace.count() < 0)
        throw ConfigurationError("answer deadline must be positive and grace non-negative");
    return c;
}

std::shared_ptr<const FactCorpus> CorpusCache::get(const FeedHub& hub, const std::string& match_id,
                                                   const DataSynthesizer& synth, const EmbeddingProvider& embedder) {
    std::string signature;
    for (auto k : kAllFeedKinds) signature += std::to_string(hub.last_sequence(k, match_id)) + ",";
    std::lock_guard lock(mutex_);
    auto& e = entries_[match_id];
    if (!e.corpus || e.signature != signature) {
        e.corpus = std::make_shared<const FactCorpus>(synth.build_corpus(build_match_view(hub, match_id), embedder));
        e.signature = signature;
        ++builds_;
    }
    return e.corpus;
}

std::string build_prompt(const std::string& instruction, const std::vector<std::string>& facts,
                         const std::string& question) {
    std::string p = instruction + "\nFacts:\n";
    for (const auto& f : facts) p += "- " + f + "\n";
    p += "Question: " + question + "\nAnswer:";
    return p;
}

std::vector<std::string> tool_fact_lines(const json& tool_output) {
    std::vector<std::string> out;
    for (const auto& [k, v] : tool_output.items()) {
        std::string value;
        if (v.is_string()) value = v.get<std::string>();
        else if (v.is_number_float()) {
            std::ostringstream os;
            os << v.get<double>();
            value = os.str();
        } else value = v.dump();
        out.push_back(k + ": " + value);
    }
    return out;
}

namespace {

double ms_since(Clock::time_point t) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t).count();
}

/// Runs `fn` on a detached thread and waits until `deadline`. Returns
/// nullopt on timeout (the call is abandoned); rethrows the call's error.
template <class T, class F>
std::future<T> start_detached(F fn) {
    auto promise = std::make_shared<std::promise<T>>();
    auto future = promise->get_future();
    std::thread([promise, fn = std::move(fn)]() mutable {
        try {
            promise->set_value(fn());
        } catch (...) {
            promise->set_exception(std::current_exception());
        }
    }).detach();
    return future;
}

template <class T, class F>
std::optional<T> call_until(F fn, Clock::time_point deadline) {
    auto future = start_detached<T>(std::move(fn));
    if (future.wait_until(deadline) != std::future_status::ready) return std::nullopt;
    return future.get();
}

std::string humanize(std::string key) {
    static const std::map<std::string, std::string> labels{
        {"win_pct", "live chance to win (%)"},
        {"prematch_pct", "pre-match chance to win (%)"},
        {"favorite_name", "favorite to win"},
        {"favorite_pct", "favorite's chance to win (%)"},
        {"height_cm", "height in cm"},
        {"weight_kg", "weight in kg"},
        {"venue", "venue where the match is played"},
        {"court", "court the match is played on"},
        {"start_text", "scheduled start time"},
        {"score_text", "score"},
        {"h2h_wins", "head-to-head wins"},
        {"h2h_sets", "head-to-head sets won"},
        {"h2h_matches", "head-to-head matches played"},
        {"historical_win_pct", "career win rate (%)"},
        {"first_serve_pct", "first serve percentage"},
        {"winner_name", "winner"},
        {"server_name", "server"},
    };
    if (auto it = labels.find(key); it != labels.end()) return it->second;
    std::replace(key.begin(), key.end(), '_', ' ');
    return key;
}

bool explanatory(const std::string& query) {
    const auto l = text::lemmas(query);
    if (l.empty()) return false;
    if (l[0] == "why") return true;
    static const std::set<std::string> quantities{"many", "much", "fast", "tall", "old", "long", "often", "far", "big"};
    return l[0] == "how" && (l.size() < 2 || !quantities.count(l[1]));
}

std::optional<int> number_after(const std::vector<std::string>& lemmas, const std::string& word) {
    for (std::size_t i = 0; i + 1 < lemmas.size(); ++i)
        if (lemmas[i] == word && text::is_number(lemmas[i + 1])) return std::stoi(lemmas[i + 1]);
    return std::nullopt;
}

} // namespace

// ---------------------------------------------------------------------------

AgentGraph::AgentGraph(std::shared_ptr<const AgentServices> services) : services_(std::move(services)) {
    if (!services_ || !services_->hub || !services_->synthesizer || !services_->llm || !services_->embedder ||
        !services_->judge || !services_->rules || !services_->corpora)
        throw ConfigurationError("agent graph services incomplete");
}

AgentContext AgentGraph::a1_init(const GraphRequest& request) const {
    AgentContext ctx;
    ctx.query = request.query;
    ctx.category = request.category;
    ctx.match_id = request.match_id;
    ctx.deadline = request.arrival + services_->config.answer_deadline;
    return ctx;
}

void AgentGraph::a2_select_tool(AgentContext& ctx) const {
    const auto& hub = *services_->hub;
    const auto view = build_match_view(hub, ctx.match_id);
    if (view["feeds"].empty()) return;
    const auto mctx = match_context_from_feeds(hub, ctx.match_id);
    const auto named = mentioned_players(ctx.query, mctx);
    std::vector<std::size_t> players{0, 1};
    if (named.size() == 1) players = {index(named[0])};

    json out = json::object();
    auto player_fields = [&](const char* sub, const std::vector<std::string>& keys) {
        for (auto i : players) {
            const auto& p = view["players"][i];
            const json& src = sub ? p.value(sub, json::object()) : p;
            for (const auto& k : keys)
                if (src.contains(k) && !src[k].is_null())
                    out[p.value("name", "Player") + " " + humanize(k)] = src[k];
        }
    };
    const auto& m = view["match"];
    auto match_fields = [&](const std::vector<std::string>& keys) {
        for (const auto& k : keys)
            if (m.contains(k) && !m[k].is_null() && !m[k].is_object()) out[humanize(k)] = m[k];
    };

    switch (ctx.category) {
    case QueryCategory::MatchStatistics:
        if (!hub.find_snapshot(FeedKind::MatchStats, ctx.match_id)) return;
        player_fields("stats", {"aces", "double_faults", "first_serve_pct", "first_serve_points_won",
                                "second_serve_points_won", "break_points_won", "break_points_total", "winners",
                                "unforced_errors", "total_points_won", "fastest_serve_kmh", "service_games_won",
                                "service_games_played"});
        break;
    case QueryCategory::PlayerStatistics:
        if (!hub.find_snapshot(FeedKind::PlayerStats, ctx.match_id)) return;
        player_fields(nullptr, {"ranking", "seed", "career_wins", "career_losses", "slam_titles",
                                "prior_year_result", "historical_win_pct", "h2h_wins", "h2h_sets"});
        match_fields({"h2h_matches"});
        break;
    case QueryCategory::Predictions:
        if (!hub.find_snapshot(FeedKind::LikelihoodToWin, ctx.match_id) &&
            !hub.find_snapshot(FeedKind::PowerIndex, ctx.match_id))
            return;
        player_fields(nullptr, {"win_pct", "prematch_pct", "power_index"});
        match_fields({"favorite_name", "favorite_pct"});
        break;
    case QueryCategory::Biographies:
        if (!hub.find_snapshot(FeedKind::PlayerStats, ctx.match_id)) return;
        player_fields(nullptr, {"nationality", "birthplace", "date_of_birth", "age", "height_cm", "weight_kg",
                                "plays", "turned_pro", "coach"});
        break;
    case QueryCategory::Logistics:
        if (!hub.find_snapshot(FeedKind::MatchLogistics, ctx.match_id) &&
            !hub.find_snapshot(FeedKind::Draw, ctx.match_id))
            return;
        match_fields({"court", "venue", "surface", "best_of", "order_on_court", "start_text", "event", "round_name",
                      "next_round", "next_opponent", "final_set_rule_text"});
        break;
    case QueryCategory::LivePointByPoint: {
        const auto pbp = hub.find_snapshot(FeedKind::SlamPointByPoint, ctx.match_id);
        if (!pbp) return;
        match_fields({"score_text", "server_name", "longest_rally", "tiebreak_count"});
        const auto l = text::lemmas(ctx.query);
        const auto set = number_after(l, "set");
        const auto game = number_after(l, "game");
        for (const auto& seg : view["segments"]) {
            const bool wanted = (set || game) ? ((!set || seg["set"] == *set) && (!game || seg["game"] == *game))
                                              : seg.value("latest", false);
            if (!wanted) continue;
            auto label = "set " + seg["set"].dump() + " game " + seg["game"].dump();
            if (seg.value("latest", false)) label = "last game (" + label + ")";
            for (const char* k : {"server_name", "winner_name", "result", "points", "aces", "double_faults",
                                  "longest_rally"})
                out[label + " " + humanize(k)] = seg[k];
        }
        if (m.contains("last_point")) {
            out["last point won by"] = m["last_point"]["winner_name"];
            out["last point ended"] = m["last_point"]["how"];
        }
        break;
    }
    }
    if (!out.empty()) ctx.tool_output = std::move(out);
}

void AgentGraph::a3_generate(AgentContext& ctx) const {
    const auto& svc = *services_;
    const auto& cfg = svc.config;

    // Tier 1 starts first and runs while the fact corpus is retrieved.
    std::vector<std::string> tool_lines;
    std::future<CompletionResult> t1_future;
    if (ctx.tool_output) {
        tool_lines = tool_fact_lines(*ctx.tool_output);
        CompletionRequest req;
        req.prompt = build_prompt(explanatory(ctx.query) ? cfg.explain_instruction : cfg.terse_instruction,
                                  tool_lines, ctx.query);
        req.max_completion_tokens = cfg.max_completion_tokens;
        req.deadline = ctx.deadline;
        t1_future = start_detached<CompletionResult>([llm = svc.llm, req] { return llm->complete(req); });
    }

    try {
        const auto corpus = svc.corpora->get(*svc.hub, ctx.match_id, *svc.synthesizer, *svc.embedder);
        if (!corpus->facts.empty())
            ctx.candidates = top_facts(svc.embedder->embed(ctx.query), *corpus, std::max<std::size_t>(cfg.summary_facts, 1),
                                       ctx.category);
    } catch (const std::exception& e) {
        ctx.notes.push_back(std::string("fact retrieval failed: ") + e.what());
    }

    if (t1_future.valid()) {
        if (t1_future.wait_until(ctx.deadline) == std::future_status::ready) {
            try {
                const auto r = t1_future.get();
                ctx.chosen_answer = text::trim(r.text);
                ctx.judged_context = text::join(tool_lines, "\n");
                ctx.prompt_tokens = r.prompt_token_count;
                ctx.completion_tokens = r.completion_token_count;
                if (!ctx.chosen_answer.empty()) {
                    ctx.answer_path = AnswerPath::tool_llm;
                    return;
                }
                ctx.notes.push_back("tier 1 returned empty text");
            } catch (const std::exception& e) {
                ctx.notes.push_back(std::string("tier 1 failed: ") + e.what());
                ctx.provider_failure = true;
            }
        } else {
            ctx.notes.push_back("tier 1 timed out");
            ctx.provider_failure = true;
        }
    } else {
        ctx.notes.push_back("tier 1 skipped: no tool output");
    }

    const auto& th = svc.synthesizer->thresholds();
    const bool have_best = !ctx.candidates.empty() && ctx.candidates.front().similarity;
    const double best_sim = have_best ? *ctx.candidates.front().similarity : -1.0;

    // Tier 2: summarize the retrieved facts when they clear the recall bar.
    if (have_best && threshold_check(best_sim, ctx.category, ThresholdMode::llm_summarize, th) &&
        ctx.deadline - Clock::now() > cfg.min_provider_budget) {
        std::vector<std::string> facts;
        for (const auto& c : ctx.candidates)
            if (c.similarity && threshold_check(*c.similarity, ctx.category, ThresholdMode::llm_summarize, th))
                facts.push_back(c.text);
        CompletionRequest req;
        req.prompt = build_prompt(cfg.summarize_instruction, facts, ctx.query);
        req.max_completion_tokens = cfg.max_completion_tokens;
        req.deadline = ctx.deadline;
        auto llm = svc.llm;
        try {
            if (auto r = call_until<CompletionResult>([llm, req] { return llm->complete(req); }, req.deadline)) {
                ctx.chosen_answer = text::trim(r->text);
                ctx.judged_context = text::join(facts, "\n");
                ctx.prompt_tokens = r->prompt_token_count;
                ctx.completion_tokens = r->completion_token_count;
                if (!ctx.chosen_answer.empty()) {
                    ctx.answer_path = AnswerPath::synth_summarize;
                    return;
                }
            } else {
                ctx.notes.push_back("tier 2 timed out");
                ctx.provider_failure = true;
            }
        } catch (const std::exception& e) {
            ctx.notes.push_back(std::string("tier 2 failed: ") + e.what());
            ctx.provider_failure = true;
        }
    }

    // Tier 3: a single raw fact behind the disclaimer.
    if (have_best && threshold_check(best_sim, ctx.category, ThresholdMode::singular_answer, th)) {
        ctx.chosen_answer = svc.synthesizer->disclaimer() + ctx.candidates.front().text;
        ctx.answer_path = AnswerPath::synth_raw;
        return;
    }
    ctx.chosen_answer.clear();
    ctx.answer_path = AnswerPath::none;
}

void AgentGraph::a4_judge(AgentContext& ctx) const {
    if (ctx.answer_path != AnswerPath::tool_llm && ctx.answer_path != AnswerPath::synth_summarize) return;
    const auto& svc = *services_;
    // The judge may run into the grace window but never past half of it.
    const auto until = std::max(ctx.deadline, Clock::now()) + svc.config.grace / 2;
    auto judge = svc.judge;
    const auto q = ctx.query, doc = ctx.judged_context, ans = ctx.chosen_answer;
    try {
        ctx.judge = call_until<JudgeVerdict>([judge, q, doc, ans] { return judge->judge(q, doc, ans); }, until);
        if (!ctx.judge) {
            ctx.notes.push_back("judge timed out");
            ctx.provider_failure = true;
        }
    } catch (const std::exception& e) {
        ctx.notes.push_back(std::string("judge failed: ") + e.what());
        ctx.provider_failure = true;
    }
    if (!ctx.judge) {
        ctx.judge = JudgeVerdict::make(0, 0, "judge unavailable; treated as failing",
                                       "judge unavailable; treated as failing");
    }
    if (ctx.judge->passed) return;
    ctx.notes.push_back("judge rejected the " + std::string(to_string(ctx.answer_path)) + " answer");
    if (!ctx.candidates.empty()) {
        ctx.chosen_answer = svc.synthesizer->disclaimer() + ctx.candidates.front().text;
        ctx.answer_path = AnswerPath::synth_raw;
    } else {
        ctx.chosen_answer.clear();
        ctx.answer_path = AnswerPath::none;
    }
}

void AgentGraph::a5_correct(AgentContext& ctx) const {
    if (ctx.chosen_answer.empty()) return;
    ctx.chosen_answer = services_->rules->apply(ctx.chosen_answer, &ctx.corrections);
}

GraphOutcome AgentGraph::run(const GraphRequest& request) {
    bool expected = false;
    if (!busy_.compare_exchange_strong(expected, true))
        throw std::logic_error("agent graph instance used by two requests at once");
    struct Release {
        std::atomic<bool>& flag;
        ~Release() { flag = false; }
    } release{busy_};
    ++runs_;

    GraphOutcome out;
    auto t = Clock::now();
    out.context = a1_init(request);
    auto& ctx = out.context;
    ctx.timings.emplace_back("A1", ms_since(t));
    t = Clock::now();
    a2_select_tool(ctx);
    ctx.timings.emplace_back("A2", ms_since(t));
    t = Clock::now();
    a3_generate(ctx);
    ctx.timings.emplace_back("A3", ms_since(t));
    if (ctx.answer_path == AnswerPath::tool_llm || ctx.answer_path == AnswerPath::synth_summarize) {
        t = Clock::now();
        a4_judge(ctx);
        ctx.timings.emplace_back("A4", ms_since(t));
    }
    t = Clock::now();
    a5_correct(ctx);
    ctx.timings.emplace_back("A5", ms_since(t));
    out.kind = ctx.answer_path == AnswerPath::none ? GraphOutcome::Kind::no_answer : GraphOutcome::Kind::answered;
    return out;
}

void AgentGraph::reset() {
    // Instances hold no per-request state beyond the ownership flag.
    busy_ = false;
}

// ---------------------------------------------------------------------------

GraphPool::GraphPool(std::size_t capacity, std::shared_ptr<const AgentServices> services) {
    if (capacity == 0) throw ConfigurationError("graph pool capacity must be positive");
    graphs_.reserve(capacity);
    for (std::size_t i = 0; i < capacity; ++i) {
        graphs_.push_back(std::make_unique<AgentGraph>(services));
        free_.push_back(graphs_.back().get());
    }
}

GraphPool::Lease::~Lease() {
    if (graph_) pool_->release(graph_);
}

std::optional<GraphPool::Lease> GraphPool::try_acquire() {
    std::lock_guard lock(mutex_);
    if (free_.empty()) return std::nullopt;
    auto* g = free_.back();
    free_.pop_back();
    const auto used = graphs_.size() - free_.size();
    auto peak = peak_.load();
    while (used > peak && !peak_.compare_exchange_weak(peak, used)) {}
    return Lease(this, g);
}

void GraphPool::release(AgentGraph* g) {
    g->reset();
    std::lock_guard lock(mutex_);
    free_.push_back(g);
}

std::size_t GraphPool::in_use() const {
    std::lock_guard lock(mutex_);
    return graphs_.size() - free_.size();
}

GraphOutcome GraphPool::run(const GraphRequest& request) {
    auto lease = try_acquire();
    if (!lease) {
        GraphOutcome out;
        out.kind = GraphOutcome::Kind::capacity_fallback;
        out.context.query = request.query;
        out.context.category = request.category;
        out.context.match_id = request.match_id;
        return out;
    }
    return lease->graph().run(request);
}

json to_json(const AgentContext& ctx) {
    json corrections = json::array();
    for (const auto& c : ctx.corrections)
        corrections.push_back({{"rule_id", c.rule_id}, {"before", c.before}, {"after", c.after}, {"rationale", c.rationale}});
    json timings = json::object();
    for (const auto& [k, v] : ctx.timings) timings[k] = v;
    json candidates = json::array();
    for (const auto& c : ctx.candidates)
        candidates.push_back({{"text", c.text}, {"pattern_id", c.pattern_id}, {"similarity", c.similarity.value_or(0.0)}});
    return {{"query", ctx.query},
            {"category", to_string(ctx.category)},
            {"match_id", ctx.match_id},
            {"tool_output", ctx.tool_output ? *ctx.tool_output : json(nullptr)},
            {"candidates", candidates},
            {"answer", ctx.chosen_answer},
            {"answer_path", to_string(ctx.answer_path)},
            {"judge", ctx.judge ? to_json(*ctx.judge) : json(nullptr)},
            {"corrections", corrections},
            {"timings_ms", timings},
            {"prompt_tokens", ctx.prompt_tokens},
            {"completion_tokens", ctx.completion_tokens},
            {"notes", ctx.notes},
            {"provider_failure", ctx.provider_failure}};
}

} // namespace courtside
