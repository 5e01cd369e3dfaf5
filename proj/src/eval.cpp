#include "courtside/eval.hpp"

#include "courtside/errors.hpp"
#include "courtside/text.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace courtside {

using nlohmann::json;

namespace {

double ms_between(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
}

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

std::string pct(std::size_t num, std::size_t den) {
    if (den == 0) return "n/a";
    return fmt("%.2f%%", 100.0 * static_cast<double>(num) / static_cast<double>(den));
}

double rate(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

json stats_json(const SummaryStats& s) {
    return {{"n", s.n}, {"mean", s.mean}, {"stddev", s.stddev}, {"max", s.max}};
}

const std::string kKnowledgeBaseLabel = "KnowledgeBase";

SourcePath source_path_from_string(std::string_view s) {
    for (auto p : {SourcePath::cache, SourcePath::synth_light, SourcePath::synth_summarize, SourcePath::synth_raw,
                   SourcePath::tool_llm, SourcePath::knowledge_base, SourcePath::blocked_message,
                   SourcePath::capacity_fallback, SourcePath::no_answer_fallback})
        if (to_string(p) == s) return p;
    throw ValidationError("unknown source path " + std::string(s));
}

} // namespace

std::string_view to_string(AnswerableBy a) {
    switch (a) {
    case AnswerableBy::light: return "light";
    case AnswerableBy::heavy: return "heavy";
    case AnswerableBy::llm: return "llm";
    case AnswerableBy::kb: return "kb";
    }
    return "?";
}

AnswerableBy answerable_by_from_string(std::string_view s) {
    for (auto a : {AnswerableBy::light, AnswerableBy::heavy, AnswerableBy::llm, AnswerableBy::kb})
        if (to_string(a) == s) return a;
    throw ValidationError("unknown answerable_by " + std::string(s));
}

std::vector<GoldQuestion> load_gold(std::istream& in) {
    std::vector<GoldQuestion> out;
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        const auto trimmed = text::trim(line);
        if (trimmed.empty() || trimmed[0] == '#') continue;
        try {
            const auto j = json::parse(trimmed);
            GoldQuestion q;
            q.id = j.at("id").get<std::string>();
            q.text = j.value("text", std::string{});
            if (j.contains("category") && !j["category"].is_null())
                q.category = category_from_string(j["category"].get<std::string>());
            q.gold_answer = j.at("gold_answer").get<std::string>();
            q.match_id = j.at("match_id").get<std::string>();
            q.answerable_by = answerable_by_from_string(j.at("answerable_by").get<std::string>());
            if (j.contains("subquestion_id") && !j["subquestion_id"].is_null())
                q.subquestion_id = j["subquestion_id"].get<std::string>();
            if (q.text.empty() && !q.subquestion_id) throw ValidationError("text or subquestion_id required");
            out.push_back(std::move(q));
        } catch (const json::exception& e) {
            throw ParseError(e.what(), line_no);
        } catch (const ValidationError& e) {
            throw ParseError(e.what(), line_no);
        }
    }
    return out;
}

std::vector<GoldQuestion> load_gold(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open " + path.string());
    return load_gold(in);
}

SummaryStats summarize(const std::vector<double>& samples) {
    SummaryStats s;
    s.n = samples.size();
    if (s.n == 0) return s;
    double sum = 0;
    s.max = samples.front();
    for (double x : samples) {
        sum += x;
        s.max = std::max(s.max, x);
    }
    s.mean = sum / static_cast<double>(s.n);
    if (s.n > 1) {
        double ss = 0;
        for (double x : samples) ss += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    return s;
}

double percentile(std::vector<double> samples, double p) {
    if (samples.empty()) return 0;
    std::sort(samples.begin(), samples.end());
    const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(samples.size())));
    return samples[std::clamp<std::size_t>(rank, 1, samples.size()) - 1];
}

// ---------------------------------------------------------------------------

FinalResponse final_response_from_json(const json& j) {
    FinalResponse r;
    try {
        r.answer = j.at("answer").get<std::string>();
        r.source_path = source_path_from_string(j.at("source_path").get<std::string>());
        r.origin_path = source_path_from_string(j.value("origin_path", std::string(to_string(r.source_path))));
        r.degraded = j.at("degraded").get<bool>();
        if (j.contains("category") && !j["category"].is_null())
            r.category = category_from_string(j["category"].get<std::string>());
        if (j.contains("judge") && !j["judge"].is_null()) {
            const auto& v = j["judge"];
            r.judge = JudgeVerdict::make(v.at("factualness"), v.at("relevance"),
                                         v.value("factualness_explanation", std::string{}),
                                         v.value("relevance_explanation", std::string{}));
        }
        r.corrections_count = j.value("corrections_count", 0);
        if (j.contains("tokens")) {
            r.prompt_tokens = j["tokens"].value("prompt", 0);
            r.completion_tokens = j["tokens"].value("completion", 0);
        }
        if (j.contains("timings_ms"))
            for (const auto& [k, v] : j["timings_ms"].items()) r.timings.emplace_back(k, v.get<double>());
        if (j.contains("needs_confirmation") && !j["needs_confirmation"].is_null()) {
            const auto& c = j["needs_confirmation"];
            r.needs_confirmation = ConfirmationPrompt{c.at("token"), c.at("message"),
                                                      category_from_string(c.at("selected").get<std::string>()),
                                                      category_from_string(c.at("suggested").get<std::string>())};
        }
    } catch (const json::exception& e) {
        throw ProviderError(std::string("malformed chat response: ") + e.what());
    }
    return r;
}

HttpChatClient::HttpChatClient(std::string host, int port, std::chrono::milliseconds timeout)
    : host_(std::move(host)), port_(port), timeout_(timeout) {}

FinalResponse HttpChatClient::send(const ChatRequest& request) {
    json body{{"session_id", request.session_id}, {"match_id", request.match_id}, {"text", request.text}};
    if (request.selected_category) body["selected_category"] = to_string(*request.selected_category);
    if (request.selected_subquestion_id) body["selected_subquestion_id"] = *request.selected_subquestion_id;
    if (request.confirmation_token) body["confirmation_token"] = *request.confirmation_token;

    httplib::Client cli(host_, port_);
    const auto secs = timeout_.count() / 1000;
    const auto usecs = (timeout_.count() % 1000) * 1000;
    cli.set_connection_timeout(secs, usecs);
    cli.set_read_timeout(secs, usecs);
    cli.set_write_timeout(secs, usecs);
    auto res = cli.Post("/v1/chat", body.dump(), "application/json");
    if (!res) throw ProviderError("chat service unreachable: " + httplib::to_string(res.error()));
    json j;
    try {
        j = json::parse(res->body);
    } catch (const json::exception& e) {
        throw ProviderError("chat service returned non-JSON status " + std::to_string(res->status));
    }
    if (res->status == 400) throw ValidationError(j.value("error", std::string("rejected")));
    if (res->status != 200)
        throw ProviderError("chat service status " + std::to_string(res->status) + ": " + j.value("error", ""));
    return final_response_from_json(j);
}

bool provider_path(SourcePath origin) {
    return origin == SourcePath::tool_llm || origin == SourcePath::synth_summarize || origin == SourcePath::synth_raw;
}

// ---------------------------------------------------------------------------

EvalReport run_gold(const std::vector<GoldQuestion>& gold, ChatClient& client, const EvalOptions& options) {
    EvalReport report;
    std::size_t n = 0;
    for (const auto& q : gold) {
        GoldResult r;
        r.question = q;
        ChatRequest req;
        req.session_id = options.session_prefix + "-" + std::to_string(n++);
        req.match_id = q.match_id;
        req.text = q.text;
        req.selected_subquestion_id = q.subquestion_id;
        const auto t0 = Clock::now();
        try {
            r.response = client.send(req);
        } catch (const std::exception& e) {
            r.error = e.what();
        }
        r.latency_ms = ms_between(t0, Clock::now());
        if (r.response && options.judge) {
            try {
                r.verdict = options.judge->judge(q.text, q.gold_answer, r.response->answer);
            } catch (const std::exception&) {
                // An unscorable answer counts as failing.
            }
        }
        report.results.push_back(std::move(r));
    }
    aggregate(report);
    return report;
}

void aggregate(EvalReport& report) {
    const auto results = std::move(report.results);
    report = EvalReport{};
    report.results = results;
    report.total = results.size();

    std::vector<double> latencies, prompt, completion, total_tokens;
    std::map<std::string, std::vector<double>> by_path;
    std::size_t classified_correct = 0;
    for (const auto& r : results) {
        if (!r.response) {
            ++report.errors;
            continue;
        }
        const auto& resp = *r.response;
        const std::string origin(to_string(resp.origin_path));
        ++report.path_counts[origin];
        latencies.push_back(r.latency_ms);
        by_path[origin].push_back(r.latency_ms);

        const bool via_provider = provider_path(resp.origin_path);
        if (via_provider) ++report.provider_answers;
        else ++report.shielded;
        if (resp.origin_path == SourcePath::knowledge_base) ++report.knowledge_base;
        if (resp.origin_path == SourcePath::blocked_message) ++report.hap_false_positives;
        if (r.verdict && r.verdict->passed) {
            ++report.judge_passed;
            if (via_provider) ++report.judge_passed_provider;
        }
        if (resp.prompt_tokens > 0 || resp.completion_tokens > 0) {
            prompt.push_back(resp.prompt_tokens);
            completion.push_back(resp.completion_tokens);
            total_tokens.push_back(resp.prompt_tokens + resp.completion_tokens);
        }

        // Classifier metrics only make sense for free text.
        if (!r.question.subquestion_id) {
            const auto gold_label = r.question.category ? std::string(to_string(*r.question.category)) : kKnowledgeBaseLabel;
            const auto predicted = resp.category ? std::string(to_string(*resp.category)) : kKnowledgeBaseLabel;
            ++report.classifier[gold_label].support;
            ++report.classifier[predicted].predicted;
            if (gold_label == predicted) {
                ++report.classifier[gold_label].correct;
                ++classified_correct;
            }
            ++report.classified;
        }
    }
    for (auto& [_, m] : report.classifier) {
        m.precision = rate(m.correct, m.predicted);
        m.recall = rate(m.correct, m.support);
    }
    report.classifier_accuracy = rate(classified_correct, report.classified);
    report.shield_rate = rate(report.shielded, report.total);
    report.kb_rate = rate(report.knowledge_base, report.total);
    report.judge_pass_rate_all = rate(report.judge_passed, report.total);
    report.judge_pass_rate_provider = rate(report.judge_passed_provider, report.provider_answers);
    report.latency_ms = summarize(latencies);
    for (const auto& [path, v] : by_path) report.latency_by_path[path] = summarize(v);
    report.prompt_tokens = summarize(prompt);
    report.completion_tokens = summarize(completion);
    report.total_tokens = summarize(total_tokens);
}

json to_json(const EvalReport& r, bool include_results) {
    json classifier = json::object();
    for (const auto& [k, m] : r.classifier)
        classifier[k] = {{"support", m.support},
                         {"predicted", m.predicted},
                         {"correct", m.correct},
                         {"precision", m.precision},
                         {"recall", m.recall}};
    json latency_by_path = json::object();
    for (const auto& [k, s] : r.latency_by_path) latency_by_path[k] = stats_json(s);
    json out{{"total", r.total},
             {"errors", r.errors},
             {"path_counts", r.path_counts},
             {"shielded", r.shielded},
             {"provider_answers", r.provider_answers},
             {"shield_rate", r.shield_rate},
             {"kb_rate", r.kb_rate},
             {"judge_passed", r.judge_passed},
             {"judge_pass_rate_all", r.judge_pass_rate_all},
             {"judge_pass_rate_provider", r.judge_pass_rate_provider},
             {"latency_ms", stats_json(r.latency_ms)},
             {"latency_by_path_ms", latency_by_path},
             {"tokens", {{"prompt", stats_json(r.prompt_tokens)},
                         {"completion", stats_json(r.completion_tokens)},
                         {"total", stats_json(r.total_tokens)}}},
             {"classifier", {{"accuracy", r.classifier_accuracy}, {"classified", r.classified}, {"per_label", classifier}}},
             {"hap_false_positives", r.hap_false_positives}};
    if (include_results) {
        json rows = json::array();
        for (const auto& g : r.results) {
            json row{{"id", g.question.id},
                     {"text", g.question.text},
                     {"gold_answer", g.question.gold_answer},
                     {"latency_ms", g.latency_ms}};
            if (g.response) {
                row["response"] = to_json(*g.response);
            } else {
                row["error"] = g.error;
            }
            row["verdict"] = g.verdict ? to_json(*g.verdict) : json(nullptr);
            rows.push_back(std::move(row));
        }
        out["results"] = std::move(rows);
    }
    return out;
}

std::string format_report(const EvalReport& r) {
    std::ostringstream os;
    os << "Gold questions: " << r.total << "  errors: " << r.errors << "\n\n";
    os << "Answer paths\n";
    for (const auto& [path, n] : r.path_counts) {
        char line[96];
        std::snprintf(line, sizeof line, "  %-20s %5zu  %s\n", path.c_str(), n, pct(n, r.total).c_str());
        os << line;
    }
    os << "  shield rate          " << pct(r.shielded, r.total) << "  (answered without a completion call)\n";
    os << "  knowledge base rate  " << pct(r.knowledge_base, r.total) << "\n\n";

    os << "Judge pass rate (answer vs gold)\n";
    os << "  over all questions        " << pct(r.judge_passed, r.total) << "  (" << r.judge_passed << "/" << r.total
       << ")\n";
    os << "  over provider answers     " << pct(r.judge_passed_provider, r.provider_answers) << "  ("
       << r.judge_passed_provider << "/" << r.provider_answers << ")\n\n";

    auto stat_row = [&](const std::string& name, const SummaryStats& s) {
        char line[128];
        std::snprintf(line, sizeof line, "  %-20s %5zu %10.2f %10.2f %10.2f\n", name.c_str(), s.n, s.mean, s.stddev,
                      s.max);
        os << line;
    };
    os << "Response time (ms)          n    average     stddev    maximum\n";
    stat_row("all", r.latency_ms);
    for (const auto& [path, s] : r.latency_by_path) stat_row(path, s);
    os << "\nTokens per completion call  n    average     stddev    maximum\n";
    stat_row("prompt", r.prompt_tokens);
    stat_row("completion", r.completion_tokens);
    stat_row("total", r.total_tokens);

    os << "\nClassifier (free-text questions: " << r.classified << ")  accuracy "
       << fmt("%.2f%%", 100 * r.classifier_accuracy) << "\n";
    os << "  label                support  precision     recall\n";
    for (const auto& [label, m] : r.classifier) {
        char line[128];
        std::snprintf(line, sizeof line, "  %-20s %7zu %9.2f%% %9.2f%%\n", label.c_str(), m.support,
                      100 * m.precision, 100 * m.recall);
        os << line;
    }
    os << "\nSafety false positives on gold questions: " << r.hap_false_positives << "\n";

    os << "\nPublished production figures, for comparison only (different models, traffic and gold set):\n"
          "  average response time 6.25 s at up to 120 RPS\n"
          "  judge pass rate 92.83% on 544 gold questions\n"
          "  96.08% accuracy on guided questions\n"
          "  20.10 s average at 490 RPS without shielding\n";
    return os.str();
}

// ---------------------------------------------------------------------------

SafetySweep safety_sweep(const SafetyPipeline& pipeline, const std::vector<std::string>& clean_corpus,
                         const MatchContext& context) {
    static const std::vector<std::string> carriers{"{}", "Why is he such a {} today?", "{}! How many aces so far?",
                                                   "I think the umpire is {}"};
    SafetySweep s;
    for (const auto* list : {&pipeline.config().profanity, &pipeline.config().slurs}) {
        for (const auto& term : *list) {
            for (const auto& c : carriers) {
                auto probe = c;
                probe.replace(probe.find("{}"), 2, term);
                ++s.lexicon_probes;
                if (!pipeline.run(probe, context).passed()) ++s.lexicon_blocked;
                else s.misses.push_back(probe);
            }
        }
    }
    for (const auto& line : clean_corpus) {
        if (text::trim(line).empty()) continue;
        ++s.clean_sentences;
        if (!pipeline.run(line, context).passed()) {
            ++s.clean_blocked;
            s.false_positives.push_back(line);
        }
    }
    return s;
}

// ---------------------------------------------------------------------------

std::vector<ChatRequest> load_mix(const SubquestionCatalog& catalog, const std::vector<std::string>& match_ids,
                                  std::size_t count, std::uint64_t seed) {
    static const std::vector<std::string> shieldable{
        "How many aces?",           "What is the score?",         "Who is serving?",
        "How many double faults?",  "Who is the favorite?",       "What court is the match on?",
        "Who won the last point?",  "What is the head to head?",  "How tall are the players?",
    };
    static const std::vector<std::string> knowledge_base{"Where can I park?", "What time do the gates open?",
                                                         "Where can I get food?", "Where can I buy tickets?"};
    static const std::vector<std::string> open{"Can the leader still lose this?", "Explain the momentum shift",
                                               "Why did the last set swing?", "Can the trailing player still win this?"};
    std::vector<const Subquestion*> subs;
    for (const auto& t : catalog.tiles())
        for (const auto& q : t.subquestions) subs.push_back(&q);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
    std::vector<ChatRequest> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        ChatRequest r;
        r.session_id = "load-" + std::to_string(i % 997);
        r.match_id = match_ids[pick(match_ids.size())];
        const double x = u(rng);
        if (x < 0.6 && !subs.empty()) {
            r.selected_subquestion_id = subs[pick(subs.size())]->id;
        } else if (x < 0.8) {
            r.text = shieldable[pick(shieldable.size())];
        } else if (x < 0.9) {
            r.text = knowledge_base[pick(knowledge_base.size())];
        } else {
            r.text = open[pick(open.size())];
        }
        out.push_back(std::move(r));
    }
    return out;
}

LoadReport run_load(ChatClient& client, const std::vector<ChatRequest>& mix, const LoadOptions& options) {
    LoadReport report;
    report.target_rps = options.rps;
    const auto total =
        static_cast<std::size_t>(std::floor(options.rps * static_cast<double>(options.duration.count()) / 1000.0));
    if (total == 0 || mix.empty()) return report;

    struct Job {
        std::size_t index;
        Clock::time_point due;
    };
    std::mutex mutex;
    std::condition_variable cv;
    std::deque<Job> queue;
    bool done = false;

    std::mutex results_mutex;
    std::vector<double> latencies;
    latencies.reserve(total);

    auto worker = [&] {
        while (true) {
            Job job;
            {
                std::unique_lock lock(mutex);
                cv.wait(lock, [&] { return done || !queue.empty(); });
                if (queue.empty()) return;
                job = queue.front();
                queue.pop_front();
            }
            const auto& req = mix[job.index % mix.size()];
            std::optional<FinalResponse> resp;
            std::string error;
            try {
                resp = client.send(req);
            } catch (const std::exception& e) {
                error = e.what();
            }
            const double latency = ms_between(job.due, Clock::now());
            std::lock_guard lock(results_mutex);
            ++report.completed;
            if (resp) {
                latencies.push_back(latency);
                ++report.path_counts[std::string(to_string(resp->origin_path))];
                report.degraded += resp->degraded;
            } else {
                ++report.errors;
                if (report.error_messages.size() < 10) report.error_messages.push_back(error);
            }
        }
    };

    std::vector<std::thread> workers;
    for (std::size_t i = 0; i < std::max<std::size_t>(1, options.workers); ++i) workers.emplace_back(worker);

    const auto start = Clock::now();
    const auto interval = std::chrono::duration<double>(1.0 / options.rps);
    Clock::time_point last_send = start;
    for (std::size_t i = 0; i < total; ++i) {
        const auto due = start + std::chrono::duration_cast<Clock::duration>(interval * static_cast<double>(i));
        std::this_thread::sleep_until(due);
        const auto now = Clock::now();
        report.max_send_lag_ms = std::max(report.max_send_lag_ms, ms_between(due, now));
        last_send = now;
        {
            std::lock_guard lock(mutex);
            queue.push_back({i, due});
        }
        cv.notify_one();
        ++report.sent;
    }
    {
        std::lock_guard lock(mutex);
        done = true;
    }
    cv.notify_all();
    for (auto& t : workers) t.join();

    const double span_s = std::max(1e-9, std::chrono::duration<double>(last_send - start).count());
    report.achieved_rps = report.sent > 1 ? static_cast<double>(report.sent - 1) / span_s : 0.0;
    report.p50_ms = percentile(latencies, 50);
    report.p95_ms = percentile(latencies, 95);
    report.p99_ms = percentile(latencies, 99);
    report.max_ms = latencies.empty() ? 0.0 : *std::max_element(latencies.begin(), latencies.end());
    report.latencies_ms = std::move(latencies);
    return report;
}

json to_json(const LoadReport& r) {
    return {{"target_rps", r.target_rps},     {"achieved_rps", r.achieved_rps},
            {"sent", r.sent},                 {"completed", r.completed},
            {"errors", r.errors},             {"degraded", r.degraded},
            {"path_counts", r.path_counts},   {"p50_ms", r.p50_ms},
            {"p95_ms", r.p95_ms},             {"p99_ms", r.p99_ms},
            {"max_ms", r.max_ms},             {"max_send_lag_ms", r.max_send_lag_ms},
            {"error_messages", r.error_messages}};
}

std::string format_load_report(const LoadReport& r) {
    std::ostringstream os;
    os << "Target " << fmt("%.1f", r.target_rps) << " RPS, achieved " << fmt("%.1f", r.achieved_rps) << " RPS\n";
    os << "Sent " << r.sent << ", completed " << r.completed << ", errors " << r.errors << ", degraded "
       << r.degraded << "\n";
    os << "Latency ms  p50 " << fmt("%.2f", r.p50_ms) << "  p95 " << fmt("%.2f", r.p95_ms) << "  p99 "
       << fmt("%.2f", r.p99_ms) << "  max " << fmt("%.2f", r.max_ms) << "\n";
    os << "Largest send lag " << fmt("%.2f", r.max_send_lag_ms) << " ms\n";
    os << "Answer paths\n";
    for (const auto& [path, n] : r.path_counts) os << "  " << path << ": " << n << "\n";
    for (const auto& e : r.error_messages) os << "  error: " << e << "\n";
    os << "Published production figure, for comparison only: average response time 6.25 s at up to 120 RPS\n";
    return os.str();
}

} // namespace courtside
