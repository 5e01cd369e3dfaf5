#include "courtside/synthesizer.hpp"

#include "courtside/errors.hpp"
#include "courtside/text.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <regex>
#include <set>

namespace courtside {

using nlohmann::json;

void CategoryThresholds::validate() const {
    for (auto c : kAllCategories) {
        const auto& v = values[category_index(c)];
        if (!(v.recall >= 0 && v.recall <= v.precision && v.precision <= 1))
            throw ConfigurationError("thresholds for " + std::string(to_string(c)) +
                                     " must satisfy 0 <= recall <= precision <= 1");
    }
}

CategoryThresholds CategoryThresholds::from_json(const json& j) {
    CategoryThresholds t;
    for (const auto& [key, _] : j.items()) {
        try {
            (void)category_from_string(key);
        } catch (const ValidationError&) {
            throw ConfigurationError("thresholds: unknown category " + key);
        }
    }
    for (auto c : kAllCategories) {
        const auto key = std::string(to_string(c));
        if (!j.contains(key)) continue;
        auto& v = t.values[category_index(c)];
        v.precision = j[key].value("precision", v.precision);
        v.recall = j[key].value("recall", v.recall);
    }
    t.validate();
    return t;
}

bool threshold_check(double similarity, QueryCategory category, ThresholdMode mode,
                     const CategoryThresholds& thresholds) {
    const double bound = mode == ThresholdMode::singular_answer ? thresholds.precision(category)
                                                                : thresholds.recall(category);
    return similarity >= bound;
}

// ---------------------------------------------------------------------------

std::vector<std::string> SynthesisPattern::placeholders() const {
    static const std::regex re(R"(\{([A-Za-z0-9_.]+)\})");
    std::vector<std::string> out;
    for (auto it = std::sregex_iterator(template_text.begin(), template_text.end(), re);
         it != std::sregex_iterator(); ++it)
        out.push_back((*it)[1].str());
    return out;
}

namespace {

PatternScope scope_from_string(const std::string& s) {
    if (s == "match") return PatternScope::match;
    if (s == "player") return PatternScope::player;
    if (s == "segment") return PatternScope::segment;
    throw ConfigurationError("unknown pattern scope: " + s);
}

const json* resolve(const json& doc, std::string_view path) {
    const json* cur = &doc;
    std::size_t start = 0;
    while (start <= path.size()) {
        const auto dot = path.find('.', start);
        const auto key = std::string(path.substr(start, dot == std::string_view::npos ? path.npos : dot - start));
        if (!cur->is_object()) return nullptr;
        const auto it = cur->find(key);
        if (it == cur->end() || it->is_null()) return nullptr;
        cur = &*it;
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    return cur;
}

std::string format_value(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        char buf[64];
        if (std::abs(d - std::round(d)) < 1e-9) std::snprintf(buf, sizeof buf, "%.0f", d);
        else std::snprintf(buf, sizeof buf, "%.1f", d);
        return buf;
    }
    if (v.is_boolean()) return v.get<bool>() ? "yes" : "no";
    return v.dump();
}

double round1(double x) { return std::round(x * 10.0) / 10.0; }

std::string lower_first(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
    return s;
}

std::vector<std::vector<std::string>> lemmatize_triggers(const std::vector<std::string>& triggers) {
    std::vector<std::vector<std::string>> out;
    for (const auto& t : triggers) {
        std::vector<std::string> seq;
        for (const auto& tok : text::tokenize(t)) seq.push_back(text::lemma(tok.text));
        if (!seq.empty()) out.push_back(std::move(seq));
    }
    return out;
}

std::size_t trigger_hits(const std::vector<std::string>& query_lemmas, const SynthesisPattern& p) {
    std::size_t hits = 0;
    for (const auto& seq : lemmatize_triggers(p.trigger_lemmas))
        if (std::search(query_lemmas.begin(), query_lemmas.end(), seq.begin(), seq.end()) != query_lemmas.end())
            ++hits;
    return hits;
}

bool feeds_available(const SynthesisPattern& p, const json& view) {
    const auto& feeds = view.contains("feeds") ? view["feeds"] : json::array();
    for (auto k : p.applicable_feeds)
        if (std::find(feeds.begin(), feeds.end(), std::string(to_string(k))) == feeds.end()) return false;
    return true;
}

struct Binding {
    json doc;
    std::string prefix_player;  // "players.0" when bound to a player
    std::string prefix_segment;
};

Binding match_binding(const json& view) {
    Binding b;
    b.doc["match"] = view.value("match", json::object());
    const auto& players = view.value("players", json::array());
    if (players.size() == 2) {
        b.doc["p1"] = players[0];
        b.doc["p2"] = players[1];
    }
    return b;
}

Binding player_binding(const json& view, std::size_t idx) {
    Binding b = match_binding(view);
    const auto& players = view["players"];
    b.doc["player"] = players[idx];
    b.doc["opponent"] = players[1 - idx];
    b.prefix_player = "players." + std::to_string(idx);
    return b;
}

Binding segment_binding(const json& view, std::size_t idx) {
    Binding b = match_binding(view);
    b.doc["segment"] = view["segments"][idx];
    b.prefix_segment = "segments." + std::to_string(idx);
    return b;
}

std::vector<std::string> source_paths(const SynthesisPattern& p, const Binding& b) {
    std::vector<std::string> out;
    for (const auto& ph : p.placeholders()) {
        const auto dot = ph.find('.');
        const auto head = ph.substr(0, dot);
        const auto rest = dot == std::string::npos ? std::string{} : ph.substr(dot);
        if (head == "player") out.push_back(b.prefix_player + rest);
        else if (head == "opponent") out.push_back("players." + std::string(b.prefix_player.back() == '0' ? "1" : "0") + rest);
        else if (head == "segment") out.push_back(b.prefix_segment + rest);
        else if (head == "p1") out.push_back("players.0" + rest);
        else if (head == "p2") out.push_back("players.1" + rest);
        else out.push_back(ph);
    }
    return out;
}

std::optional<int> number_after(const std::vector<std::string>& lemmas, std::string_view word) {
    for (std::size_t i = 0; i + 1 < lemmas.size(); ++i)
        if (lemmas[i] == word && text::is_number(lemmas[i + 1])) {
            try {
                return std::stoi(lemmas[i + 1]);
            } catch (const std::exception&) {
                return std::nullopt;
            }
        }
    return std::nullopt;
}

} // namespace

std::vector<SynthesisPattern> patterns_from_json(const json& j) {
    if (!j.is_array()) throw ConfigurationError("pattern document must be an array");
    std::vector<SynthesisPattern> out;
    std::set<std::string> ids;
    for (const auto& item : j) {
        SynthesisPattern p;
        try {
            p.id = item.at("id");
            p.category = category_from_string(item.at("category").get<std::string>());
            p.scope = scope_from_string(item.value("scope", std::string("match")));
            p.trigger_lemmas = item.at("trigger_lemmas").get<std::vector<std::string>>();
            p.template_text = item.at("template");
            p.required_fields = item.at("required_fields").get<std::vector<std::string>>();
            for (const auto& k : item.value("applicable_feeds", std::vector<std::string>{}))
                p.applicable_feeds.push_back(feed_kind_from_string(k));
        } catch (const json::exception& e) {
            throw ConfigurationError("pattern " + p.id + ": " + e.what());
        } catch (const ValidationError& e) {
            throw ConfigurationError("pattern " + p.id + ": " + e.what());
        }
        if (!ids.insert(p.id).second) throw ConfigurationError("duplicate pattern id " + p.id);
        for (const auto& t : p.trigger_lemmas)
            if (t != text::to_lower(t)) throw ConfigurationError("pattern " + p.id + ": trigger not lowercase: " + t);
        for (const auto& ph : p.placeholders())
            if (std::find(p.required_fields.begin(), p.required_fields.end(), ph) == p.required_fields.end())
                throw ConfigurationError("pattern " + p.id + ": placeholder {" + ph + "} has no required field");
        out.push_back(std::move(p));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    return out;
}

std::vector<SynthesisPattern> load_patterns(const std::filesystem::path& path) {
    try {
        return patterns_from_json(json::parse(text::read_file(path)));
    } catch (const json::parse_error& e) {
        throw ConfigurationError(path.string() + ": " + e.what());
    }
}

std::optional<std::string> fill_template(std::string_view tmpl, const json& doc) {
    std::string out;
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        const auto open = tmpl.find('{', pos);
        if (open == std::string_view::npos) {
            out.append(tmpl.substr(pos));
            break;
        }
        const auto close = tmpl.find('}', open);
        if (close == std::string_view::npos) return std::nullopt;
        out.append(tmpl.substr(pos, open - pos));
        const auto* v = resolve(doc, tmpl.substr(open + 1, close - open - 1));
        if (!v) return std::nullopt;
        out += format_value(*v);
        pos = close + 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Match view

namespace {

std::string final_set_rule_text(const std::string& rule) {
    if (rule == "extended_tiebreak") return "first-to-10 tiebreak";
    if (rule == "advantage_set") return "two-game advantage";
    return "standard tiebreak";
}

std::string how_point_ended(const json& p) {
    if (p.value("ace", false)) return "with an ace";
    if (p.value("double_fault", false)) return "on a double fault";
    const int rally = p.value("rally_length", 0);
    const std::string rally_text = " after a " + std::to_string(rally) + "-shot rally";
    if (p.value("winner_shot", false)) return "with a winner" + rally_text;
    if (p.value("unforced_error", false)) return "on an unforced error" + rally_text;
    return "on a forced error" + rally_text;
}

} // namespace

json build_match_view(const FeedHub& hub, const std::string& match_id) {
    json view{{"match_id", match_id}, {"feeds", json::array()}, {"match", json::object()},
              {"players", json::array()}, {"segments", json::array()}};
    for (auto k : kAllFeedKinds)
        if (hub.find_snapshot(k, match_id)) view["feeds"].push_back(std::string(to_string(k)));

    auto& match = view["match"];
    auto& players = view["players"];
    std::array<std::string, 2> names{"Player 1", "Player 2"};

    if (auto s = hub.find_snapshot(FeedKind::PlayerStats, match_id)) {
        const auto& ps = s->latest.payload["players"];
        for (std::size_t i = 0; i < 2 && i < ps.size(); ++i) {
            json p = ps[i];
            names[i] = p.value("name", names[i]);
            if (p.contains("plays")) p["plays_lower"] = lower_first(p["plays"].get<std::string>());
            if (p.contains("historical_win_ratio"))
                p["historical_win_pct"] = round1(100.0 * p["historical_win_ratio"].get<double>());
            players.push_back(std::move(p));
        }
    }
    while (players.size() < 2) players.push_back({{"name", names[players.size()]}});

    if (auto s = hub.find_snapshot(FeedKind::MatchStats, match_id)) {
        const auto& ms = s->latest.payload["players"];
        for (std::size_t i = 0; i < 2; ++i) players[i]["stats"] = ms[i];
        match["games_completed"] = s->latest.payload.value("games_completed", 0);
    }
    if (auto s = hub.find_snapshot(FeedKind::PowerIndex, match_id)) {
        const auto& v = s->latest.payload["values"];
        for (std::size_t i = 0; i < 2 && i < v.size(); ++i) players[i]["power_index"] = v[i];
    }
    if (auto s = hub.find_snapshot(FeedKind::HeadToHead, match_id)) {
        const auto& h = s->latest.payload;
        match["h2h_matches"] = h.value("matches", 0);
        for (std::size_t i = 0; i < 2; ++i) {
            if (h.contains("wins")) players[i]["h2h_wins"] = h["wins"][i];
            players[i]["h2h_sets"] = h["sets_won"][i];
        }
    }
    if (auto s = hub.find_snapshot(FeedKind::LikelihoodToWin, match_id)) {
        const auto& l = s->latest.payload;
        const auto& pub = l.contains("published") ? l["published"] : l["normalized"];
        for (std::size_t i = 0; i < 2; ++i) {
            players[i]["win_pct"] = round1(100.0 * pub[i].get<double>());
            if (l.contains("static_prior"))
                players[i]["prematch_pct"] = round1(100.0 * l["static_prior"]["win"][i].get<double>());
        }
        const std::size_t fav = pub[0].get<double>() >= pub[1].get<double>() ? 0 : 1;
        match["favorite_name"] = names[fav];
        match["favorite_pct"] = players[fav]["win_pct"];
    }
    if (auto s = hub.find_snapshot(FeedKind::Draw, match_id)) {
        const auto& d = s->latest.payload;
        for (const char* k : {"event", "round", "round_name", "next_round", "next_opponent"})
            if (d.contains(k)) match[k] = d[k];
        if (d.contains("next_opponent")) match["next_opponent_lower"] = lower_first(d["next_opponent"]);
    }
    if (auto s = hub.find_snapshot(FeedKind::MatchLogistics, match_id)) {
        const auto& l = s->latest.payload;
        for (const char* k : {"court", "venue", "surface", "best_of", "order_on_court", "gates_open", "scheduled_start"})
            if (l.contains(k)) match[k] = l[k];
        if (l.contains("surface")) match["surface_lower"] = lower_first(l["surface"]);
        match["final_set_rule_text"] = final_set_rule_text(l.value("final_set_rule", std::string{}));
        const auto start = l.value("scheduled_start", std::string{});
        if (start.size() >= 16) match["start_text"] = start.substr(11, 5) + " UTC on " + start.substr(0, 10);
    }
    if (auto s = hub.find_snapshot(FeedKind::Scores, match_id)) {
        const auto& sc = s->latest.payload;
        match["points_played"] = sc["points_played"];
        std::vector<std::string> sets;
        for (const auto& g : sc.value("set_scores", json::array()))
            sets.push_back(std::to_string(g[0].get<int>()) + "-" + std::to_string(g[1].get<int>()));
        const auto sets_text = text::join(sets, ", ");
        if (sc.value("completed", false)) {
            const auto w = sc["winner"].get<int>() - 1;
            match["score_text"] = names[static_cast<std::size_t>(w)] + " won the match, " + sets_text +
                                  " (set scores listed " + names[0] + " first)";
            match["server_name"] = names[static_cast<std::size_t>(sc["server"].get<int>() - 1)];
        } else {
            std::string t = names[0] + " and " + names[1] + " are at " + std::to_string(sc["sets"][0].get<int>()) +
                            "-" + std::to_string(sc["sets"][1].get<int>()) + " in sets and " +
                            std::to_string(sc["games"][0].get<int>()) + "-" +
                            std::to_string(sc["games"][1].get<int>()) + " in games";
            if (sc.contains("point_display")) t += ", " + sc["point_display"].get<std::string>() + " in the current game";
            if (!sets.empty()) t += " (completed sets " + sets_text + ")";
            match["score_text"] = t;
            match["server_name"] = names[static_cast<std::size_t>(sc["server"].get<int>() - 1)];
        }
    }
    if (auto s = hub.find_snapshot(FeedKind::SlamPointByPoint, match_id)) {
        const auto& last = s->latest.payload;
        match["last_point"] = {
            {"server_name", names[static_cast<std::size_t>(last["server"].get<int>() - 1)]},
            {"winner_name", names[static_cast<std::size_t>(last["winner"].get<int>() - 1)]},
            {"how", how_point_ended(last)},
            {"set", last["set"]},
            {"game", last["game"]},
        };
        int longest = 0, tiebreaks = 0;
        for (const auto& [set, games] : s->points) {
            for (const auto& [game, pts] : games) {
                json seg{{"set", set}, {"game", game}, {"points", pts.size()}};
                int aces = 0, dfs = 0, seg_longest = 0;
                bool tb = false;
                for (const auto& p : pts) {
                    aces += p.value("ace", false);
                    dfs += p.value("double_fault", false);
                    seg_longest = std::max(seg_longest, p.value("rally_length", 0));
                    tb = tb || p.value("tiebreak", false);
                }
                longest = std::max(longest, seg_longest);
                tiebreaks += tb;
                const auto server = static_cast<std::size_t>(pts.front()["server"].get<int>() - 1);
                const auto winner = static_cast<std::size_t>(pts.back()["winner"].get<int>() - 1);
                seg["server_name"] = names[server];
                seg["winner_name"] = names[winner];
                seg["aces"] = aces;
                seg["double_faults"] = dfs;
                seg["longest_rally"] = seg_longest;
                seg["tiebreak"] = tb;
                seg["result"] = tb ? "won the tiebreak" : (winner == server ? "held serve" : "broke serve");
                seg["result_noun"] = tb ? "a tiebreak" : (winner == server ? "a hold" : "a break of serve");
                seg["latest"] = false;
                seg["label"] = "Set " + std::to_string(seg["set"].get<int>()) + " game " +
                               std::to_string(seg["game"].get<int>());
                view["segments"].push_back(std::move(seg));
            }
        }
        if (!view["segments"].empty()) {
            auto& final_seg = view["segments"].back();
            final_seg["latest"] = true;
            final_seg["label"] = "The last game, set " + std::to_string(final_seg["set"].get<int>()) + " game " +
                                 std::to_string(final_seg["game"].get<int>()) + ",";
        }
        match["longest_rally"] = longest;
        match["tiebreak_count"] = tiebreaks;
    }
    return view;
}

// ---------------------------------------------------------------------------

DataSynthesizer::DataSynthesizer(std::vector<SynthesisPattern> patterns, CategoryThresholds thresholds,
                                 std::string disclaimer)
    : patterns_(std::move(patterns)), thresholds_(thresholds), disclaimer_(std::move(disclaimer)) {
    thresholds_.validate();
    std::sort(patterns_.begin(), patterns_.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
}

const SynthesisPattern* DataSynthesizer::select_pattern(std::string_view query, QueryCategory category) const {
    const auto lemmas = text::lemmas(query);
    const SynthesisPattern* best = nullptr;
    std::size_t best_hits = 0;
    for (const auto& p : patterns_) {
        if (p.category != category) continue;
        const auto hits = trigger_hits(lemmas, p);
        if (hits > best_hits) best = &p, best_hits = hits;  // strict: ties keep the lower id
    }
    return best;
}

std::optional<LightAnswer> DataSynthesizer::synthesize_light(std::string_view query, QueryCategory category,
                                                             const json& view, const MatchContext& ctx) const {
    const auto* p = select_pattern(query, category);
    if (!p || !feeds_available(*p, view)) return std::nullopt;

    std::vector<Binding> bindings;
    switch (p->scope) {
    case PatternScope::match:
        bindings.push_back(match_binding(view));
        break;
    case PatternScope::player: {
        if (view["players"].size() != 2) return std::nullopt;
        const auto named = mentioned_players(query, ctx);
        if (named.size() == 1) bindings.push_back(player_binding(view, index(named[0])));
        else for (std::size_t i = 0; i < 2; ++i) bindings.push_back(player_binding(view, i));
        break;
    }
    case PatternScope::segment: {
        const auto& segs = view["segments"];
        if (segs.empty()) return std::nullopt;
        const auto lemmas = text::lemmas(query);
        const auto set = number_after(lemmas, "set");
        const auto game = number_after(lemmas, "game");
        std::optional<std::size_t> pick;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            const bool set_ok = !set || segs[i]["set"] == *set;
            const bool game_ok = !game || segs[i]["game"] == *game;
            if (set_ok && game_ok) {
                if (!set && !game) pick = i;  // keep going: latest game
                else if (game) { pick = i; break; }
                else pick = i;  // set only: last game of that set
            }
        }
        if (!pick) return std::nullopt;
        bindings.push_back(segment_binding(view, *pick));
        break;
    }
    }

    LightAnswer answer;
    answer.pattern_id = p->id;
    std::vector<std::string> parts;
    for (const auto& b : bindings) {
        auto filled = fill_template(p->template_text, b.doc);
        if (!filled) return std::nullopt;
        parts.push_back(std::move(*filled));
        for (auto& s : source_paths(*p, b)) answer.source_fields.push_back(std::move(s));
    }
    answer.text = text::join(parts, " ");
    return answer;
}

std::vector<FactCandidate> DataSynthesizer::generate_fact_corpus(const json& view) const {
    std::vector<FactCandidate> out;
    if (!view.contains("feeds") || view["feeds"].empty()) return out;
    for (const auto& p : patterns_) {
        if (!feeds_available(p, view)) continue;
        std::vector<Binding> bindings;
        if (p.scope == PatternScope::match) bindings.push_back(match_binding(view));
        else if (p.scope == PatternScope::player && view["players"].size() == 2)
            for (std::size_t i = 0; i < 2; ++i) bindings.push_back(player_binding(view, i));
        else if (p.scope == PatternScope::segment)
            for (std::size_t i = 0; i < view["segments"].size(); ++i) bindings.push_back(segment_binding(view, i));
        for (const auto& b : bindings) {
            auto filled = fill_template(p.template_text, b.doc);
            if (!filled) continue;
            out.push_back({std::move(*filled), p.category, p.id, source_paths(p, b), std::nullopt});
        }
    }
    return out;
}

FactCorpus DataSynthesizer::build_corpus(const json& view, const EmbeddingProvider& embedder) const {
    FactCorpus c;
    c.facts = generate_fact_corpus(view);
    c.embeddings.reserve(c.facts.size());
    for (const auto& f : c.facts) c.embeddings.push_back(embedder.embed(f.text));
    return c;
}

FactCandidate match_fact_heavy(std::string_view query, const FactCorpus& corpus, const EmbeddingProvider& embedder) {
    if (corpus.facts.empty()) throw NotFoundError("fact corpus is empty");
    const auto q = embedder.embed(query);
    auto best = top_facts(q, corpus, 1);
    return best.front();
}

std::vector<FactCandidate> top_facts(const Embedding& query, const FactCorpus& corpus, std::size_t k,
                                     std::optional<QueryCategory> category) {
    std::vector<std::pair<double, std::size_t>> scored;
    for (std::size_t i = 0; i < corpus.facts.size(); ++i) {
        if (category && corpus.facts[i].category != *category) continue;
        scored.emplace_back(cosine(query, corpus.embeddings[i]), i);
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<FactCandidate> out;
    for (std::size_t i = 0; i < scored.size() && i < k; ++i) {
        auto f = corpus.facts[scored[i].second];
        f.similarity = scored[i].first;
        out.push_back(std::move(f));
    }
    return out;
}

} // namespace courtside
