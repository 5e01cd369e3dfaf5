#include "courtside/safety.hpp"

#include "courtside/errors.hpp"
#include "courtside/text.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace courtside {

std::string_view to_string(SafetyStage s) {
    switch (s) {
    case SafetyStage::E1: return "E1";
    case SafetyStage::E2: return "E2";
    case SafetyStage::E3: return "E3";
    case SafetyStage::E4: return "E4";
    case SafetyStage::E5: return "E5";
    }
    return "?";
}

InjectionPattern parse_injection_pattern(std::string_view line) {
    InjectionPattern p;
    p.source = std::string(line);
    const auto colon = line.find(':');
    if (colon == std::string_view::npos)
        throw ConfigurationError("injection pattern needs a literal: or regex: prefix: " + p.source);
    const auto kind = line.substr(0, colon);
    const auto body = std::string(line.substr(colon + 1));
    if (body.empty()) throw ConfigurationError("empty injection pattern: " + p.source);
    if (kind == "literal") {
        p.kind = InjectionPattern::Kind::literal;
        p.literal = text::to_lower(body);
    } else if (kind == "regex") {
        p.kind = InjectionPattern::Kind::regex;
        try {
            p.re = std::regex(body, std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
        } catch (const std::regex_error& e) {
            throw ConfigurationError("bad injection regex " + body + ": " + e.what());
        }
    } else {
        throw ConfigurationError("unknown injection pattern kind: " + std::string(kind));
    }
    return p;
}

namespace {

std::map<SafetyStage, std::string> default_messages() {
    return {
        {SafetyStage::E2, "Let's keep it courteous. Please rephrase your question without explicit language."},
        {SafetyStage::E3, "That message contains language we can't accept. Please ask about the match respectfully."},
        {SafetyStage::E4, "I can only answer questions about tennis. Please ask about the players or the match."},
    };
}

PronounSet pronoun_set_from_json(const nlohmann::json& j) {
    return {j.at("subject"), j.at("object"), j.at("determiner"), j.at("possessive"), j.at("reflexive")};
}

// (character, run length) pairs of a folded word.
std::vector<std::pair<char, std::size_t>> runs(std::string_view s) {
    std::vector<std::pair<char, std::size_t>> out;
    for (char c : s) {
        if (!out.empty() && out.back().first == c) ++out.back().second;
        else out.emplace_back(c, 1);
    }
    return out;
}

bool sentence_initial(std::string_view s, const std::vector<text::Token>& tokens, std::size_t i) {
    if (i == 0) return true;
    for (std::size_t k = tokens[i - 1].end; k < tokens[i].begin; ++k)
        if (s[k] == '.' || s[k] == '?' || s[k] == '!') return true;
    return false;
}

bool adjacent(std::string_view s, const std::vector<text::Token>& tokens, std::size_t i) {
    if (i + 1 >= tokens.size()) return false;
    for (std::size_t k = tokens[i].end; k < tokens[i + 1].begin; ++k)
        if (s[k] != ' ') return false;
    return true;
}

std::string match_case(const std::string& replacement, std::string_view original) {
    std::string out = replacement;
    if (!original.empty() && std::isupper(static_cast<unsigned char>(original[0])) && !out.empty())
        out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    return out;
}

// ASCII capitals plus the Latin-1 / Latin Extended-A capitals ("Ś").
bool starts_capitalized(std::string_view t) {
    if (t.empty()) return false;
    const auto b0 = static_cast<unsigned char>(t[0]);
    if (b0 < 0x80) return std::isupper(b0) != 0;
    if (t.size() < 2 || (b0 & 0xE0) != 0xC0) return false;
    const unsigned cp = ((b0 & 0x1Fu) << 6) | (static_cast<unsigned char>(t[1]) & 0x3Fu);
    if (cp >= 0xC0 && cp <= 0xDE) return cp != 0xD7;
    if (cp >= 0x100 && cp <= 0x137) return cp % 2 == 0;
    if (cp >= 0x139 && cp <= 0x148) return cp % 2 == 1;
    if (cp >= 0x14A && cp <= 0x177) return cp % 2 == 0;
    return cp == 0x178 || cp == 0x179 || cp == 0x17B || cp == 0x17D;
}

struct Edit {
    std::size_t begin, end;
    std::string replacement;
};

std::string apply_edits(std::string_view s, const std::vector<Edit>& edits) {
    std::string out;
    std::size_t pos = 0;
    for (const auto& e : edits) {
        out.append(s.substr(pos, e.begin - pos));
        out += e.replacement;
        pos = e.end;
    }
    out.append(s.substr(pos));
    return out;
}

} // namespace

SafetyConfig SafetyConfig::load(const std::filesystem::path& dir) {
    SafetyConfig c;
    c.profanity = text::read_term_file(dir / "profanity.txt");
    c.slurs = text::read_term_file(dir / "slurs.txt");
    c.allowlist = text::read_term_file(dir / "allowlist.txt");
    for (const auto& line : text::read_term_file(dir / "injection.txt"))
        c.injection_patterns.push_back(parse_injection_pattern(line));
    try {
        const auto j = nlohmann::json::parse(text::read_file(dir / "pronouns.json"));
        for (const auto& [tour, set] : j.items()) c.pronoun_map[tour] = pronoun_set_from_json(set);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigurationError(std::string("pronouns.json: ") + e.what());
    }
    c.messages = default_messages();
    return c;
}

bool lexicon_token_match(std::string_view token, std::string_view term) {
    const auto a = runs(token);
    const auto b = runs(term);
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].first != b[i].first || a[i].second < b[i].second) return false;
    return true;
}

std::vector<bool> RuleTagger::proper_nouns(std::string_view s) const {
    static const std::set<std::string, std::less<>> common = {
        "tell", "show", "give", "list", "describe", "explain", "compare", "please", "hi", "hello",
        "hey", "thanks", "thank", "whats", "who's", "what's", "how's", "where's", "when's", "yes",
        "no", "ok", "okay", "will", "would", "could", "should", "did", "does", "do", "is", "are",
        "was", "were", "has", "have", "had", "can", "may", "might", "which", "why", "set", "game",
        "match", "score", "aces", "serve", "break", "win", "winner", "player", "players", "court",
        "i", "i'm", "i'd", "i've",
    };
    const auto tokens = text::tokenize(s);
    std::vector<bool> out(tokens.size(), false);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto& t = tokens[i].text;
        if (!starts_capitalized(t)) continue;
        const auto f = text::fold(t);
        if (sentence_initial(s, tokens, i) && (text::is_stopword(f) || common.count(f))) continue;
        if (f == "i" || f == "i'm" || f == "i'd" || f == "i've") continue;
        out[i] = true;
    }
    return out;
}

SafetyPipeline::SafetyPipeline(SafetyConfig config, std::shared_ptr<const PosTagger> tagger)
    : config_(std::move(config)), tagger_(tagger ? std::move(tagger) : std::make_shared<RuleTagger>()) {
    if (config_.messages.empty()) config_.messages = default_messages();
    std::set<std::string> allow;
    for (const auto& a : config_.allowlist)
        for (const auto& t : text::tokenize(a)) allow.insert(text::fold(t.text));
    allow_.assign(allow.begin(), allow.end());

    auto build = [&](std::vector<std::string>& terms, std::vector<Phrase>& out) {
        std::vector<std::string> kept;
        for (const auto& term : terms) {
            Phrase p;
            for (const auto& t : text::tokenize(term)) p.push_back(text::fold(t.text));
            if (p.empty()) continue;
            // A single-word term that is also allowlisted is dropped so the
            // lexicon and the allowlist stay disjoint.
            if (p.size() == 1 && allow.count(p[0])) continue;
            kept.push_back(text::join(p, " "));
            out.push_back(std::move(p));
        }
        terms = std::move(kept);
        // Longest phrases first so the reported match is the longest one.
        std::stable_sort(out.begin(), out.end(), [](const Phrase& a, const Phrase& b) { return a.size() > b.size(); });
    };
    build(config_.profanity, profanity_);
    build(config_.slurs, slurs_);
}

StageVerdict SafetyPipeline::scan(std::string_view s, const std::vector<Phrase>& lexicon) const {
    const auto tokens = text::tokenize(s);
    struct Forms {
        std::string folded, lemma;
        bool allowed;
    };
    std::vector<Forms> forms;
    forms.reserve(tokens.size());
    for (const auto& t : tokens) {
        auto f = text::fold(text::strip_possessive(t.text));
        const bool allowed = std::binary_search(allow_.begin(), allow_.end(), f);
        forms.push_back({f, text::lemma(f), allowed});
    }
    auto token_matches = [&](const Forms& f, const std::string& term) {
        return !f.allowed && (lexicon_token_match(f.folded, term) || lexicon_token_match(f.lemma, term));
    };
    for (std::size_t i = 0; i < forms.size(); ++i) {
        for (const auto& phrase : lexicon) {
            if (i + phrase.size() > forms.size()) continue;
            bool all = true;
            for (std::size_t k = 0; k < phrase.size() && all; ++k) all = token_matches(forms[i + k], phrase[k]);
            if (all) {
                return {true, "matched lexicon entry \"" + text::join(phrase, " ") + "\" at \"" +
                                  std::string(s.substr(tokens[i].begin,
                                                       tokens[i + phrase.size() - 1].end - tokens[i].begin)) +
                                  "\""};
            }
        }
    }
    return {};
}

StageVerdict SafetyPipeline::detect_profanity(std::string_view s) const { return scan(s, profanity_); }

StageVerdict SafetyPipeline::detect_slurs(std::string_view s) const { return scan(s, slurs_); }

StageVerdict SafetyPipeline::detect_injection(std::string_view s) const {
    for (unsigned char c : s)
        if (c < 0x20 || c == 0x7f) return {true, "control character in input"};
    const auto lower = text::to_lower(s);
    for (const auto& p : config_.injection_patterns) {
        const bool hit = p.kind == InjectionPattern::Kind::literal
                             ? lower.find(p.literal) != std::string::npos
                             : std::regex_search(std::string(s), p.re);
        if (hit) return {true, "matched injection pattern " + p.source};
    }
    return {};
}

std::string SafetyPipeline::disambiguate_proper_nouns(std::string_view s, const MatchContext& ctx) const {
    if (ctx.players.empty()) return std::string(s);
    std::vector<std::string> names;
    for (const auto& p : ctx.players)
        for (auto& n : p.name_tokens()) names.push_back(std::move(n));
    const auto tokens = text::tokenize(s);
    const auto tags = tagger_->proper_nouns(s);
    std::vector<Edit> edits;
    for (std::size_t i = 0; i < tokens.size() && i < tags.size(); ++i) {
        if (!tags[i]) continue;
        const auto base = text::strip_possessive(tokens[i].text);
        const auto folded = text::fold(base);
        std::size_t best = 3;
        const std::string* best_name = nullptr;
        for (const auto& n : names) {
            const auto d = text::edit_distance(folded, text::fold(n));
            if (d < best) best = d, best_name = &n;
        }
        if (best_name && best > 0 && best <= 2)
            edits.push_back({tokens[i].begin, tokens[i].begin + base.size(), *best_name});
    }
    return apply_edits(s, edits);
}

std::string SafetyPipeline::correct_pronouns(std::string_view s, const MatchContext& ctx) const {
    const auto mentioned = mentioned_players(s, ctx);
    if (mentioned.size() != 1) return std::string(s);
    const PlayerProfile* player = nullptr;
    for (const auto& p : ctx.players)
        if (p.slot == mentioned[0]) player = &p;
    const auto it = config_.pronoun_map.find(player->tour);
    if (it == config_.pronoun_map.end()) return std::string(s);
    const auto& set = it->second;

    const auto tokens = text::tokenize(s);
    std::vector<Edit> edits;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const auto f = text::fold(tokens[i].text);
        const bool followed_by_word = adjacent(s, tokens, i) && !text::is_stopword(text::fold(tokens[i + 1].text));
        const std::string* target = nullptr;
        if (f == "he" || f == "she") target = &set.subject;
        else if (f == "him") target = &set.object;
        else if (f == "himself" || f == "herself") target = &set.reflexive;
        else if (f == "hers") target = &set.possessive;
        else if (f == "his") target = followed_by_word ? &set.determiner : &set.possessive;
        else if (f == "her") target = followed_by_word ? &set.determiner : &set.object;
        if (!target || *target == f) continue;
        edits.push_back({tokens[i].begin, tokens[i].end, match_case(*target, tokens[i].text)});
    }
    return apply_edits(s, edits);
}

SafetyOutcome SafetyPipeline::run(std::string_view s, const MatchContext& ctx) const {
    SafetyOutcome out;
    auto block = [&](SafetyStage stage, std::string reason) {
        out.verdict = SafetyOutcome::Verdict::blocked;
        out.failing_stage = stage;
        out.reason = std::move(reason);
        const auto m = config_.messages.find(stage);
        out.message = m != config_.messages.end() ? m->second : "Please rephrase your question.";
        return out;
    };
    const auto corrected = disambiguate_proper_nouns(s, ctx);
    if (auto v = detect_profanity(corrected); v.flagged) return block(SafetyStage::E2, v.reason);
    if (auto v = detect_slurs(corrected); v.flagged) return block(SafetyStage::E3, v.reason);
    if (auto v = detect_injection(corrected); v.flagged) return block(SafetyStage::E4, v.reason);
    out.sanitized_text = correct_pronouns(corrected, ctx);
    return out;
}

} // namespace courtside
