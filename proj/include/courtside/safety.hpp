#pragma once

#include "courtside/match_context.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

namespace courtside {

enum class SafetyStage { E1, E2, E3, E4, E5 };

std::string_view to_string(SafetyStage s);

struct PronounSet {
    std::string subject;     // he / she
    std::string object;      // him / her
    std::string determiner;  // his / her
    std::string possessive;  // his / hers
    std::string reflexive;   // himself / herself
};

struct InjectionPattern {
    enum class Kind { literal, regex };
    Kind kind = Kind::literal;
    std::string source;  // as written in the pattern file
    std::string literal;  // lowercased, for literal patterns
    std::regex re;
};

/// Parses one `literal:` / `regex:` line. Throws ConfigurationError.
InjectionPattern parse_injection_pattern(std::string_view line);

struct SafetyConfig {
    std::vector<std::string> profanity;
    std::vector<std::string> slurs;
    std::vector<std::string> allowlist;
    std::vector<InjectionPattern> injection_patterns;
    std::map<std::string, PronounSet> pronoun_map;  // tour -> set
    std::map<SafetyStage, std::string> messages;

    /// Reads profanity.txt, slurs.txt, allowlist.txt, injection.txt and
    /// pronouns.json from `dir`.
    static SafetyConfig load(const std::filesystem::path& dir);
};

struct SafetyOutcome {
    enum class Verdict { pass, blocked };
    Verdict verdict = Verdict::pass;
    std::optional<SafetyStage> failing_stage;
    std::string reason;
    std::string message;  // instructive text for the user when blocked
    std::string sanitized_text;

    bool passed() const noexcept { return verdict == Verdict::pass; }
};

struct StageVerdict {
    bool flagged = false;
    std::string reason;
};

/// Part-of-speech tagging boundary used by name disambiguation.
class PosTagger {
public:
    virtual ~PosTagger() = default;
    /// One flag per text::tokenize token: true when tagged as a proper noun.
    virtual std::vector<bool> proper_nouns(std::string_view text) const = 0;
};

/// Capitalization plus closed-class word lists. A capitalized token is a
/// proper noun unless it opens a sentence and is a known common word.
class RuleTagger : public PosTagger {
public:
    std::vector<bool> proper_nouns(std::string_view text) const override;
};

/// Run-length aware comparison used by the lexicon stages: "fuuuck" matches
/// "fuck" but "fuk" does not, and "assess" never matches "ass".
bool lexicon_token_match(std::string_view folded_token, std::string_view folded_term);

/// Applies the five stages in order. Immutable after construction and safe
/// for concurrent use.
class SafetyPipeline {
public:
    explicit SafetyPipeline(SafetyConfig config, std::shared_ptr<const PosTagger> tagger = nullptr);

    std::string disambiguate_proper_nouns(std::string_view text, const MatchContext& ctx) const;
    StageVerdict detect_profanity(std::string_view text) const;
    StageVerdict detect_slurs(std::string_view text) const;
    StageVerdict detect_injection(std::string_view text) const;
    std::string correct_pronouns(std::string_view text, const MatchContext& ctx) const;

    SafetyOutcome run(std::string_view text, const MatchContext& ctx) const;

    const SafetyConfig& config() const noexcept { return config_; }

private:
    using Phrase = std::vector<std::string>;
    StageVerdict scan(std::string_view text, const std::vector<Phrase>& lexicon) const;

    SafetyConfig config_;
    std::shared_ptr<const PosTagger> tagger_;
    std::vector<Phrase> profanity_;
    std::vector<Phrase> slurs_;
    std::vector<std::string> allow_;  // folded single tokens
};

} // namespace courtside
