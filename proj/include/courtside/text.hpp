#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

/// Small text toolkit shared by the safety, classifier and synthesizer
/// modules. ASCII-centric; UTF-8 sequences are kept inside word tokens and
/// Latin diacritics can be folded away.
namespace courtside::text {

struct Token {
    std::string text;
    std::size_t begin = 0;  // byte offsets into the source
    std::size_t end = 0;
};

/// Word tokens: runs of ASCII alphanumerics, inner apostrophes and UTF-8
/// multi-byte characters.
std::vector<Token> tokenize(std::string_view s);

std::string to_lower(std::string_view s);

/// Lowercase and strip Latin-1 / Latin Extended-A diacritics.
std::string fold(std::string_view s);

/// Crude suffix-stripping lemma of a single folded word.
std::string lemma(std::string_view word);

bool is_stopword(std::string_view folded_word);

/// Lemmas of every token (folded), in order.
std::vector<std::string> lemmas(std::string_view s);

/// Lemmas of non-stopword tokens. Falls back to all lemmas if every token is
/// a stopword.
std::vector<std::string> content_lemmas(std::string_view s);

std::size_t edit_distance(std::string_view a, std::string_view b);

/// "Alcaraz's" -> "Alcaraz".
std::string_view strip_possessive(std::string_view word);

bool is_number(std::string_view token);

/// Numbers appearing in `s` ("1,234" and "62.5%" normalized to "1234", "62.5").
std::vector<std::string> numbers(std::string_view s);

std::string trim(std::string_view s);

std::size_t utf8_length(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// One entry per non-empty line; `#` starts a comment line.
std::vector<std::string> read_term_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

} // namespace courtside::text
