#include "courtside/text.hpp"

#include "courtside/errors.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace courtside::text {

namespace {

// ASCII folding for U+00C0..U+017F.
constexpr std::array<const char*, 192> kFold = {
    "a", "a", "a", "a", "a", "a", "ae", "c", "e", "e", "e", "e", "i", "i", "i", "i",
    "d", "n", "o", "o", "o", "o", "o", "x", "o", "u", "u", "u", "u", "y", "th", "ss",
    "a", "a", "a", "a", "a", "a", "ae", "c", "e", "e", "e", "e", "i", "i", "i", "i",
    "d", "n", "o", "o", "o", "o", "o", "/", "o", "u", "u", "u", "u", "y", "th", "y",
    "a", "a", "a", "a", "a", "a", "c", "c", "c", "c", "c", "c", "c", "c", "d", "d",
    "d", "d", "e", "e", "e", "e", "e", "e", "e", "e", "e", "e", "g", "g", "g", "g",
    "g", "g", "g", "g", "h", "h", "h", "h", "i", "i", "i", "i", "i", "i", "i", "i",
    "i", "i", "ij", "ij", "j", "j", "k", "k", "k", "l", "l", "l", "l", "l", "l", "l",
    "l", "l", "l", "n", "n", "n", "n", "n", "n", "n", "n", "n", "o", "o", "o", "o",
    "o", "o", "oe", "oe", "r", "r", "r", "r", "r", "r", "s", "s", "s", "s", "s", "s",
    "s", "s", "t", "t", "t", "t", "t", "t", "u", "u", "u", "u", "u", "u", "u", "u",
    "u", "u", "u", "u", "w", "w", "y", "y", "y", "z", "z", "z", "z", "z", "z", "s",
};

bool is_ascii_word(unsigned char c) { return std::isalnum(c) != 0; }

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

} // namespace

std::vector<Token> tokenize(std::string_view s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const auto c = static_cast<unsigned char>(s[i]);
        if (!is_ascii_word(c) && c < 0x80) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < s.size()) {
            const auto d = static_cast<unsigned char>(s[j]);
            if (is_ascii_word(d) || d >= 0x80) {
                ++j;
            } else if ((d == '\'' || d == '.') && j + 1 < s.size() && j > i &&
                       (is_ascii_word(static_cast<unsigned char>(s[j + 1])) ||
                        static_cast<unsigned char>(s[j + 1]) >= 0x80) &&
                       (d == '\'' || (std::isdigit(static_cast<unsigned char>(s[j - 1])) &&
                                      std::isdigit(static_cast<unsigned char>(s[j + 1]))))) {
                // inner apostrophe, or decimal point between digits
                ++j;
            } else {
                break;
            }
        }
        out.push_back(Token{std::string(s.substr(i, j - i)), i, j});
        i = j;
    }
    return out;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string fold(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto c = static_cast<unsigned char>(s[i]);
        if (c < 0x80) {
            out.push_back(static_cast<char>(std::tolower(c)));
            continue;
        }
        if ((c == 0xC3 || c == 0xC4 || c == 0xC5) && i + 1 < s.size()) {
            const auto d = static_cast<unsigned char>(s[i + 1]);
            const unsigned cp = ((c & 0x1Fu) << 6) | (d & 0x3Fu);
            if (cp >= 0xC0 && cp < 0x180) {
                out += kFold[cp - 0xC0];
                ++i;
                continue;
            }
        }
        out.push_back(static_cast<char>(c));
    }
    return out;
}

std::string lemma(std::string_view word) {
    std::string w = fold(strip_possessive(word));
    static const std::pair<std::string_view, std::string_view> irregular[] = {
        {"won", "win"}, {"hit", "hit"}, {"lost", "lose"}, {"best", "good"}, {"better", "good"},
        {"women", "woman"}, {"men", "man"}, {"children", "child"}, {"played", "play"},
    };
    for (const auto& [from, to] : irregular)
        if (w == from) return std::string(to);
    if (w.size() <= 3 || !std::all_of(w.begin(), w.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)); }))
        return w;

    auto undouble = [](std::string& s) {
        const auto n = s.size();
        if (n >= 2 && s[n - 1] == s[n - 2] && !is_vowel(s[n - 1]) && s[n - 1] != 'l' &&
            s[n - 1] != 's' && s[n - 1] != 'z')
            s.pop_back();
    };

    if (ends_with(w, "ies") && w.size() > 4) {
        w.replace(w.size() - 3, 3, "y");
    } else if (ends_with(w, "sses")) {
        w.erase(w.size() - 2);
    } else if (ends_with(w, "ches") || ends_with(w, "shes") || ends_with(w, "xes")) {
        w.erase(w.size() - 2);
    } else if (ends_with(w, "ing") && w.size() > 5) {
        w.erase(w.size() - 3);
        undouble(w);
    } else if (ends_with(w, "ed") && w.size() > 4) {
        w.erase(w.size() - 2);
        undouble(w);
    } else if (ends_with(w, "s") && !ends_with(w, "ss") && !ends_with(w, "us") && !ends_with(w, "is")) {
        w.pop_back();
    }
    if (w.size() > 4 && w.back() == 'e') w.pop_back();
    return w;
}

bool is_stopword(std::string_view w) {
    static const std::unordered_set<std::string_view> words = {
        "a", "an", "the", "is", "are", "was", "were", "be", "been", "being", "do", "does", "did",
        "how", "what", "when", "where", "who", "whom", "which", "why", "will", "would", "can",
        "could", "should", "shall", "may", "might", "must", "of", "in", "on", "at", "to", "for",
        "from", "by", "with", "about", "as", "into", "than", "then", "so", "and", "or", "but",
        "if", "not", "no", "i", "me", "my", "we", "our", "you", "your", "he", "him", "his",
        "she", "her", "hers", "they", "them", "their", "it", "its", "this", "that", "these",
        "those", "there", "here", "has", "have", "had", "am", "up", "out", "over", "very",
        "just", "also", "any", "some", "each", "only", "too", "s", "t", "please", "tell",
        "give", "show", "let", "know", "many", "much", "get", "got", "far", "now", "today",
        "currently", "current", "right", "yet", "all",
    };
    return words.count(w) > 0;
}

std::vector<std::string> lemmas(std::string_view s) {
    std::vector<std::string> out;
    for (const auto& t : tokenize(s)) out.push_back(lemma(t.text));
    return out;
}

std::vector<std::string> content_lemmas(std::string_view s) {
    std::vector<std::string> out;
    const auto tokens = tokenize(s);
    for (const auto& t : tokens) {
        const auto f = fold(strip_possessive(t.text));
        if (!is_stopword(f)) out.push_back(lemma(t.text));
    }
    if (out.empty())
        for (const auto& t : tokens) out.push_back(lemma(t.text));
    return out;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::string_view strip_possessive(std::string_view word) {
    if (ends_with(word, "'s") || ends_with(word, "'S")) return word.substr(0, word.size() - 2);
    return word;
}

bool is_number(std::string_view token) {
    if (token.empty()) return false;
    bool digit = false;
    for (char c : token) {
        if (std::isdigit(static_cast<unsigned char>(c))) digit = true;
        else if (c != '.' && c != ',') return false;
    }
    return digit;
}

std::vector<std::string> numbers(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
            ++i;
            continue;
        }
        std::string n;
        while (i < s.size()) {
            const char c = s[i];
            if (std::isdigit(static_cast<unsigned char>(c))) {
                n.push_back(c);
            } else if ((c == ',' || c == '.') && i + 1 < s.size() &&
                       std::isdigit(static_cast<unsigned char>(s[i + 1]))) {
                if (c == '.') n.push_back('.');
            } else {
                break;
            }
            ++i;
        }
        out.push_back(n);
    }
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::size_t utf8_length(std::string_view s) {
    return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) {
        return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
    }));
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::vector<std::string> read_term_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigurationError("cannot open " + path.string());
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        auto t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        out.push_back(std::move(t));
    }
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigurationError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace courtside::text
