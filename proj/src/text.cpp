#include "dispatch/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_set>

namespace dispatch {

namespace {

bool is_word_byte(unsigned char c) {
    return std::isalnum(c) || c == '\'' || c >= 0x80;
}

} // namespace

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        if (!is_word_byte(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && is_word_byte(static_cast<unsigned char>(text[j]))) ++j;
        Token t;
        t.text = std::string(text.substr(i, j - i));
        t.lower = to_lower(t.text);
        t.begin = i;
        t.end = j;
        out.push_back(std::move(t));
        i = j;
    }
    return out;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string stem(std::string_view word) {
    std::string w = to_lower(word);
    static constexpr std::array<std::string_view, 4> suffixes = {"ing", "ed", "es", "s"};
    for (auto suf : suffixes) {
        if (w.size() > suf.size() + 2 && w.ends_with(suf)) {
            w.resize(w.size() - suf.size());
            break;
        }
    }
    if (w.size() > 3 && w.back() == 'e') w.pop_back();
    return w;
}

bool is_stopword(const std::string& lower) {
    static const std::unordered_set<std::string> kStopwords = {
        "a", "an", "the", "and", "or", "but", "if", "then", "than", "that", "this",
        "these", "those", "there", "here", "it", "its", "it's", "i", "i'm", "i'll",
        "you", "he", "she", "we", "they", "me", "him", "her", "us", "them", "my",
        "your", "his", "our", "their", "is", "are", "was", "were", "am", "be", "been",
        "being", "do", "does", "did", "have", "has", "had", "will", "would", "can",
        "could", "should", "may", "might", "must", "of", "in", "on", "at", "to",
        "from", "by", "with", "as", "for", "about", "into", "over", "under", "out",
        "off", "up", "down", "again", "too", "also", "so", "very", "really", "just",
        "not", "no", "nor", "what", "when", "where", "who", "whom", "which", "why",
        "how", "all", "any", "some", "such", "own", "same", "because", "while",
        "during", "before", "after", "above", "below", "between", "through",
        "against", "um", "uh", "oh", "okay", "ok", "yeah", "yes", "hello", "hi",
        "hey", "please", "like", "maybe", "wait", "actually", "kind", "sort",
    };
    return kStopwords.count(lower) > 0;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::vector<std::string> split_phrase_lower(std::string_view phrase) {
    std::vector<std::string> out;
    for (auto& t : tokenize(phrase)) out.push_back(t.lower);
    return out;
}

int count_phrase(const std::vector<Token>& tokens, const std::vector<std::string>& phrase_lower) {
    if (phrase_lower.empty() || tokens.size() < phrase_lower.size()) return 0;
    int count = 0;
    std::size_t i = 0;
    while (i + phrase_lower.size() <= tokens.size()) {
        bool match = true;
        for (std::size_t k = 0; k < phrase_lower.size(); ++k) {
            if (tokens[i + k].lower != phrase_lower[k]) {
                match = false;
                break;
            }
        }
        if (match) {
            ++count;
            i += phrase_lower.size();
        } else {
            ++i;
        }
    }
    return count;
}

} // namespace dispatch
