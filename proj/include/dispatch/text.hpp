#ifndef DISPATCH_TEXT_HPP
#define DISPATCH_TEXT_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dispatch {

// A word token with its character range in the source string, so callers can
// always recover the verbatim substring they came from.
struct Token {
    std::string text;    // as written
    std::string lower;   // lowercased (ASCII)
    std::size_t begin = 0;
    std::size_t end = 0; // one past the last char
};

// Splits on anything that is not [A-Za-z0-9'] or a non-ASCII byte. Digits are
// kept as tokens; apostrophes stay inside words ("it's" -> "it's").
std::vector<Token> tokenize(std::string_view text);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

// Suffix-stripping stem used for lexicon matching: lowercase, strip one of
// ing/ed/es/s (longest first, keeping at least 3 chars), then a trailing 'e'
// so that e.g. "fire"/"fired"/"fires" all collapse to "fir".
std::string stem(std::string_view word);

bool is_stopword(const std::string& lower);

std::uint64_t fnv1a64(std::string_view bytes);

// Counts non-overlapping occurrences of `phrase` as a whole-token sequence in
// `tokens`, comparing lowercased token text.
int count_phrase(const std::vector<Token>& tokens, const std::vector<std::string>& phrase_lower);

std::vector<std::string> split_phrase_lower(std::string_view phrase);

} // namespace dispatch

#endif
