#include "dispatch/handover.hpp"

#include <unordered_map>
#include <unordered_set>

namespace dispatch {

std::string tag_name(CoarseTag tag) {
    switch (tag) {
        case CoarseTag::NP: return "NP";
        case CoarseTag::VP: return "VP";
        case CoarseTag::PRP: return "PRP";
        case CoarseTag::ADJP: return "ADJP";
        case CoarseTag::PP: return "PP";
        case CoarseTag::BE: return "BE";
        case CoarseTag::OTHER: return "OTHER";
    }
    return "OTHER";
}

namespace {

const std::unordered_set<std::string>& pronouns() {
    static const std::unordered_set<std::string> s = {
        "i",  "you", "he",  "she", "it",  "we",  "they",    "me",       "him",
        "her", "us",  "them", "my",  "your", "his", "its",    "our",      "their",
        "mine", "yours", "theirs", "myself", "himself", "herself", "someone", "somebody",
        "anyone", "anybody", "everyone", "nobody", "i'm", "i'll", "it's", "he's", "she's",
    };
    return s;
}

const std::unordered_set<std::string>& be_forms() {
    static const std::unordered_set<std::string> s = {"is", "are", "was", "were",
                                                      "am", "be",  "been", "being"};
    return s;
}

const std::unordered_set<std::string>& prepositions() {
    static const std::unordered_set<std::string> s = {
        "in", "on", "at", "by", "for", "with", "from", "of", "to", "over", "under",
        "near", "off", "into", "onto", "through", "across", "behind", "between",
        "around", "about", "against", "along", "beside", "without",
    };
    return s;
}

// Small closed verb list so bare imperatives tag as VP ("end the call").
const std::unordered_set<std::string>& common_verbs() {
    static const std::unordered_set<std::string> s = {
        "end",  "stop",  "transfer", "connect", "talk",  "speak", "give", "get",
        "let",  "want",  "need",     "put",     "hang",  "call",  "take", "send",
        "help", "bring", "go",       "come",    "see",   "saw",   "hear", "heard",
        "know", "think", "report",   "check",   "make",  "fire",  "shoot",
    };
    return s;
}

const std::unordered_set<std::string>& function_words() {
    static const std::unordered_set<std::string> s = {
        "the", "a",  "an",   "and", "or",   "but", "if",   "then", "that", "this",
        "not", "no", "yes",  "so",  "just", "um",  "uh",   "oh",   "okay", "ok",
        "please", "hello", "hi", "hey", "there", "here", "do", "does", "did", "can",
        "could", "would", "will", "may", "really", "very", "now", "again", "has",
        "have", "had", "having",
    };
    return s;
}

bool ends_with_any(const std::string& w, std::initializer_list<const char*> suffixes) {
    for (const char* suf : suffixes) {
        const std::string s(suf);
        if (w.size() > s.size() + 1 && w.ends_with(s)) return true;
    }
    return false;
}

CoarseTag tag_word(const std::string& lower) {
    if (pronouns().count(lower)) return CoarseTag::PRP;
    if (be_forms().count(lower)) return CoarseTag::BE;
    if (prepositions().count(lower)) return CoarseTag::PP;
    if (function_words().count(lower)) return CoarseTag::OTHER;
    if (common_verbs().count(lower)) return CoarseTag::VP;
    if (ends_with_any(lower, {"ive", "ous", "less", "ful", "able", "ible"})) return CoarseTag::ADJP;
    if (ends_with_any(lower, {"ed", "ing"})) return CoarseTag::VP;
    return CoarseTag::NP; // content-word fallback
}

struct Chunk {
    CoarseTag tag = CoarseTag::OTHER;
    std::vector<const TaggedToken*> tokens;
};

std::vector<Chunk> chunk(const std::vector<TaggedToken>& tags) {
    std::vector<Chunk> chunks;
    for (const auto& t : tags) {
        if (!chunks.empty() && chunks.back().tag == t.tag) {
            chunks.back().tokens.push_back(&t);
        } else {
            Chunk c;
            c.tag = t.tag;
            c.tokens.push_back(&t);
            chunks.push_back(std::move(c));
        }
    }
    return chunks;
}

bool chunk_has_sensitive(const Chunk& c, const std::set<std::string>& lexicon_stems) {
    for (const auto* t : c.tokens)
        if (lexicon_stems.count(stem(t->token.lower))) return true;
    return false;
}

} // namespace

std::vector<TaggedToken> pos_tag(std::string_view text) {
    std::vector<TaggedToken> out;
    for (auto& tok : tokenize(text)) {
        TaggedToken t;
        t.tag = tag_word(tok.lower);
        t.token = std::move(tok);
        out.push_back(std::move(t));
    }
    return out;
}

bool match_pattern(const std::vector<TaggedToken>& tags, const Pattern& pattern,
                   const SensitiveLexicon& lexicon) {
    if (pattern.elements.empty() || tags.empty()) return false;
    const auto chunks = chunk(tags);
    const auto& stems = lexicon.for_category(pattern.category);
    const std::size_t m = pattern.elements.size();
    if (chunks.size() < m) return false;
    for (std::size_t start = 0; start + m <= chunks.size(); ++start) {
        bool ok = true;
        for (std::size_t k = 0; k < m; ++k) {
            const auto& el = pattern.elements[k];
            const auto& ch = chunks[start + k];
            if (ch.tag != el.tag || (el.star && !chunk_has_sensitive(ch, stems))) {
                ok = false;
                break;
            }
        }
        if (ok) return true;
    }
    return false;
}

std::string handover_reason_name(HandoverReason r) {
    switch (r) {
        case HandoverReason::urgency: return "urgency";
        case HandoverReason::human_request: return "human_request";
        case HandoverReason::exception: return "exception";
        case HandoverReason::none: break;
    }
    return "none";
}

TriggerResult is_trigger(const Utterance& utterance, const std::vector<Pattern>& patterns,
                         const SensitiveLexicon& lexicon, HandoverState& state,
                         int human_request_repeats) {
    TriggerResult result;
    const auto tags = pos_tag(utterance.text);

    bool human_matched = false;
    std::string human_pattern;
    for (const auto& p : patterns) {
        if (!match_pattern(tags, p, lexicon)) continue;
        if (p.category == PatternCategory::urgency) {
            result.triggered = true;
            result.reason = HandoverReason::urgency;
            result.pattern_id = p.id;
            return result;
        }
        if (!human_matched) {
            human_matched = true;
            human_pattern = p.id;
        }
    }
    if (human_matched) {
        ++state.human_request_count;
        if (state.human_request_count >= human_request_repeats) {
            result.triggered = true;
            result.reason = HandoverReason::human_request;
            result.pattern_id = human_pattern;
            return result;
        }
    }
    if (state.exception_flag) {
        result.triggered = true;
        result.reason = HandoverReason::exception;
    }
    return result;
}

} // namespace dispatch
