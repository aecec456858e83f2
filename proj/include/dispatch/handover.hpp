#ifndef DISPATCH_HANDOVER_HPP
#define DISPATCH_HANDOVER_HPP

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dispatch/domain.hpp"
#include "dispatch/text.hpp"

namespace dispatch {

// Coarse shallow-parse tags. Closed-class words are looked up, content words
// fall back to NP after suffix heuristics.
enum class CoarseTag { NP, VP, PRP, ADJP, PP, BE, OTHER };

std::string tag_name(CoarseTag tag);

struct TaggedToken {
    Token token;
    CoarseTag tag = CoarseTag::OTHER;
};

std::vector<TaggedToken> pos_tag(std::string_view text);

enum class PatternCategory { human_request, urgency };

struct PatternElement {
    CoarseTag tag = CoarseTag::NP;
    bool star = false; // matched chunk must contain a sensitive lemma
};

struct Pattern {
    std::string id;
    std::vector<PatternElement> elements;
    PatternCategory category = PatternCategory::human_request;
};

struct SensitiveLexicon {
    std::set<std::string> human_request; // stored stemmed, lowercase
    std::set<std::string> urgency;

    const std::set<std::string>& for_category(PatternCategory c) const {
        return c == PatternCategory::human_request ? human_request : urgency;
    }
};

// True iff some contiguous run of same-tag chunks matches the element
// sequence, with every starred element covering at least one sensitive lemma.
bool match_pattern(const std::vector<TaggedToken>& tags, const Pattern& pattern,
                   const SensitiveLexicon& lexicon);

struct HandoverState {
    int human_request_count = 0;
    bool exception_flag = false;
};

enum class HandoverReason { none, urgency, human_request, exception };

std::string handover_reason_name(HandoverReason r);

struct TriggerResult {
    bool triggered = false;
    HandoverReason reason = HandoverReason::none;
    std::string pattern_id;
};

// Urgency fires immediately; human requests fire once the per-session count
// reaches policy.human_request_repeats; a set exception_flag fires on the next
// evaluation. Updates state in place.
TriggerResult is_trigger(const Utterance& utterance, const std::vector<Pattern>& patterns,
                         const SensitiveLexicon& lexicon, HandoverState& state,
                         int human_request_repeats);

} // namespace dispatch

#endif
