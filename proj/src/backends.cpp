#include "dispatch/backends.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dispatch/seeds.hpp"
#include "dispatch/text.hpp"

namespace dispatch {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<std::vector<std::string>> compile_phrases(const std::vector<std::string>& phrases) {
    std::vector<std::vector<std::string>> out;
    for (const auto& p : phrases) {
        auto toks = split_phrase_lower(p);
        if (!toks.empty()) out.push_back(std::move(toks));
    }
    return out;
}

int count_hits(const std::vector<Token>& tokens,
               const std::vector<std::vector<std::string>>& phrases) {
    int hits = 0;
    for (const auto& p : phrases) hits += count_phrase(tokens, p);
    return hits;
}

double noisy_clamped(double base, double epsilon, std::uint64_t root_seed,
                     std::string_view text, std::string_view label, std::uint64_t trial_seed) {
    if (epsilon == 0.0) return std::clamp(base, 0.0, 1.0);
    const std::uint64_t s = split_seed(root_seed, fnv1a64(text), fnv1a64(label), trial_seed);
    return std::clamp(base + seed_symmetric(s, epsilon), 0.0, 1.0);
}

} // namespace

StubLexiconClassifier::StubLexiconClassifier(std::string label, std::vector<std::string> cues,
                                             std::vector<std::string> counter_cues, double epsilon,
                                             std::uint64_t root_seed)
    : label_(std::move(label)),
      cue_phrases_(compile_phrases(cues)),
      counter_phrases_(compile_phrases(counter_cues)),
      epsilon_(epsilon),
      root_seed_(root_seed) {}

double StubLexiconClassifier::base_score(std::string_view text) const {
    if (cue_phrases_.empty()) return 0.5; // no evidence either way
    const auto tokens = tokenize(text);
    const int hits = count_hits(tokens, cue_phrases_);
    const int counters = count_hits(tokens, counter_phrases_);
    return sigmoid(static_cast<double>(hits) - 2.0 * counters - 0.5);
}

double StubLexiconClassifier::classify(std::string_view text, std::uint64_t trial_seed) const {
    return noisy_clamped(base_score(text), epsilon_, root_seed_, text, label_, trial_seed);
}

StubBinaryFieldClassifier::StubBinaryFieldClassifier(std::string field_id,
                                                     std::vector<std::string> yes_cues,
                                                     std::vector<std::string> no_cues,
                                                     double epsilon, std::uint64_t root_seed)
    : field_id_(std::move(field_id)),
      yes_phrases_(compile_phrases(yes_cues)),
      no_phrases_(compile_phrases(no_cues)),
      epsilon_(epsilon),
      root_seed_(root_seed) {}

double StubBinaryFieldClassifier::classify(std::string_view text, std::uint64_t trial_seed) const {
    const auto tokens = tokenize(text);
    const int yes = count_hits(tokens, yes_phrases_);
    const int no = count_hits(tokens, no_phrases_);
    const double base = sigmoid(1.5 * (yes - no) - 0.5);
    return noisy_clamped(base, epsilon_, root_seed_, text, field_id_, trial_seed);
}

StubPatternExtractor::StubPatternExtractor(std::map<std::string, ExtractionRule> rules, int jitter,
                                           std::uint64_t root_seed)
    : jitter_(jitter), root_seed_(root_seed) {
    for (const auto& [field, rule] : rules) {
        CompiledRule c;
        c.regex = std::regex(rule.anchor_regex,
                             std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
        c.window_before = rule.window_before;
        c.window_after = rule.window_after;
        compiled_.emplace(field, std::move(c));
    }
}

StubPatternExtractor::AnchorSpan StubPatternExtractor::find_anchor(
    const CompiledRule& rule, const std::string& field_id, std::string_view utterance) const {
    const std::uint64_t key = split_seed(0, fnv1a64(field_id), fnv1a64(utterance));
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = anchor_cache_.find(key);
        if (it != anchor_cache_.end()) return it->second;
    }
    AnchorSpan span;
    std::match_results<std::string_view::const_iterator> m;
    if (std::regex_search(utterance.begin(), utterance.end(), m, rule.regex)) {
        // prefer the first capture group when the rule defines one
        const int g = m.size() > 1 && m[1].matched ? 1 : 0;
        span.found = true;
        span.begin = static_cast<std::size_t>(m.position(g));
        span.end = span.begin + static_cast<std::size_t>(m.length(g));
    }
    std::lock_guard<std::mutex> lock(cache_mutex_);
    if (anchor_cache_.size() > 4096) anchor_cache_.clear();
    anchor_cache_.emplace(key, span);
    return span;
}

std::optional<std::string> StubPatternExtractor::extract(const std::string& field_id,
                                                         std::string_view utterance,
                                                         std::uint64_t trial_seed) const {
    auto it = compiled_.find(field_id);
    if (it == compiled_.end()) return std::nullopt;
    const auto anchor = find_anchor(it->second, field_id, utterance);
    if (!anchor.found) return std::nullopt;

    const auto tokens = tokenize(utterance);
    if (tokens.empty()) return std::nullopt;

    // token range covering the anchor
    int first = -1, last = -1;
    for (int i = 0; i < static_cast<int>(tokens.size()); ++i) {
        if (tokens[i].end > anchor.begin && tokens[i].begin < anchor.end) {
            if (first < 0) first = i;
            last = i;
        }
    }
    if (first < 0) return std::string(utterance.substr(anchor.begin, anchor.end - anchor.begin));

    int lo = first - it->second.window_before;
    int hi = last + it->second.window_after;
    if (jitter_ > 0) {
        const std::uint64_t s =
            split_seed(root_seed_, fnv1a64(field_id), fnv1a64(utterance), trial_seed);
        const int span_j = 2 * jitter_ + 1;
        const int dl = static_cast<int>(mix64(s) % span_j) - jitter_;
        const int dr = static_cast<int>(mix64(s ^ 0xabcdefull) % span_j) - jitter_;
        lo += dl;
        hi += dr;
        // jitter moves window edges, never into the anchor core
        lo = std::min(lo, first);
        hi = std::max(hi, last);
    }
    lo = std::clamp(lo, 0, static_cast<int>(tokens.size()) - 1);
    hi = std::clamp(hi, lo, static_cast<int>(tokens.size()) - 1);
    const std::size_t b = tokens[lo].begin;
    const std::size_t e = tokens[hi].end;
    return std::string(utterance.substr(b, e - b));
}

StubBackendSet make_stub_backends(const StubConfig& config, std::uint64_t root_seed) {
    StubBackendSet set;
    set.config = config;
    for (const auto& [type_id, cues] : config.cues) {
        std::vector<std::string> counters;
        if (auto it = config.counter_cues.find(type_id); it != config.counter_cues.end())
            counters = it->second;
        set.type_classifiers[type_id] = std::make_shared<StubLexiconClassifier>(
            type_id, cues, counters, config.epsilon, root_seed);
    }
    for (const auto& [field_id, yes] : config.binary_yes_cues) {
        std::vector<std::string> no;
        if (auto it = config.binary_no_cues.find(field_id); it != config.binary_no_cues.end())
            no = it->second;
        set.binary_classifiers[field_id] = std::make_shared<StubBinaryFieldClassifier>(
            field_id, yes, no, config.epsilon, root_seed);
    }
    set.extractor =
        std::make_shared<StubPatternExtractor>(config.extraction_rules, config.jitter, root_seed);
    return set;
}

std::string mask_cues(std::string_view text, const std::vector<std::string>& cue_phrases) {
    std::string out(text);
    auto tokens = tokenize(out);
    std::vector<bool> masked(tokens.size(), false);
    for (const auto& phrase : cue_phrases) {
        const auto p = split_phrase_lower(phrase);
        if (p.empty() || tokens.size() < p.size()) continue;
        for (std::size_t i = 0; i + p.size() <= tokens.size(); ++i) {
            bool match = true;
            for (std::size_t k = 0; k < p.size(); ++k) {
                if (tokens[i + k].lower != p[k]) {
                    match = false;
                    break;
                }
            }
            if (match)
                for (std::size_t k = 0; k < p.size(); ++k) masked[i + k] = true;
        }
    }
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (!masked[i]) continue;
        for (std::size_t c = tokens[i].begin; c < tokens[i].end; ++c) out[c] = '_';
    }
    return out;
}

} // namespace dispatch
