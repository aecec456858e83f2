#ifndef DISPATCH_BACKENDS_HPP
#define DISPATCH_BACKENDS_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dispatch {

// A binary classifier with trial-level stochasticity. Fixed (text, trial_seed)
// must give a fixed probability; varying trial_seed emulates active dropout.
class StochasticBinaryClassifier {
public:
    virtual ~StochasticBinaryClassifier() = default;
    virtual double classify(std::string_view text, std::uint64_t trial_seed) const = 0;
};

// Extractive QA stand-in. A returned span must be a verbatim substring of the
// utterance.
class StochasticExtractor {
public:
    virtual ~StochasticExtractor() = default;
    virtual std::optional<std::string> extract(const std::string& field_id,
                                               std::string_view utterance,
                                               std::uint64_t trial_seed) const = 0;
};

// Adapter surface for a remote model service. No client ships; real model
// integration is deployment work.
struct ModelServiceRequest {
    std::string task;     // "predict" | "extract" | "binary"
    std::string question;
    std::string context;
};

struct ModelServiceResponse {
    std::string output;
    double probability = 0.0;
};

class ModelServiceClient {
public:
    virtual ~ModelServiceClient() = default;
    virtual ModelServiceResponse infer(const ModelServiceRequest& request) = 0;
};

struct ExtractionRule {
    std::string anchor_regex;
    int window_before = 0;
    int window_after = 0;
};

struct StubConfig {
    std::map<std::string, std::vector<std::string>> cues;         // incident type -> phrases
    std::map<std::string, std::vector<std::string>> counter_cues; // retraction phrases
    double epsilon = 0.0;                                         // classifier noise amplitude
    std::map<std::string, ExtractionRule> extraction_rules;       // field -> rule
    int jitter = 0;                                               // span boundary jitter, tokens
    // binary fields: yes/no cue phrases
    std::map<std::string, std::vector<std::string>> binary_yes_cues;
    std::map<std::string, std::vector<std::string>> binary_no_cues;
};

// Cue-counting classifier for one incident type. Base score is
// sigmoid(net cue hits - 0.5) with counter-cue hits weighted double, plus
// seeded noise uniform in [-epsilon, +epsilon], clamped to [0,1]. An empty cue
// lexicon means no evidence: exactly 0.5 before noise.
class StubLexiconClassifier : public StochasticBinaryClassifier {
public:
    StubLexiconClassifier(std::string label, std::vector<std::string> cues,
                          std::vector<std::string> counter_cues, double epsilon,
                          std::uint64_t root_seed);

    double classify(std::string_view text, std::uint64_t trial_seed) const override;
    double base_score(std::string_view text) const;

private:
    std::string label_;
    std::vector<std::vector<std::string>> cue_phrases_;
    std::vector<std::vector<std::string>> counter_phrases_;
    double epsilon_;
    std::uint64_t root_seed_;
};

// Binary-question classifier: sigmoid(1.5*(yes hits - no hits) - 0.5) plus the
// same seeded noise. No cue evidence sits below 0.5, so unasked binary fields
// never look confidently answered.
class StubBinaryFieldClassifier : public StochasticBinaryClassifier {
public:
    StubBinaryFieldClassifier(std::string field_id, std::vector<std::string> yes_cues,
                              std::vector<std::string> no_cues, double epsilon,
                              std::uint64_t root_seed);

    double classify(std::string_view text, std::uint64_t trial_seed) const override;

private:
    std::string field_id_;
    std::vector<std::vector<std::string>> yes_phrases_;
    std::vector<std::vector<std::string>> no_phrases_;
    double epsilon_;
    std::uint64_t root_seed_;
};

// Regex-anchored span extractor with optional token windows around the anchor
// and per-trial jitter of the window edges (never into the anchor itself).
class StubPatternExtractor : public StochasticExtractor {
public:
    StubPatternExtractor(std::map<std::string, ExtractionRule> rules, int jitter,
                         std::uint64_t root_seed);

    std::optional<std::string> extract(const std::string& field_id, std::string_view utterance,
                                       std::uint64_t trial_seed) const override;

    bool has_rule(const std::string& field_id) const { return compiled_.count(field_id) > 0; }

private:
    struct CompiledRule {
        std::regex regex;
        int window_before = 0;
        int window_after = 0;
    };
    std::map<std::string, CompiledRule> compiled_;
    int jitter_;
    std::uint64_t root_seed_;

    struct AnchorSpan {
        bool found = false;
        std::size_t begin = 0;
        std::size_t end = 0;
    };
    AnchorSpan find_anchor(const CompiledRule& rule, const std::string& field_id,
                           std::string_view utterance) const;

    // regex evaluation is the hot path; memoized per (field, utterance)
    mutable std::mutex cache_mutex_;
    mutable std::unordered_map<std::uint64_t, AnchorSpan> anchor_cache_;
};

// Bundle handed to the cascade/itemization layers. Owns one classifier per
// incident type and per binary field plus the shared extractor.
struct StubBackendSet {
    std::map<std::string, std::shared_ptr<StochasticBinaryClassifier>> type_classifiers;
    std::map<std::string, std::shared_ptr<StochasticBinaryClassifier>> binary_classifiers;
    std::shared_ptr<StubPatternExtractor> extractor;
    StubConfig config;
};

StubBackendSet make_stub_backends(const StubConfig& config, std::uint64_t root_seed);

// The cascade's exclusion step: deeper layers see the context with the
// identified type's cues masked out (stub realization of "excluding the
// previously identified type").
std::string mask_cues(std::string_view text, const std::vector<std::string>& cue_phrases);

} // namespace dispatch

#endif
