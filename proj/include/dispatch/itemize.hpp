#ifndef DISPATCH_ITEMIZE_HPP
#define DISPATCH_ITEMIZE_HPP

#include <optional>
#include <string>
#include <vector>

#include "dispatch/backends.hpp"
#include "dispatch/domain.hpp"

namespace dispatch {

struct ItemizationResult {
    std::string field_id;
    FieldKind kind = FieldKind::narrative;
    std::optional<std::string> text_value;   // narrative: verbatim span of the utterance
    std::optional<bool> bool_value;          // binary: always present
    std::string quote;                       // binary: the utterance that was judged
    double confidence = 0.0;
    std::vector<std::string> trial_outputs;  // raw trial outputs ("" = absent)
};

// Narrative field over the latest utterance: T trials, value is the trial
// output with the highest mean pairwise consistency to the other non-absent
// outputs (the medoid), confidence the mean pairwise consistency over all
// unordered pairs of non-absent outputs. All trials absent -> absent, 0.
ItemizationResult extract_field(const FieldSpec& field, const Utterance& latest,
                                const StochasticExtractor& backend,
                                const ConfidencePolicy& policy);

// Binary field: modal decision over T trials, agreement-fraction confidence.
ItemizationResult answer_binary(const FieldSpec& field, const Utterance& latest,
                                const StochasticBinaryClassifier& backend,
                                const ConfidencePolicy& policy);

// Attempts every pending field against the latest utterance, which is what
// catches information the caller volunteered without being asked. Results are
// ordered by field id.
std::vector<ItemizationResult> itemize_turn(const std::vector<const FieldSpec*>& pending_fields,
                                            const Utterance& latest, const StubBackendSet& backends,
                                            const ConfidencePolicy& policy);

} // namespace dispatch

#endif
