#include "dispatch/itemize.hpp"

#include <algorithm>
#include <stdexcept>

#include "dispatch/consistency.hpp"

namespace dispatch {

ItemizationResult extract_field(const FieldSpec& field, const Utterance& latest,
                                const StochasticExtractor& backend,
                                const ConfidencePolicy& policy) {
    if (field.kind != FieldKind::narrative)
        throw std::invalid_argument("extract_field requires a narrative field");

    ItemizationResult result;
    result.field_id = field.id;
    result.kind = FieldKind::narrative;

    const int trials = std::max(1, policy.trials);
    std::vector<std::optional<std::string>> outputs;
    outputs.reserve(trials);
    for (int t = 1; t <= trials; ++t) {
        auto span = backend.extract(field.id, latest.text, static_cast<std::uint64_t>(t));
        result.trial_outputs.push_back(span.value_or(""));
        outputs.push_back(std::move(span));
    }

    std::vector<const std::string*> present;
    for (const auto& o : outputs)
        if (o && !o->empty()) present.push_back(&*o);
    if (present.empty()) {
        result.confidence = 0.0;
        return result;
    }
    if (present.size() == 1) {
        // a single extraction among absences keeps full self-consistency
        result.text_value = *present.front();
        result.confidence = 1.0;
        return result;
    }

    const std::size_t n = present.size();
    std::vector<std::vector<double>> score(n, std::vector<double>(n, 1.0));
    double pair_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = *present[i] == *present[j]
                                 ? 1.0
                                 : pairwise_consistency(*present[i], *present[j]).value;
            score[i][j] = score[j][i] = s;
            pair_sum += s;
        }
    }
    result.confidence = pair_sum / (static_cast<double>(n) * (n - 1) / 2.0);

    // medoid: maximal mean consistency to the rest; earliest trial on ties
    std::size_t best = 0;
    double best_mean = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        double m = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) m += score[i][j];
        m /= static_cast<double>(n - 1);
        if (m > best_mean + 1e-12) {
            best_mean = m;
            best = i;
        }
    }
    result.text_value = *present[best];
    return result;
}

ItemizationResult answer_binary(const FieldSpec& field, const Utterance& latest,
                                const StochasticBinaryClassifier& backend,
                                const ConfidencePolicy& policy) {
    if (field.kind != FieldKind::binary)
        throw std::invalid_argument("answer_binary requires a binary field");

    ItemizationResult result;
    result.field_id = field.id;
    result.kind = FieldKind::binary;
    result.quote = latest.text;

    const int trials = std::max(1, policy.trials);
    int positives = 0;
    for (int t = 1; t <= trials; ++t) {
        const double prob = backend.classify(latest.text, static_cast<std::uint64_t>(t));
        result.trial_outputs.push_back(prob > 0.5 ? "yes" : "no");
        if (prob > 0.5) ++positives;
    }
    const int negatives = trials - positives;
    result.bool_value = positives > negatives;
    result.confidence = static_cast<double>(std::max(positives, negatives)) / trials;
    return result;
}

std::vector<ItemizationResult> itemize_turn(const std::vector<const FieldSpec*>& pending_fields,
                                            const Utterance& latest, const StubBackendSet& backends,
                                            const ConfidencePolicy& policy) {
    std::vector<const FieldSpec*> ordered = pending_fields;
    std::sort(ordered.begin(), ordered.end(),
              [](const FieldSpec* a, const FieldSpec* b) { return a->id < b->id; });

    std::vector<ItemizationResult> results;
    results.reserve(ordered.size());
    for (const FieldSpec* field : ordered) {
        if (field->kind == FieldKind::narrative) {
            results.push_back(extract_field(*field, latest, *backends.extractor, policy));
        } else {
            auto it = backends.binary_classifiers.find(field->id);
            if (it == backends.binary_classifiers.end()) {
                // no configured classifier: report an unanswered "no" at zero confidence
                ItemizationResult r;
                r.field_id = field->id;
                r.kind = FieldKind::binary;
                r.bool_value = false;
                r.confidence = 0.0;
                results.push_back(std::move(r));
            } else {
                results.push_back(answer_binary(*field, latest, *it->second, policy));
            }
        }
    }
    return results;
}

} // namespace dispatch
