#include "dispatch/cascade.hpp"

#include <algorithm>
#include <stdexcept>

namespace dispatch {

std::string mask_exclusion(const std::string& context, const CascadeLayer& layer) {
    return mask_cues(context, layer.cue_phrases);
}

std::string annotate_exclusion(const std::string& context, const CascadeLayer& layer) {
    return context + " [excluding:" + layer.type_id + "]";
}

TypePrediction predict_layer(const std::string& context_text, const CascadeLayer& layer,
                             const ConfidencePolicy& policy) {
    TypePrediction p;
    p.type_id = layer.type_id;
    const int trials = std::max(1, policy.trials);
    int positives = 0;
    double sum = 0.0;
    for (int t = 1; t <= trials; ++t) {
        const double prob = layer.classifier->classify(context_text, static_cast<std::uint64_t>(t));
        sum += prob;
        if (prob > 0.5) ++positives;
    }
    const int negatives = trials - positives;
    p.decision = positives > negatives; // tie stays negative
    const int agreeing = std::max(positives, negatives);
    p.confidence = static_cast<double>(agreeing) / trials;
    p.mean_probability = sum / trials;
    return p;
}

std::vector<TypePrediction> predict_types(const DialogueContext& context,
                                          const std::vector<CascadeLayer>& layers,
                                          const ConfidencePolicy& policy,
                                          const ExclusionTransform& exclude) {
    if (context.caller_turns() == 0)
        throw std::invalid_argument("predict_types requires at least one caller utterance");

    std::vector<const CascadeLayer*> ordered;
    ordered.reserve(layers.size());
    for (const auto& l : layers) ordered.push_back(&l);
    std::sort(ordered.begin(), ordered.end(),
              [](const CascadeLayer* a, const CascadeLayer* b) { return a->rank < b->rank; });

    std::string text = context.full_context();
    std::vector<TypePrediction> out;
    out.reserve(layers.size());
    for (const CascadeLayer* layer : ordered) {
        TypePrediction p = predict_layer(text, *layer, policy);
        if (p.decision) text = exclude(text, *layer);
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<CascadeLayer> build_cascade(const PhoneTree& tree, const StubBackendSet& backends) {
    std::vector<CascadeLayer> layers;
    for (const auto& type : tree.incident_types) {
        CascadeLayer layer;
        layer.type_id = type.id;
        layer.rank = type.cascade_rank;
        auto it = backends.type_classifiers.find(type.id);
        if (it == backends.type_classifiers.end())
            throw std::runtime_error("no classifier configured for incident type '" + type.id + "'");
        layer.classifier = it->second;
        if (auto c = backends.config.cues.find(type.id); c != backends.config.cues.end())
            layer.cue_phrases = c->second;
        layers.push_back(std::move(layer));
    }
    std::sort(layers.begin(), layers.end(),
              [](const CascadeLayer& a, const CascadeLayer& b) { return a.rank < b.rank; });
    return layers;
}

} // namespace dispatch
