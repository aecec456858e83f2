#ifndef DISPATCH_CASCADE_HPP
#define DISPATCH_CASCADE_HPP

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dispatch/backends.hpp"
#include "dispatch/domain.hpp"

namespace dispatch {

struct CascadeLayer {
    std::string type_id;
    int rank = 0;
    std::shared_ptr<StochasticBinaryClassifier> classifier;
    std::vector<std::string> cue_phrases; // what masking removes for deeper layers
};

struct TypePrediction {
    std::string type_id;
    bool decision = false;
    double confidence = 0.0;       // agreement fraction over T trials
    double mean_probability = 0.0;
};

// Context transform applied once a layer identifies its type; deeper layers
// see the transformed context. The stub realization masks the type's cues; a
// model-service realization would append an exclusion annotation instead.
using ExclusionTransform =
    std::function<std::string(const std::string& context, const CascadeLayer& layer)>;

std::string mask_exclusion(const std::string& context, const CascadeLayer& layer);
std::string annotate_exclusion(const std::string& context, const CascadeLayer& layer);

// T trials with seeds 1..T; per-trial decision is probability > 0.5, the
// decision is the modal one (ties break negative) and confidence is the
// agreeing fraction.
TypePrediction predict_layer(const std::string& context_text, const CascadeLayer& layer,
                             const ConfidencePolicy& policy);

// Evaluates every layer in rank order. A positive layer's cues are excluded
// from the context passed to deeper layers, so one call can surface multiple
// incident types.
std::vector<TypePrediction> predict_types(const DialogueContext& context,
                                          const std::vector<CascadeLayer>& layers,
                                          const ConfidencePolicy& policy,
                                          const ExclusionTransform& exclude = mask_exclusion);

std::vector<CascadeLayer> build_cascade(const PhoneTree& tree, const StubBackendSet& backends);

} // namespace dispatch

#endif
