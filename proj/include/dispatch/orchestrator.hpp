#ifndef DISPATCH_ORCHESTRATOR_HPP
#define DISPATCH_ORCHESTRATOR_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dispatch/backends.hpp"
#include "dispatch/cascade.hpp"
#include "dispatch/domain.hpp"
#include "dispatch/handover.hpp"
#include "dispatch/itemize.hpp"

namespace dispatch {

enum class SessionStatus { active, handed_over, complete };

struct Session {
    DialogueContext context;
    CaseReport report;
    std::vector<std::string> question_list;
    HandoverState handover_state;
    SessionStatus status = SessionStatus::active;

    std::optional<std::string> last_asked_field;
    std::vector<TypePrediction> last_predictions;
    HandoverReason termination_reason = HandoverReason::none;
};

// Pre-populates the report with the basic-field slots and seeds the question
// list from the tree's opening questions.
Session new_session(const PhoneTree& tree, const ConfidencePolicy& policy);

enum class ActionKind { ask, clarify, handover, close };

struct SystemAction {
    ActionKind kind = ActionKind::close;
    std::string field_id;         // ask / clarify
    HandoverReason reason = HandoverReason::none;
    std::string prompt;           // rendered question text
};

struct ReportDelta {
    std::vector<std::string> slots_done;
    std::vector<std::string> slots_tentative;
    std::vector<std::string> types_confirmed;
    std::vector<std::string> types_demoted;
};

struct TurnOutcome {
    SystemAction action;
    ReportDelta delta;
    std::vector<TypePrediction> predictions;
    std::vector<ItemizationResult> items;
};

// Applies one turn's itemization results and type predictions to the report:
// conf_1 > lambda1 completes a slot, lower non-absent values go tentative;
// decision-positive predictions with conf_2 > lambda2 confirm a type and
// materialize its fields, while a drop to conf_2 <= lambda2 (or a negative
// decision) demotes it and removes its unanswered slots.
ReportDelta update_report(CaseReport& report, const std::vector<ItemizationResult>& items,
                          const std::vector<TypePrediction>& predictions, const PhoneTree& tree,
                          const ConfidencePolicy& policy, int caller_turn,
                          const std::optional<std::string>& just_asked);

// Next system action: clarify the just-asked field while it stays incomplete
// (bounded by the clarification cap, which then raises the exception flag),
// otherwise ask the first pending field ordered basic -> shared-with->=2
// candidate types -> type-specific, or close when nothing is pending.
SystemAction next_action(Session& session, const PhoneTree& tree, const ConfidencePolicy& policy);

// Engine bundles the immutable configuration plus backends; sessions carry all
// mutable state, so one engine can serve many sessions.
class Engine {
public:
    Engine(PhoneTree tree, ConfidencePolicy policy, std::vector<Pattern> patterns,
           SensitiveLexicon lexicon, StubBackendSet backends);

    Session open_session() const;
    TurnOutcome step(Session& session, const std::string& caller_text) const;

    const PhoneTree& tree() const { return tree_; }
    const ConfidencePolicy& policy() const { return policy_; }
    const StubBackendSet& backends() const { return backends_; }

private:
    PhoneTree tree_;
    ConfidencePolicy policy_;
    std::vector<Pattern> patterns_;
    SensitiveLexicon lexicon_;
    StubBackendSet backends_;
    std::vector<CascadeLayer> layers_;
};

std::string render_prompt(const PhoneTree& tree, const SystemAction& action);

} // namespace dispatch

#endif
