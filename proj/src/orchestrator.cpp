#include "dispatch/orchestrator.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace dispatch {

namespace {

FieldSlot make_slot(const FieldSpec& spec) {
    FieldSlot slot;
    slot.field_id = spec.id;
    return slot;
}

// fields that become relevant when `type_id` is active
std::vector<const FieldSpec*> fields_for_type(const PhoneTree& tree, const std::string& type_id) {
    std::vector<const FieldSpec*> out;
    for (const auto& f : tree.fields) {
        if (f.tier == FieldTier::basic) continue;
        if (f.applies(type_id)) out.push_back(&f);
    }
    return out;
}

} // namespace

Session new_session(const PhoneTree& tree, const ConfidencePolicy& policy) {
    (void)policy;
    Session s;
    for (const auto* f : tree.basic_fields()) s.report.slots.emplace(f->id, make_slot(*f));
    s.question_list = tree.opening_questions;
    return s;
}

ReportDelta update_report(CaseReport& report, const std::vector<ItemizationResult>& items,
                          const std::vector<TypePrediction>& predictions, const PhoneTree& tree,
                          const ConfidencePolicy& policy, int caller_turn,
                          const std::optional<std::string>& just_asked) {
    ReportDelta delta;

    for (const auto& item : items) {
        auto it = report.slots.find(item.field_id);
        if (it == report.slots.end()) continue;
        FieldSlot& slot = it->second;
        if (slot.status == SlotStatus::done) continue; // done is terminal

        if (item.kind == FieldKind::binary) {
            // binary answers only count for the question that was actually
            // asked; an unprompted binary result is always a confident "no"
            // and would short-circuit the dialogue
            if (!just_asked || *just_asked != item.field_id) continue;
            slot.bool_value = item.bool_value;
            slot.quote = item.quote; // keep the verbatim answer for audit
            slot.confidence = item.confidence;
            if (item.confidence > policy.lambda1) {
                slot.status = SlotStatus::done;
                delta.slots_done.push_back(slot.field_id);
            } else {
                slot.status = SlotStatus::tentative;
                delta.slots_tentative.push_back(slot.field_id);
            }
            continue;
        }

        if (!item.text_value || item.text_value->empty()) continue; // nothing extracted
        slot.text_value = item.text_value;
        slot.confidence = item.confidence;
        if (item.confidence > policy.lambda1) {
            slot.status = SlotStatus::done;
            delta.slots_done.push_back(slot.field_id);
        } else {
            slot.status = SlotStatus::tentative;
            delta.slots_tentative.push_back(slot.field_id);
        }
    }

    for (const auto& p : predictions) {
        report.type_confidence_history[p.type_id].emplace_back(caller_turn, p.confidence);

        const bool confirmed = report.confirmed_types.count(p.type_id) > 0;
        const bool confident_positive =
            p.decision && p.confidence > policy.lambda2 && p.mean_probability >= 0.5;

        if (!confirmed && confident_positive) {
            report.confirmed_types.insert(p.type_id);
            report.ever_confirmed.insert(p.type_id);
            delta.types_confirmed.push_back(p.type_id);
            for (const auto* f : fields_for_type(tree, p.type_id)) {
                if (!report.slots.count(f->id)) report.slots.emplace(f->id, make_slot(*f));
            }
        } else if (confirmed && (!p.decision || p.confidence <= policy.lambda2)) {
            report.confirmed_types.erase(p.type_id);
            delta.types_demoted.push_back(p.type_id);
        }
    }

    // drop unanswered slots that no longer belong to any confirmed type;
    // answered ones stay for the dispatcher's audit trail
    if (!delta.types_demoted.empty()) {
        for (auto it = report.slots.begin(); it != report.slots.end();) {
            const FieldSpec* spec = tree.find_field(it->first);
            if (!spec || spec->tier == FieldTier::basic || it->second.answered()) {
                ++it;
                continue;
            }
            bool relevant = false;
            for (const auto& t : report.confirmed_types)
                if (spec->applies(t)) relevant = true;
            if (relevant)
                ++it;
            else
                it = report.slots.erase(it);
        }
    }
    return delta;
}

namespace {

// tier precedence: basic, then shared fields touching >=2 candidate types,
// then everything type-specific; declaration order breaks ties
int tier_class(const FieldSpec& spec, const std::set<std::string>& candidates) {
    if (spec.tier == FieldTier::basic) return 0;
    if (spec.tier == FieldTier::shared) {
        int overlap = 0;
        for (const auto& t : candidates)
            if (spec.applies(t)) ++overlap;
        if (overlap >= 2) return 1;
    }
    return 2;
}

} // namespace

SystemAction next_action(Session& session, const PhoneTree& tree, const ConfidencePolicy& policy) {
    SystemAction action;

    // clarification loop for the question that was just answered poorly
    if (session.last_asked_field) {
        auto it = session.report.slots.find(*session.last_asked_field);
        if (it != session.report.slots.end() && it->second.status != SlotStatus::done) {
            FieldSlot& slot = it->second;
            if (slot.clarification_count < policy.clarification_cap) {
                ++slot.clarification_count;
                action.kind = ActionKind::clarify;
                action.field_id = slot.field_id;
                action.prompt = render_prompt(tree, action);
                return action;
            }
            // cap exhausted: internal exception, hand the call over
            session.handover_state.exception_flag = true;
            session.status = SessionStatus::handed_over;
            session.termination_reason = HandoverReason::exception;
            action.kind = ActionKind::handover;
            action.reason = HandoverReason::exception;
            return action;
        }
    }

    std::set<std::string> candidates = session.report.confirmed_types;
    for (const auto& p : session.last_predictions)
        if (p.decision) candidates.insert(p.type_id);

    const FieldSpec* best = nullptr;
    int best_class = 3;
    for (const auto& f : tree.fields) {
        auto it = session.report.slots.find(f.id);
        if (it == session.report.slots.end() || it->second.status == SlotStatus::done) continue;
        const int cls = tier_class(f, candidates);
        if (cls < best_class) {
            best_class = cls;
            best = &f;
        }
    }
    if (!best) {
        session.status = SessionStatus::complete;
        action.kind = ActionKind::close;
        return action;
    }
    action.kind = ActionKind::ask;
    action.field_id = best->id;
    action.prompt = render_prompt(tree, action);
    return action;
}

Engine::Engine(PhoneTree tree, ConfidencePolicy policy, std::vector<Pattern> patterns,
               SensitiveLexicon lexicon, StubBackendSet backends)
    : tree_(std::move(tree)),
      policy_(std::move(policy)),
      patterns_(std::move(patterns)),
      lexicon_(std::move(lexicon)),
      backends_(std::move(backends)) {
    auto errors = validate_phone_tree(tree_);
    if (!errors.empty()) throw std::invalid_argument("invalid phone tree: " + errors.front());
    layers_ = build_cascade(tree_, backends_);
}

Session Engine::open_session() const { return new_session(tree_, policy_); }

TurnOutcome Engine::step(Session& session, const std::string& caller_text) const {
    if (session.status != SessionStatus::active)
        throw std::logic_error("step() on a terminated session");

    TurnOutcome outcome;
    session.context.append(Speaker::caller, caller_text);
    const Utterance& latest = *session.context.latest_caller();

    const TriggerResult trigger = is_trigger(latest, patterns_, lexicon_, session.handover_state,
                                             policy_.human_request_repeats);
    if (trigger.triggered) {
        session.status = SessionStatus::handed_over;
        session.termination_reason = trigger.reason;
        outcome.action.kind = ActionKind::handover;
        outcome.action.reason = trigger.reason;
        return outcome;
    }

    std::vector<const FieldSpec*> pending;
    for (const auto& id : session.report.pending_field_ids(tree_))
        pending.push_back(tree_.find_field(id));

    bool backend_failed = false;
    try {
        outcome.items = itemize_turn(pending, latest, backends_, policy_);
    } catch (const std::exception&) {
        // one retry, then flag the exception for handover control
        try {
            outcome.items = itemize_turn(pending, latest, backends_, policy_);
        } catch (const std::exception&) {
            backend_failed = true;
        }
    }
    try {
        outcome.predictions = predict_types(session.context, layers_, policy_);
    } catch (const std::exception&) {
        try {
            outcome.predictions = predict_types(session.context, layers_, policy_);
        } catch (const std::exception&) {
            backend_failed = true;
        }
    }
    if (backend_failed) {
        session.handover_state.exception_flag = true;
        session.status = SessionStatus::handed_over;
        session.termination_reason = HandoverReason::exception;
        outcome.action.kind = ActionKind::handover;
        outcome.action.reason = HandoverReason::exception;
        return outcome;
    }

    session.last_predictions = outcome.predictions;
    outcome.delta = update_report(session.report, outcome.items, outcome.predictions, tree_,
                                  policy_, session.context.caller_turns(),
                                  session.last_asked_field);

    outcome.action = next_action(session, tree_, policy_);
    if (outcome.action.kind == ActionKind::ask || outcome.action.kind == ActionKind::clarify) {
        session.last_asked_field = outcome.action.field_id;
        session.context.append(Speaker::system, outcome.action.prompt);
    } else {
        session.last_asked_field.reset();
    }

    session.question_list = session.report.pending_field_ids(tree_);
    return outcome;
}

std::string render_prompt(const PhoneTree& tree, const SystemAction& action) {
    const FieldSpec* spec = tree.find_field(action.field_id);
    const std::string question = spec ? spec->prompt : "Could you tell me more?";
    if (action.kind == ActionKind::clarify)
        return "Sorry, let me ask that again. " + question;
    return question;
}

} // namespace dispatch
