#include "dispatch/domain.hpp"

#include <algorithm>
#include <stdexcept>

#include "dispatch/text.hpp"

namespace dispatch {

void DialogueContext::append(Speaker speaker, std::string text) {
    if (speaker == Speaker::caller && trim(text).empty()) {
        throw std::invalid_argument("caller utterance must be non-empty after trimming");
    }
    Utterance u;
    u.speaker = speaker;
    u.text = std::move(text);
    u.turn_index = static_cast<int>(utterances.size());
    utterances.push_back(std::move(u));
}

std::string DialogueContext::full_context() const {
    std::string out;
    for (const auto& u : utterances) {
        if (u.speaker != Speaker::caller) continue;
        if (!out.empty()) out += ' ';
        out += u.text;
    }
    return out;
}

const Utterance* DialogueContext::latest_caller() const {
    for (auto it = utterances.rbegin(); it != utterances.rend(); ++it) {
        if (it->speaker == Speaker::caller) return &*it;
    }
    return nullptr;
}

int DialogueContext::caller_turns() const {
    int n = 0;
    for (const auto& u : utterances)
        if (u.speaker == Speaker::caller) ++n;
    return n;
}

const IncidentType* PhoneTree::find_type(const std::string& id) const {
    for (const auto& t : incident_types)
        if (t.id == id) return &t;
    return nullptr;
}

const FieldSpec* PhoneTree::find_field(const std::string& id) const {
    for (const auto& f : fields)
        if (f.id == id) return &f;
    return nullptr;
}

std::vector<const FieldSpec*> PhoneTree::basic_fields() const {
    std::vector<const FieldSpec*> out;
    for (const auto& f : fields)
        if (f.tier == FieldTier::basic) out.push_back(&f);
    return out;
}

bool CaseReport::all_done() const {
    for (const auto& [id, slot] : slots)
        if (slot.status != SlotStatus::done) return false;
    return true;
}

std::vector<std::string> CaseReport::pending_field_ids(const PhoneTree& tree) const {
    std::vector<std::string> out;
    for (const auto& f : tree.fields) {
        auto it = slots.find(f.id);
        if (it != slots.end() && it->second.status != SlotStatus::done) out.push_back(f.id);
    }
    return out;
}

bool operator==(const Utterance& a, const Utterance& b) {
    return a.speaker == b.speaker && a.text == b.text && a.turn_index == b.turn_index;
}

bool operator==(const FieldSlot& a, const FieldSlot& b) {
    return a.field_id == b.field_id && a.text_value == b.text_value &&
           a.bool_value == b.bool_value && a.quote == b.quote && a.confidence == b.confidence &&
           a.status == b.status && a.clarification_count == b.clarification_count;
}

bool operator==(const CaseReport& a, const CaseReport& b) {
    return a.confirmed_types == b.confirmed_types && a.ever_confirmed == b.ever_confirmed &&
           a.type_confidence_history == b.type_confidence_history && a.slots == b.slots;
}

std::vector<std::string> validate_phone_tree(const PhoneTree& tree) {
    std::vector<std::string> errors;
    if (tree.incident_types.empty()) errors.push_back("empty incident type list");

    std::map<std::string, int> id_count;
    std::map<int, std::vector<std::string>> rank_owners;
    for (const auto& t : tree.incident_types) {
        ++id_count[t.id];
        rank_owners[t.cascade_rank].push_back(t.id);
        if (t.cascade_rank < 1)
            errors.push_back("incident type '" + t.id + "' has non-positive cascade_rank");
    }
    for (const auto& [id, n] : id_count)
        if (n > 1) errors.push_back("duplicate incident type id '" + id + "'");
    for (const auto& [rank, owners] : rank_owners) {
        if (owners.size() > 1) {
            std::string msg = "cascade_rank " + std::to_string(rank) + " shared by";
            for (const auto& id : owners) msg += " '" + id + "'";
            errors.push_back(msg);
        }
    }
    // ranks must be exactly 1..N
    if (!tree.incident_types.empty()) {
        for (int r = 1; r <= static_cast<int>(tree.incident_types.size()); ++r) {
            if (!rank_owners.count(r)) {
                errors.push_back("cascade ranks not contiguous: missing rank " + std::to_string(r));
                break;
            }
        }
    }

    std::map<std::string, int> field_count;
    for (const auto& f : tree.fields) {
        ++field_count[f.id];
        for (const auto& tid : f.applies_to) {
            if (!tree.find_type(tid))
                errors.push_back("field '" + f.id + "' applies_to unknown type '" + tid + "'");
        }
        if (f.tier == FieldTier::basic && !f.applies_to.empty())
            errors.push_back("basic field '" + f.id + "' must be universal (empty applies_to)");
        if (f.tier == FieldTier::type_specific && f.applies_to.empty())
            errors.push_back("type_specific field '" + f.id + "' needs non-empty applies_to");
    }
    for (const auto& [id, n] : field_count)
        if (n > 1) errors.push_back("duplicate field id '" + id + "'");

    for (const auto& q : tree.opening_questions) {
        const FieldSpec* f = tree.find_field(q);
        if (!f)
            errors.push_back("opening question references unknown field '" + q + "'");
        else if (f->tier != FieldTier::basic)
            errors.push_back("opening question '" + q + "' must reference a basic field");
    }
    return errors;
}

} // namespace dispatch
