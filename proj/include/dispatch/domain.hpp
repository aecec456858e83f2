#ifndef DISPATCH_DOMAIN_HPP
#define DISPATCH_DOMAIN_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace dispatch {

enum class Speaker { caller, system };

struct Utterance {
    Speaker speaker = Speaker::caller;
    std::string text;
    int turn_index = 0;
};

// Ordered transcript; prediction consumes all caller utterances, itemization
// only the latest one.
struct DialogueContext {
    std::vector<Utterance> utterances;

    void append(Speaker speaker, std::string text);
    std::string full_context() const;            // caller utterances joined by " "
    const Utterance* latest_caller() const;      // nullptr before the first caller turn
    int caller_turns() const;
};

struct IncidentType {
    std::string id;
    std::string display_name;
    int cascade_rank = 0; // 1 = most frequent
};

enum class FieldKind { narrative, binary };
enum class FieldTier { basic, shared, type_specific };

struct FieldSpec {
    std::string id;
    FieldKind kind = FieldKind::narrative;
    FieldTier tier = FieldTier::basic;
    std::string prompt;
    std::set<std::string> applies_to; // empty = universal

    bool applies(const std::string& type_id) const {
        return applies_to.empty() || applies_to.count(type_id) > 0;
    }
};

enum class SlotStatus { empty, tentative, done };

struct FieldSlot {
    std::string field_id;
    std::optional<std::string> text_value;  // narrative
    std::optional<bool> bool_value;         // binary
    std::string quote;                      // utterance that supported a binary answer
    std::optional<double> confidence;
    SlotStatus status = SlotStatus::empty;
    int clarification_count = 0;

    bool answered() const { return status != SlotStatus::empty; }
};

struct ConfidencePolicy {
    double lambda1 = 0.70;       // itemization threshold
    double lambda2 = 0.85;       // prediction threshold
    int trials = 10;             // T
    int clarification_cap = 3;
    int human_request_repeats = 2;
};

struct PhoneTree {
    std::vector<IncidentType> incident_types;
    std::vector<FieldSpec> fields;
    std::vector<std::string> opening_questions;

    const IncidentType* find_type(const std::string& id) const;
    const FieldSpec* find_field(const std::string& id) const;
    std::vector<const FieldSpec*> basic_fields() const;
};

struct CaseReport {
    std::set<std::string> confirmed_types;
    std::set<std::string> ever_confirmed;
    // per type: (caller turn, confidence), appended on every predicted turn
    std::map<std::string, std::vector<std::pair<int, double>>> type_confidence_history;
    std::map<std::string, FieldSlot> slots;

    bool all_done() const;
    std::vector<std::string> pending_field_ids(const PhoneTree& tree) const; // declaration order
};

bool operator==(const Utterance& a, const Utterance& b);
bool operator==(const FieldSlot& a, const FieldSlot& b);
bool operator==(const CaseReport& a, const CaseReport& b);

// Returns the list of invariant violations; empty means the tree is valid.
std::vector<std::string> validate_phone_tree(const PhoneTree& tree);

} // namespace dispatch

#endif
