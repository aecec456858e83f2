#ifndef DISPATCH_CONFIG_IO_HPP
#define DISPATCH_CONFIG_IO_HPP

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dispatch/backends.hpp"
#include "dispatch/domain.hpp"
#include "dispatch/handover.hpp"
#include "dispatch/orchestrator.hpp"

namespace dispatch {

// Phone-tree config document: {incident_types, fields, opening_questions}.
PhoneTree load_phone_tree(const std::string& path);
PhoneTree phone_tree_from_json(const nlohmann::json& j);

// Handover config document: {patterns, lexicon}. Lexicon entries are stemmed
// on load so runtime matching is a set lookup.
std::pair<std::vector<Pattern>, SensitiveLexicon> load_handover_config(const std::string& path);
std::pair<std::vector<Pattern>, SensitiveLexicon> handover_config_from_json(const nlohmann::json& j);

// Stub backend config document: {cues, counter_cues?, epsilon, extraction_rules,
// jitter, binary_cues?}.
StubConfig load_stub_config(const std::string& path);
StubConfig stub_config_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const CaseReport& report);
CaseReport report_from_json(const nlohmann::json& j);

std::string slot_status_name(SlotStatus s);
std::string action_kind_name(ActionKind k);

// One transcript line: {turn, speaker, text, action, report_snapshot_hash}.
nlohmann::json transcript_record(int turn, Speaker speaker, const std::string& text,
                                 const std::string& action, const CaseReport& report);

std::uint64_t report_hash(const CaseReport& report);

} // namespace dispatch

#endif
