#ifndef DISPATCH_EMULATION_HPP
#define DISPATCH_EMULATION_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "dispatch/orchestrator.hpp"

namespace dispatch {

struct ScenarioSegment {
    std::string text;
    std::vector<std::string> answers; // field ids this segment covers
};

struct Scenario {
    std::string id;
    std::set<std::string> label_types;
    std::vector<ScenarioSegment> segments;
    std::optional<int> shift_turn; // 1-based segment index where the incident shifts
};

Scenario load_scenario(const std::string& path);
std::vector<Scenario> load_scenario_dir(const std::string& dir);
std::vector<std::string> validate_scenario(const Scenario& scenario, const PhoneTree& tree);

// Concatenates `size` seed-sampled segments, preserving their original order.
// Throws on size < 1 or size > segment count.
std::string compose_utterance(const Scenario& scenario, int size, std::uint64_t seed);

struct EmulationReport {
    std::string scenario_id;
    int utterance_size = 0;
    std::uint64_t seed = 0;
    int baseline_questions = 0; // ask-every-field-once policy
    int asked_turns = 0;        // questions actually asked (incl. clarifications)
    int saved_turns = 0;
    bool type_correct = false;
    bool terminated = false;
    SessionStatus final_status = SessionStatus::active;
    CaseReport final_report;
    std::vector<nlohmann::json> transcript;
};

// Opens a session with the composed utterance, then answers each question from
// the segment tagged for that field, falling back to a per-field answer bank.
// Saved turns measure the questions skipped relative to asking every slot once.
EmulationReport run_session(const Scenario& scenario, int size, const Engine& engine,
                            std::uint64_t seed);

// Default cooperative answers for fields no segment covers.
const std::map<std::string, std::string>& default_answer_bank();

struct ConfidencePoint {
    std::string scenario_id;
    int turn = 0;
    std::string type_id;
    double confidence = 0.0;
    double mean_probability = 0.0;
    bool decision = false;
    bool confirmed = false;
};

struct ShiftCurves {
    std::vector<ConfidencePoint> points;
    std::map<std::string, EmulationReport> reports; // by scenario id
};

// Feeds a shift scenario one segment per turn, recording the per-turn
// confidence of every labelled type; used for the plot-ready CSV.
ShiftCurves run_shift_scenarios(const std::vector<Scenario>& scenarios, const Engine& engine);

std::string confidence_curve_csv(const ShiftCurves& curves);

} // namespace dispatch

#endif
