#include "dispatch/emulation.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "dispatch/config_io.hpp"
#include "dispatch/seeds.hpp"
#include "dispatch/text.hpp"

namespace dispatch {

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario: " + path);
    nlohmann::json j;
    in >> j;
    Scenario s;
    s.id = j.value("id", std::filesystem::path(path).stem().string());
    for (const auto& t : j.at("label_types")) s.label_types.insert(t.get<std::string>());
    for (const auto& seg : j.at("segments")) {
        ScenarioSegment segment;
        segment.text = seg.at("text").get<std::string>();
        if (seg.contains("answers"))
            for (const auto& a : seg.at("answers")) segment.answers.push_back(a.get<std::string>());
        s.segments.push_back(std::move(segment));
    }
    if (j.contains("shift_turn")) s.shift_turn = j.at("shift_turn").get<int>();
    return s;
}

std::vector<Scenario> load_scenario_dir(const std::string& dir) {
    std::vector<std::string> paths;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.path().extension() == ".json") paths.push_back(entry.path().string());
    std::sort(paths.begin(), paths.end());
    std::vector<Scenario> out;
    for (const auto& p : paths) out.push_back(load_scenario(p));
    return out;
}

std::vector<std::string> validate_scenario(const Scenario& scenario, const PhoneTree& tree) {
    std::vector<std::string> errors;
    if (scenario.segments.empty()) errors.push_back("scenario has no segments");
    for (const auto& t : scenario.label_types)
        if (!tree.find_type(t)) errors.push_back("unknown label type '" + t + "'");
    for (const auto& seg : scenario.segments)
        for (const auto& f : seg.answers)
            if (!tree.find_field(f)) errors.push_back("segment tags unknown field '" + f + "'");
    if (scenario.shift_turn &&
        (*scenario.shift_turn < 1 || *scenario.shift_turn > static_cast<int>(scenario.segments.size())))
        errors.push_back("shift_turn out of range");
    return errors;
}

namespace {

std::vector<std::size_t> sample_segments(const Scenario& scenario, int size, std::uint64_t seed) {
    const int n = static_cast<int>(scenario.segments.size());
    if (size < 1) throw std::invalid_argument("utterance size must be positive");
    if (size > n) throw std::invalid_argument("utterance size exceeds segment count");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(split_seed(seed, fnv1a64(scenario.id), static_cast<std::uint64_t>(size)));
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(size);
    std::sort(idx.begin(), idx.end()); // original order
    return idx;
}

} // namespace

std::string compose_utterance(const Scenario& scenario, int size, std::uint64_t seed) {
    std::string out;
    for (std::size_t i : sample_segments(scenario, size, seed)) {
        if (!out.empty()) out += ' ';
        out += scenario.segments[i].text;
    }
    return out;
}

const std::map<std::string, std::string>& default_answer_bank() {
    static const std::map<std::string, std::string> bank = {
        {"incident-location", "The address is 400 Main Street."},
        {"caller-name", "My name is Jordan Avery."},
        {"caller-phone", "My number is 615-555-0147."},
        {"vehicle-desc", "It is a silver Camaro."},
        {"suspect-desc", "The suspect is a tall man in a green jacket."},
        {"property-desc", "It is my brown leather briefcase."},
        {"incident-time", "It happened around 3 pm today."},
        {"ownership-status", "The property belongs to me, it is mine."},
        {"minor-crash-block-traffic", "No, it is off to the side."},
        {"minor-crash-injuries", "No, nobody needs a medic."},
        {"lost-stolen-when", "It was taken this morning."},
        {"aggressive-driver-behavior", "The driver was tailgating and swerving between cars."},
        {"check-welfare-relation", "She is my elderly neighbor."},
        {"check-welfare-inperson-meet", "No, a phone call afterwards is fine."},
        {"damaged-property-when", "It happened last night."},
        {"noise-violation-source", "The noise is loud music from the house next door."},
        {"roadway-hazard-kind", "There is a large pothole in the right lane."},
        {"abandoned-vehicle-duration", "It has not moved in weeks."},
        {"drug-pros-activity", "They were smoking crackpipes in the parking lot."},
        {"illegal-parking-blocking", "Yes, it is blocking the crosswalk."},
        {"found-property-item", "I found a black backpack at the bus stop."},
    };
    return bank;
}

namespace {

std::string bank_answer(const std::string& field_id) {
    auto it = default_answer_bank().find(field_id);
    if (it != default_answer_bank().end()) return it->second;
    return "I am sorry, I do not have that information.";
}

std::string scripted_answer(const Scenario& scenario, const std::string& field_id,
                            std::vector<bool>& spoken) {
    for (std::size_t i = 0; i < scenario.segments.size(); ++i) {
        if (spoken[i]) continue;
        const auto& seg = scenario.segments[i];
        if (std::find(seg.answers.begin(), seg.answers.end(), field_id) != seg.answers.end()) {
            spoken[i] = true;
            return seg.text;
        }
    }
    return bank_answer(field_id);
}

void record_turn(EmulationReport& report, const Session& session, const std::string& caller_text,
                 const TurnOutcome& outcome) {
    const int turn = static_cast<int>(session.context.utterances.size());
    std::string action = action_kind_name(outcome.action.kind);
    if (outcome.action.kind == ActionKind::ask || outcome.action.kind == ActionKind::clarify)
        action += ":" + outcome.action.field_id;
    if (outcome.action.kind == ActionKind::handover)
        action += ":" + handover_reason_name(outcome.action.reason);
    report.transcript.push_back(
        transcript_record(turn, Speaker::caller, caller_text, action, session.report));
}

} // namespace

EmulationReport run_session(const Scenario& scenario, int size, const Engine& engine,
                            std::uint64_t seed) {
    EmulationReport report;
    report.scenario_id = scenario.id;
    report.utterance_size = size;
    report.seed = seed;

    const auto sampled = sample_segments(scenario, size, seed);
    std::vector<bool> spoken(scenario.segments.size(), false);
    for (std::size_t i : sampled) spoken[i] = true;

    Session session = engine.open_session();
    const int max_turns =
        static_cast<int>(engine.tree().fields.size()) * (engine.policy().clarification_cap + 1) + 2;

    std::string text = compose_utterance(scenario, size, seed);
    for (int turn = 0; turn < max_turns; ++turn) {
        const TurnOutcome outcome = engine.step(session, text);
        if (outcome.action.kind == ActionKind::ask || outcome.action.kind == ActionKind::clarify)
            ++report.asked_turns;
        record_turn(report, session, text, outcome);
        if (session.status != SessionStatus::active) {
            report.terminated = true;
            break;
        }
        text = scripted_answer(scenario, outcome.action.field_id, spoken);
    }

    report.final_status = session.status;
    report.final_report = session.report;
    report.baseline_questions = static_cast<int>(session.report.slots.size());
    report.saved_turns = report.baseline_questions - report.asked_turns;
    report.type_correct = session.report.confirmed_types == scenario.label_types;
    return report;
}

ShiftCurves run_shift_scenarios(const std::vector<Scenario>& scenarios, const Engine& engine) {
    ShiftCurves curves;
    for (const auto& scenario : scenarios) {
        EmulationReport report;
        report.scenario_id = scenario.id;
        report.utterance_size = 1;

        std::vector<bool> spoken(scenario.segments.size(), false);
        Session session = engine.open_session();
        const int max_turns =
            static_cast<int>(engine.tree().fields.size()) * (engine.policy().clarification_cap + 1) +
            static_cast<int>(scenario.segments.size()) + 2;

        std::size_t next_segment = 0;
        int caller_turn = 0;
        for (int turn = 0; turn < max_turns; ++turn) {
            std::string text;
            if (next_segment < scenario.segments.size()) {
                // segments are delivered one per turn, in order; if the pending
                // segment does not answer the open question, the caller answers
                // it first and volunteers the segment on top
                const auto& seg = scenario.segments[next_segment];
                spoken[next_segment] = true;
                ++next_segment;
                text = seg.text;
                if (session.last_asked_field &&
                    std::find(seg.answers.begin(), seg.answers.end(), *session.last_asked_field) ==
                        seg.answers.end()) {
                    text = bank_answer(*session.last_asked_field) + " " + text;
                }
            } else if (session.last_asked_field) {
                text = scripted_answer(scenario, *session.last_asked_field, spoken);
            } else {
                text = "That is everything I know.";
            }
            const TurnOutcome outcome = engine.step(session, text);
            ++caller_turn;
            if (outcome.action.kind == ActionKind::ask ||
                outcome.action.kind == ActionKind::clarify)
                ++report.asked_turns;
            record_turn(report, session, text, outcome);
            for (const auto& p : outcome.predictions) {
                if (!scenario.label_types.count(p.type_id)) continue;
                ConfidencePoint point;
                point.scenario_id = scenario.id;
                point.turn = caller_turn;
                point.type_id = p.type_id;
                point.confidence = p.confidence;
                point.mean_probability = p.mean_probability;
                point.decision = p.decision;
                point.confirmed = session.report.confirmed_types.count(p.type_id) > 0;
                curves.points.push_back(std::move(point));
            }
            if (session.status != SessionStatus::active) {
                report.terminated = true;
                break;
            }
        }
        report.final_status = session.status;
        report.final_report = session.report;
        report.baseline_questions = static_cast<int>(session.report.slots.size());
        report.saved_turns = report.baseline_questions - report.asked_turns;
        report.type_correct = session.report.confirmed_types == scenario.label_types;
        curves.reports.emplace(scenario.id, std::move(report));
    }
    return curves;
}

std::string confidence_curve_csv(const ShiftCurves& curves) {
    std::ostringstream out;
    out << "scenario,turn,type,conf,mean_prob,decision,confirmed\n";
    for (const auto& p : curves.points) {
        out << p.scenario_id << ',' << p.turn << ',' << p.type_id << ',' << p.confidence << ','
            << p.mean_probability << ',' << (p.decision ? 1 : 0) << ',' << (p.confirmed ? 1 : 0)
            << '\n';
    }
    return out.str();
}

} // namespace dispatch
