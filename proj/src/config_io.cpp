#include "dispatch/config_io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "dispatch/text.hpp"

namespace dispatch {

namespace {

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

FieldKind parse_kind(const std::string& s) {
    if (s == "narrative") return FieldKind::narrative;
    if (s == "binary") return FieldKind::binary;
    throw std::runtime_error("unknown field kind '" + s + "'");
}

FieldTier parse_tier(const std::string& s) {
    if (s == "basic") return FieldTier::basic;
    if (s == "shared") return FieldTier::shared;
    if (s == "type_specific") return FieldTier::type_specific;
    throw std::runtime_error("unknown field tier '" + s + "'");
}

CoarseTag parse_tag(const std::string& s) {
    const std::string u = to_lower(s);
    if (u == "np") return CoarseTag::NP;
    if (u == "vp") return CoarseTag::VP;
    if (u == "prp") return CoarseTag::PRP;
    if (u == "adjp") return CoarseTag::ADJP;
    if (u == "pp") return CoarseTag::PP;
    if (u == "be") return CoarseTag::BE;
    throw std::runtime_error("unknown pattern tag '" + s + "'");
}

} // namespace

PhoneTree phone_tree_from_json(const nlohmann::json& j) {
    PhoneTree tree;
    for (const auto& t : j.at("incident_types")) {
        IncidentType type;
        type.id = t.at("id").get<std::string>();
        type.display_name = t.value("display_name", type.id);
        type.cascade_rank = t.at("cascade_rank").get<int>();
        tree.incident_types.push_back(std::move(type));
    }
    for (const auto& f : j.at("fields")) {
        FieldSpec spec;
        spec.id = f.at("id").get<std::string>();
        spec.kind = parse_kind(f.at("kind").get<std::string>());
        spec.tier = parse_tier(f.at("tier").get<std::string>());
        spec.prompt = f.at("prompt").get<std::string>();
        if (f.contains("applies_to"))
            for (const auto& a : f.at("applies_to")) spec.applies_to.insert(a.get<std::string>());
        tree.fields.push_back(std::move(spec));
    }
    for (const auto& q : j.at("opening_questions"))
        tree.opening_questions.push_back(q.get<std::string>());
    return tree;
}

PhoneTree load_phone_tree(const std::string& path) {
    return phone_tree_from_json(load_json_file(path));
}

std::pair<std::vector<Pattern>, SensitiveLexicon> handover_config_from_json(
    const nlohmann::json& j) {
    std::vector<Pattern> patterns;
    for (const auto& p : j.at("patterns")) {
        Pattern pattern;
        pattern.id = p.at("id").get<std::string>();
        const std::string cat = p.at("category").get<std::string>();
        if (cat == "human_request")
            pattern.category = PatternCategory::human_request;
        else if (cat == "urgency")
            pattern.category = PatternCategory::urgency;
        else
            throw std::runtime_error("unknown pattern category '" + cat + "'");
        for (const auto& el : p.at("elements")) {
            PatternElement element;
            element.tag = parse_tag(el.at("tag").get<std::string>());
            element.star = el.value("star", false);
            pattern.elements.push_back(element);
        }
        patterns.push_back(std::move(pattern));
    }
    SensitiveLexicon lexicon;
    const auto& lex = j.at("lexicon");
    for (const auto& w : lex.at("human_request"))
        lexicon.human_request.insert(stem(w.get<std::string>()));
    for (const auto& w : lex.at("urgency")) lexicon.urgency.insert(stem(w.get<std::string>()));
    return {std::move(patterns), std::move(lexicon)};
}

std::pair<std::vector<Pattern>, SensitiveLexicon> load_handover_config(const std::string& path) {
    return handover_config_from_json(load_json_file(path));
}

StubConfig stub_config_from_json(const nlohmann::json& j) {
    StubConfig config;
    for (const auto& [type_id, cues] : j.at("cues").items())
        for (const auto& c : cues) config.cues[type_id].push_back(c.get<std::string>());
    if (j.contains("counter_cues"))
        for (const auto& [type_id, cues] : j.at("counter_cues").items())
            for (const auto& c : cues) config.counter_cues[type_id].push_back(c.get<std::string>());
    config.epsilon = j.value("epsilon", 0.0);
    if (j.contains("extraction_rules")) {
        for (const auto& [field_id, rule] : j.at("extraction_rules").items()) {
            ExtractionRule r;
            r.anchor_regex = rule.at("anchor_regex").get<std::string>();
            r.window_before = rule.value("window_before", 0);
            r.window_after = rule.value("window_after", 0);
            config.extraction_rules[field_id] = std::move(r);
        }
    }
    config.jitter = j.value("jitter", 0);
    if (j.contains("binary_cues")) {
        for (const auto& [field_id, spec] : j.at("binary_cues").items()) {
            if (spec.contains("yes"))
                for (const auto& c : spec.at("yes"))
                    config.binary_yes_cues[field_id].push_back(c.get<std::string>());
            if (spec.contains("no"))
                for (const auto& c : spec.at("no"))
                    config.binary_no_cues[field_id].push_back(c.get<std::string>());
        }
    }
    return config;
}

StubConfig load_stub_config(const std::string& path) {
    return stub_config_from_json(load_json_file(path));
}

std::string slot_status_name(SlotStatus s) {
    switch (s) {
        case SlotStatus::empty: return "empty";
        case SlotStatus::tentative: return "tentative";
        case SlotStatus::done: return "done";
    }
    return "empty";
}

std::string action_kind_name(ActionKind k) {
    switch (k) {
        case ActionKind::ask: return "ask";
        case ActionKind::clarify: return "clarify";
        case ActionKind::handover: return "handover";
        case ActionKind::close: return "close";
    }
    return "close";
}

nlohmann::json report_to_json(const CaseReport& report) {
    nlohmann::json j;
    j["confirmed_types"] = report.confirmed_types;
    j["ever_confirmed"] = report.ever_confirmed;
    nlohmann::json hist = nlohmann::json::object();
    for (const auto& [type_id, series] : report.type_confidence_history) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& [turn, conf] : series) arr.push_back({turn, conf});
        hist[type_id] = std::move(arr);
    }
    j["type_confidence_history"] = std::move(hist);
    nlohmann::json slots = nlohmann::json::object();
    for (const auto& [id, slot] : report.slots) {
        nlohmann::json s;
        s["status"] = slot_status_name(slot.status);
        s["clarification_count"] = slot.clarification_count;
        if (slot.text_value) s["value"] = *slot.text_value;
        if (slot.bool_value) s["value_bool"] = *slot.bool_value;
        if (!slot.quote.empty()) s["quote"] = slot.quote;
        if (slot.confidence) s["confidence"] = *slot.confidence;
        slots[id] = std::move(s);
    }
    j["slots"] = std::move(slots);
    return j;
}

CaseReport report_from_json(const nlohmann::json& j) {
    CaseReport report;
    for (const auto& t : j.at("confirmed_types")) report.confirmed_types.insert(t.get<std::string>());
    if (j.contains("ever_confirmed"))
        for (const auto& t : j.at("ever_confirmed")) report.ever_confirmed.insert(t.get<std::string>());
    for (const auto& [type_id, series] : j.at("type_confidence_history").items()) {
        auto& hist = report.type_confidence_history[type_id];
        for (const auto& entry : series) hist.emplace_back(entry.at(0).get<int>(), entry.at(1).get<double>());
    }
    for (const auto& [id, s] : j.at("slots").items()) {
        FieldSlot slot;
        slot.field_id = id;
        const std::string status = s.at("status").get<std::string>();
        slot.status = status == "done"        ? SlotStatus::done
                      : status == "tentative" ? SlotStatus::tentative
                                              : SlotStatus::empty;
        slot.clarification_count = s.value("clarification_count", 0);
        if (s.contains("value")) slot.text_value = s.at("value").get<std::string>();
        if (s.contains("value_bool")) slot.bool_value = s.at("value_bool").get<bool>();
        slot.quote = s.value("quote", "");
        if (s.contains("confidence")) slot.confidence = s.at("confidence").get<double>();
        report.slots.emplace(id, std::move(slot));
    }
    return report;
}

std::uint64_t report_hash(const CaseReport& report) {
    return fnv1a64(report_to_json(report).dump());
}

nlohmann::json transcript_record(int turn, Speaker speaker, const std::string& text,
                                 const std::string& action, const CaseReport& report) {
    nlohmann::json j;
    j["turn"] = turn;
    j["speaker"] = speaker == Speaker::caller ? "caller" : "system";
    j["text"] = text;
    j["action"] = action;
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(report_hash(report)));
    j["report_snapshot_hash"] = std::string(buf);
    return j;
}

} // namespace dispatch
