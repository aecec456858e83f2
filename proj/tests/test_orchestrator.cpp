#include <doctest.h>

#include <random>

#include "dispatch/config_io.hpp"
#include "dispatch/orchestrator.hpp"
#include "oracles.hpp"

using namespace dispatch;

namespace {

Engine make_engine(double epsilon = 0.05, std::uint64_t seed = 0) {
    const std::string root(DISPATCH_SOURCE_DIR);
    auto tree = load_phone_tree(root + "/config/phone_tree.json");
    auto [patterns, lexicon] = load_handover_config(root + "/config/handover.json");
    auto stubs = load_stub_config(root + "/config/stubs.json");
    stubs.epsilon = epsilon;
    return Engine(std::move(tree), ConfidencePolicy{}, std::move(patterns), std::move(lexicon),
                  make_stub_backends(stubs, seed));
}

const std::string kOpening =
    "Oh, I'm not sure if this is an emergency. I am Morgan Avery, 615-555-0142. The address is "
    "2525 West End Ave. It's the King Buffet. I saw a customer out in the parking lot smoking "
    "crackpipes in front of all the customers.";

} // namespace

TEST_CASE("a rich opening fills the basics and skips their questions") {
    const Engine engine = make_engine();
    Session session = engine.open_session();
    const auto outcome = engine.step(session, kOpening);

    int done = 0;
    for (const char* id : {"incident-location", "caller-name", "caller-phone"})
        if (session.report.slots.at(id).status == SlotStatus::done) ++done;
    CHECK(done >= 3);
    REQUIRE(outcome.action.kind == ActionKind::ask);
    CHECK(outcome.action.field_id != "incident-location");
    CHECK(outcome.action.field_id != "caller-name");
    CHECK(outcome.action.field_id != "caller-phone");
    CHECK(session.report.confirmed_types.count("drug-pros") == 1);
}

TEST_CASE("urgency mid-call hands the session over and freezes it") {
    const Engine engine = make_engine();
    Session session = engine.open_session();
    engine.step(session, "I want to report loud music at 900 Fatherland Street.");
    const auto outcome = engine.step(session, "wait, guns are fired next door");
    CHECK(outcome.action.kind == ActionKind::handover);
    CHECK(outcome.action.reason == HandoverReason::urgency);
    CHECK(session.status == SessionStatus::handed_over);
    CHECK(outcome.predictions.empty()); // no model calls after the trigger
    CHECK_THROWS_AS(engine.step(session, "hello?"), std::logic_error);
}

TEST_CASE("fresh session asks the first opening question") {
    const Engine engine = make_engine();
    Session session = engine.open_session();
    const auto outcome = engine.step(session, "um, hello, I would like to make a report");
    REQUIRE(outcome.action.kind == ActionKind::ask);
    CHECK(outcome.action.field_id == "incident-location");
}

TEST_CASE("update_report applies the lambda thresholds strictly") {
    const std::string root(DISPATCH_SOURCE_DIR);
    const auto tree = load_phone_tree(root + "/config/phone_tree.json");
    ConfidencePolicy policy; // lambda1 = 0.70, lambda2 = 0.85
    CaseReport report;
    FieldSlot slot;
    slot.field_id = "incident-location";
    report.slots.emplace("incident-location", slot);

    ItemizationResult item;
    item.field_id = "incident-location";
    item.kind = FieldKind::narrative;
    item.text_value = "2525 West End Ave";
    item.confidence = 0.69;
    update_report(report, {item}, {}, tree, policy, 1, std::nullopt);
    CHECK(report.slots.at("incident-location").status == SlotStatus::tentative);

    item.confidence = 0.70; // equal is still not strictly greater
    update_report(report, {item}, {}, tree, policy, 2, std::nullopt);
    CHECK(report.slots.at("incident-location").status == SlotStatus::tentative);

    item.confidence = 0.71;
    update_report(report, {item}, {}, tree, policy, 3, std::nullopt);
    CHECK(report.slots.at("incident-location").status == SlotStatus::done);

    TypePrediction pred;
    pred.type_id = "minor-crash";
    pred.decision = true;
    pred.confidence = 0.85; // exactly lambda2: excluded
    pred.mean_probability = 0.9;
    update_report(report, {}, {pred}, tree, policy, 4, std::nullopt);
    CHECK(report.confirmed_types.empty());

    pred.confidence = 0.86;
    update_report(report, {}, {pred}, tree, policy, 5, std::nullopt);
    CHECK(report.confirmed_types.count("minor-crash") == 1);
    CHECK(report.slots.count("minor-crash-block-traffic") == 1); // slots materialized
}

TEST_CASE("a confidence drop demotes a confirmed type and prunes its slots") {
    const std::string root(DISPATCH_SOURCE_DIR);
    const auto tree = load_phone_tree(root + "/config/phone_tree.json");
    ConfidencePolicy policy;
    CaseReport report;

    auto confirm = [&](const std::string& id) {
        TypePrediction p{id, true, 1.0, 0.9};
        update_report(report, {}, {p}, tree, policy, 1, std::nullopt);
    };
    confirm("lost-stolen");
    confirm("damaged-property");
    CHECK(report.confirmed_types.size() == 2);
    REQUIRE(report.slots.count("damaged-property-when") == 1);

    // damaged-property answered nothing; lost-stolen keeps its shared slots
    TypePrediction drop{"damaged-property", false, 1.0, 0.2};
    TypePrediction keep{"lost-stolen", true, 1.0, 0.9};
    update_report(report, {}, {keep, drop}, tree, policy, 2, std::nullopt);
    CHECK(report.confirmed_types == std::set<std::string>{"lost-stolen"});
    CHECK(report.slots.count("damaged-property-when") == 0); // unanswered: dropped
    CHECK(report.slots.count("property-desc") == 1);         // still relevant to lost-stolen
    CHECK(report.ever_confirmed.count("damaged-property") == 1);
}

TEST_CASE("answered slots of a demoted type are kept for audit") {
    const std::string root(DISPATCH_SOURCE_DIR);
    const auto tree = load_phone_tree(root + "/config/phone_tree.json");
    ConfidencePolicy policy;
    CaseReport report;
    TypePrediction p{"damaged-property", true, 1.0, 0.9};
    update_report(report, {}, {p}, tree, policy, 1, std::nullopt);

    ItemizationResult item;
    item.field_id = "damaged-property-when";
    item.kind = FieldKind::narrative;
    item.text_value = "last night";
    item.confidence = 0.95;
    update_report(report, {item}, {}, tree, policy, 2, std::nullopt);
    REQUIRE(report.slots.at("damaged-property-when").status == SlotStatus::done);

    TypePrediction drop{"damaged-property", false, 1.0, 0.2};
    update_report(report, {}, {drop}, tree, policy, 3, std::nullopt);
    CHECK(report.confirmed_types.empty());
    CHECK(report.slots.count("damaged-property-when") == 1);
}

TEST_CASE("shared fields precede type-specific ones while types are open") {
    const std::string root(DISPATCH_SOURCE_DIR);
    const auto tree = load_phone_tree(root + "/config/phone_tree.json");
    ConfidencePolicy policy;
    Session session = new_session(tree, policy);
    // simulate: basics done, candidates damaged-property + lost-stolen
    for (auto& [id, slot] : session.report.slots) {
        slot.status = SlotStatus::done;
        slot.text_value = "x";
        slot.confidence = 1.0;
    }
    FieldSlot prop;
    prop.field_id = "property-desc";
    session.report.slots.emplace("property-desc", prop);
    FieldSlot when;
    when.field_id = "damaged-property-when";
    session.report.slots.emplace("damaged-property-when", when);
    session.last_predictions = {{"damaged-property", true, 0.6, 0.6},
                                {"lost-stolen", true, 0.6, 0.6}};
    const auto action = next_action(session, tree, policy);
    REQUIRE(action.kind == ActionKind::ask);
    CHECK(action.field_id == "property-desc");
}

TEST_CASE("clarification cap: three retries then an exception handover") {
    const Engine engine = make_engine();
    Session session = engine.open_session();
    auto outcome = engine.step(session, "I would like to report something please");
    REQUIRE(outcome.action.kind == ActionKind::ask);
    REQUIRE(outcome.action.field_id == "incident-location");

    //四 unparseable answers: clarify, clarify, clarify, then hand over
    for (int i = 1; i <= 3; ++i) {
        outcome = engine.step(session, "well you see it is complicated");
        REQUIRE(outcome.action.kind == ActionKind::clarify);
        CHECK(outcome.action.field_id == "incident-location");
        CHECK(session.report.slots.at("incident-location").clarification_count == i);
        CHECK(session.status == SessionStatus::active);
    }
    outcome = engine.step(session, "well you see it is complicated");
    CHECK(outcome.action.kind == ActionKind::handover);
    CHECK(outcome.action.reason == HandoverReason::exception);
    CHECK(session.status == SessionStatus::handed_over);
    CHECK(session.handover_state.exception_flag);
    CHECK(session.report.slots.at("incident-location").clarification_count == 3);
}

TEST_CASE("a completed report closes the call") {
    const Engine engine = make_engine();
    Session session = engine.open_session();
    engine.step(session, "Someone stole my wallet at 2525 West End Ave.");
    const std::vector<std::string> answers = {
        "My name is Morgan Avery.",
        "You can reach me at 615-555-0142.",
        "It was taken this morning.",
        "I saw a young man in a red hoodie nearby.",
        "It is my brown leather wallet, it belongs to me.",
        "It happened around 9 am.",
    };
    std::size_t i = 0;
    TurnOutcome outcome;
    while (session.status == SessionStatus::active && i < 24) {
        outcome = engine.step(session, answers[std::min(i, answers.size() - 1)]);
        ++i;
    }
    CHECK(session.status == SessionStatus::complete);
    CHECK(outcome.action.kind == ActionKind::close);
    CHECK(session.report.confirmed_types.count("lost-stolen") == 1);
    CHECK(session.report.all_done());
}

TEST_CASE("done fields never reappear in the question list") {
    const Engine engine = make_engine();
    Session session = engine.open_session();
    std::set<std::string> done_seen;
    const std::vector<std::string> script = {
        "Someone stole my wallet at 2525 West End Ave.",
        "My name is Morgan Avery.",
        "You can reach me at 615-555-0142.",
        "It was taken this morning.",
        "I saw a young man in a red hoodie nearby.",
        "It is my brown leather wallet, it belongs to me.",
        "That is all I know.",
    };
    for (const auto& line : script) {
        if (session.status != SessionStatus::active) break;
        engine.step(session, line);
        for (const auto& [id, slot] : session.report.slots)
            if (slot.status == SlotStatus::done) done_seen.insert(id);
        for (const auto& q : session.question_list) CHECK(done_seen.count(q) == 0);
    }
}

TEST_CASE("prediction history grows with every processed caller turn") {
    const Engine engine = make_engine();
    Session session = engine.open_session();
    const std::vector<std::string> script = {
        "Someone stole my wallet at 2525 West End Ave.",
        "My name is Morgan Avery.",
        "You can reach me at 615-555-0142.",
    };
    for (const auto& line : script) engine.step(session, line);
    for (const auto& t : engine.tree().incident_types) {
        const auto it = session.report.type_confidence_history.find(t.id);
        REQUIRE(it != session.report.type_confidence_history.end());
        CHECK(it->second.size() == 3);
    }
}

TEST_CASE("backend failures raise the exception flag and hand over") {
    const std::string root(DISPATCH_SOURCE_DIR);
    auto tree = load_phone_tree(root + "/config/phone_tree.json");
    auto [patterns, lexicon] = load_handover_config(root + "/config/handover.json");
    auto stubs = load_stub_config(root + "/config/stubs.json");
    auto backends = make_stub_backends(stubs, 0);

    class ThrowingClassifier : public StochasticBinaryClassifier {
    public:
        double classify(std::string_view, std::uint64_t) const override {
            throw std::runtime_error("model service unavailable");
        }
    };
    backends.type_classifiers["minor-crash"] = std::make_shared<ThrowingClassifier>();

    const Engine engine(std::move(tree), ConfidencePolicy{}, std::move(patterns),
                        std::move(lexicon), std::move(backends));
    Session session = engine.open_session();
    const auto outcome = engine.step(session, "there is loud music on my street");
    CHECK(outcome.action.kind == ActionKind::handover);
    CHECK(outcome.action.reason == HandoverReason::exception);
    CHECK(session.handover_state.exception_flag);
    CHECK(session.status == SessionStatus::handed_over);
}

TEST_CASE("slot transitions only ever move forward") {
    const Engine engine = make_engine();
    Session session = engine.open_session();
    std::map<std::string, SlotStatus> last;
    const std::vector<std::string> script = {
        "I want to report loud music at 900 Fatherland Street.",
        "hmm let me think",
        "My name is Dana Cole.",
        "My phone number is 615-555-0116.",
        "It started around 11 pm.",
        "The music from the house next door has been blasting for hours.",
    };
    for (const auto& line : script) {
        if (session.status != SessionStatus::active) break;
        engine.step(session, line);
        for (const auto& [id, slot] : session.report.slots) {
            auto it = last.find(id);
            // done is terminal; everything else may move forward or reset
            if (it != last.end() && it->second == SlotStatus::done)
                CHECK(slot.status == SlotStatus::done);
            last[id] = slot.status;
        }
    }
}

TEST_CASE("fuzzed sessions terminate inside the turn bound") {
    const Engine engine = make_engine();
    const int bound =
        static_cast<int>(engine.tree().fields.size()) * (engine.policy().clarification_cap + 1) + 1;
    std::mt19937_64 rng(61);
    const std::vector<std::string> vocab = {
        "my",    "wallet", "is",   "gone",   "busted", "car",   "loud", "music", "pothole",
        "2525",  "West",   "End",  "Ave",    "name",   "Morgan", "615-555-0142", "around",
        "3",     "pm",     "man",  "in",     "red",    "hoodie", "please", "help", "report",
        "I",     "saw",    "a",    "the",    "something", "strange"};
    for (int s = 0; s < 200; ++s) {
        Session session = engine.open_session();
        int turns = 0;
        while (session.status == SessionStatus::active && turns <= bound) {
            engine.step(session, oracles::random_text(rng, vocab, 1, 12));
            ++turns;
        }
        CHECK(turns <= bound);
        CHECK(session.status != SessionStatus::active);
    }
}
