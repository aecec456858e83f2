#include <doctest.h>

#include <algorithm>
#include <random>

#include "dispatch/config_io.hpp"
#include "dispatch/itemize.hpp"

using namespace dispatch;

namespace {

StubConfig shipped_config() {
    return load_stub_config(std::string(DISPATCH_SOURCE_DIR) + "/config/stubs.json");
}

PhoneTree shipped_tree() {
    return load_phone_tree(std::string(DISPATCH_SOURCE_DIR) + "/config/phone_tree.json");
}

Utterance caller(const std::string& text) { return {Speaker::caller, text, 0}; }

// scripted extractor: maps trial seed -> fixed output (empty = absent)
class ScriptedExtractor : public StochasticExtractor {
public:
    explicit ScriptedExtractor(std::vector<std::string> outputs) : outputs_(std::move(outputs)) {}
    std::optional<std::string> extract(const std::string&, std::string_view,
                                       std::uint64_t trial_seed) const override {
        const auto& out = outputs_[(trial_seed - 1) % outputs_.size()];
        if (out.empty()) return std::nullopt;
        return out;
    }

private:
    std::vector<std::string> outputs_;
};

FieldSpec narrative_field(const std::string& id) {
    FieldSpec f;
    f.id = id;
    f.kind = FieldKind::narrative;
    f.tier = FieldTier::basic;
    return f;
}

} // namespace

TEST_CASE("identical trials give confidence 1.0") {
    const ScriptedExtractor backend(std::vector<std::string>{"2525 West End Ave"});
    const auto r = extract_field(narrative_field("incident-location"),
                                 caller("it is at 2525 West End Ave"), backend, {});
    REQUIRE(r.text_value.has_value());
    CHECK(*r.text_value == "2525 West End Ave");
    CHECK(r.confidence == doctest::Approx(1.0));
}

TEST_CASE("near-identical alternating trials stay highly consistent") {
    const ScriptedExtractor backend({"on the 2525 West End Ave", "2525 West End Ave"});
    const auto r = extract_field(narrative_field("incident-location"),
                                 caller("on the 2525 West End Ave please"), backend, {});
    CHECK(r.confidence >= 0.8);
}

TEST_CASE("disjoint trials score low") {
    const ScriptedExtractor backend({"65 South exit 92", "Silver Camaro"});
    ConfidencePolicy policy;
    policy.trials = 2;
    const auto r = extract_field(narrative_field("incident-location"),
                                 caller("65 South exit 92 Silver Camaro"), backend, policy);
    CHECK(r.confidence < 0.3);
}

TEST_CASE("absent trials are excluded rather than zeroed") {
    const ScriptedExtractor all_absent(std::vector<std::string>{""});
    auto r = extract_field(narrative_field("x"), caller("nothing here"), all_absent, {});
    CHECK(!r.text_value.has_value());
    CHECK(r.confidence == doctest::Approx(0.0));

    // one real answer among absences keeps its standing
    std::vector<std::string> outputs(10, "");
    outputs[4] = "615-555-0100";
    const ScriptedExtractor one_present(outputs);
    r = extract_field(narrative_field("x"), caller("615-555-0100"), one_present, {});
    REQUIRE(r.text_value.has_value());
    CHECK(*r.text_value == "615-555-0100");
    CHECK(r.confidence == doctest::Approx(1.0));
}

TEST_CASE("medoid picks the trial closest to the ensemble") {
    // eight identical, two stragglers: the majority answer must win
    std::vector<std::string> outputs(10, "2525 West End Ave");
    outputs[1] = "Silver Camaro";
    outputs[7] = "Silver Camaro";
    const ScriptedExtractor backend(outputs);
    const auto r = extract_field(narrative_field("x"), caller("…"), backend, {});
    REQUIRE(r.text_value.has_value());
    CHECK(*r.text_value == "2525 West End Ave");
}

TEST_CASE("confidence is invariant under trial permutation") {
    const std::vector<std::string> base = {"on the 2525 West End Ave", "2525 West End Ave", "",
                                           "West End Ave", "2525 West End Ave"};
    std::vector<std::string> shuffled = base;
    std::reverse(shuffled.begin(), shuffled.end());
    ConfidencePolicy policy;
    policy.trials = 5;
    const auto a =
        extract_field(narrative_field("x"), caller("…"), ScriptedExtractor(base), policy);
    const auto b =
        extract_field(narrative_field("x"), caller("…"), ScriptedExtractor(shuffled), policy);
    CHECK(a.confidence == doctest::Approx(b.confidence).epsilon(1e-12));
}

TEST_CASE("answer_binary on the block-traffic field") {
    auto config = shipped_config();
    config.epsilon = 0.0;
    const auto backends = make_stub_backends(config, 0);
    const auto tree = shipped_tree();
    const auto* spec = tree.find_field("minor-crash-block-traffic");
    REQUIRE(spec != nullptr);

    auto r = answer_binary(*spec, caller("yes, it's blocking the whole lane"),
                           *backends.binary_classifiers.at(spec->id), {});
    REQUIRE(r.bool_value.has_value());
    CHECK(*r.bool_value == true);
    CHECK(r.confidence == doctest::Approx(1.0));

    r = answer_binary(*spec, caller("the weather is nice"),
                      *backends.binary_classifiers.at(spec->id), {});
    REQUIRE(r.bool_value.has_value()); // binary answers are never absent
    CHECK(*r.bool_value == false);
    CHECK(r.confidence > 0.0);
}

TEST_CASE("itemize_turn catches volunteered details across fields") {
    const auto tree = shipped_tree();
    const auto backends = make_stub_backends(shipped_config(), 0);
    std::vector<const FieldSpec*> pending;
    for (const auto& f : tree.fields)
        if (f.tier == FieldTier::basic) pending.push_back(&f);

    const std::string opening =
        "Oh, I'm not sure if this is an emergency. I am Morgan Avery, 615-555-0142. The address "
        "is 2525 West End Ave. It's the King Buffet. I saw a customer out in the parking lot "
        "smoking crackpipes in front of all the customers.";
    const auto results = itemize_turn(pending, caller(opening), backends, {});
    REQUIRE(results.size() == pending.size());
    int with_values = 0;
    for (const auto& r : results)
        if (r.text_value) ++with_values;
    CHECK(with_values >= 3);
}

TEST_CASE("itemize_turn on an empty utterance and empty pending list") {
    const auto tree = shipped_tree();
    const auto backends = make_stub_backends(shipped_config(), 0);
    std::vector<const FieldSpec*> pending;
    for (const auto& f : tree.fields)
        if (f.tier == FieldTier::basic) pending.push_back(&f);

    const auto results = itemize_turn(pending, caller("hello"), backends, {});
    for (const auto& r : results) {
        if (r.kind == FieldKind::narrative) CHECK(!r.text_value.has_value());
    }
    CHECK(itemize_turn({}, caller("hello"), backends, {}).empty());
}

TEST_CASE("narrative values quote the utterance verbatim under fuzz") {
    const auto tree = shipped_tree();
    const auto backends = make_stub_backends(shipped_config(), 9);
    std::vector<const FieldSpec*> pending;
    for (const auto& f : tree.fields)
        if (f.kind == FieldKind::narrative) pending.push_back(&f);

    std::mt19937_64 rng(53);
    const std::vector<std::string> vocab = {
        "my",   "number", "is", "615-555-0100", "address", "2525", "West", "End",  "Ave",
        "name", "Jordan", "Avery", "silver",    "Camaro",  "man",  "in",   "red",  "hoodie",
        "around", "3",    "pm", "today",        "loud",    "music", "pothole", "mailbox"};
    for (int i = 0; i < 400; ++i) {
        std::string text;
        {
            std::uniform_int_distribution<int> len(1, 16);
            std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
            const int n = len(rng);
            for (int w = 0; w < n; ++w) {
                if (!text.empty()) text += ' ';
                text += vocab[pick(rng)];
            }
        }
        for (const auto& r : itemize_turn(pending, caller(text), backends, {})) {
            if (r.text_value) CHECK(text.find(*r.text_value) != std::string::npos);
        }
    }
}
