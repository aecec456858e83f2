#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dispatch/config_io.hpp"
#include "dispatch/consistency.hpp"
#include "dispatch/emulation.hpp"
#include "dispatch/orchestrator.hpp"
#include "dispatch/seeds.hpp"
#include "dispatch/text.hpp"

namespace fs = std::filesystem;
using namespace dispatch;

namespace {

constexpr const char* kGreeting =
    "City services, this is an automated non-emergency line. What are you reporting today?";

struct CliPaths {
    std::string tree = "config/phone_tree.json";
    std::string patterns = "config/handover.json";
    std::string stubs = "config/stubs.json";
    std::string scenarios = "data/scenarios";
    std::string corpus = "data/metric_corpus.tsv";
};

// flag > local file > DISPATCH_ENGINE_CONFIG_DIR fallback
std::string resolve(const std::string& given, const std::string& env_relative) {
    if (fs::exists(given)) return given;
    if (const char* dir = std::getenv("DISPATCH_ENGINE_CONFIG_DIR")) {
        const fs::path candidate = fs::path(dir) / env_relative;
        if (fs::exists(candidate)) return candidate.string();
    }
    return given;
}

struct LoadedConfig {
    PhoneTree tree;
    std::vector<Pattern> patterns;
    SensitiveLexicon lexicon;
    StubConfig stubs;
};

LoadedConfig load_all(const CliPaths& paths) {
    LoadedConfig c;
    c.tree = load_phone_tree(resolve(paths.tree, "phone_tree.json"));
    auto errors = validate_phone_tree(c.tree);
    if (!errors.empty()) {
        std::string msg = "invalid phone tree:";
        for (const auto& e : errors) msg += "\n  " + e;
        throw std::runtime_error(msg);
    }
    auto [patterns, lexicon] = load_handover_config(resolve(paths.patterns, "handover.json"));
    c.patterns = std::move(patterns);
    c.lexicon = std::move(lexicon);
    c.stubs = load_stub_config(resolve(paths.stubs, "stubs.json"));
    return c;
}

Engine build_engine(const LoadedConfig& config, const ConfidencePolicy& policy,
                    std::uint64_t seed) {
    return Engine(config.tree, policy, config.patterns, config.lexicon,
                  make_stub_backends(config.stubs, seed));
}

std::vector<int> parse_sizes(const std::string& spec) {
    std::vector<int> sizes;
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ',')) {
        const auto dash = part.find('-');
        if (dash != std::string::npos && dash > 0) {
            const int lo = std::stoi(part.substr(0, dash));
            const int hi = std::stoi(part.substr(dash + 1));
            for (int s = lo; s <= hi; ++s) sizes.push_back(s);
        } else if (!part.empty()) {
            sizes.push_back(std::stoi(part));
        }
    }
    return sizes;
}

std::string action_line(const PhoneTree& tree, const SystemAction& action) {
    switch (action.kind) {
        case ActionKind::ask:
        case ActionKind::clarify:
            return action.prompt.empty() ? render_prompt(tree, action) : action.prompt;
        case ActionKind::handover:
            return "Please hold while I transfer you to an operator.";
        case ActionKind::close:
            return "Thank you. Your report has been filed and someone will follow up.";
    }
    return "";
}

int cmd_session(const CliPaths& paths, const ConfidencePolicy& policy, std::uint64_t seed,
                const std::string& out_dir) {
    const LoadedConfig config = load_all(paths);
    const Engine engine = build_engine(config, policy, seed);
    Session session = engine.open_session();

    std::vector<nlohmann::json> transcript;
    transcript.push_back(
        transcript_record(0, Speaker::system, kGreeting, "greet", session.report));
    std::cout << "system: " << kGreeting << "\n";

    std::string line;
    while (session.status == SessionStatus::active && std::getline(std::cin, line)) {
        const std::string text = trim(line);
        if (text.empty()) continue;
        std::cout << "caller: " << text << "\n";
        const TurnOutcome outcome = engine.step(session, text);
        const int turn = static_cast<int>(session.context.utterances.size());
        std::string action = action_kind_name(outcome.action.kind);
        if (outcome.action.kind == ActionKind::ask || outcome.action.kind == ActionKind::clarify)
            action += ":" + outcome.action.field_id;
        if (outcome.action.kind == ActionKind::handover)
            action += ":" + handover_reason_name(outcome.action.reason);
        transcript.push_back(transcript_record(turn, Speaker::caller, text, action, session.report));
        const std::string spoken = action_line(engine.tree(), outcome.action);
        transcript.push_back(
            transcript_record(turn + 1, Speaker::system, spoken, action, session.report));
        std::cout << "system: " << spoken << "\n";
    }

    std::string reason = "incomplete";
    if (session.status == SessionStatus::complete) reason = "complete";
    if (session.status == SessionStatus::handed_over)
        reason = "handover:" + handover_reason_name(session.termination_reason);

    const nlohmann::json report = report_to_json(session.report);
    std::cout << "termination_reason: " << reason << "\n";
    std::cout << report.dump(2) << "\n";

    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream t(fs::path(out_dir) / "transcript.ndjson");
        for (const auto& rec : transcript) t << rec.dump() << "\n";
        std::ofstream r(fs::path(out_dir) / "report.json");
        r << report.dump(2) << "\n";
    }
    return 0;
}

int cmd_emulate(const CliPaths& paths, const ConfidencePolicy& policy, std::uint64_t seed,
                const std::string& out_dir, const std::vector<int>& sizes, int runs, bool shift,
                int jobs) {
    const LoadedConfig config = load_all(paths);
    for (int s : sizes)
        if (s < 1) throw std::runtime_error("utterance size must be >= 1");
    if (runs < 1) throw std::runtime_error("--runs must be >= 1");

    const Engine engine = build_engine(config, policy, seed);
    const std::string scenario_dir = resolve(paths.scenarios, "../data/scenarios");
    auto scenarios = load_scenario_dir(scenario_dir);
    if (scenarios.empty()) throw std::runtime_error("no scenarios found in " + scenario_dir);
    for (const auto& sc : scenarios) {
        auto errors = validate_scenario(sc, engine.tree());
        if (!errors.empty())
            throw std::runtime_error("scenario " + sc.id + ": " + errors.front());
    }

    fs::create_directories(out_dir.empty() ? "out" : out_dir);
    const fs::path out = out_dir.empty() ? "out" : out_dir;

    if (shift) {
        std::vector<Scenario> shifting;
        for (const auto& sc : scenarios)
            if (sc.shift_turn) shifting.push_back(sc);
        if (shifting.empty()) throw std::runtime_error("no shift scenarios found");
        const ShiftCurves curves = run_shift_scenarios(shifting, engine);
        std::ofstream csv(out / "confidence_curves.csv");
        csv << confidence_curve_csv(curves);
        std::cout << "wrote " << (out / "confidence_curves.csv").string() << " ("
                  << curves.points.size() << " points)\n";
        return 0;
    }

    std::vector<Scenario> cooperative;
    for (const auto& sc : scenarios)
        if (!sc.shift_turn) cooperative.push_back(sc);

    struct Task {
        const Scenario* scenario;
        int size;
        int run;
    };
    std::vector<Task> tasks;
    for (const auto& sc : cooperative)
        for (int s : sizes) {
            if (s > static_cast<int>(sc.segments.size())) continue;
            for (int r = 0; r < runs; ++r) tasks.push_back({&sc, s, r});
        }

    std::vector<EmulationReport> results(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const Task& t = tasks[i];
            const std::uint64_t run_seed =
                split_seed(seed, fnv1a64(t.scenario->id), static_cast<std::uint64_t>(t.size),
                           static_cast<std::uint64_t>(t.run));
            results[i] = run_session(*t.scenario, t.size, engine, run_seed);
        }
    };
    std::vector<std::thread> pool;
    const int n_threads = std::max(1, jobs);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    bool all_terminated = true;
    std::ofstream csv(out / "emulation.csv");
    csv << "scenario,size,seed,saved_turns,asked_turns,baseline,correct,terminated\n";
    for (const auto& r : results) {
        csv << r.scenario_id << ',' << r.utterance_size << ',' << r.seed << ',' << r.saved_turns
            << ',' << r.asked_turns << ',' << r.baseline_questions << ',' << (r.type_correct ? 1 : 0)
            << ',' << (r.terminated ? 1 : 0) << '\n';
        all_terminated = all_terminated && r.terminated;
    }
    std::cout << "wrote " << (out / "emulation.csv").string() << " (" << results.size()
              << " rows)\n";
    if (!all_terminated) {
        std::cerr << "error: at least one emulated session failed to terminate\n";
        return 3;
    }
    return 0;
}

int cmd_metric(const CliPaths& paths, bool json_output) {
    const std::string corpus_path = resolve(paths.corpus, "../data/metric_corpus.tsv");
    const auto corpus = load_metric_corpus_tsv(corpus_path);
    if (corpus.empty()) throw std::runtime_error("metric corpus is empty: " + corpus_path);
    const MetricTable table = run_metric_validation(corpus);

    static const std::vector<std::string> metrics = {
        "consistency", "keyword_overlap", "semantic_similarity",
        "bleu_bigram", "dld_similarity",  "rouge1_f"};

    if (json_output) {
        nlohmann::json j;
        for (const auto& [group, means] : table.means) {
            nlohmann::json g;
            for (const auto& name : metrics) g[name] = means.at(name);
            g["pairs"] = table.pair_counts.at(group);
            j["group" + std::to_string(group)] = std::move(g);
        }
        std::cout << j.dump(2) << "\n";
        return 0;
    }

    std::cout << "metric";
    for (int g = 1; g <= 3; ++g) std::cout << "\tgroup" << g;
    std::cout << "\n";
    for (const auto& name : metrics) {
        std::cout << name;
        for (int g = 1; g <= 3; ++g) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "%.4f", table.means.at(g).at(name));
            std::cout << '\t' << buf;
        }
        std::cout << "\n";
    }
    return 0;
}

int cmd_validate(const CliPaths& paths) {
    int issues = 0;
    try {
        const LoadedConfig config = load_all(paths);
        std::cout << "phone tree: " << config.tree.incident_types.size() << " incident types, "
                  << config.tree.fields.size() << " fields\n";
        std::cout << "handover: " << config.patterns.size() << " patterns, "
                  << config.lexicon.human_request.size() + config.lexicon.urgency.size()
                  << " sensitive lemmas\n";
        std::cout << "stubs: cues for " << config.stubs.cues.size() << " types, "
                  << config.stubs.extraction_rules.size() << " extraction rules\n";
        const std::string scenario_dir = resolve(paths.scenarios, "../data/scenarios");
        if (fs::exists(scenario_dir)) {
            const auto scenarios = load_scenario_dir(scenario_dir);
            for (const auto& sc : scenarios) {
                for (const auto& e : validate_scenario(sc, config.tree)) {
                    std::cerr << "scenario " << sc.id << ": " << e << "\n";
                    ++issues;
                }
            }
            std::cout << "scenarios: " << scenarios.size() << " loaded\n";
        }
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    if (issues) return 2;
    std::cout << "configuration OK\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Confidence-guided non-emergency call handling engine"};
    app.require_subcommand(1);
    app.fallthrough();

    CliPaths paths;
    ConfidencePolicy policy;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::string sizes_spec = "1-6";
    int runs = 100;
    bool shift = false;
    bool json_output = false;
    int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

    app.add_option("--tree", paths.tree, "phone tree config path");
    app.add_option("--patterns", paths.patterns, "handover patterns/lexicon config path");
    app.add_option("--stubs", paths.stubs, "stub backend config path");
    app.add_option("--lambda1", policy.lambda1, "itemization confidence threshold");
    app.add_option("--lambda2", policy.lambda2, "prediction confidence threshold");
    app.add_option("--trials", policy.trials, "trial count T");
    app.add_option("--cap", policy.clarification_cap, "clarification cap per field");
    app.add_option("--seed", seed, "root random seed");
    app.add_option("--out", out_dir, "output directory");

    auto* session_cmd = app.add_subcommand("session", "interactive text session on stdin/stdout");
    auto* emulate_cmd = app.add_subcommand("emulate", "batch scenario emulation, writes CSVs");
    emulate_cmd->add_option("--sizes", sizes_spec, "utterance sizes, e.g. 1-6 or 1,3,5");
    emulate_cmd->add_option("--runs", runs, "random runs per size");
    emulate_cmd->add_flag("--shift", shift, "run the incident-shift scenarios instead");
    emulate_cmd->add_option("--jobs", jobs, "worker threads");
    emulate_cmd->add_option("--scenarios", paths.scenarios, "scenario directory");
    auto* metric_cmd = app.add_subcommand("metric", "metric validation table over a paired corpus");
    metric_cmd->add_option("corpus", paths.corpus, "TSV corpus: group, text_a, text_b");
    metric_cmd->add_flag("--json", json_output, "machine-readable output");
    auto* validate_cmd = app.add_subcommand("validate-config", "validate all config files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(session_cmd)) return cmd_session(paths, policy, seed, out_dir);
        if (app.got_subcommand(emulate_cmd)) {
            const auto sizes = parse_sizes(sizes_spec);
            if (sizes.empty()) throw std::runtime_error("--sizes parsed to an empty list");
            return cmd_emulate(paths, policy, seed, out_dir, sizes, runs, shift, jobs);
        }
        if (app.got_subcommand(metric_cmd)) return cmd_metric(paths, json_output);
        if (app.got_subcommand(validate_cmd)) return cmd_validate(paths);
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
