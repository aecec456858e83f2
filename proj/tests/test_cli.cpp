#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "dispatch/consistency.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output; // stdout + stderr
};

RunResult run_cli(const std::string& args, const std::string& stdin_text = "") {
    const fs::path dir = fs::temp_directory_path() / "dispatch_cli_tests";
    fs::create_directories(dir);
    const fs::path in_file = dir / "stdin.txt";
    {
        std::ofstream f(in_file);
        f << stdin_text;
    }
    const std::string cmd = "cd " + std::string(DISPATCH_SOURCE_DIR) + " && " +
                            std::string(DISPATCH_CLI_PATH) + " " + args + " < " +
                            in_file.string() + " 2>&1";
    std::array<char, 4096> buf{};
    RunResult result;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe))
        result.output.append(buf.data(), n);
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

const char* kLostStolenScript =
    "Someone stole my wallet at 2525 West End Ave.\n"
    "My name is Morgan Avery.\n"
    "You can reach me at 615-555-0142.\n"
    "It was taken this morning.\n"
    "I saw a young man in a red hoodie nearby.\n"
    "It is my brown leather wallet, it belongs to me.\n"
    "It happened around 9 am.\n"
    "That is everything I can remember.\n"
    "Really, that is all I know.\n"
    "I am not sure what else to say.\n";

} // namespace

TEST_CASE("session subcommand: scripted lost-stolen call completes") {
    const auto r = run_cli("session --seed 1", kLostStolenScript);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("termination_reason: complete") != std::string::npos);
    CHECK(r.output.find("lost-stolen") != std::string::npos);
}

TEST_CASE("session subcommand: urgency reroutes to an operator") {
    const auto r = run_cli("session --seed 1", "guns are fired outside my window\n");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("termination_reason: handover:urgency") != std::string::npos);
}

TEST_CASE("missing config file exits 2 and names the path") {
    const auto r = run_cli("session --tree /nonexistent/tree.json", "hello\n");
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("/nonexistent/tree.json") != std::string::npos);
}

TEST_CASE("end-to-end determinism: identical runs are byte-identical") {
    const auto a = run_cli("session --seed 7", kLostStolenScript);
    const auto b = run_cli("session --seed 7", kLostStolenScript);
    CHECK(a.exit_code == 0);
    CHECK(a.output == b.output);
}

TEST_CASE("metric subcommand prints the table and exits 0") {
    const auto r = run_cli("metric data/metric_corpus.tsv");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("consistency") != std::string::npos);
    CHECK(r.output.find("group3") != std::string::npos);
}

TEST_CASE("metric --json matches the library computation") {
    const auto r = run_cli("metric data/metric_corpus.tsv --json");
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.output);

    const auto corpus = dispatch::load_metric_corpus_tsv(std::string(DISPATCH_SOURCE_DIR) +
                                                         "/data/metric_corpus.tsv");
    const auto table = dispatch::run_metric_validation(corpus);
    for (int g = 1; g <= 3; ++g) {
        const auto& group = j.at("group" + std::to_string(g));
        for (const auto& name :
             {"consistency", "keyword_overlap", "semantic_similarity", "bleu_bigram",
              "dld_similarity", "rouge1_f"}) {
            CHECK(group.at(name).get<double>() ==
                  doctest::Approx(table.means.at(g).at(name)).epsilon(1e-12));
        }
    }
}

TEST_CASE("metric subcommand rejects an empty corpus") {
    const fs::path dir = fs::temp_directory_path() / "dispatch_cli_tests";
    fs::create_directories(dir);
    const fs::path empty = dir / "empty.tsv";
    std::ofstream(empty) << "group\ttext_a\ttext_b\n";
    const auto r = run_cli("metric " + empty.string());
    CHECK(r.exit_code == 2);
}

TEST_CASE("emulate subcommand writes the expected row counts") {
    const fs::path out = fs::temp_directory_path() / "dispatch_cli_tests" / "emulate_out";
    fs::remove_all(out);
    const auto r = run_cli("emulate --sizes 1-2 --runs 2 --jobs 2 --seed 3 --out " + out.string());
    REQUIRE(r.exit_code == 0);
    std::ifstream csv(out / "emulation.csv");
    REQUIRE(csv.good());
    std::string line;
    std::getline(csv, line);
    CHECK(line == "scenario,size,seed,saved_turns,asked_turns,baseline,correct,terminated");
    int rows = 0;
    while (std::getline(csv, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 16 * 2 * 2); // 16 cooperative scenarios, 2 sizes, 2 runs
}

TEST_CASE("emulate rejects a zero size") {
    const auto r = run_cli("emulate --sizes 0 --runs 1");
    CHECK(r.exit_code == 2);
}

TEST_CASE("emulate --shift writes the confidence curves") {
    const fs::path out = fs::temp_directory_path() / "dispatch_cli_tests" / "shift_out";
    fs::remove_all(out);
    const auto r = run_cli("emulate --shift --seed 3 --out " + out.string());
    REQUIRE(r.exit_code == 0);
    std::ifstream csv(out / "confidence_curves.csv");
    REQUIRE(csv.good());
    std::string header;
    std::getline(csv, header);
    CHECK(header.rfind("scenario,turn,type,conf", 0) == 0);
}

TEST_CASE("session --out writes the transcript and report files") {
    const fs::path out = fs::temp_directory_path() / "dispatch_cli_tests" / "session_out";
    fs::remove_all(out);
    const auto r = run_cli("session --seed 2 --out " + out.string(),
                           "guns are fired outside\n");
    REQUIRE(r.exit_code == 0);
    std::ifstream t(out / "transcript.ndjson");
    REQUIRE(t.good());
    std::string line;
    int records = 0;
    while (std::getline(t, line)) {
        if (line.empty()) continue;
        const auto rec = nlohmann::json::parse(line); // parseable ndjson
        CHECK(rec.contains("report_snapshot_hash"));
        ++records;
    }
    CHECK(records >= 2); // greeting plus at least one caller turn
    CHECK(fs::exists(out / "report.json"));
}

TEST_CASE("config dir env var serves as a path fallback") {
    const fs::path dir = fs::temp_directory_path() / "dispatch_cli_tests" / "elsewhere";
    fs::create_directories(dir);
    const std::string cmd = "cd " + dir.string() +
                            " && DISPATCH_ENGINE_CONFIG_DIR=" + std::string(DISPATCH_SOURCE_DIR) +
                            "/config " + std::string(DISPATCH_CLI_PATH) +
                            " validate-config 2>&1";
    std::array<char, 4096> buf{};
    std::string output;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) output.append(buf.data(), n);
    const int status = pclose(pipe);
    CHECK(WEXITSTATUS(status) == 0);
    CHECK(output.find("configuration OK") != std::string::npos);
}

TEST_CASE("validate-config accepts the shipped configuration") {
    const auto r = run_cli("validate-config");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("configuration OK") != std::string::npos);
}
