// End-to-end CLI checks: exit codes, report shapes, determinism. Spawns the
// built binary via popen and parses its JSON output.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <string>

#include "json.hpp"

#ifndef TRIPHASE_CLI_PATH
#error "TRIPHASE_CLI_PATH must be defined"
#endif
#ifndef TRIPHASE_FIXTURE_DIR
#error "TRIPHASE_FIXTURE_DIR must be defined"
#endif

namespace {

struct CliResult {
    int exit_code = -1;
    std::string stdout_text;
};

CliResult run_cli(const std::string& args) {
    const std::string cmd = std::string(TRIPHASE_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliResult result;
    char buf[4096];
    std::size_t n = 0;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) {
        result.stdout_text.append(buf, n);
    }
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string fixture(const std::string& name) {
    return std::string(TRIPHASE_FIXTURE_DIR) + "/" + name;
}

std::string write_config(const std::string& name, const std::string& content) {
    const std::string path = "cli_" + name;  // test working directory
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << content;
    return path;
}

}  // namespace

TEST_CASE("check command passes on the N=4 fixture and is byte-deterministic") {
    const std::string cfg = write_config("check.json", R"({
        "population": ")" + fixture("pop4.csv") + R"(",
        "phase1": {"kind": "srswor", "n": 3},
        "phase2": {"kind": "srswor", "n": 2},
        "phase3": {"kind": "bernoulli", "p": 0.5},
        "constant_identity": {"count": 3, "seed": 7}
    })");
    const CliResult a = run_cli("check --config " + cfg);
    CHECK(a.exit_code == 0);
    const auto report = nlohmann::json::parse(a.stdout_text);
    REQUIRE(report.contains("checks"));
    REQUIRE(report["checks"].size() == 8);  // 5 expectation checks + 3 identities
    for (const auto& c : report["checks"]) {
        CAPTURE(c["name"].get<std::string>());
        CHECK(c["pass"].get<bool>());
    }
    CHECK(report["provenance"]["command"] == "check");
    CHECK(report["provenance"]["inputs"].size() == 1);

    const CliResult b = run_cli("check --config " + cfg);
    CHECK(b.exit_code == 0);
    CHECK(b.stdout_text == a.stdout_text);
}

TEST_CASE("check on the all-census triple reports zero gaps") {
    const std::string cfg = write_config("check_census.json", R"({
        "population": ")" + fixture("pop4.csv") + R"(",
        "phase1": {"kind": "census"},
        "phase2": {"kind": "census"},
        "phase3": {"kind": "census"}
    })");
    const CliResult r = run_cli("check --config " + cfg);
    CHECK(r.exit_code == 0);
    const auto report = nlohmann::json::parse(r.stdout_text);
    for (const auto& c : report["checks"]) {
        CHECK(c["pass"].get<bool>());
        if (c["name"] == "point_unbiasedness") {
            CHECK(c["lhs"].get<double>() == 10.0);
            CHECK(c["rel_gap"].get<double>() == 0.0);
        }
    }
}

TEST_CASE("check with stratified and per-unit bernoulli designs from config") {
    const std::string cfg = write_config("check_strat.json", R"({
        "population": ")" + fixture("pop6.csv") + R"(",
        "phase1": {"kind": "stratified_srswor", "sizes": {"A": 3, "B": 2}},
        "phase2": {"kind": "stratified_srswor", "sizes": {"A": 2, "B": 2}},
        "phase3": {"kind": "bernoulli", "p": 0.5, "per_unit": {"1": 0.9}}
    })");
    const CliResult r = run_cli("check --config " + cfg);
    CHECK(r.exit_code == 0);
    const auto report = nlohmann::json::parse(r.stdout_text);
    for (const auto& c : report["checks"]) {
        CAPTURE(c["name"].get<std::string>());
        CHECK(c["pass"].get<bool>());
    }
}

TEST_CASE("stratified design on a population without strata is a data error") {
    const std::string cfg = write_config("check_nostrata.json", R"({
        "population": ")" + fixture("pop4.csv") + R"(",
        "phase1": {"kind": "stratified_srswor", "sizes": {"A": 2}},
        "phase2": {"kind": "census"},
        "phase3": {"kind": "census"}
    })");
    const CliResult r = run_cli("check --config " + cfg);
    CHECK(r.exit_code == 2);
}

TEST_CASE("estimate with a table design") {
    const std::string cfg = write_config("estimate_table.json", R"({
        "population": ")" + fixture("pop4.csv") + R"(",
        "phase1": {"kind": "table",
                   "pi": {"1": 0.5, "2": 0.5, "3": 0.5, "4": 0.5},
                   "pi_joint": [[1,2,0.25],[1,3,0.25],[1,4,0.25],
                                 [2,3,0.25],[2,4,0.25],[3,4,0.25]]},
        "phase2": {"kind": "census"},
        "phase3": {"kind": "census"},
        "samples": {"S": [2, 4], "R": [2, 4], "F": [2, 4]}
    })");
    const CliResult r = run_cli("estimate --config " + cfg);
    CHECK(r.exit_code == 0);
    const auto report = nlohmann::json::parse(r.stdout_text);
    CHECK(report["point"].get<double>() == doctest::Approx(12.0));  // (2+4)/0.5
}

TEST_CASE("check exits 3 when a tolerance cannot be met") {
    const std::string cfg = write_config("check_tight.json", R"({
        "population": ")" + fixture("pop4.csv") + R"(",
        "phase1": {"kind": "srswor", "n": 3},
        "phase2": {"kind": "srswor", "n": 2},
        "phase3": {"kind": "bernoulli", "p": 0.5},
        "tolerances": {"variance": 0.0}
    })");
    const CliResult r = run_cli("check --config " + cfg);
    CHECK(r.exit_code == 3);
    const auto report = nlohmann::json::parse(r.stdout_text);
    bool saw_fail = false;
    for (const auto& c : report["checks"]) {
        if (!c["pass"].get<bool>()) saw_fail = true;
    }
    CHECK(saw_fail);
}

TEST_CASE("estimate with explicit samples") {
    const std::string cfg = write_config("estimate.json", R"({
        "population": ")" + fixture("pop4.csv") + R"(",
        "phase1": {"kind": "srswor", "n": 3},
        "phase2": {"kind": "srswor", "n": 2},
        "phase3": {"kind": "census"},
        "samples": {"S": [1, 2, 4], "R": [2, 4], "F": [2, 4]}
    })");
    const CliResult r = run_cli("estimate --config " + cfg);
    CHECK(r.exit_code == 0);
    const auto report = nlohmann::json::parse(r.stdout_text);
    // pi# = (3/4)(2/3) = 1/2 for both units: point = 2*(2+4) = 12
    CHECK(report["point"].get<double>() == doctest::Approx(12.0));
    REQUIRE(report["terms"].size() == 3);
    CHECK(report["terms"][2].get<double>() == 0.0);
}

TEST_CASE("estimate rejects samples the design cannot realize") {
    const std::string cfg = write_config("estimate_badsample.json", R"({
        "population": ")" + fixture("pop4.csv") + R"(",
        "phase1": {"kind": "srswor", "n": 3},
        "phase2": {"kind": "srswor", "n": 2},
        "phase3": {"kind": "census"},
        "samples": {"S": [1, 2], "R": [1, 2], "F": [1, 2]}
    })");
    const CliResult r = run_cli("estimate --config " + cfg);
    CHECK(r.exit_code == 2);
    const auto report = nlohmann::json::parse(r.stdout_text);
    CHECK(report["error"]["message"].get<std::string>().find("cannot produce") !=
          std::string::npos);
}

TEST_CASE("estimate with a seed draws the chain deterministically") {
    const std::string cfg = write_config("estimate_seed.json", R"({
        "population": ")" + fixture("pop4.csv") + R"(",
        "phase1": {"kind": "srswor", "n": 3},
        "phase2": {"kind": "srswor", "n": 2},
        "phase3": {"kind": "bernoulli", "p": 0.5},
        "seed": 11
    })");
    const CliResult a = run_cli("estimate --config " + cfg);
    const CliResult b = run_cli("estimate --config " + cfg);
    CHECK(a.exit_code == 0);
    CHECK(a.stdout_text == b.stdout_text);
}

TEST_CASE("estimate without samples requires a seed") {
    const std::string cfg = write_config("estimate_noseed.json", R"({
        "population": ")" + fixture("pop4.csv") + R"(",
        "phase1": {"kind": "census"},
        "phase2": {"kind": "census"},
        "phase3": {"kind": "census"}
    })");
    const CliResult r = run_cli("estimate --config " + cfg);
    CHECK(r.exit_code == 2);
    const auto report = nlohmann::json::parse(r.stdout_text);
    CHECK(report["error"]["category"] == "data");
}

TEST_CASE("data errors exit 2 with machine-readable JSON") {
    const std::string cfg = write_config("bad_pop.json", R"({
        "population": ")" + fixture("pop_dup.csv") + R"(",
        "phase1": {"kind": "census"},
        "phase2": {"kind": "census"},
        "phase3": {"kind": "census"},
        "seed": 1
    })");
    const CliResult r = run_cli("estimate --config " + cfg);
    CHECK(r.exit_code == 2);
    const auto report = nlohmann::json::parse(r.stdout_text);
    CHECK(report["error"]["category"] == "data");
    CHECK(report["error"]["message"].get<std::string>().find("duplicate unit_id") !=
          std::string::npos);
}

TEST_CASE("jas-alus command reports the homogeneous V_ij") {
    const std::string cfg = write_config("jas.json", R"({
        "substrata": ")" + fixture("jas_substrata.csv") + R"(",
        "segments": ")" + fixture("jas_segments.csv") + R"(",
        "tracts": ")" + fixture("jas_tracts.csv") + R"("
    })");
    const CliResult r = run_cli("jas-alus --config " + cfg);
    CHECK(r.exit_code == 0);
    const auto report = nlohmann::json::parse(r.stdout_text);
    REQUIRE(report["substrata"].size() == 1);
    CHECK(report["substrata"][0]["v_ij"].get<double>() ==
          doctest::Approx(15300.0).epsilon(1e-9));
    CHECK(report["var_t2prime_hat"].get<double>() == doctest::Approx(15300.0).epsilon(1e-9));
    CHECK(report["var_t2prime_five_term"].get<double>() ==
          doctest::Approx(15300.0).epsilon(1e-9));
    CHECK(report["t2_prime"].get<double>() == doctest::Approx(2.0 * 3.0 * 1.5 * 40.0));
    CHECK(report["provenance"]["inputs"].size() == 3);
}

TEST_CASE("simulate is reproducible and thread-count independent") {
    const std::string base = R"({
        "population": ")" + fixture("pop4.csv") + R"(",
        "phase1": {"kind": "srswor", "n": 3},
        "phase2": {"kind": "srswor", "n": 2},
        "phase3": {"kind": "bernoulli", "p": 0.5},
        "reps": 500,
        "seed": 77)";
    const std::string cfg1 = write_config("sim1.json", base + R"(,
        "threads": 1
    })");
    const std::string cfg2 = write_config("sim2.json", base + R"(,
        "threads": 2
    })");
    const CliResult a = run_cli("simulate --config " + cfg1);
    const CliResult b = run_cli("simulate --config " + cfg1);
    const CliResult c = run_cli("simulate --config " + cfg2);
    CHECK(a.exit_code == 0);
    CHECK(a.stdout_text == b.stdout_text);
    const auto ra = nlohmann::json::parse(a.stdout_text);
    const auto rc = nlohmann::json::parse(c.stdout_text);
    CHECK(ra["mean_t"].get<double>() == rc["mean_t"].get<double>());
    CHECK(ra["mean_v"].get<double>() == rc["mean_v"].get<double>());
    CHECK(ra["emp_var_t"].get<double>() == rc["emp_var_t"].get<double>());
}

TEST_CASE("usage errors exit 1") {
    CHECK(run_cli("frobnicate --config nowhere.json").exit_code == 1);
    CHECK(run_cli("estimate").exit_code == 1);  // missing --config
}

TEST_CASE("missing config file exits 2") {
    const CliResult r = run_cli("check --config does_not_exist.json");
    CHECK(r.exit_code == 2);
}

TEST_CASE("--out writes the report to a file") {
    const std::string cfg = write_config("jas_out.json", R"({
        "substrata": ")" + fixture("jas_substrata.csv") + R"(",
        "segments": ")" + fixture("jas_segments.csv") + R"(",
        "tracts": ")" + fixture("jas_tracts.csv") + R"("
    })");
    const CliResult r = run_cli("jas-alus --config " + cfg + " --out cli_report.json");
    CHECK(r.exit_code == 0);
    CHECK(r.stdout_text.empty());
    std::ifstream in("cli_report.json");
    REQUIRE(in.good());
    const auto report = nlohmann::json::parse(in);
    CHECK(report.contains("t2"));
}
