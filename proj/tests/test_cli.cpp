#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "alma/cli.hpp"

using namespace alma;
namespace fs = std::filesystem;

namespace {

std::string tmp_path(const std::string& name) {
    return (fs::temp_directory_path() / ("alma_cli_test_" + name)).string();
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

} // namespace

TEST_CASE("run command writes one row per algorithm") {
    RunSpec spec;
    spec.scenario = "uar";
    spec.n = 10;
    spec.r = 10;
    spec.runs = 8;
    spec.algorithms = {"alma", "hungarian", "greedy", "random"};
    spec.out = tmp_path("run.csv");
    CHECK(cmd_run(spec) == 0);
    std::string csv = slurp(spec.out);
    CHECK(count_lines(csv) == 5); // header + 4 rows
    CHECK(csv.find("uar,alma,10,10,8,") != std::string::npos);
    CHECK(csv.find("uar,hungarian,") != std::string::npos);
    fs::remove(spec.out);
}

TEST_CASE("run validates its input spec") {
    RunSpec spec;
    spec.scenario = "uar";
    spec.n = 4;
    spec.r = 4;
    CHECK_THROWS_AS(cmd_run(spec), std::invalid_argument); // missing --out
    spec.out = tmp_path("x.csv");
    spec.instance_path = "also-a-file";
    CHECK_THROWS_AS(cmd_run(spec), std::invalid_argument); // two sources
    spec.instance_path.clear();
    spec.scenario = "mystery";
    CHECK_THROWS_AS(cmd_run(spec), std::invalid_argument);
    spec.scenario = "uar";
    spec.algorithms = {"quantum"};
    CHECK_THROWS_AS(cmd_run(spec), std::invalid_argument);
}

TEST_CASE("run accepts a saved instance file") {
    ScenarioConfig cfg;
    cfg.kind = ScenarioKind::UniformRandom;
    cfg.n_agents = 6;
    cfg.n_resources = 6;
    cfg.seed = 4;
    std::string inst_path = tmp_path("inst.txt");
    save_instance(generate_uniform_random(cfg), inst_path);
    RunSpec spec;
    spec.instance_path = inst_path;
    spec.runs = 4;
    spec.out = tmp_path("from_file.csv");
    CHECK(cmd_run(spec) == 0);
    std::string csv = slurp(spec.out);
    CHECK(csv.find("file,alma,6,6,4,") != std::string::npos);
    fs::remove(inst_path);
    fs::remove(spec.out);
}

TEST_CASE("outputs are byte-identical across repeats and thread counts") {
    RunSpec spec;
    spec.scenario = "noisy";
    spec.n = 24;
    spec.r = 24;
    spec.runs = 16;
    spec.seed = 11;
    spec.out = tmp_path("det_a.csv");
    setenv("ALMA_THREADS", "1", 1);
    CHECK(cmd_run(spec) == 0);
    std::string serial = slurp(spec.out);
    setenv("ALMA_THREADS", "8", 1);
    spec.out = tmp_path("det_b.csv");
    CHECK(cmd_run(spec) == 0);
    std::string parallel = slurp(spec.out);
    unsetenv("ALMA_THREADS");
    CHECK(serial == parallel);
    fs::remove(tmp_path("det_a.csv"));
    fs::remove(tmp_path("det_b.csv"));
}

TEST_CASE("sweep doubles the size and repeats budget blocks") {
    RunSpec spec;
    spec.scenario = "uar";
    spec.sweep_min = 4;
    spec.sweep_max = 16;
    spec.runs = 4;
    spec.algorithms = {"alma"};
    spec.budgets = {8, 32};
    spec.out = tmp_path("sweep.csv");
    CHECK(cmd_sweep(spec) == 0);
    std::string csv = slurp(spec.out);
    // 3 sizes x 2 budgets x 1 algorithm + header.
    CHECK(count_lines(csv) == 7);
    CHECK(csv.find(",4,4,") != std::string::npos);
    CHECK(csv.find(",16,16,") != std::string::npos);
    CHECK(csv.find(",8\n") != std::string::npos);
    CHECK(csv.find(",32\n") != std::string::npos);
    fs::remove(spec.out);

    RunSpec bad = spec;
    bad.scenario.clear();
    bad.out = tmp_path("sweep2.csv");
    CHECK_THROWS_AS(cmd_sweep(bad), std::invalid_argument);
}

TEST_CASE("online command compares policies against the clairvoyant bound") {
    RunSpec spec;
    spec.scenario = ""; // synthetic stream
    spec.algorithms = {"alma", "jitmwm", "bmwm", "bg"};
    spec.online_requests = 40;
    spec.online_days = 2;
    spec.seed = 3;
    spec.policy = BackoffPolicy::linear(0.1);
    spec.out = tmp_path("online.csv");
    CHECK(cmd_online(spec) == 0);
    std::string csv = slurp(spec.out);
    CHECK(count_lines(csv) == 9); // header + 2 days x 4 algorithms
    CHECK(csv.find("online-day0,alma,") != std::string::npos);
    CHECK(csv.find("online-day1,bg,") != std::string::npos);
    // Competitive ratios live in column 13; all must be <= 1.
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line); // header
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        REQUIRE(fields.size() >= 13);
        if (!fields[12].empty()) CHECK(std::stod(fields[12]) <= 1.0 + 1e-9);
    }
    fs::remove(spec.out);

    RunSpec bad = spec;
    bad.algorithms = {"teleport"};
    bad.out = tmp_path("online2.csv");
    CHECK_THROWS_AS(cmd_online(bad), std::invalid_argument);
    fs::remove(bad.out);
}

TEST_CASE("theory sweep exits clean normally and nonzero under fault injection") {
    RunSpec spec;
    spec.out = tmp_path("theory.csv");
    CHECK(cmd_verify_theory(spec) == 0);
    std::string csv = slurp(spec.out);
    CHECK(count_lines(csv) == 1 + 19 * 5 * 3);
    CHECK(csv.find(",0\n") == std::string::npos); // no failing row
    CHECK(cmd_verify_theory(spec, [](double x) { return x + 100.0; }) == 1);
    std::string bad_csv = slurp(spec.out);
    CHECK(bad_csv.find(",0\n") != std::string::npos);
    fs::remove(spec.out);
}

TEST_CASE("oracle check compares the two exact solvers") {
    RunSpec spec;
    spec.n = 5;
    spec.runs = 50;
    spec.out = tmp_path("oracle.csv");
    CHECK(cmd_oracle_check(spec) == 0);
    std::string csv = slurp(spec.out);
    CHECK(count_lines(csv) == 51);
    CHECK(csv.find(",0\n") == std::string::npos);
    fs::remove(spec.out);

    RunSpec big = spec;
    big.n = 9;
    CHECK_THROWS_AS(cmd_oracle_check(big), std::invalid_argument);
}
