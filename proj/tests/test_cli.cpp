#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "wfcarbon/config.hpp"
#include "wfcarbon/render.hpp"
#include "wfcarbon/sched.hpp"

using Catch::Matchers::ContainsSubstring;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string output; // stdout and stderr combined
};

CliResult run_cli(const std::string& args) {
    const std::string command = std::string(WFCARBON_CLI_BIN) + " " + args + " 2>&1";
    std::array<char, 4096> buffer{};
    CliResult result;
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::size_t n = 0;
    while ((n = fread(buffer.data(), 1, buffer.size(), pipe)) > 0)
        result.output.append(buffer.data(), n);
    const int status = pclose(pipe);
    result.exit_code = WEXITSTATUS(status);
    return result;
}

const std::string kData = WFCARBON_DATA_DIR;

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

} // namespace

TEST_CASE("estimate without an input form is a usage error", "[cli]") {
    const CliResult r = run_cli("estimate --pue 1.6 --ci-region DE --ci-year 2021");
    CHECK(r.exit_code == 2);
    CHECK_THAT(r.output, ContainsSubstring("error[Usage]"));
}

TEST_CASE("missing files are usage errors", "[cli]") {
    const CliResult r = run_cli("estimate --bulk /nonexistent.json --ci-region DE --ci-year 2021");
    CHECK(r.exit_code == 2);
}

TEST_CASE("unknown region is a domain error with a greppable code", "[cli]") {
    const CliResult r = run_cli("estimate --bulk " + kData +
                                "/force/force.json --pue 1.6 --ci-region NOWHERE --ci-year 2021");
    CHECK(r.exit_code == 1);
    CHECK_THAT(r.output, ContainsSubstring("error[UnknownRegion]"));
}

TEST_CASE("force case study through the cli", "[cli]") {
    const CliResult r = run_cli("estimate --bulk " + kData +
                                "/force/force.json --pue 1.6 --ci-region DE --ci-year 2021");
    REQUIRE(r.exit_code == 0);
    CHECK_THAT(r.output, ContainsSubstring("total: 9.90 kWh"));
    CHECK_THAT(r.output, ContainsSubstring("emissions: 6.95 kg CO2e"));
    CHECK_THAT(r.output, ContainsSubstring("embodied share: 1.51 kg CO2e"));
}

TEST_CASE("identical invocations produce byte-identical output", "[cli]") {
    const std::vector<std::string> invocations = {
        "estimate --bulk " + kData + "/force/force.json --pue 1.6 --ci-region DE --ci-year 2021",
        "estimate --bulk " + kData +
            "/force/force.json --pue 1.6 --ci-region DE --ci-year 2021 --format json",
        "estimate --core-hours " + kData +
            "/galactic-plane/core_hours.json --pue 1.2 --ci-region US --ci-year 2019 --format json",
        "estimate --storage-tb 45 --pue 1.2 --ci-region US --ci-year 2019 --format json",
        "estimate --trace " + kData + "/fastqc/trace_cluster.csv --cluster " + kData +
            "/fastqc/cluster.json --ci-region DE --ci-year 2022 --format json --assumptions",
        "schedule --algo heft --dag " + kData + "/sched/diamond.json --cluster " + kData +
            "/sched/two_nodes.json --format json",
        "schedule --algo greenheft --dag " + kData + "/sched/diamond.json --cluster " + kData +
            "/sched/two_nodes.json --format csv",
        "schedule --algo moheft --k 8 --dag " + kData + "/sched/diamond.json --cluster " + kData +
            "/sched/two_nodes.json --format json",
        "schedule --algo brute --dag " + kData + "/sched/diamond.json --cluster " + kData +
            "/sched/two_nodes.json --format text",
        "shift --profile " + kData + "/shift/profile.csv --ci-series " + kData +
            "/shift/series.csv --window 2022-06-01T00:00:00Z,2022-06-01T03:00:00Z --step-s 60",
        "whatif-dvfs --runtime-s 100 --static-w 34 --peak-w 94 --ratio 1.0 --ratio 0.5 "
            "--format csv",
        "consolidate --tasks " + kData + "/consolidate/tasks.json --cluster " + kData +
            "/consolidate/cluster.json --format json",
    };
    for (const std::string& inv : invocations) {
        const CliResult first = run_cli(inv);
        const CliResult second = run_cli(inv);
        INFO(inv);
        REQUIRE(first.exit_code == 0);
        CHECK(second.exit_code == 0);
        CHECK(first.output == second.output);
        CHECK(!first.output.empty());
    }
}

TEST_CASE("schedule json output is a valid schedule", "[cli]") {
    const CliResult r = run_cli("schedule --algo greenheft --dag " + kData +
                                "/sched/diamond.json --cluster " + kData +
                                "/sched/two_nodes.json --format json");
    REQUIRE(r.exit_code == 0);

    const wfcarbon::Schedule schedule =
        wfcarbon::schedule_from_json(nlohmann::json::parse(r.output));
    const wfcarbon::WorkflowDag dag =
        wfcarbon::dag_from_json_text(wfcarbon::read_file(kData + "/sched/diamond.json"));
    const wfcarbon::ClusterSpec cluster =
        wfcarbon::cluster_from_json_text(wfcarbon::read_file(kData + "/sched/two_nodes.json"));
    const auto table = wfcarbon::task_node_estimates(dag, cluster, {});
    CHECK_NOTHROW(wfcarbon::evaluate_schedule(schedule, dag, cluster, table));
}

TEST_CASE("cyclic workflows exit with a domain error", "[cli]") {
    const std::string path = temp_path("wfcarbon_cyclic_test.json");
    {
        std::ofstream out(path);
        out << R"({"tasks": [{"id": "A"}, {"id": "B"}],
                   "channels": [{"producer": "A", "consumer": "B"},
                                {"producer": "B", "consumer": "A"}]})";
    }
    const CliResult r = run_cli("schedule --algo heft --dag " + path + " --cluster " + kData +
                                "/sched/two_nodes.json");
    CHECK(r.exit_code == 1);
    CHECK_THAT(r.output, ContainsSubstring("error[CycleDetected]"));
    std::remove(path.c_str());
}

TEST_CASE("shift finds the low-carbon window", "[cli]") {
    const CliResult r = run_cli("shift --profile " + kData + "/shift/profile.csv --ci-series " +
                                kData + "/shift/series.csv --window "
                                "2022-06-01T00:00:00Z,2022-06-01T03:00:00Z --step-s 60");
    REQUIRE(r.exit_code == 0);
    CHECK_THAT(r.output, ContainsSubstring("best start: 2022-06-01T02:00:00Z"));
    CHECK_THAT(r.output, ContainsSubstring("emissions: 10.0 g CO2e"));
}

TEST_CASE("report re-renders json byte-identically", "[cli]") {
    const std::string json_path = temp_path("wfcarbon_report_test.json");
    const CliResult original = run_cli("estimate --bulk " + kData +
                                       "/force/force.json --pue 1.6 --ci-region DE --ci-year "
                                       "2021 --format json");
    REQUIRE(original.exit_code == 0);
    {
        std::ofstream out(json_path, std::ios::binary);
        out << original.output;
    }
    const CliResult rerendered = run_cli("report --input " + json_path + " --format json");
    REQUIRE(rerendered.exit_code == 0);
    CHECK(rerendered.output == original.output);

    const CliResult text = run_cli("report --input " + json_path + " --format text");
    REQUIRE(text.exit_code == 0);
    CHECK_THAT(text.output, ContainsSubstring("total: 9.90 kWh"));
    std::remove(json_path.c_str());
}

TEST_CASE("dvfs identity at full frequency", "[cli]") {
    const CliResult r = run_cli(
        "whatif-dvfs --runtime-s 100 --utilisation 0.5 --static-w 34 --peak-w 94 --ratio 1.0 "
        "--format csv");
    REQUIRE(r.exit_code == 0);
    CHECK_THAT(r.output, ContainsSubstring("1,100,64,"));
}

TEST_CASE("consolidation packs the bundled example onto one node", "[cli]") {
    const CliResult r = run_cli("consolidate --tasks " + kData + "/consolidate/tasks.json " +
                                "--cluster " + kData + "/consolidate/cluster.json");
    REQUIRE(r.exit_code == 0);
    CHECK_THAT(r.output, ContainsSubstring("nodes powered on: 1"));
}
