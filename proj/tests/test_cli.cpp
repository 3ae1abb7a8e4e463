#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "riskplan/cli.hpp"
#include "riskplan/gridworld.hpp"
#include "riskplan/scenario.hpp"
#include "riskplan/svg.hpp"

using namespace riskplan;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"riskplan"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli::run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

fs::path write_default_scenario(const TempDir& dir) {
    const grid::BenchmarkScenario b = grid::build_benchmark_scenario();
    Scenario s;
    s.env = b.env;
    s.start = b.start;
    s.goal = b.goal;
    s.grid = GridSpec{1.0, true};
    s.description = b.description;
    const fs::path p = dir.path / "scenario.json";
    save_scenario(s, p.string());
    return p;
}

// Minimal well-formedness scan: tag balance and attribute quote parity.
bool xml_well_formed(const std::string& text) {
    std::vector<std::string> stack;
    std::size_t i = 0;
    while ((i = text.find('<', i)) != std::string::npos) {
        const std::size_t end = text.find('>', i);
        if (end == std::string::npos) return false;
        std::string tag = text.substr(i + 1, end - i - 1);
        if (std::count(tag.begin(), tag.end(), '"') % 2 != 0) return false;
        if (!tag.empty() && tag[0] == '?') {
            i = end + 1;
            continue;
        }
        const bool closing = !tag.empty() && tag[0] == '/';
        const bool self_closing = !tag.empty() && tag.back() == '/';
        std::string name = closing ? tag.substr(1) : tag;
        name = name.substr(0, name.find_first_of(" \t\n/"));
        if (closing) {
            if (stack.empty() || stack.back() != name) return false;
            stack.pop_back();
        } else if (!self_closing) {
            stack.push_back(name);
        }
        i = end + 1;
    }
    return stack.empty();
}

}  // namespace

TEST_CASE("plan: success exit code, JSON re-parses, determinism") {
    TempDir dir("riskplan_cli_plan");
    const fs::path scenario = write_default_scenario(dir);
    const fs::path out1 = dir.path / "a";
    const fs::path out2 = dir.path / "b";

    const std::vector<std::string> base{"plan",   "--scenario", scenario.string(), "--seed", "42",
                                        "--sigma", "0.1",       "--n-max",         "1500",
                                        "--no-timestamp"};
    auto with_output = [&](const fs::path& o) {
        auto v = base;
        v.push_back("--output");
        v.push_back(o.string());
        return v;
    };
    CHECK(run_cli(with_output(out1)) == 0);
    CHECK(run_cli(with_output(out2)) == 0);

    const std::string a = slurp(out1 / "plan_result.json");
    CHECK(a == slurp(out2 / "plan_result.json"));
    const json j = json::parse(a);
    CHECK(j.at("success").get<bool>());
    CHECK(j.contains("scenario"));
    CHECK(j.at("wall_time_s").get<double>() == 0.0);  // timings omitted
}

TEST_CASE("plan: RISKPLAN_SEED is the seed fallback") {
    TempDir dir("riskplan_cli_envseed");
    const fs::path scenario = write_default_scenario(dir);
    const std::vector<std::string> common{"plan",  "--scenario", scenario.string(),
                                          "--sigma", "0.1",      "--n-max",
                                          "1500",  "--no-timestamp"};
    auto with = [&](const fs::path& o, std::vector<std::string> extra) {
        auto v = common;
        v.insert(v.end(), {"--output", o.string()});
        v.insert(v.end(), extra.begin(), extra.end());
        return v;
    };
    CHECK(run_cli(with(dir.path / "flag", {"--seed", "9001"})) == 0);
    setenv("RISKPLAN_SEED", "9001", 1);
    CHECK(run_cli(with(dir.path / "env", {})) == 0);
    unsetenv("RISKPLAN_SEED");
    CHECK(slurp(dir.path / "flag" / "plan_result.json") ==
          slurp(dir.path / "env" / "plan_result.json"));
}

TEST_CASE("plan: planner failure exits 2, config error exits 1") {
    TempDir dir("riskplan_cli_fail");
    const fs::path scenario = write_default_scenario(dir);
    // Tiny budget: the benchmark world cannot be solved in 5 iterations.
    CHECK(run_cli({"plan", "--scenario", scenario.string(), "--seed", "1", "--n-max", "5",
                   "--output", (dir.path / "f").string()}) == 2);
    const json j = json::parse(slurp(dir.path / "f" / "plan_result.json"));
    CHECK_FALSE(j.at("success").get<bool>());
    CHECK(j.at("failure_reason") == "iteration-cap");

    const fs::path bad = dir.path / "bad.json";
    std::ofstream(bad) << "{\"bounds\": [0, 0";
    CHECK(run_cli({"plan", "--scenario", bad.string()}) == 1);
    CHECK(run_cli({"plan", "--scenario", (dir.path / "missing.json").string()}) == 1);

    std::ofstream(dir.path / "nostart.json") << R"({"bounds":[0,0,1,1],"robot_radius":0.0,
        "resolution":[0.1,0.1],"obstacles":[]})";
    CHECK(run_cli({"plan", "--scenario", (dir.path / "nostart.json").string()}) == 1);
}

TEST_CASE("benchmark: outputs, recompute-only reproduction") {
    TempDir dir("riskplan_cli_bench");
    const fs::path out = dir.path / "results";
    CHECK(run_cli({"benchmark", "--output", out.string(), "--seed", "7", "--alphas", "0.1",
                   "--sigmas", "0.2", "--runs-per-cell", "3", "--n-max", "900", "--n-c", "16",
                   "--workers", "2", "--no-timestamp"}) == 0);
    for (const char* f : {"results.jsonl", "table1.csv", "table2.csv", "summary.json"}) {
        CHECK(fs::exists(out / f));
    }
    const std::string table1 = slurp(out / "table1.csv");
    const std::string jsonl = slurp(out / "results.jsonl");
    CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 6);  // 2 cells x 3 runs

    // Rebuilding from the persisted records reproduces the summaries.
    fs::remove(out / "table1.csv");
    CHECK(run_cli({"benchmark", "--output", out.string(), "--recompute-only", "--no-timestamp"}) == 0);
    CHECK(slurp(out / "table1.csv") == table1);
    CHECK(slurp(out / "results.jsonl") == jsonl);
}

TEST_CASE("verify-bound: ratio bound, premise, Monte Carlo replay") {
    TempDir dir("riskplan_cli_verify");
    const fs::path scenario = write_default_scenario(dir);
    const fs::path out = dir.path / "plan";
    REQUIRE(run_cli({"plan", "--scenario", scenario.string(), "--seed", "42", "--sigma", "0.1",
                     "--n-max", "1500", "--output", out.string(), "--no-timestamp"}) == 0);
    const json planned = json::parse(slurp(out / "plan_result.json"));
    const double cvar_sum = planned.at("path").at("total_cvar").get<double>();

    char lmax[64];
    std::snprintf(lmax, sizeof(lmax), "%.17g", 2.0 * cvar_sum);
    CHECK(run_cli({"verify-bound", "--input", (out / "plan_result.json").string(), "--l-max", lmax,
                   "--epsilon", "0", "--validate", "--trials", "20000", "--output",
                   (dir.path / "v").string(), "--no-timestamp"}) == 0);
    const json v = json::parse(slurp(dir.path / "v" / "verify_bound.json"));
    CHECK(v.at("markov_bound_raw").get<double>() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(v.at("mc_exceedance").get<double>() <= v.at("markov_bound_raw").get<double>());
    CHECK(v.contains("kl_premise"));

    // A threshold below the CVaR sum makes the raw bound vacuous (> 1).
    std::snprintf(lmax, sizeof(lmax), "%.17g", 0.5 * cvar_sum);
    CHECK(run_cli({"verify-bound", "--input", (out / "plan_result.json").string(), "--l-max", lmax,
                   "--output", (dir.path / "v2").string(), "--no-timestamp"}) == 0);
    const json v2 = json::parse(slurp(dir.path / "v2" / "verify_bound.json"));
    CHECK(v2.at("markov_bound_raw").get<double>() > 1.0);
    CHECK(v2.at("markov_bound").get<double>() == 1.0);

    CHECK(run_cli({"verify-bound", "--input", (dir.path / "nope.json").string(), "--l-max", "10"}) == 1);

    // Idempotent given identical inputs and seed.
    CHECK(run_cli({"verify-bound", "--input", (out / "plan_result.json").string(), "--l-max", lmax,
                   "--output", (dir.path / "v3").string(), "--no-timestamp", "--validate",
                   "--trials", "5000", "--seed", "4"}) == 0);
    CHECK(run_cli({"verify-bound", "--input", (out / "plan_result.json").string(), "--l-max", lmax,
                   "--output", (dir.path / "v4").string(), "--no-timestamp", "--validate",
                   "--trials", "5000", "--seed", "4"}) == 0);
    CHECK(slurp(dir.path / "v3" / "verify_bound.json") == slurp(dir.path / "v4" / "verify_bound.json"));
}

TEST_CASE("render: well-formed SVG with one line per path segment") {
    TempDir dir("riskplan_cli_render");
    const fs::path scenario = write_default_scenario(dir);
    const fs::path out = dir.path / "plan";
    REQUIRE(run_cli({"plan", "--scenario", scenario.string(), "--seed", "42", "--sigma", "0.1",
                     "--n-max", "1500", "--output", out.string(), "--no-timestamp"}) == 0);
    CHECK(run_cli({"render", "--input", (out / "plan_result.json").string(), "--output",
                   (dir.path / "svg").string()}) == 0);
    const std::string svg_text = slurp(dir.path / "svg" / "plan.svg");
    CHECK(xml_well_formed(svg_text));

    const json planned = json::parse(slurp(out / "plan_result.json"));
    const std::size_t waypoints = planned.at("path").at("waypoints").size();
    std::size_t path_lines = 0;
    for (std::size_t pos = 0; (pos = svg_text.find("class=\"path\"", pos)) != std::string::npos;
         ++path_lines, ++pos) {
    }
    CHECK(path_lines == waypoints - 1);

    CHECK(run_cli({"render", "--input", (dir.path / "nothing.json").string()}) == 1);

    CHECK(run_cli({"render", "--input", (out / "plan_result.json").string(), "--output",
                   (dir.path / "svg2").string()}) == 0);
    CHECK(slurp(dir.path / "svg2" / "plan.svg") == svg_text);
}

TEST_CASE("render: failure outcome yields an SVG with obstacles only") {
    const grid::BenchmarkScenario b = grid::build_benchmark_scenario();
    Scenario s;
    s.env = b.env;
    s.start = b.start;
    s.goal = b.goal;
    plan::PlanOutcome failed;
    failed.success = false;
    failed.failure_reason = plan::FailureReason::iteration_cap;
    const std::string text = svg::render(s, failed);
    CHECK(xml_well_formed(text));
    CHECK(text.find("class=\"path\"") == std::string::npos);
    CHECK(text.find("class=\"tree\"") == std::string::npos);
    CHECK(text.find("<circle") != std::string::npos);  // the obstacles
}
