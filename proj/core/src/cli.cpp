#include "riskplan/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "riskplan/experiments.hpp"
#include "riskplan/gridworld.hpp"
#include "riskplan/planner.hpp"
#include "riskplan/scenario.hpp"
#include "riskplan/svg.hpp"

namespace riskplan::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitPlannerFailure = 2;

struct PlannerFlags {
    std::optional<double> alpha, sigma, r_m, rho_max, gamma, goal_tol, steer, goal_bias;
    std::optional<int> n_max, k_n, n_c, m_obsappx;
    bool no_snap = false;
    bool continue_after_goal = false;
};

void add_planner_flags(CLI::App* cmd, PlannerFlags& f) {
    cmd->add_option("--alpha", f.alpha, "Confidence level alpha in (0,1)");
    cmd->add_option("--sigma", f.sigma, "Segment noise standard deviation sigma_C");
    cmd->add_option("--n-max", f.n_max, "Maximum number of iterations n_max");
    cmd->add_option("--k-n", f.k_n, "Neighbor count k_n");
    cmd->add_option("--r-m", f.r_m, "Neighborhood radius R_m");
    cmd->add_option("--rho-max", f.rho_max, "Maximum rewiring radius rho_max");
    cmd->add_option("--gamma", f.gamma, "Rewiring radius scale gamma (0 = derive from free area)");
    cmd->add_option("--n-c", f.n_c, "Cost samples per segment n_c");
    cmd->add_option("--goal-tol", f.goal_tol, "Goal tolerance radius");
    cmd->add_option("--steer", f.steer, "Steering step length");
    cmd->add_option("--goal-bias", f.goal_bias, "Goal-biased sampling fraction");
    cmd->add_option("--m-obsappx", f.m_obsappx, "Polyhedral approximation vertex count m_obsappx");
    cmd->add_flag("--no-snap", f.no_snap, "Disable grid snapping of steered configurations");
    cmd->add_flag("--continue-after-goal", f.continue_after_goal,
                  "Keep refining until n_max instead of stopping at first goal attainment");
}

plan::PlannerParams make_params(const Scenario& scenario, const PlannerFlags& f) {
    const bool grid_mode = scenario.grid && scenario.grid->snap && !f.no_snap;
    plan::PlannerParams p = grid_mode
                                ? plan::PlannerParams::grid_defaults(
                                      scenario.env, scenario.grid ? scenario.grid->rho_scale : 1.0)
                                : plan::PlannerParams{};
    if (f.no_snap) p.snap_to_grid = false;
    if (f.alpha) p.risk.alpha = *f.alpha;
    if (f.sigma) p.sigma_schedule = {*f.sigma};
    if (f.n_max) p.n_max = *f.n_max;
    if (f.k_n) p.k_n = *f.k_n;
    if (f.r_m) p.neighborhood_radius = *f.r_m;
    if (f.rho_max) p.rho_max = *f.rho_max;
    if (f.gamma) p.gamma = *f.gamma;
    if (f.n_c) p.risk.n_c = *f.n_c;
    if (f.goal_tol) p.goal_tolerance = *f.goal_tol;
    if (f.steer) p.steer_step = *f.steer;
    if (f.goal_bias) p.goal_bias = *f.goal_bias;
    p.continue_after_goal = f.continue_after_goal;
    return p;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("RISKPLAN_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return 0;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ScenarioError("cannot create output directory: " + dir);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ScenarioError("cannot write output file: " + path);
    out << text;
}

std::string timestamp_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

// ------------------------------------------------------------------------ plan

struct PlanArgs {
    std::string scenario_path;
    std::string output_dir = ".";
    std::optional<std::uint64_t> seed;
    std::string algorithm = "ra_rrt_star";
    bool no_timestamp = false;
    PlannerFlags flags;
};

int cmd_plan(const PlanArgs& args) {
    const Scenario scenario = load_scenario(args.scenario_path);
    if (!scenario.start || !scenario.goal) {
        throw ScenarioError(args.scenario_path + ": scenario needs 'start' and 'goal' for planning");
    }
    Scenario effective = scenario;
    if (args.flags.m_obsappx) effective.env.approx_vertices = *args.flags.m_obsappx;

    const plan::PlannerParams params = make_params(effective, args.flags);
    const std::uint64_t seed = resolve_seed(args.seed);
    const plan::Mode mode = plan::mode_from_string(args.algorithm);

    const plan::PlanOutcome out =
        plan::plan(effective.env, *effective.start, *effective.goal, params, mode, seed);

    ensure_dir(args.output_dir);
    plan::OutcomeJsonOptions opts;
    opts.include_times = !args.no_timestamp;
    json doc = plan::outcome_to_json(out, opts);
    doc["scenario"] = scenario_to_json(effective);
    if (!args.no_timestamp) doc["generated_at"] = timestamp_now();
    const std::string path = (fs::path(args.output_dir) / "plan_result.json").string();
    write_text(path, doc.dump(2) + "\n");

    if (out.success) {
        std::printf("SUCCESS length=%.4f cvar_total=%.4f iterations=%d nodes=%d time=%.4fs -> %s\n",
                    out.path.total_euclidean, out.path.total_cvar, out.iterations, out.node_count,
                    out.wall_time_s, path.c_str());
        return kExitOk;
    }
    std::printf("FAILURE reason=%s iterations=%d nodes=%d -> %s\n",
                plan::to_string(out.failure_reason).c_str(), out.iterations, out.node_count,
                path.c_str());
    return kExitPlannerFailure;
}

// ------------------------------------------------------------------- benchmark

struct BenchmarkArgs {
    std::string scenario_path;
    std::string output_dir = ".";
    std::optional<std::uint64_t> seed;
    std::vector<double> alphas{0.1, 0.5, 0.9};
    std::vector<double> sigmas{0.01, 0.05, 0.1, 0.5};
    std::vector<std::string> algorithms{"rrt_star", "ra_rrt_star"};
    int runs_per_cell = 50;
    int workers = 1;
    bool no_timestamp = false;
    bool recompute_only = false;
    std::string format = "csv";
    PlannerFlags flags;
};

void write_benchmark_outputs(const BenchmarkArgs& args, const experiments::SweepResult& result) {
    const fs::path dir(args.output_dir);
    write_text((dir / "results.jsonl").string(), experiments::render_jsonl(result.records));
    write_text((dir / "table1.csv").string(), experiments::table1_csv(result));
    write_text((dir / "table2.csv").string(), experiments::table2_csv(result));

    json stats = json::array();
    for (const auto& [key, cell] : result.cells) {
        stats.push_back(experiments::stats_to_json(key, cell));
    }
    const experiments::TrendReport trends = experiments::trend_report(result);
    json doc;
    doc["cells"] = std::move(stats);
    doc["trends"] = experiments::trend_report_to_json(trends);
    if (!args.no_timestamp) doc["generated_at"] = timestamp_now();
    write_text((dir / "summary.json").string(), doc.dump(2) + "\n");

    if (args.format == "json") {
        std::cout << experiments::trend_report_to_json(trends).dump(2) << "\n";
    } else {
        for (const auto& f : trends.findings) {
            std::printf("%-16s alpha=%-4g sigma=%-5g ra=%-10.5g rrt=%-10.5g %s\n", f.name.c_str(),
                        f.alpha, f.sigma, f.ra_value, f.rrt_value,
                        experiments::to_string(f.verdict).c_str());
        }
    }
}

int cmd_benchmark(const BenchmarkArgs& args) {
    ensure_dir(args.output_dir);

    if (args.recompute_only) {
        const auto records =
            experiments::read_jsonl((fs::path(args.output_dir) / "results.jsonl").string());
        write_benchmark_outputs(args, experiments::reaggregate(std::move(records)));
        return kExitOk;
    }

    experiments::SweepConfig cfg;
    if (!args.scenario_path.empty()) {
        const Scenario s = load_scenario(args.scenario_path);
        if (!s.start || !s.goal) {
            throw ScenarioError(args.scenario_path + ": benchmark scenario needs start and goal");
        }
        cfg.scenario = grid::BenchmarkScenario{s.env, *s.start, *s.goal, s.description};
        Scenario eff = s;
        if (args.flags.m_obsappx) cfg.scenario.env.approx_vertices = *args.flags.m_obsappx;
        cfg.params = make_params(eff, args.flags);
    } else {
        cfg.scenario = grid::build_benchmark_scenario();
        if (args.flags.m_obsappx) cfg.scenario.env.approx_vertices = *args.flags.m_obsappx;
        Scenario wrapper;
        wrapper.env = cfg.scenario.env;
        wrapper.grid = GridSpec{};
        cfg.params = make_params(wrapper, args.flags);
    }
    cfg.alphas = args.alphas;
    cfg.sigmas = args.sigmas;
    cfg.runs_per_cell = args.runs_per_cell;
    cfg.base_seed = resolve_seed(args.seed);
    cfg.workers = args.workers;
    cfg.record_times = !args.no_timestamp;
    cfg.baseline_single_alpha = true;
    cfg.algorithms.clear();
    for (const auto& a : args.algorithms) cfg.algorithms.push_back(plan::mode_from_string(a));

    const experiments::SweepResult result = experiments::sweep(cfg);
    write_benchmark_outputs(args, result);
    return kExitOk;  // failed trends are data, not errors
}

// ---------------------------------------------------------------- verify-bound

struct VerifyArgs {
    std::string input_path;
    std::string output_dir = ".";
    double l_max = 0.0;
    double delta = 0.1;
    double epsilon = 0.0;
    bool validate = false;
    int trials = 100000;
    std::optional<std::uint64_t> seed;
    bool no_timestamp = false;
};

int cmd_verify_bound(const VerifyArgs& args) {
    double cvar_sum = 0.0;
    double alpha = 0.0;
    std::vector<risk::SegmentCost> segments;

    if (args.input_path.size() > 6 &&
        args.input_path.substr(args.input_path.size() - 6) == ".jsonl") {
        const auto records = experiments::read_jsonl(args.input_path);
        const experiments::RunRecord* best = nullptr;
        for (const auto& r : records) {
            if (r.success && (!best || r.total_cvar < best->total_cvar)) best = &r;
        }
        if (!best) throw ScenarioError(args.input_path + ": no successful run to verify");
        cvar_sum = best->total_cvar;
        alpha = best->alpha;
        if (args.validate) {
            throw ScenarioError(
                "--validate needs a plan outcome file with per-segment costs, not a JSONL summary");
        }
    } else {
        std::ifstream in(args.input_path);
        if (!in) throw ScenarioError("cannot open result file: " + args.input_path);
        json j;
        try {
            in >> j;
        } catch (const json::parse_error& e) {
            throw ScenarioError(args.input_path + ": " + e.what());
        }
        const plan::PlanOutcome out = plan::outcome_from_json(j);
        if (!out.success) throw ScenarioError(args.input_path + ": outcome is a planner failure");
        cvar_sum = out.path.total_cvar;
        alpha = out.alpha;
        segments = out.path.segment_costs;
    }

    risk::GuaranteeInputs g;
    g.cvar_sum = cvar_sum;
    g.l_max = args.l_max;
    g.delta = args.delta;
    g.epsilon = args.epsilon;
    g.alpha = alpha;
    const risk::MarkovBound bound = risk::markov_upper_bound(g);
    const double expectation_bound = cvar_sum + args.epsilon / alpha;
    const double sd = risk::sigma_delta(args.delta);

    json doc;
    doc["input"] = args.input_path;
    doc["cvar_sum"] = cvar_sum;
    doc["alpha"] = alpha;
    doc["l_max"] = args.l_max;
    doc["delta"] = args.delta;
    doc["sigma_delta"] = sd;
    doc["epsilon"] = args.epsilon;
    doc["markov_bound_raw"] = bound.raw;
    doc["markov_bound"] = bound.clamped;
    doc["expectation_bound"] = expectation_bound;

    std::printf("P(L_worst >= %.4f) <= %.6f (raw %.6f%s)\n", args.l_max, bound.clamped, bound.raw,
                bound.raw > 1.0 ? "; Markov bound is vacuous here" : "");
    std::printf("E[L_worst] <= %.6f\n", expectation_bound);

    if (!segments.empty()) {
        double sum_c = 0.0, var_sum = 0.0;
        for (const auto& s : segments) {
            sum_c += s.c;
            var_sum += s.sigma * s.sigma;
        }
        const double sigma_lstar = std::sqrt(var_sum);
        const double n = static_cast<double>(segments.size());
        if (sigma_lstar > 0.0) {
            const double kl = risk::kl_gaussian(sum_c, sd * std::sqrt(n), sum_c, sigma_lstar);
            doc["kl_premise"] = kl;
            doc["kl_premise_satisfied"] = kl <= args.epsilon;
            std::printf("KL premise: D = %.6f (budget epsilon = %g) -> %s\n", kl, args.epsilon,
                        kl <= args.epsilon ? "satisfied" : "NOT satisfied");
        }
        if (args.validate) {
            RngStream rng(derive_key(resolve_seed(args.seed), 0xb0c4d5e6ull));
            int exceed = 0;
            for (int t = 0; t < args.trials; ++t) {
                double total = 0.0;
                for (const auto& s : segments) total += rng.normal(s.c, s.sigma);
                if (total >= args.l_max) ++exceed;
            }
            const double freq = static_cast<double>(exceed) / args.trials;
            doc["mc_trials"] = args.trials;
            doc["mc_exceedance"] = freq;
            doc["mc_within_bound"] = freq <= bound.raw;
            std::printf("Monte Carlo exceedance over %d trials: %.6f (%s raw bound)\n", args.trials,
                        freq, freq <= bound.raw ? "within" : "EXCEEDS");
        }
    }

    ensure_dir(args.output_dir);
    if (!args.no_timestamp) doc["generated_at"] = timestamp_now();
    write_text((fs::path(args.output_dir) / "verify_bound.json").string(), doc.dump(2) + "\n");
    return kExitOk;
}

// ---------------------------------------------------------------------- render

struct RenderArgs {
    std::string input_path;
    std::string output_dir = ".";
};

int cmd_render(const RenderArgs& args) {
    std::ifstream in(args.input_path);
    if (!in) throw ScenarioError("cannot open outcome file: " + args.input_path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ScenarioError(args.input_path + ": " + e.what());
    }
    if (!j.contains("scenario")) {
        throw ScenarioError(args.input_path + ": outcome file lacks an embedded scenario");
    }
    Scenario scenario;
    plan::PlanOutcome outcome;
    try {
        scenario = scenario_from_json(j.at("scenario"));
        outcome = plan::outcome_from_json(j);
    } catch (const json::exception& e) {
        throw ScenarioError(args.input_path + ": " + e.what());
    }

    ensure_dir(args.output_dir);
    const std::string path = (fs::path(args.output_dir) / "plan.svg").string();
    write_text(path, svg::render(scenario, outcome));
    std::printf("wrote %s\n", path.c_str());
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"Risk-aware RRT* planning toolkit"};
    app.require_subcommand(1);

    PlanArgs plan_args;
    CLI::App* plan_cmd = app.add_subcommand("plan", "Plan a single query and write the outcome JSON");
    plan_cmd->add_option("--scenario", plan_args.scenario_path, "Scenario JSON file")->required();
    plan_cmd->add_option("--output", plan_args.output_dir, "Output directory");
    plan_cmd->add_option("--seed", plan_args.seed, "RNG seed (fallback: RISKPLAN_SEED)");
    plan_cmd->add_option("--algorithm", plan_args.algorithm, "rrt_star or ra_rrt_star")
        ->check(CLI::IsMember({"rrt_star", "ra_rrt_star"}));
    plan_cmd->add_flag("--no-timestamp", plan_args.no_timestamp,
                       "Omit timestamps and wall-clock fields for byte-reproducible output");
    add_planner_flags(plan_cmd, plan_args.flags);

    BenchmarkArgs bench_args;
    CLI::App* bench_cmd =
        app.add_subcommand("benchmark", "Run the seeded sweep and write JSONL + CSV summaries");
    bench_cmd->add_option("--scenario", bench_args.scenario_path,
                          "Scenario JSON (default: built-in benchmark world)");
    bench_cmd->add_option("--output", bench_args.output_dir, "Output directory");
    bench_cmd->add_option("--seed", bench_args.seed, "Base seed (fallback: RISKPLAN_SEED)");
    bench_cmd->add_option("--alphas", bench_args.alphas, "Confidence levels to sweep");
    bench_cmd->add_option("--sigmas", bench_args.sigmas, "Noise levels to sweep");
    bench_cmd->add_option("--algorithms", bench_args.algorithms, "Planner modes to sweep");
    bench_cmd->add_option("--runs-per-cell", bench_args.runs_per_cell, "Seeded runs per cell");
    bench_cmd->add_option("--workers", bench_args.workers, "Worker threads (results identical for any N)");
    bench_cmd->add_option("--format", bench_args.format, "Stdout summary format")
        ->check(CLI::IsMember({"json", "csv"}));
    bench_cmd->add_flag("--no-timestamp", bench_args.no_timestamp,
                        "Omit timestamps and wall-clock fields for byte-reproducible output");
    bench_cmd->add_flag("--recompute-only", bench_args.recompute_only,
                        "Rebuild summaries from an existing results.jsonl without planning");
    add_planner_flags(bench_cmd, bench_args.flags);

    VerifyArgs verify_args;
    CLI::App* verify_cmd = app.add_subcommand(
        "verify-bound", "Compute the exceedance probability bound for a planned path");
    verify_cmd->add_option("--input", verify_args.input_path, "plan_result.json or results.jsonl")
        ->required();
    verify_cmd->add_option("--l-max", verify_args.l_max, "Path length threshold L_max")->required();
    verify_cmd->add_option("--delta", verify_args.delta, "Tolerance on L_max");
    verify_cmd->add_option("--epsilon", verify_args.epsilon, "KL divergence budget");
    verify_cmd->add_flag("--validate", verify_args.validate,
                         "Replay the path's segment costs and compare Monte Carlo exceedance");
    verify_cmd->add_option("--trials", verify_args.trials, "Monte Carlo trials for --validate");
    verify_cmd->add_option("--seed", verify_args.seed, "RNG seed for --validate");
    verify_cmd->add_option("--output", verify_args.output_dir, "Output directory");
    verify_cmd->add_flag("--no-timestamp", verify_args.no_timestamp, "Omit timestamps");

    RenderArgs render_args;
    CLI::App* render_cmd = app.add_subcommand("render", "Render a plan outcome as SVG");
    render_cmd->add_option("--input", render_args.input_path, "plan_result.json")->required();
    render_cmd->add_option("--output", render_args.output_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (plan_cmd->parsed()) return cmd_plan(plan_args);
        if (bench_cmd->parsed()) return cmd_benchmark(bench_args);
        if (verify_cmd->parsed()) return cmd_verify_bound(verify_args);
        if (render_cmd->parsed()) return cmd_render(render_args);
    } catch (const ScenarioError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
    return kExitConfig;
}

}  // namespace riskplan::cli
