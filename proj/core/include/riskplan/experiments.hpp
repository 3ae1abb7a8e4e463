#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "riskplan/gridworld.hpp"
#include "riskplan/planner.hpp"

// Batch runner and statistics: the alpha x sigma sweep over seeded runs,
// failure rates, worst-case path statistics, and the cost-statistics
// aggregations, all recomputable from the persisted per-run records.

namespace riskplan::experiments {

struct SweepConfig {
    std::vector<double> alphas{0.1, 0.5, 0.9};
    std::vector<double> sigmas{0.01, 0.05, 0.1, 0.5};
    int runs_per_cell = 50;
    std::uint64_t base_seed = 0;
    std::vector<plan::Mode> algorithms{plan::Mode::rrt_star, plan::Mode::ra_rrt_star};
    grid::BenchmarkScenario scenario;
    plan::PlannerParams params;
    // The baseline ignores alpha except for CVaR reporting; collapse it to
    // the first alpha so the sweep matches the four-config table layout.
    bool baseline_single_alpha = false;
    int workers = 1;
    bool record_times = true;

    void validate() const;
};

// Per-run record; everything needed to reaggregate cell statistics.
struct RunRecord {
    plan::Mode algorithm = plan::Mode::ra_rrt_star;
    double alpha = 0.1;
    double sigma = 0.0;
    int run_index = 0;
    std::uint64_t seed = 0;
    bool success = false;
    std::string failure_reason;
    int iterations = 0;
    int node_count = 0;
    int n_segments = 0;
    double wall_time_s = 0.0;
    double total_euclidean = 0.0;  // expected path length (sum of c)
    double total_var = 0.0;        // sum of per-segment VaR at the run alpha
    double total_cvar = 0.0;       // sum of per-segment CVaR at the run alpha
    double var_01 = 0.0, var_09 = 0.0;    // path VaR totals at alpha 0.1 / 0.9
    double cvar_01 = 0.0, cvar_09 = 0.0;  // path CVaR totals at alpha 0.1 / 0.9
};

struct BatchStats {
    int n_runs = 0;
    int n_success = 0;
    double failure_rate = 0.0;
    // Statistics over successful runs; NaN when every run failed.
    double mean_length = 0.0;
    double var_length = 0.0;
    double mean_time = 0.0;
    double median_time = 0.0;
    double worst_case_mean = 0.0;  // mean of per-run CVaR totals
    double worst_case_var = 0.0;
    std::map<double, double> min_var_by_alpha;   // report quantiles 0.1 and 0.9
    std::map<double, double> min_cvar_by_alpha;
    double min_expected = 0.0;
};

struct CellKey {
    plan::Mode algorithm;
    double alpha;
    double sigma;
};

struct SweepResult {
    std::vector<std::pair<CellKey, BatchStats>> cells;
    std::vector<RunRecord> records;
};

// Deterministic per-run seed: hash(base_seed, algorithm, alpha, sigma, run_index).
std::uint64_t run_seed(std::uint64_t base_seed, plan::Mode algorithm, double alpha, double sigma,
                       int run_index);

BatchStats aggregate(std::span<const RunRecord> records);

BatchStats run_cell(const SweepConfig& cfg, plan::Mode algorithm, double alpha, double sigma,
                    std::vector<RunRecord>* out_records = nullptr);

// Full cross product (optionally with the baseline collapsed to one alpha),
// cells ordered by (algorithm, alpha, sigma); results are identical for any
// worker count.
SweepResult sweep(const SweepConfig& cfg);

enum class TrendVerdict { pass, pass_weak, fail, info };
std::string to_string(TrendVerdict v);

struct TrendFinding {
    std::string name;
    double alpha;
    double sigma;
    double ra_value;
    double rrt_value;
    TrendVerdict verdict;
};

struct TrendReport {
    std::vector<TrendFinding> findings;
    bool all_passed = true;  // pass or pass_weak on every non-info finding
};

// Headline orderings per (alpha, sigma): failure rate, path-length
// variance, worst-case mean, plus the RA/baseline mean-time ratio (reported,
// never asserted).
TrendReport trend_report(const SweepResult& result);

nlohmann::json record_to_json(const RunRecord& r);
RunRecord record_from_json(const nlohmann::json& j);
nlohmann::json stats_to_json(const CellKey& key, const BatchStats& stats);
nlohmann::json trend_report_to_json(const TrendReport& report);

void write_jsonl(std::span<const RunRecord> records, const std::string& path);
std::vector<RunRecord> read_jsonl(const std::string& path);
std::string render_jsonl(std::span<const RunRecord> records);

// Rebuild cell statistics from persisted records (recompute-only path).
SweepResult reaggregate(std::vector<RunRecord> records);

// CSV summaries; columns fixed by the external interface.
std::string table1_csv(const SweepResult& result);
std::string table2_csv(const SweepResult& result, double table2_sigma = 0.5);

}  // namespace riskplan::experiments
