#include "riskplan/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

namespace riskplan::experiments {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t double_label(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    return bits;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (const double x : v) s += x;
    return s / static_cast<double>(v.size());
}

// Unbiased sample variance; 0 for a single observation.
double variance_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (const double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

void SweepConfig::validate() const {
    if (runs_per_cell < 1) throw std::invalid_argument("runs_per_cell must be >= 1");
    for (const double a : alphas) {
        if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("sweep alphas must lie in (0, 1)");
    }
    for (const double s : sigmas) {
        if (!(s >= 0.0)) throw std::invalid_argument("sweep sigmas must be >= 0");
    }
    if (alphas.empty() || sigmas.empty() || algorithms.empty()) {
        throw std::invalid_argument("sweep needs at least one alpha, sigma, and algorithm");
    }
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
}

std::uint64_t run_seed(std::uint64_t base_seed, plan::Mode algorithm, double alpha, double sigma,
                       int run_index) {
    std::uint64_t key = derive_key(base_seed, algorithm == plan::Mode::rrt_star ? 1 : 2);
    key = derive_key(key, double_label(alpha));
    key = derive_key(key, double_label(sigma));
    return derive_key(key, static_cast<std::uint64_t>(run_index));
}

namespace {

RunRecord execute_run(const SweepConfig& cfg, plan::Mode algorithm, double alpha, double sigma,
                      int run_index) {
    RunRecord r;
    r.algorithm = algorithm;
    r.alpha = alpha;
    r.sigma = sigma;
    r.run_index = run_index;
    r.seed = run_seed(cfg.base_seed, algorithm, alpha, sigma, run_index);

    plan::PlannerParams p = cfg.params;
    p.risk.alpha = alpha;
    p.risk.rng_seed = r.seed;
    p.sigma_schedule = {sigma};

    const plan::PlanOutcome out =
        plan::plan(cfg.scenario.env, cfg.scenario.start, cfg.scenario.goal, p, algorithm, r.seed);

    r.success = out.success;
    if (!out.success) r.failure_reason = plan::to_string(out.failure_reason);
    r.iterations = out.iterations;
    r.node_count = out.node_count;
    r.n_segments = static_cast<int>(out.path.segment_costs.size());
    r.wall_time_s = cfg.record_times ? out.wall_time_s : 0.0;
    if (out.success) {
        r.total_euclidean = out.path.total_euclidean;
        r.total_cvar = out.path.total_cvar;
        for (const auto& sc : out.path.segment_costs) {
            r.total_var += risk::var_alpha(sc, alpha);
            r.var_01 += risk::var_alpha(sc, 0.1);
            r.var_09 += risk::var_alpha(sc, 0.9);
            r.cvar_01 += risk::cvar_alpha(sc, 0.1);
            r.cvar_09 += risk::cvar_alpha(sc, 0.9);
        }
    }
    return r;
}

}  // namespace

BatchStats aggregate(std::span<const RunRecord> records) {
    BatchStats s;
    s.n_runs = static_cast<int>(records.size());
    std::vector<double> lengths, times, worsts, var01, var09, cvar01, cvar09, expected;
    for (const auto& r : records) {
        if (!r.success) continue;
        ++s.n_success;
        lengths.push_back(r.total_euclidean);
        times.push_back(r.wall_time_s);
        worsts.push_back(r.total_cvar);
        var01.push_back(r.var_01);
        var09.push_back(r.var_09);
        cvar01.push_back(r.cvar_01);
        cvar09.push_back(r.cvar_09);
        expected.push_back(r.total_euclidean);
    }
    s.failure_rate = s.n_runs == 0
                         ? 0.0
                         : static_cast<double>(s.n_runs - s.n_success) / static_cast<double>(s.n_runs);
    if (s.n_success == 0) {
        s.mean_length = s.var_length = s.mean_time = s.median_time = kNaN;
        s.worst_case_mean = s.worst_case_var = s.min_expected = kNaN;
        s.min_var_by_alpha = {{0.1, kNaN}, {0.9, kNaN}};
        s.min_cvar_by_alpha = {{0.1, kNaN}, {0.9, kNaN}};
        return s;
    }
    s.mean_length = mean_of(lengths);
    s.var_length = variance_of(lengths);
    s.mean_time = mean_of(times);
    s.median_time = median_of(times);
    s.worst_case_mean = mean_of(worsts);
    s.worst_case_var = variance_of(worsts);
    s.min_var_by_alpha = {{0.1, *std::min_element(var01.begin(), var01.end())},
                          {0.9, *std::min_element(var09.begin(), var09.end())}};
    s.min_cvar_by_alpha = {{0.1, *std::min_element(cvar01.begin(), cvar01.end())},
                           {0.9, *std::min_element(cvar09.begin(), cvar09.end())}};
    s.min_expected = *std::min_element(expected.begin(), expected.end());
    return s;
}

BatchStats run_cell(const SweepConfig& cfg, plan::Mode algorithm, double alpha, double sigma,
                    std::vector<RunRecord>* out_records) {
    cfg.validate();
    std::vector<RunRecord> records;
    records.reserve(static_cast<std::size_t>(cfg.runs_per_cell));
    for (int i = 0; i < cfg.runs_per_cell; ++i) {
        records.push_back(execute_run(cfg, algorithm, alpha, sigma, i));
    }
    const BatchStats stats = aggregate(records);
    if (out_records) *out_records = std::move(records);
    return stats;
}

SweepResult sweep(const SweepConfig& cfg) {
    cfg.validate();

    struct RunSlot {
        plan::Mode algorithm;
        double alpha;
        double sigma;
        int run_index;
    };
    std::vector<CellKey> cells;
    std::vector<RunSlot> slots;
    for (const plan::Mode m : cfg.algorithms) {
        const std::size_t n_alphas =
            (cfg.baseline_single_alpha && m == plan::Mode::rrt_star) ? 1 : cfg.alphas.size();
        for (std::size_t ia = 0; ia < n_alphas; ++ia) {
            for (const double sigma : cfg.sigmas) {
                cells.push_back(CellKey{m, cfg.alphas[ia], sigma});
                for (int i = 0; i < cfg.runs_per_cell; ++i) {
                    slots.push_back(RunSlot{m, cfg.alphas[ia], sigma, i});
                }
            }
        }
    }

    std::vector<RunRecord> records(slots.size());
    const int workers = std::max(1, cfg.workers);
    if (workers == 1) {
        for (std::size_t i = 0; i < slots.size(); ++i) {
            records[i] = execute_run(cfg, slots[i].algorithm, slots[i].alpha, slots[i].sigma,
                                     slots[i].run_index);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < slots.size(); i = next.fetch_add(1)) {
                    records[i] = execute_run(cfg, slots[i].algorithm, slots[i].alpha,
                                             slots[i].sigma, slots[i].run_index);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    SweepResult result;
    result.records = std::move(records);
    std::size_t offset = 0;
    const auto per_cell = static_cast<std::size_t>(cfg.runs_per_cell);
    for (const CellKey& key : cells) {
        result.cells.emplace_back(
            key, aggregate(std::span<const RunRecord>(result.records).subspan(offset, per_cell)));
        offset += per_cell;
    }
    return result;
}

SweepResult reaggregate(std::vector<RunRecord> records) {
    // Records group into cells by (algorithm, alpha, sigma) in file order.
    SweepResult result;
    result.records = std::move(records);
    std::size_t begin = 0;
    for (std::size_t i = 0; i <= result.records.size(); ++i) {
        const bool boundary =
            i == result.records.size() ||
            (i > begin && (result.records[i].algorithm != result.records[begin].algorithm ||
                           result.records[i].alpha != result.records[begin].alpha ||
                           result.records[i].sigma != result.records[begin].sigma));
        if (!boundary) continue;
        if (i > begin) {
            const auto& first = result.records[begin];
            result.cells.emplace_back(
                CellKey{first.algorithm, first.alpha, first.sigma},
                aggregate(std::span<const RunRecord>(result.records).subspan(begin, i - begin)));
        }
        begin = i;
    }
    return result;
}

std::string to_string(TrendVerdict v) {
    switch (v) {
        case TrendVerdict::pass: return "pass";
        case TrendVerdict::pass_weak: return "pass (weak)";
        case TrendVerdict::fail: return "fail";
        default: return "info";
    }
}

namespace {

TrendVerdict ordering_verdict(double ra, double rrt) {
    if (std::isnan(ra) || std::isnan(rrt)) return TrendVerdict::fail;
    if (ra < rrt) return TrendVerdict::pass;
    if (ra == rrt) return TrendVerdict::pass_weak;
    return TrendVerdict::fail;
}

}  // namespace

TrendReport trend_report(const SweepResult& result) {
    TrendReport report;
    const auto find_cell = [&](plan::Mode m, double alpha,
                               double sigma) -> const BatchStats* {
        const BatchStats* fallback = nullptr;
        for (const auto& [key, stats] : result.cells) {
            if (key.algorithm != m || key.sigma != sigma) continue;
            if (key.alpha == alpha) return &stats;
            if (!fallback) fallback = &stats;  // collapsed-baseline cell
        }
        return fallback;
    };

    bool any_pair = false;
    for (const auto& [key, ra] : result.cells) {
        if (key.algorithm != plan::Mode::ra_rrt_star) continue;
        const BatchStats* rrt = find_cell(plan::Mode::rrt_star, key.alpha, key.sigma);
        if (!rrt) continue;
        any_pair = true;

        const auto push = [&](const char* name, double ra_v, double rrt_v, TrendVerdict v) {
            report.findings.push_back(TrendFinding{name, key.alpha, key.sigma, ra_v, rrt_v, v});
            if (v == TrendVerdict::fail) report.all_passed = false;
        };
        // Failure rate, length variance, and timing are alpha-independent for
        // the baseline, so a collapsed-baseline cell is a fair comparison.
        push("failure_rate", ra.failure_rate, rrt->failure_rate,
             ordering_verdict(ra.failure_rate, rrt->failure_rate));
        push("length_variance", ra.var_length, rrt->var_length,
             ordering_verdict(ra.var_length, rrt->var_length));
        // Worst-case totals are CVaR sums at the cell's alpha; comparing
        // across different alphas would mix incompatible tail levels.
        const BatchStats* matched = nullptr;
        for (const auto& [k2, s2] : result.cells) {
            if (k2.algorithm == plan::Mode::rrt_star && k2.sigma == key.sigma &&
                k2.alpha == key.alpha) {
                matched = &s2;
            }
        }
        if (matched) {
            push("worst_case_mean", ra.worst_case_mean, matched->worst_case_mean,
                 ordering_verdict(ra.worst_case_mean, matched->worst_case_mean));
        }
        const double ratio = (rrt->mean_time > 0.0) ? ra.mean_time / rrt->mean_time : kNaN;
        push("time_ratio", ratio, 1.0, TrendVerdict::info);
    }
    if (!any_pair) {
        throw std::invalid_argument("trend_report: needs cells for both algorithms");
    }
    return report;
}

// ----------------------------------------------------------------- persistence

json record_to_json(const RunRecord& r) {
    json j;
    j["algorithm"] = plan::to_string(r.algorithm);
    j["alpha"] = r.alpha;
    j["sigma"] = r.sigma;
    j["run_index"] = r.run_index;
    j["seed"] = r.seed;
    j["success"] = r.success;
    if (!r.success) j["failure_reason"] = r.failure_reason;
    j["iterations"] = r.iterations;
    j["node_count"] = r.node_count;
    j["n_segments"] = r.n_segments;
    j["wall_time_s"] = r.wall_time_s;
    j["total_euclidean"] = r.total_euclidean;
    j["total_var"] = r.total_var;
    j["total_cvar"] = r.total_cvar;
    j["var_01"] = r.var_01;
    j["var_09"] = r.var_09;
    j["cvar_01"] = r.cvar_01;
    j["cvar_09"] = r.cvar_09;
    return j;
}

RunRecord record_from_json(const json& j) {
    RunRecord r;
    r.algorithm = plan::mode_from_string(j.at("algorithm").get<std::string>());
    r.alpha = j.at("alpha").get<double>();
    r.sigma = j.at("sigma").get<double>();
    r.run_index = j.at("run_index").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.success = j.at("success").get<bool>();
    if (j.contains("failure_reason")) r.failure_reason = j.at("failure_reason").get<std::string>();
    r.iterations = j.at("iterations").get<int>();
    r.node_count = j.at("node_count").get<int>();
    r.n_segments = j.at("n_segments").get<int>();
    r.wall_time_s = j.at("wall_time_s").get<double>();
    r.total_euclidean = j.at("total_euclidean").get<double>();
    r.total_var = j.at("total_var").get<double>();
    r.total_cvar = j.at("total_cvar").get<double>();
    r.var_01 = j.at("var_01").get<double>();
    r.var_09 = j.at("var_09").get<double>();
    r.cvar_01 = j.at("cvar_01").get<double>();
    r.cvar_09 = j.at("cvar_09").get<double>();
    return r;
}

json stats_to_json(const CellKey& key, const BatchStats& stats) {
    const auto num = [](double v) { return std::isnan(v) ? json() : json(v); };
    json j;
    j["algorithm"] = plan::to_string(key.algorithm);
    j["alpha"] = key.alpha;
    j["sigma"] = key.sigma;
    j["n_runs"] = stats.n_runs;
    j["n_success"] = stats.n_success;
    j["failure_rate"] = stats.failure_rate;
    j["mean_length"] = num(stats.mean_length);
    j["var_length"] = num(stats.var_length);
    j["mean_time"] = num(stats.mean_time);
    j["median_time"] = num(stats.median_time);
    j["worst_case_mean"] = num(stats.worst_case_mean);
    j["worst_case_var"] = num(stats.worst_case_var);
    j["min_var_0.1"] = num(stats.min_var_by_alpha.at(0.1));
    j["min_var_0.9"] = num(stats.min_var_by_alpha.at(0.9));
    j["min_cvar_0.1"] = num(stats.min_cvar_by_alpha.at(0.1));
    j["min_cvar_0.9"] = num(stats.min_cvar_by_alpha.at(0.9));
    j["min_expected"] = num(stats.min_expected);
    return j;
}

json trend_report_to_json(const TrendReport& report) {
    json j;
    j["all_passed"] = report.all_passed;
    j["findings"] = json::array();
    for (const auto& f : report.findings) {
        j["findings"].push_back({{"name", f.name},
                                 {"alpha", f.alpha},
                                 {"sigma", f.sigma},
                                 {"ra_value", std::isnan(f.ra_value) ? json() : json(f.ra_value)},
                                 {"rrt_value", std::isnan(f.rrt_value) ? json() : json(f.rrt_value)},
                                 {"verdict", to_string(f.verdict)}});
    }
    return j;
}

std::string render_jsonl(std::span<const RunRecord> records) {
    std::string out;
    for (const auto& r : records) {
        out += record_to_json(r).dump();
        out += '\n';
    }
    return out;
}

void write_jsonl(std::span<const RunRecord> records, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write results file: " + path);
    f << render_jsonl(records);
}

std::vector<RunRecord> read_jsonl(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open results file: " + path);
    std::vector<RunRecord> records;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        records.push_back(record_from_json(json::parse(line)));
    }
    return records;
}

// ------------------------------------------------------------------------- CSV

namespace {

std::string csv_number(double v) {
    if (std::isnan(v)) return "nan";
    return json(v).dump();  // shortest round-trip representation
}

}  // namespace

std::string table1_csv(const SweepResult& result) {
    std::ostringstream out;
    out << "algorithm,alpha,sigma,mean_len,var_len,failure_rate,mean_time,worst_mean,worst_var\n";
    for (const auto& [key, s] : result.cells) {
        out << plan::to_string(key.algorithm) << ',' << csv_number(key.alpha) << ','
            << csv_number(key.sigma) << ',' << csv_number(s.mean_length) << ','
            << csv_number(s.var_length) << ',' << csv_number(s.failure_rate) << ','
            << csv_number(s.mean_time) << ',' << csv_number(s.worst_case_mean) << ','
            << csv_number(s.worst_case_var) << '\n';
    }
    return out.str();
}

std::string table2_csv(const SweepResult& result, double table2_sigma) {
    std::ostringstream out;
    out << "algorithm,alpha,min_var_0.1,min_var_0.9,min_cvar_0.1,min_cvar_0.9,min_expected\n";
    for (const auto& [key, s] : result.cells) {
        if (key.sigma != table2_sigma) continue;
        out << plan::to_string(key.algorithm) << ',' << csv_number(key.alpha) << ','
            << csv_number(s.min_var_by_alpha.at(0.1)) << ','
            << csv_number(s.min_var_by_alpha.at(0.9)) << ','
            << csv_number(s.min_cvar_by_alpha.at(0.1)) << ','
            << csv_number(s.min_cvar_by_alpha.at(0.9)) << ','
            << csv_number(s.min_expected) << '\n';
    }
    return out.str();
}

}  // namespace riskplan::experiments
