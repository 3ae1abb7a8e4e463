#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "riskplan/geometry.hpp"
#include "riskplan/risk.hpp"
#include "riskplan/rng.hpp"

// The tree data structure, the baseline RRT*, and the risk-aware variant
// that selects each new node's parent by minimal empirical CVaR of the
// connecting segment's random length.

namespace riskplan::plan {

using geom::Config;

struct Node {
    std::uint32_t id = 0;
    Config config;
    std::optional<std::uint32_t> parent;  // empty for the root
    double cost_to_root = 0.0;  // accumulated CVaR (risk-aware) or measured lengths (baseline)
    double edge_cost = 0.0;               // frozen cost of the parent edge under the active model
    double edge_c = 0.0;                  // Euclidean length of the parent edge
    double edge_sigma = 0.0;              // noise level in effect when the edge was created
};

// Uniform bucket grid over the workspace supporting nearest / k-nearest /
// radius queries. Ties always break toward the lower node id.
class SpatialGrid {
  public:
    SpatialGrid(const geom::Rect& bounds, double cell);

    void insert(std::uint32_t id, const Config& c);
    std::uint32_t nearest(const Config& q, std::span<const Node> nodes) const;
    // Ids within the closed ball of radius r, sorted by (distance, id).
    std::vector<std::uint32_t> radius(const Config& q, double r, std::span<const Node> nodes) const;
    std::size_t memory_bytes() const;

  private:
    std::size_t cell_index(int ix, int iy) const;
    geom::Rect bounds_;
    double cell_;
    int nx_, ny_;
    std::vector<std::vector<std::uint32_t>> cells_;
};

class Tree {
  public:
    Tree(const Config& root, const geom::Rect& bounds, double cell);

    const Node& node(std::uint32_t id) const { return nodes_[id]; }
    const std::vector<Node>& nodes() const { return nodes_; }
    std::size_t size() const { return nodes_.size(); }

    std::uint32_t add(const Config& c, std::uint32_t parent, double edge_cost, double edge_c,
                      double edge_sigma);
    // Reattach `id` under `new_parent` and shift the whole subtree's
    // cost_to_root by the induced delta.
    void reparent(std::uint32_t id, std::uint32_t new_parent, double edge_cost, double edge_c,
                  double edge_sigma);
    bool is_ancestor(std::uint32_t maybe_ancestor, std::uint32_t of) const;

    std::uint32_t nearest(const Config& q) const { return index_.nearest(q, nodes_); }
    std::vector<std::uint32_t> within(const Config& q, double r) const {
        return index_.radius(q, r, nodes_);
    }
    std::size_t memory_bytes() const;

  private:
    std::vector<Node> nodes_;
    std::vector<std::vector<std::uint32_t>> children_;
    SpatialGrid index_;
};

enum class Mode { rrt_star, ra_rrt_star };
enum class ParentMode { nearest, k_neighbors };
enum class FailureReason { none, iteration_cap, exhausted };

std::string to_string(Mode m);
std::string to_string(FailureReason r);
Mode mode_from_string(const std::string& s);

struct PlannerParams {
    int n_max = 3000;
    double neighborhood_radius = 0.5;  // R_m for GetNeighbors
    int k_n = 8;
    double rho_max = 0.5;    // cap on the shrinking rewiring radius
    double gamma = 0.0;      // 0 = derive from free-space area at plan time
    double steer_step = 0.25;
    double goal_tolerance = 0.15;
    risk::RiskParams risk;
    std::vector<double> sigma_schedule{0.1};  // one entry = constant sigma
    double goal_bias = 0.05;
    std::optional<double> sample_window_halfwidth;  // window centered on the last-added node
    bool snap_to_grid = false;
    bool continue_after_goal = false;
    ParentMode parent_mode = ParentMode::nearest;  // baseline parent rule
    bool record_best_cost_trace = false;

    double sigma_at(int k) const;
    void validate() const;

    // Grid-mode parameterization: single-cell moves, the 8-connected
    // neighborhood, and rewiring capped at the move-length threshold.
    static PlannerParams grid_defaults(const geom::Environment& env, double rho_scale = 1.0);
};

// Rewiring-radius scale from the free-space area heuristic,
// 2 ((1 + 1/d) area/pi)^(1/2) with d = 2.
double gamma_from_environment(const geom::Environment& env);

struct Counters {
    std::uint64_t samples_drawn = 0;
    std::uint64_t rejected_samples = 0;
    std::uint64_t collision_tests = 0;
    std::uint64_t parent_edge_checks = 0;
    std::uint64_t cvar_evaluations = 0;
    std::uint64_t cost_samples_drawn = 0;
    std::uint64_t blacklisted_edges = 0;
    std::uint64_t blacklist_hits = 0;
    std::uint64_t literal_rule_divergences = 0;
    double n_ra_mean = 0.0;
    std::uint64_t n_ra_max = 0;
    std::uint64_t peak_nodes = 0;
    std::uint64_t peak_memory_bytes = 0;
};

struct Path {
    std::vector<Config> waypoints;
    std::vector<risk::SegmentCost> segment_costs;
    double total_euclidean = 0.0;
    double total_cvar = 0.0;  // sum of analytic per-segment CVaRs at the run's alpha
};

struct TreeNodeDump {
    Config config;
    std::optional<std::uint32_t> parent;
    double cost_to_root;
};

struct PlanOutcome {
    bool success = false;
    FailureReason failure_reason = FailureReason::none;
    Path path;
    int iterations = 0;
    int node_count = 0;
    double wall_time_s = 0.0;
    Counters counters;
    std::uint64_t seed = 0;
    Mode mode = Mode::ra_rrt_star;
    double alpha = 0.1;
    std::vector<TreeNodeDump> tree;
    std::vector<double> best_cost_trace;  // filled when record_best_cost_trace is set
};

struct OutcomeJsonOptions {
    bool include_tree = true;
    bool include_times = true;
};

nlohmann::json outcome_to_json(const PlanOutcome& o, const OutcomeJsonOptions& opts = {});
PlanOutcome outcome_from_json(const nlohmann::json& j);

struct SampleExhausted : std::runtime_error {
    SampleExhausted() : std::runtime_error("sampler exhausted: 10000 consecutive rejections") {}
};

// Uniform rejection sampling over the hint rectangle (default: the whole
// workspace); throws SampleExhausted after 10^4 rejections.
Config sample_free(const geom::CollisionChecker& checker, const geom::Environment& env,
                   const std::optional<geom::Rect>& hint, RngStream& rng);
Config sample_free(const geom::Environment& env, const std::optional<geom::Rect>& hint,
                   RngStream& rng);

Config steer(const Config& from, const Config& toward, double step);

std::vector<std::uint32_t> get_neighbors(const Tree& tree, const Config& q, double r_m, int k_n);

double rewire_radius(std::size_t node_count, double gamma, double rho_max);

struct Selection {
    std::uint32_t node = 0;
    double cvar = 0.0;
    std::uint64_t samples_used = 0;
    int n_cvar = 0;  // tail cardinality for the winning candidate
};

// Empirical min-CVaR parent choice over the candidate set. Candidate j draws
// its n_c costs from stream.stream(j); ties break by smaller Euclidean
// length, then lower id.
Selection select_min_cvar(const Tree& tree, std::span<const std::uint32_t> candidates,
                          const Config& x_new, double sigma_k, const risk::RiskParams& params,
                          const RngStream& stream);

// Improvement-only reparenting of nodes within `radius` of x_new under the
// active cost model (fresh empirical CVaR for the risk-aware mode, a fresh
// single length measurement for the baseline); collision-checked, subtree
// costs propagated.
void rewire(Tree& tree, std::uint32_t x_new_id, double radius, Mode mode, double sigma_k,
            const risk::RiskParams& params, const RngStream& stream,
            const geom::CollisionChecker& checker, Counters& counters);

PlanOutcome plan(const geom::Environment& env, const Config& start, const Config& goal,
                 const PlannerParams& params, Mode mode, std::uint64_t seed);

}  // namespace riskplan::plan
