#include "riskplan/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "riskplan/gridworld.hpp"

namespace riskplan::plan {

using geom::CollisionChecker;
using geom::Config;
using geom::Environment;
using geom::Rect;
using nlohmann::json;

namespace {

// Stream labels per purpose, so baseline and risk-aware runs with equal
// seeds consume identical x_rand sequences regardless of how many cost
// samples the selection step draws.
constexpr std::uint64_t kSampleStream = 1;
constexpr std::uint64_t kSelectStream = 2;
constexpr std::uint64_t kRewireStream = 3;

constexpr double kDuplicateTol = 1e-12;

std::uint64_t double_bits(double v) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    return bits;
}

std::uint64_t edge_key(std::uint32_t parent, const Config& child) {
    return derive_key(derive_key(parent, double_bits(child.x)), double_bits(child.y));
}

}  // namespace

// ---------------------------------------------------------------- SpatialGrid

SpatialGrid::SpatialGrid(const Rect& bounds, double cell) : bounds_(bounds) {
    const double extent = std::max(bounds.width(), bounds.height());
    cell_ = std::clamp(cell, extent / 512.0, extent);
    nx_ = std::max(1, static_cast<int>(std::ceil(bounds.width() / cell_)));
    ny_ = std::max(1, static_cast<int>(std::ceil(bounds.height() / cell_)));
    cells_.resize(static_cast<std::size_t>(nx_) * ny_);
}

std::size_t SpatialGrid::cell_index(int ix, int iy) const {
    ix = std::clamp(ix, 0, nx_ - 1);
    iy = std::clamp(iy, 0, ny_ - 1);
    return static_cast<std::size_t>(iy) * nx_ + ix;
}

void SpatialGrid::insert(std::uint32_t id, const Config& c) {
    const int ix = static_cast<int>((c.x - bounds_.xmin) / cell_);
    const int iy = static_cast<int>((c.y - bounds_.ymin) / cell_);
    cells_[cell_index(ix, iy)].push_back(id);
}

std::uint32_t SpatialGrid::nearest(const Config& q, std::span<const Node> nodes) const {
    const int qx = std::clamp(static_cast<int>((q.x - bounds_.xmin) / cell_), 0, nx_ - 1);
    const int qy = std::clamp(static_cast<int>((q.y - bounds_.ymin) / cell_), 0, ny_ - 1);

    std::uint32_t best_id = 0;
    double best_d = std::numeric_limits<double>::infinity();
    bool found = false;

    const int max_ring = std::max(nx_, ny_);
    for (int ring = 0; ring <= max_ring; ++ring) {
        // Any cell at Chebyshev ring r is at least (r - 1) cells away.
        if (found && (ring - 1) * cell_ > best_d) break;
        for (int ix = qx - ring; ix <= qx + ring; ++ix) {
            for (int iy = qy - ring; iy <= qy + ring; ++iy) {
                if (std::max(std::abs(ix - qx), std::abs(iy - qy)) != ring) continue;
                if (ix < 0 || ix >= nx_ || iy < 0 || iy >= ny_) continue;
                for (const std::uint32_t id : cells_[cell_index(ix, iy)]) {
                    const double d = geom::distance(nodes[id].config, q);
                    if (d < best_d || (d == best_d && id < best_id)) {
                        best_d = d;
                        best_id = id;
                        found = true;
                    }
                }
            }
        }
    }
    return best_id;
}

std::vector<std::uint32_t> SpatialGrid::radius(const Config& q, double r,
                                               std::span<const Node> nodes) const {
    std::vector<std::pair<double, std::uint32_t>> hits;
    if (r >= 0.0) {
        const int ix0 = static_cast<int>(std::floor((q.x - r - bounds_.xmin) / cell_));
        const int ix1 = static_cast<int>(std::floor((q.x + r - bounds_.xmin) / cell_));
        const int iy0 = static_cast<int>(std::floor((q.y - r - bounds_.ymin) / cell_));
        const int iy1 = static_cast<int>(std::floor((q.y + r - bounds_.ymin) / cell_));
        for (int ix = std::max(0, ix0); ix <= std::min(nx_ - 1, ix1); ++ix) {
            for (int iy = std::max(0, iy0); iy <= std::min(ny_ - 1, iy1); ++iy) {
                for (const std::uint32_t id : cells_[cell_index(ix, iy)]) {
                    const double d = geom::distance(nodes[id].config, q);
                    if (d <= r) hits.emplace_back(d, id);
                }
            }
        }
    }
    std::sort(hits.begin(), hits.end());
    std::vector<std::uint32_t> out;
    out.reserve(hits.size());
    for (const auto& [d, id] : hits) out.push_back(id);
    return out;
}

std::size_t SpatialGrid::memory_bytes() const {
    std::size_t bytes = cells_.capacity() * sizeof(cells_[0]);
    for (const auto& c : cells_) bytes += c.capacity() * sizeof(std::uint32_t);
    return bytes;
}

// ----------------------------------------------------------------------- Tree

Tree::Tree(const Config& root, const Rect& bounds, double cell) : index_(bounds, cell) {
    nodes_.push_back(Node{0, root, std::nullopt, 0.0, 0.0, 0.0, 0.0});
    children_.emplace_back();
    index_.insert(0, root);
}

std::uint32_t Tree::add(const Config& c, std::uint32_t parent, double edge_cost, double edge_c,
                        double edge_sigma) {
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back(Node{id, c, parent, nodes_[parent].cost_to_root + edge_cost, edge_cost,
                          edge_c, edge_sigma});
    children_.emplace_back();
    children_[parent].push_back(id);
    index_.insert(id, c);
    return id;
}

bool Tree::is_ancestor(std::uint32_t maybe_ancestor, std::uint32_t of) const {
    std::optional<std::uint32_t> cur = nodes_[of].parent;
    while (cur) {
        if (*cur == maybe_ancestor) return true;
        cur = nodes_[*cur].parent;
    }
    return false;
}

void Tree::reparent(std::uint32_t id, std::uint32_t new_parent, double edge_cost, double edge_c,
                    double edge_sigma) {
    Node& n = nodes_[id];
    if (!n.parent) throw std::logic_error("reparent: cannot reparent the root");
    auto& siblings = children_[*n.parent];
    siblings.erase(std::find(siblings.begin(), siblings.end(), id));
    children_[new_parent].push_back(id);

    const double new_cost = nodes_[new_parent].cost_to_root + edge_cost;
    const double delta = new_cost - n.cost_to_root;
    n.parent = new_parent;
    n.edge_cost = edge_cost;
    n.edge_c = edge_c;
    n.edge_sigma = edge_sigma;

    std::vector<std::uint32_t> stack{id};
    while (!stack.empty()) {
        const std::uint32_t cur = stack.back();
        stack.pop_back();
        nodes_[cur].cost_to_root += delta;
        for (const std::uint32_t child : children_[cur]) stack.push_back(child);
    }
}

std::size_t Tree::memory_bytes() const {
    std::size_t bytes = nodes_.capacity() * sizeof(Node);
    bytes += children_.capacity() * sizeof(children_[0]);
    for (const auto& c : children_) bytes += c.capacity() * sizeof(std::uint32_t);
    bytes += index_.memory_bytes();
    return bytes;
}

// ----------------------------------------------------------------- parameters

std::string to_string(Mode m) {
    return m == Mode::rrt_star ? "rrt_star" : "ra_rrt_star";
}

std::string to_string(FailureReason r) {
    switch (r) {
        case FailureReason::iteration_cap: return "iteration-cap";
        case FailureReason::exhausted: return "exhausted";
        default: return "none";
    }
}

Mode mode_from_string(const std::string& s) {
    if (s == "rrt_star") return Mode::rrt_star;
    if (s == "ra_rrt_star") return Mode::ra_rrt_star;
    throw std::invalid_argument("unknown planner mode: " + s);
}

double PlannerParams::sigma_at(int k) const {
    if (sigma_schedule.empty()) return 0.0;
    if (sigma_schedule.size() == 1) return sigma_schedule[0];
    return sigma_schedule[std::min<std::size_t>(k, sigma_schedule.size() - 1)];
}

void PlannerParams::validate() const {
    if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
    if (!(neighborhood_radius > 0.0)) throw std::invalid_argument("neighborhood_radius must be > 0");
    if (k_n < 1) throw std::invalid_argument("k_n must be >= 1");
    if (!(rho_max > 0.0)) throw std::invalid_argument("rho_max must be > 0");
    if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
    if (!(steer_step > 0.0)) throw std::invalid_argument("steer_step must be > 0");
    if (!(goal_tolerance > 0.0)) throw std::invalid_argument("goal_tolerance must be > 0");
    if (!(goal_bias >= 0.0 && goal_bias < 1.0)) throw std::invalid_argument("goal_bias must be in [0, 1)");
    risk.validate();
    for (const double s : sigma_schedule) {
        if (!(s >= 0.0)) throw std::invalid_argument("sigma schedule values must be >= 0");
    }
}

double gamma_from_environment(const Environment& env) {
    double obstacle_area = 0.0;
    for (const auto& obs : env.obstacles) {
        if (const auto* c = std::get_if<geom::Circle>(&obs)) {
            obstacle_area += 3.14159265358979323846 * c->radius * c->radius;
        } else if (const auto* p = std::get_if<geom::ConvexPolygon>(&obs)) {
            double twice = 0.0;
            const auto& v = p->vertices;
            for (std::size_t i = 0; i < v.size(); ++i) {
                const auto& a = v[i];
                const auto& b = v[(i + 1) % v.size()];
                twice += a.x * b.y - b.x * a.y;
            }
            obstacle_area += 0.5 * std::fabs(twice);
        } else {
            // Overlap double-counted; only an estimate is needed here.
            for (const auto& c : std::get<geom::CompositeCircles>(obs).circles) {
                obstacle_area += 3.14159265358979323846 * c.radius * c.radius;
            }
        }
    }
    const double free_area = std::max(env.bounds.area() - obstacle_area, 0.05 * env.bounds.area());
    return 2.0 * std::sqrt(1.5 * free_area / 3.14159265358979323846);
}

PlannerParams PlannerParams::grid_defaults(const Environment& env, double rho_scale) {
    PlannerParams p;
    const double threshold = rho_scale * std::hypot(env.resolution.dx, env.resolution.dy);
    p.steer_step = threshold;
    // A hair above the move threshold so diagonal neighbors (distance exactly
    // equal to it) stay inside the neighbor ball, while two-cell straights do not.
    p.neighborhood_radius = threshold * 1.0001;
    p.rho_max = threshold * 1.0001;
    p.k_n = 8;
    p.snap_to_grid = true;
    p.gamma = 0.0;  // derived from the environment at plan time
    return p;
}

// ------------------------------------------------------------------ operations

Config sample_free(const CollisionChecker& checker, const Environment& env,
                   const std::optional<Rect>& hint, RngStream& rng) {
    Rect window = env.bounds;
    if (hint) {
        window = hint->intersected(env.bounds);
        if (!window.valid()) throw std::invalid_argument("sample_free: hint rectangle misses the workspace");
    }
    for (int rejections = 0; rejections <= 10000; ++rejections) {
        const Config q{rng.uniform(window.xmin, window.xmax), rng.uniform(window.ymin, window.ymax)};
        if (checker.point_free(q)) return q;
    }
    throw SampleExhausted{};
}

Config sample_free(const Environment& env, const std::optional<Rect>& hint, RngStream& rng) {
    const CollisionChecker checker(env);
    return sample_free(checker, env, hint, rng);
}

Config steer(const Config& from, const Config& toward, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("steer: step must be > 0");
    const double d = geom::distance(from, toward);
    if (d <= step) return toward;
    const double t = step / d;
    return Config{from.x + t * (toward.x - from.x), from.y + t * (toward.y - from.y)};
}

std::vector<std::uint32_t> get_neighbors(const Tree& tree, const Config& q, double r_m, int k_n) {
    std::vector<std::uint32_t> ids = tree.within(q, r_m);
    if (static_cast<int>(ids.size()) > k_n) ids.resize(static_cast<std::size_t>(k_n));
    return ids;
}

double rewire_radius(std::size_t node_count, double gamma, double rho_max) {
    if (node_count < 2) return rho_max;
    const double n = static_cast<double>(node_count);
    return std::min(gamma * std::sqrt(std::log(n) / n), rho_max);
}

Selection select_min_cvar(const Tree& tree, std::span<const std::uint32_t> candidates,
                          const Config& x_new, double sigma_k, const risk::RiskParams& params,
                          const RngStream& stream) {
    if (candidates.empty()) {
        throw std::invalid_argument("select_min_cvar: candidate set is empty");
    }
    Selection best;
    double best_c = 0.0;
    bool have_best = false;
    std::uint64_t used = 0;
    for (std::size_t j = 0; j < candidates.size(); ++j) {
        const std::uint32_t id = candidates[j];
        const risk::SegmentCost cost{geom::distance(tree.node(id).config, x_new), sigma_k};
        RngStream candidate_stream = stream.stream(j);
        const auto sample = risk::sample_costs(cost, params, candidate_stream);
        // cvar_empirical evaluates the empirical VaR internally and averages
        // the tail at or above it.
        const auto ec = risk::cvar_empirical(sample, params.alpha);
        used += static_cast<std::uint64_t>(params.n_c);
        const bool better = !have_best || ec.cvar < best.cvar ||
                            (ec.cvar == best.cvar &&
                             (cost.c < best_c || (cost.c == best_c && id < best.node)));
        if (better) {
            best = Selection{id, ec.cvar, 0, ec.n_cvar};
            best_c = cost.c;
            have_best = true;
        }
    }
    best.samples_used = used;
    return best;
}

void rewire(Tree& tree, std::uint32_t x_new_id, double radius, Mode mode, double sigma_k,
            const risk::RiskParams& params, const RngStream& stream,
            const CollisionChecker& checker, Counters& counters) {
    if (!(radius > 0.0)) return;
    const Config x_new = tree.node(x_new_id).config;
    const std::vector<std::uint32_t> cands = tree.within(x_new, radius);

    // Routing an ancestor of x_new through x_new would close a cycle.
    std::unordered_set<std::uint32_t> ancestors{x_new_id};
    for (auto cur = tree.node(x_new_id).parent; cur; cur = tree.node(*cur).parent) {
        ancestors.insert(*cur);
    }

    std::size_t j = 0;
    for (const std::uint32_t cand : cands) {
        if (ancestors.count(cand)) continue;
        const double c = geom::distance(tree.node(cand).config, x_new);
        double edge_cost;
        RngStream s = stream.stream(j);
        if (mode == Mode::ra_rrt_star) {
            edge_cost = risk::cvar_empirical(risk::sample_costs({c, sigma_k}, params, s),
                                             params.alpha).cvar;
            counters.cvar_evaluations += 1;
            counters.cost_samples_drawn += static_cast<std::uint64_t>(params.n_c);
        } else {
            // The baseline trusts a single measured realization of the edge
            // length; at sigma = 0 this is exactly the Euclidean cost.
            edge_cost = s.normal(c, sigma_k);
            counters.cost_samples_drawn += 1;
        }
        ++j;
        const double new_cost = tree.node(x_new_id).cost_to_root + edge_cost;
        if (new_cost + 1e-12 < tree.node(cand).cost_to_root) {
            counters.collision_tests += 1;
            if (checker.segment_free(geom::Segment{x_new, tree.node(cand).config})) {
                tree.reparent(cand, x_new_id, edge_cost, c, sigma_k);
            }
        }
    }
}

// ------------------------------------------------------------------------ plan

namespace {

Path extract_path(const Tree& tree, std::uint32_t goal_node, double alpha) {
    std::vector<std::uint32_t> chain;
    for (std::optional<std::uint32_t> cur = goal_node; cur; cur = tree.node(*cur).parent) {
        chain.push_back(*cur);
    }
    std::reverse(chain.begin(), chain.end());

    Path path;
    path.waypoints.reserve(chain.size());
    for (const std::uint32_t id : chain) path.waypoints.push_back(tree.node(id).config);
    for (std::size_t i = 1; i < chain.size(); ++i) {
        const Node& n = tree.node(chain[i]);
        path.segment_costs.push_back(risk::SegmentCost{n.edge_c, n.edge_sigma});
        path.total_euclidean += n.edge_c;
    }
    if (!path.segment_costs.empty()) {
        path.total_cvar = risk::worst_case_path_length(path.segment_costs, alpha);
    }
    return path;
}

}  // namespace

PlanOutcome plan(const Environment& env, const Config& start, const Config& goal,
                 const PlannerParams& params, Mode mode, std::uint64_t seed) {
    env.validate();
    params.validate();
    const CollisionChecker checker(env);
    if (!checker.point_free(start)) throw std::invalid_argument("plan: start is not in free space");
    if (!checker.point_free(goal)) throw std::invalid_argument("plan: goal is not in free space");

    PlannerParams p = params;
    if (p.gamma == 0.0) p.gamma = gamma_from_environment(env);
    const grid::GridMotionModel snap_model{env.resolution.dx, env.resolution.dy, 1.0};

    PlanOutcome out;
    out.seed = seed;
    out.mode = mode;
    out.alpha = p.risk.alpha;

    const auto t0 = std::chrono::steady_clock::now();

    Tree tree(start, env.bounds, p.steer_step);
    RngStream base(seed);
    Counters& counters = out.counters;
    std::unordered_set<std::uint64_t> blacklist;
    std::unordered_set<std::uint32_t> poisoned;
    std::vector<std::uint32_t> goal_nodes;
    double n_ra_sum = 0.0;
    std::uint64_t n_ra_count = 0;

    if (geom::distance(start, goal) <= p.goal_tolerance) {
        out.success = true;
        out.path.waypoints = {start};
        out.node_count = 1;
        out.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.tree.push_back(TreeNodeDump{start, std::nullopt, 0.0});
        return out;
    }

    FailureReason fail_reason = FailureReason::iteration_cap;
    std::optional<std::uint32_t> finished_at;

    int k = 0;
    for (; k < p.n_max; ++k) {
        const int iter = k;
        RngStream smp = base.stream(kSampleStream).stream(static_cast<std::uint64_t>(iter));
        const double sigma_k = p.sigma_at(iter);

        Config x_rand;
        counters.samples_drawn += 1;
        if (smp.uniform01() < p.goal_bias) {
            x_rand = goal;
        } else {
            std::optional<Rect> hint;
            if (p.sample_window_halfwidth) {
                const Config& c = tree.node(static_cast<std::uint32_t>(tree.size() - 1)).config;
                const double hw = *p.sample_window_halfwidth;
                hint = Rect{c.x - hw, c.y - hw, c.x + hw, c.y + hw};
            }
            try {
                x_rand = sample_free(checker, env, hint, smp);
            } catch (const SampleExhausted&) {
                fail_reason = FailureReason::exhausted;
                ++k;
                break;
            }
        }

        const std::uint32_t nearest_id = tree.nearest(x_rand);
        Config x_new = steer(tree.node(nearest_id).config, x_rand, p.steer_step);
        if (p.snap_to_grid) x_new = grid::snap_to_grid(x_new, snap_model, env.bounds);

        // Snapped steering can land on an existing node; skip exact duplicates.
        if (geom::distance(tree.node(tree.nearest(x_new)).config, x_new) < kDuplicateTol) continue;

        counters.collision_tests += 1;
        if (!checker.segment_free(geom::Segment{tree.node(nearest_id).config, x_new})) {
            counters.rejected_samples += 1;
            continue;
        }

        std::uint32_t x_min = nearest_id;
        double edge_c = 0.0;
        double edge_cost = 0.0;

        if (mode == Mode::ra_rrt_star || p.parent_mode == ParentMode::k_neighbors) {
            std::vector<std::uint32_t> cands =
                get_neighbors(tree, x_new, p.neighborhood_radius, p.k_n);
            if (cands.empty()) cands.push_back(nearest_id);
            std::vector<std::uint32_t> kept;
            kept.reserve(cands.size());
            for (const std::uint32_t id : cands) {
                if (blacklist.count(edge_key(id, x_new))) {
                    counters.blacklist_hits += 1;
                } else {
                    kept.push_back(id);
                }
            }
            if (kept.empty()) continue;

            if (mode == Mode::ra_rrt_star) {
                const Selection sel =
                    select_min_cvar(tree, kept, x_new, sigma_k, p.risk,
                                    base.stream(kSelectStream).stream(static_cast<std::uint64_t>(iter)));
                counters.cvar_evaluations += kept.size();
                counters.cost_samples_drawn += sel.samples_used;
                const std::uint64_t n_ra =
                    std::max<std::uint64_t>(static_cast<std::uint64_t>(sel.n_cvar),
                                            static_cast<std::uint64_t>(p.risk.n_c));
                n_ra_sum += static_cast<double>(n_ra);
                n_ra_count += 1;
                counters.n_ra_max = std::max(counters.n_ra_max, n_ra);
                x_min = sel.node;
                edge_cost = sel.cvar;
                edge_c = geom::distance(tree.node(x_min).config, x_new);
            } else {
                // Baseline k_n parent rule: minimal single-measurement edge
                // length, which at sigma = 0 is exactly the CVaR selection's
                // degenerate argmin over Euclidean lengths.
                RngStream sel =
                    base.stream(kSelectStream).stream(static_cast<std::uint64_t>(iter));
                bool have = false;
                double best_meas = 0.0;
                for (std::size_t j = 0; j < kept.size(); ++j) {
                    const std::uint32_t id = kept[j];
                    const double c = geom::distance(tree.node(id).config, x_new);
                    RngStream cand_stream = sel.stream(j);
                    const double meas = cand_stream.normal(c, sigma_k);
                    counters.cost_samples_drawn += 1;
                    const bool better =
                        !have || meas < best_meas ||
                        (meas == best_meas && (c < edge_c || (c == edge_c && id < x_min)));
                    if (better) {
                        x_min = id;
                        edge_c = c;
                        best_meas = meas;
                        have = true;
                    }
                }
                edge_cost = best_meas;
            }
        } else {
            if (blacklist.count(edge_key(nearest_id, x_new))) {
                counters.blacklist_hits += 1;
                continue;
            }
            edge_c = geom::distance(tree.node(nearest_id).config, x_new);
            RngStream sel = base.stream(kSelectStream).stream(static_cast<std::uint64_t>(iter));
            edge_cost = sel.normal(edge_c, sigma_k);
            counters.cost_samples_drawn += 1;
        }

        bool edge_free = true;
        if (x_min != nearest_id) {
            counters.parent_edge_checks += 1;
            counters.collision_tests += 1;
            edge_free = checker.segment_free(geom::Segment{tree.node(x_min).config, x_new});
        }
        if (!edge_free) {
            // The literal rule would add x_min to the obstacle set; blacklist
            // only this edge and note whenever x_min gets used again.
            blacklist.insert(edge_key(x_min, x_new));
            poisoned.insert(x_min);
            counters.blacklisted_edges += 1;
            continue;
        }
        if (poisoned.count(x_min)) counters.literal_rule_divergences += 1;

        const std::uint32_t new_id = tree.add(x_new, x_min, edge_cost, edge_c, sigma_k);
        rewire(tree, new_id, rewire_radius(tree.size(), p.gamma, p.rho_max), mode, sigma_k, p.risk,
               base.stream(kRewireStream).stream(static_cast<std::uint64_t>(iter)), checker,
               counters);

        counters.peak_nodes = std::max<std::uint64_t>(counters.peak_nodes, tree.size());
        counters.peak_memory_bytes = std::max<std::uint64_t>(counters.peak_memory_bytes,
                                                             tree.memory_bytes());

        if (geom::distance(x_new, goal) <= p.goal_tolerance) {
            goal_nodes.push_back(new_id);
            if (!p.continue_after_goal) {
                finished_at = new_id;
                ++k;
                break;
            }
        }
        if (p.record_best_cost_trace) {
            double best = std::numeric_limits<double>::infinity();
            for (const std::uint32_t id : goal_nodes) {
                best = std::min(best, tree.node(id).cost_to_root);
            }
            out.best_cost_trace.push_back(best);
        }
    }

    out.iterations = k;
    out.node_count = static_cast<int>(tree.size());
    counters.peak_nodes = std::max<std::uint64_t>(counters.peak_nodes, tree.size());
    counters.n_ra_mean = n_ra_count ? n_ra_sum / static_cast<double>(n_ra_count) : 0.0;

    if (!finished_at && !goal_nodes.empty()) {
        // continue_after_goal: report the cheapest goal-reaching node.
        finished_at = goal_nodes.front();
        for (const std::uint32_t id : goal_nodes) {
            if (tree.node(id).cost_to_root < tree.node(*finished_at).cost_to_root) {
                finished_at = id;
            }
        }
    }

    if (finished_at) {
        out.success = true;
        out.path = extract_path(tree, *finished_at, p.risk.alpha);
    } else {
        out.success = false;
        out.failure_reason = fail_reason;
    }

    out.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.tree.reserve(tree.size());
    for (const Node& n : tree.nodes()) {
        out.tree.push_back(TreeNodeDump{n.config, n.parent, n.cost_to_root});
    }
    return out;
}

// -------------------------------------------------------------- serialization

json outcome_to_json(const PlanOutcome& o, const OutcomeJsonOptions& opts) {
    json j;
    j["mode"] = to_string(o.mode);
    j["seed"] = o.seed;
    j["alpha"] = o.alpha;
    j["success"] = o.success;
    if (!o.success) j["failure_reason"] = to_string(o.failure_reason);
    j["iterations"] = o.iterations;
    j["node_count"] = o.node_count;
    j["wall_time_s"] = opts.include_times ? o.wall_time_s : 0.0;

    if (o.success) {
        json path;
        path["waypoints"] = json::array();
        for (const auto& w : o.path.waypoints) path["waypoints"].push_back({w.x, w.y});
        path["segments"] = json::array();
        double total_var = 0.0;
        for (const auto& sc : o.path.segment_costs) {
            const double var = risk::var_alpha(sc, o.alpha);
            const double cvar = risk::cvar_alpha(sc, o.alpha);
            total_var += var;
            path["segments"].push_back(
                {{"c", sc.c}, {"sigma", sc.sigma}, {"var", var}, {"cvar", cvar}});
        }
        path["total_euclidean"] = o.path.total_euclidean;
        path["total_cvar"] = o.path.total_cvar;
        path["total_var"] = total_var;
        j["path"] = std::move(path);
    }

    json c;
    c["samples_drawn"] = o.counters.samples_drawn;
    c["rejected_samples"] = o.counters.rejected_samples;
    c["collision_tests"] = o.counters.collision_tests;
    c["parent_edge_checks"] = o.counters.parent_edge_checks;
    c["cvar_evaluations"] = o.counters.cvar_evaluations;
    c["cost_samples_drawn"] = o.counters.cost_samples_drawn;
    c["blacklisted_edges"] = o.counters.blacklisted_edges;
    c["blacklist_hits"] = o.counters.blacklist_hits;
    c["literal_rule_divergences"] = o.counters.literal_rule_divergences;
    c["n_ra_mean"] = o.counters.n_ra_mean;
    c["n_ra_max"] = o.counters.n_ra_max;
    c["peak_nodes"] = o.counters.peak_nodes;
    c["peak_memory_bytes"] = o.counters.peak_memory_bytes;
    j["counters"] = std::move(c);

    if (opts.include_tree) {
        json tree = json::array();
        for (const auto& n : o.tree) {
            tree.push_back({n.config.x, n.config.y,
                            n.parent ? static_cast<long long>(*n.parent) : -1ll, n.cost_to_root});
        }
        j["tree"] = std::move(tree);
    }
    if (!o.best_cost_trace.empty()) j["best_cost_trace"] = o.best_cost_trace;
    return j;
}

PlanOutcome outcome_from_json(const json& j) {
    PlanOutcome o;
    o.mode = mode_from_string(j.at("mode").get<std::string>());
    o.seed = j.at("seed").get<std::uint64_t>();
    o.alpha = j.at("alpha").get<double>();
    o.success = j.at("success").get<bool>();
    if (j.contains("failure_reason")) {
        const std::string r = j.at("failure_reason").get<std::string>();
        o.failure_reason = r == "exhausted" ? FailureReason::exhausted : FailureReason::iteration_cap;
    }
    o.iterations = j.at("iterations").get<int>();
    o.node_count = j.at("node_count").get<int>();
    o.wall_time_s = j.at("wall_time_s").get<double>();
    if (j.contains("path")) {
        const json& path = j.at("path");
        for (const auto& w : path.at("waypoints")) {
            o.path.waypoints.push_back(Config{w[0].get<double>(), w[1].get<double>()});
        }
        for (const auto& s : path.at("segments")) {
            o.path.segment_costs.push_back(
                risk::SegmentCost{s.at("c").get<double>(), s.at("sigma").get<double>()});
        }
        o.path.total_euclidean = path.at("total_euclidean").get<double>();
        o.path.total_cvar = path.at("total_cvar").get<double>();
    }
    if (j.contains("tree")) {
        for (const auto& n : j.at("tree")) {
            const long long parent = n[2].get<long long>();
            o.tree.push_back(TreeNodeDump{Config{n[0].get<double>(), n[1].get<double>()},
                                          parent < 0 ? std::nullopt
                                                     : std::optional<std::uint32_t>(
                                                           static_cast<std::uint32_t>(parent)),
                                          n[3].get<double>()});
        }
    }
    return o;
}

}  // namespace riskplan::plan
