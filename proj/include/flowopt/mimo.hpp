#pragma once

// Multiple-input multiple-output flows: the DAG is cut into linear
// segments between branch/merge points, each segment is re-ordered by a
// linear optimizer, and the pieces are stitched back together.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "algorithms.hpp"
#include "generator.hpp"
#include "parallel.hpp"

namespace flowopt {

/// Maximal run of tasks with exactly one parent and one child in the flow
/// DAG, in execution order. The boundaries are the nodes just outside it.
struct Segment {
    std::vector<TaskIndex> members;
    TaskIndex boundary_in = 0;
    TaskIndex boundary_out = 0;

    friend bool operator==(const Segment&, const Segment&) = default;
};

inline bool is_segment_node(const PlanDag& dag, TaskIndex v) { return dag.in_degree(v) == 1 && dag.out_degree(v) == 1; }

/// Segments in topological order of their first member. Every task with
/// one parent and one child belongs to exactly one segment; all other tasks
/// are boundaries.
inline std::vector<Segment> extract_segments(const PlanDag& dag, const FlowSpec& flow) {
    for (std::size_t t = 0; t < flow.size(); ++t)
        if (!dag.contains(t)) throw InvalidPlan("flow DAG is missing task " + std::to_string(flow.task(t).id));
    if (dag.size() != flow.size()) throw InvalidPlan("flow DAG does not match the flow's task count");
    const auto topo = dag.topological_order();
    if (!topo) throw InvalidPlan("flow DAG contains a cycle");

    std::vector<Segment> out;
    for (auto v : *topo) {
        if (!is_segment_node(dag, v)) continue;
        const auto parent = dag.parents(v).front();
        if (is_segment_node(dag, parent)) continue;  // not the head of its run
        Segment seg;
        seg.boundary_in = parent;
        auto cur = v;
        while (is_segment_node(dag, cur)) {
            seg.members.push_back(cur);
            cur = dag.children(cur).front();
        }
        seg.boundary_out = cur;
        out.push_back(std::move(seg));
    }
    return out;
}

struct MimoOptions {
    std::string inner = "ro3";
    // Start swap and RO-III refinement from the segment's current order, so
    // the result never costs more than the input.
    bool seed_with_input = true;
    bool parallel = false;  // parallelize each optimized segment
    RunOptions run;
};

namespace detail {

// Factorize/distribute rewrites would go here; none are implemented, so
// the outer loop settles after one pass.
inline bool factorize_distribute(PlanDag&, const FlowSpec&) { return false; }

inline void optimize_segment(PlanDag& dag, const FlowSpec& flow, const Segment& seg, std::size_t index,
                             const MimoOptions& opts) {
    const auto& m = seg.members;
    const auto sub = flow.subflow(m);
    RunOptions run = opts.run;
    run.initial.reset();
    run.seed = mix_seed(opts.run.seed, index);
    if (opts.seed_with_input && (opts.inner == "swap" || opts.inner == "ro3")) {
        LinearPlan identity;
        for (std::size_t k = 0; k < m.size(); ++k) identity.order.push_back(k);
        run.initial = identity;
    }
    const auto local = optimize_linear(opts.inner, sub, run);

    dag.remove_edge(seg.boundary_in, m.front());
    for (std::size_t k = 1; k < m.size(); ++k) dag.remove_edge(m[k - 1], m[k]);
    dag.remove_edge(m.back(), seg.boundary_out);

    if (opts.parallel) {
        const auto pd = parallelize(local, sub, opts.run.model);
        for (const auto& [u, v] : pd.edges()) dag.add_edge(m[u], m[v]);
        for (auto r : pd.roots()) dag.add_edge(seg.boundary_in, m[r]);
        for (auto l : pd.leaves()) dag.add_edge(m[l], seg.boundary_out);
        return;
    }
    dag.add_edge(seg.boundary_in, m[local[0]]);
    for (std::size_t k = 1; k < local.size(); ++k) dag.add_edge(m[local[k - 1]], m[local[k]]);
    dag.add_edge(m[local.order.back()], seg.boundary_out);
}

}  // namespace detail

/// Re-orders every segment of `dag` with the linear optimizer `opts.inner`,
/// applied to the segment's own tasks and the constraints among them.
/// Boundary tasks and the edges between them are left in place. The
/// segment's incoming cardinality scales all of its orders alike, so it is
/// left out of the inner problem.
inline PlanDag optimize_mimo(const PlanDag& dag, const FlowSpec& flow, const MimoOptions& opts = {}) {
    if (!is_linear_algorithm(opts.inner))
        throw UnknownAlgorithm("MIMO inner optimizer must be a linear algorithm, got '" + opts.inner + "'");
    detail::require_valid(dag, flow);
    PlanDag result = dag;
    bool changed = true;
    while (changed) {
        const auto segments = extract_segments(result, flow);
        for (std::size_t i = 0; i < segments.size(); ++i) detail::optimize_segment(result, flow, segments[i], i, opts);
        changed = detail::factorize_distribute(result, flow);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Fixtures

struct MimoFlow {
    FlowSpec flow;
    PlanDag dag;  // initial, unoptimized DAG
};

struct MimoConfig {
    std::size_t segments = 10;
    std::size_t segment_length = 10;
    double pc_fraction = 0.4;  // within each segment
    Distribution dist = Distribution::uniform;
    std::uint64_t seed = 1;
};

namespace detail {

class MimoBuilder {
public:
    explicit MimoBuilder(const MimoConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
        if (cfg.segment_length < 1) throw ConfigError("segments need at least one task");
        if (!(cfg.pc_fraction >= 0.0 && cfg.pc_fraction <= 1.0)) throw ConfigError("PC fraction must lie in [0, 1]");
    }

    TaskIndex node(const std::string& label) {
        GenConfig g;
        g.cost_dist = g.sel_dist = cfg_.dist;
        Task t;
        t.id = static_cast<int>(tasks_.size() + 1);
        t.label = label;
        t.cost = draw(cfg_.dist, kCostMin, kCostMax, g, rng_);
        const double s = cfg_.dist == Distribution::uniform ? kSelMax - draw(cfg_.dist, 0.0, kSelMax, g, rng_)
                                                            : draw(cfg_.dist, kSelFloor, kSelMax, g, rng_);
        t.selectivity = std::max(s, kSelFloor);
        tasks_.push_back(std::move(t));
        return tasks_.size() - 1;
    }

    // Segment between two boundaries with random internal constraints and a
    // random valid initial order.
    void segment(TaskIndex from, TaskIndex to) {
        const auto len = cfg_.segment_length;
        std::vector<TaskIndex> members;
        for (std::size_t k = 0; k < len; ++k) members.push_back(node("seg" + std::to_string(seg_count_) + "_" + std::to_string(k)));
        ++seg_count_;
        const auto local = random_precedence_edges(len, target_constraint_count(len, cfg_.pc_fraction), rng_);
        std::vector<Edge> local_edges;
        for (const auto& [a, b] : local) {
            constraints_.emplace_back(members[a], members[b]);
            local_edges.emplace_back(a, b);
        }
        for (auto m : members) {
            constraints_.emplace_back(from, m);
            constraints_.emplace_back(m, to);
        }
        std::vector<Task> dummy(len);
        for (std::size_t k = 0; k < len; ++k) {
            dummy[k].id = static_cast<int>(k + 1);
            dummy[k].cost = 1.0;
            dummy[k].selectivity = 1.0;
        }
        const auto order = random_valid_plan(FlowSpec(std::move(dummy), std::move(local_edges)), rng_());
        TaskIndex prev = from;
        for (auto k : order.order) {
            edges_.emplace_back(prev, members[k]);
            prev = members[k];
        }
        edges_.emplace_back(prev, to);
    }

    MimoFlow finish() {
        MimoFlow out;
        const auto n = tasks_.size();
        out.flow = FlowSpec(std::move(tasks_), std::move(constraints_));
        out.dag = PlanDag(n);
        for (const auto& [u, v] : edges_) out.dag.add_edge(u, v);
        return out;
    }

private:
    MimoConfig cfg_;
    std::mt19937_64 rng_;
    std::vector<Task> tasks_;
    std::vector<Edge> constraints_;
    std::vector<Edge> edges_;
    std::size_t seg_count_ = 0;
};

}  // namespace detail

/// Butterfly: ceil(k/2) sources, each feeding a segment into one merge
/// task, which fans out into the remaining segments, each ending in a sink.
inline MimoFlow butterfly(const MimoConfig& cfg) {
    // With fewer, the merge task has one parent and one child and joins a segment.
    if (cfg.segments < 4) throw ConfigError("a butterfly needs at least four segments");
    detail::MimoBuilder b(cfg);
    const auto wings_in = (cfg.segments + 1) / 2;
    const auto wings_out = cfg.segments - wings_in;
    std::vector<TaskIndex> sources;
    for (std::size_t k = 0; k < wings_in; ++k) sources.push_back(b.node("source" + std::to_string(k)));
    const auto merge = b.node("merge");
    std::vector<TaskIndex> sinks;
    for (std::size_t k = 0; k < wings_out; ++k) sinks.push_back(b.node("sink" + std::to_string(k)));
    for (auto s : sources) b.segment(s, merge);
    for (auto s : sinks) b.segment(merge, s);
    return b.finish();
}

/// Fork: one source, a trunk segment into a branch task, then k-1
/// segments each ending in a sink.
inline MimoFlow fork(const MimoConfig& cfg) {
    if (cfg.segments < 3) throw ConfigError("a fork needs at least three segments");
    detail::MimoBuilder b(cfg);
    const auto source = b.node("source");
    const auto branch = b.node("branch");
    std::vector<TaskIndex> sinks;
    for (std::size_t k = 0; k + 1 < cfg.segments; ++k) sinks.push_back(b.node("sink" + std::to_string(k)));
    b.segment(source, branch);
    for (auto s : sinks) b.segment(branch, s);
    return b.finish();
}

}  // namespace flowopt
