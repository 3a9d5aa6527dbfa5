#pragma once

// Parallel plans: the post-pass that fans out runs of expanding tasks
// (selectivity > 1) from a linear plan, and the PGreedy builders.

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/push_relabel_max_flow.hpp>

#include "flowcore.hpp"

namespace flowopt {

// ---------------------------------------------------------------------------
// Two-task case analysis

enum class ParallelCase { I, II, III, IV };

/// Which of the four two-task cases applies to t_a followed by t_b.
/// Informational only; the optimizers do not consult it.
inline ParallelCase case_classifier(const Task& a, const Task& b, const CostModel& = {}) {
    const bool a_filters = a.selectivity <= 1.0;
    const bool b_filters = b.selectivity <= 1.0;
    if (a_filters) return b_filters ? ParallelCase::I : ParallelCase::II;
    return b_filters ? ParallelCase::IV : ParallelCase::III;
}

inline const char* to_string(ParallelCase c) {
    switch (c) {
    case ParallelCase::I: return "I";
    case ParallelCase::II: return "II";
    case ParallelCase::III: return "III";
    case ParallelCase::IV: return "IV";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Post-pass over a linear plan

/// Restructures every maximal run of consecutive tasks with selectivity
/// strictly above 1 so that the run members hang off the last task before
/// the run instead of feeding each other. A run member that must follow
/// other run members is attached to its latest PC predecessors in the run.
/// The first task after the run joins all run members left without an
/// outgoing edge.
inline PlanDag parallelize(const LinearPlan& plan, const FlowSpec& flow, const CostModel& = {}) {
    detail::require_valid(plan, flow);
    const auto& pc = flow.pc();
    const auto& P = plan.order;
    const auto n = P.size();
    auto dag = PlanDag::chain(plan, flow.size());

    std::size_t i = 0;
    while (i + 1 < n) {
        std::size_t j = i + 1;
        while (j < n && flow.sel(P[j]) > 1.0) {
            dag.remove_edge(P[j - 1], P[j]);
            std::vector<TaskIndex> run_preds;
            for (std::size_t q = i + 1; q < j; ++q)
                if (pc.precedes(P[q], P[j])) run_preds.push_back(P[q]);
            if (run_preds.empty()) {
                dag.add_edge(P[i], P[j]);
            } else {
                // Latest predecessors only; the earlier ones reach P[j] through them.
                for (auto a : run_preds) {
                    bool dominated = false;
                    for (auto b : run_preds)
                        if (a != b && pc.precedes(a, b)) dominated = true;
                    if (!dominated) dag.add_edge(a, P[j]);
                }
            }
            ++j;
        }
        if (j < n) {
            for (std::size_t q = i + 1; q < j; ++q)
                if (dag.out_degree(P[q]) == 0) dag.add_edge(P[q], P[j]);
        }
        i = j;
    }
    return dag;
}

// ---------------------------------------------------------------------------
// Optimal cuts

/// Immediate-predecessor set chosen for a task joining a partial parallel
/// plan. `upstream` is the ancestor closure of `cut`; the task's input
/// cardinality is the selectivity product over `upstream`.
struct Cut {
    std::vector<TaskIndex> cut;
    std::vector<TaskIndex> upstream;
    double input = 1.0;
};

/// Smallest-input cut for `task` given the tasks already placed in `dag`.
/// Among placed tasks, the upstream set must contain the task's PC
/// predecessors and be closed under DAG ancestry; minimizing the product of
/// selectivities over it is a minimum-weight closure problem, solved as a
/// min s-t cut on log-selectivity weights.
inline Cut optimal_cut(const PlanDag& dag, const FlowSpec& flow, std::span<const TaskIndex> placed, TaskIndex task) {
    using Traits = boost::adjacency_list_traits<boost::vecS, boost::vecS, boost::directedS>;
    using Graph = boost::adjacency_list<
        boost::vecS, boost::vecS, boost::directedS, boost::no_property,
        boost::property<boost::edge_capacity_t, std::int64_t,
                        boost::property<boost::edge_residual_capacity_t, std::int64_t,
                                        boost::property<boost::edge_reverse_t, Traits::edge_descriptor>>>>;

    const auto m = placed.size();
    if (m == 0) return {};
    std::vector<std::size_t> local(flow.size(), m);
    for (std::size_t k = 0; k < m; ++k) local[placed[k]] = k;

    // Fixed-point weights keep the flow computation exact.
    constexpr double kScale = 4294967296.0;
    std::vector<std::int64_t> weight(m);
    std::int64_t total = 1;
    for (std::size_t k = 0; k < m; ++k) {
        weight[k] = std::llround(-std::log(flow.sel(placed[k])) * kScale);  // > 0 for filters
        total += std::abs(weight[k]);
    }
    const std::int64_t inf = total;

    Graph g(m + 2);
    const auto src = m;
    const auto snk = m + 1;
    auto cap = boost::get(boost::edge_capacity, g);
    auto rev = boost::get(boost::edge_reverse, g);
    auto res = boost::get(boost::edge_residual_capacity, g);
    const auto link = [&](std::size_t u, std::size_t v, std::int64_t c) {
        const auto e = boost::add_edge(u, v, g).first;
        const auto r = boost::add_edge(v, u, g).first;
        cap[e] = c;
        cap[r] = 0;
        rev[e] = r;
        rev[r] = e;
    };
    for (std::size_t k = 0; k < m; ++k) {
        if (weight[k] > 0) link(src, k, weight[k]);
        if (weight[k] < 0) link(k, snk, -weight[k]);
        for (auto p : dag.parents(placed[k]))
            if (local[p] < m) link(k, local[p], inf);
    }
    for (auto p : flow.pc().predecessors(task)) {
        if (local[p] == m) throw InvalidPlan("cut requested for a task whose predecessors are not all placed");
        link(src, local[p], inf);
    }
    boost::push_relabel_max_flow(g, src, snk);

    // Source side of the minimum cut: reachable from src in the residual graph.
    std::vector<char> side(m + 2, 0);
    std::vector<std::size_t> stack{src};
    side[src] = 1;
    while (!stack.empty()) {
        const auto u = stack.back();
        stack.pop_back();
        for (auto [e, end] = boost::out_edges(u, g); e != end; ++e) {
            const auto v = boost::target(*e, g);
            if (!side[v] && res[*e] > 0) {
                side[v] = 1;
                stack.push_back(v);
            }
        }
    }

    Cut out;
    for (std::size_t k = 0; k < m; ++k) {
        if (!side[k]) continue;
        out.upstream.push_back(placed[k]);
        out.input *= flow.sel(placed[k]);
    }
    std::sort(out.upstream.begin(), out.upstream.end());
    for (auto u : out.upstream) {
        bool has_child_inside = false;
        for (auto c : dag.children(u))
            if (std::binary_search(out.upstream.begin(), out.upstream.end(), c)) has_child_inside = true;
        if (!has_child_inside) out.cut.push_back(u);
    }
    return out;
}

// ---------------------------------------------------------------------------
// PGreedy

enum class PGreedyMetric { cost, rank };

namespace detail {

inline PlanDag pgreedy(const FlowSpec& flow, const CostModel& model, PGreedyMetric metric) {
    const auto n = flow.size();
    PlanDag dag(n, false);
    std::vector<std::size_t> remaining(n);
    for (std::size_t t = 0; t < n; ++t) remaining[t] = flow.pc().predecessor_count(t);
    std::vector<char> placed_flag(n, 0);
    std::vector<TaskIndex> placed;

    while (placed.size() < n) {
        std::optional<TaskIndex> best;
        Cut best_cut;
        double best_score = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            if (placed_flag[t] || remaining[t] != 0) continue;
            auto cut = optimal_cut(dag, flow, placed, t);
            const double eff_cost = flow.cost(t) + (cut.cut.size() >= 2 ? model.merge_cost : 0.0);
            const double work = cut.input * eff_cost;
            const double score = metric == PGreedyMetric::cost ? -work : (1.0 - flow.sel(t)) / work;
            if (!best || score > best_score) {
                best = t;
                best_score = score;
                best_cut = std::move(cut);
            }
        }
        if (!best) throw CycleError("precedence graph has no linear extension");
        dag.add_node(*best);
        for (auto u : best_cut.cut) dag.add_edge(u, *best);
        placed_flag[*best] = 1;
        placed.push_back(*best);
        for (auto s : flow.pc().successors(*best)) --remaining[s];
    }
    return dag;
}

}  // namespace detail

/// Adds, one at a time, the eligible task of least work inp * cost, each
/// attached through its optimal cut.
inline PlanDag pgreedy_i(const FlowSpec& flow, const CostModel& model = {}) {
    return detail::pgreedy(flow, model, PGreedyMetric::cost);
}

/// As pgreedy_i but picks the eligible task maximizing (1 - sel) / (inp * cost).
inline PlanDag pgreedy_ii(const FlowSpec& flow, const CostModel& model = {}) {
    return detail::pgreedy(flow, model, PGreedyMetric::rank);
}

}  // namespace flowopt
