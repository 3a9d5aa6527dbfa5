#pragma once

// Baseline approximate re-ordering: Swap, GreedyI, GreedyII, Partition.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "flowcore.hpp"

namespace flowopt {

class ClusterTooLarge : public FlowError {
public:
    using FlowError::FlowError;
};

inline constexpr std::size_t kPartitionClusterLimit = 10;

/// Eligibility frontier: a task is eligible once all its PC predecessors
/// have been placed.
class CandidateSet {
public:
    explicit CandidateSet(const FlowSpec& flow) : flow_(flow), remaining_(flow.size()), placed_flag_(flow.size(), 0) {
        for (std::size_t t = 0; t < flow.size(); ++t) remaining_[t] = flow.pc().predecessor_count(t);
    }

    std::vector<TaskIndex> eligible() const {
        std::vector<TaskIndex> out;
        for (std::size_t t = 0; t < flow_.size(); ++t)
            if (!placed_flag_[t] && remaining_[t] == 0) out.push_back(t);
        return out;
    }

    void place(TaskIndex t) {
        placed_flag_[t] = 1;
        placed_.push_back(t);
        for (auto s : flow_.pc().successors(t)) --remaining_[s];
    }

    bool is_placed(TaskIndex t) const { return placed_flag_[t] != 0; }
    const std::vector<TaskIndex>& placed() const { return placed_; }
    bool done() const { return placed_.size() == flow_.size(); }

private:
    const FlowSpec& flow_;
    std::vector<std::size_t> remaining_;
    std::vector<char> placed_flag_;
    std::vector<TaskIndex> placed_;
};

// ---------------------------------------------------------------------------
// Swap

/// Adjacent-transposition hill climbing. Full left-to-right passes are
/// repeated until a pass changes nothing; a swap is taken only when it
/// lowers SCM by more than kImprovementEps.
inline LinearPlan swap_opt(const FlowSpec& flow, const std::optional<LinearPlan>& initial = std::nullopt,
                           std::uint64_t seed = 0) {
    LinearPlan plan = initial ? *initial : random_valid_plan(flow, seed);
    if (initial) detail::require_valid(plan, flow);
    const auto n = plan.size();
    bool swapping = true;
    while (swapping) {
        swapping = false;
        double inp = 1.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const auto a = plan.order[i];
            const auto b = plan.order[i + 1];
            if (!flow.pc().precedes(a, b)) {
                const double keep = flow.cost(a) + flow.sel(a) * flow.cost(b);
                const double swapped = flow.cost(b) + flow.sel(b) * flow.cost(a);
                if (inp * (swapped - keep) < -kImprovementEps) {
                    std::swap(plan.order[i], plan.order[i + 1]);
                    swapping = true;
                }
            }
            inp *= flow.sel(plan.order[i]);
        }
    }
    return plan;
}

// ---------------------------------------------------------------------------
// GreedyI / GreedyII

/// Left-to-right: append the eligible task of maximum rank (ties to the
/// smaller id). A designated source is always placed first.
inline LinearPlan greedy_i(const FlowSpec& flow) {
    CandidateSet cand(flow);
    if (flow.source()) cand.place(*flow.source());
    while (!cand.done()) {
        const auto elig = cand.eligible();
        if (elig.empty()) throw CycleError("precedence graph has no linear extension");
        auto best = elig.front();
        for (auto t : elig)
            if (flow.rank(t) > flow.rank(best)) best = t;
        cand.place(best);
    }
    return {cand.placed()};
}

/// Right-to-left mirror of greedy_i: among tasks whose PC successors are
/// all placed, prepend the one of minimum rank. Equal ranks prepend the
/// larger index so ties read in ascending id order.
inline LinearPlan greedy_ii(const FlowSpec& flow) {
    const auto n = flow.size();
    std::vector<std::size_t> remaining(n);
    for (std::size_t t = 0; t < n; ++t) remaining[t] = flow.pc().successors(t).size();
    std::vector<char> placed(n, 0);
    std::vector<TaskIndex> reversed;
    reversed.reserve(n);
    if (flow.sink()) {
        placed[*flow.sink()] = 1;
        reversed.push_back(*flow.sink());
        for (auto p : flow.pc().predecessors(*flow.sink())) --remaining[p];
    }
    while (reversed.size() < n) {
        std::optional<TaskIndex> best;
        for (std::size_t t = 0; t < n; ++t) {
            if (placed[t] || remaining[t] != 0) continue;
            if (!best || flow.rank(t) <= flow.rank(*best)) best = t;
        }
        if (!best) throw CycleError("precedence graph has no linear extension");
        placed[*best] = 1;
        reversed.push_back(*best);
        for (auto p : flow.pc().predecessors(*best)) --remaining[p];
    }
    std::reverse(reversed.begin(), reversed.end());
    return {reversed};
}

// ---------------------------------------------------------------------------
// Partition

/// Eligibility layers: cluster k holds the tasks whose predecessors all
/// lie in clusters 0..k-1.
inline std::vector<std::vector<TaskIndex>> eligibility_clusters(const FlowSpec& flow) {
    CandidateSet cand(flow);
    std::vector<std::vector<TaskIndex>> clusters;
    while (!cand.done()) {
        auto layer = cand.eligible();
        if (layer.empty()) throw CycleError("precedence graph has no linear extension");
        for (auto t : layer) cand.place(t);
        clusters.push_back(std::move(layer));
    }
    return clusters;
}

/// Each eligibility cluster is ordered by exhaustive permutation search and
/// the clusters are concatenated. Tasks within a cluster are mutually
/// unconstrained, and the incoming selectivity product scales every
/// permutation's cost equally, so each cluster is costed on its own.
inline LinearPlan partition(const FlowSpec& flow, std::size_t cluster_limit = kPartitionClusterLimit) {
    LinearPlan plan;
    for (auto cluster : eligibility_clusters(flow)) {
        if (cluster.size() > cluster_limit)
            throw ClusterTooLarge("partition: cluster of " + std::to_string(cluster.size()) +
                                  " tasks exceeds the limit of " + std::to_string(cluster_limit));
        std::sort(cluster.begin(), cluster.end());
        auto best = cluster;
        double best_cost = linear_scm(cluster, flow);
        while (std::next_permutation(cluster.begin(), cluster.end())) {
            const double c = linear_scm(cluster, flow);
            if (c < best_cost && !scm_equal(c, best_cost)) {
                best_cost = c;
                best = cluster;
            }
        }
        plan.order.insert(plan.order.end(), best.begin(), best.end());
    }
    return plan;
}

}  // namespace flowopt
