#pragma once

// Rank-ordering optimizers. KBZ orders a tree-shaped constraint forest by
// rank with chain merging; RO-I, RO-II and RO-III wrap it with different
// pre-processing (forcing the PC graph into a tree) and post-processing.

#include <algorithm>
#include <optional>
#include <vector>

#include "flowcore.hpp"

namespace flowopt {

class NotATree : public FlowError {
public:
    using FlowError::FlowError;
};

inline constexpr std::size_t kRoIIIWindow = 5;

/// A task or a chain of tasks that KBZ has fused because the chain's
/// order was forced.
struct RankedNode {
    std::vector<TaskIndex> members;
    double agg_cost = 0.0;
    double agg_sel = 1.0;

    static RankedNode single(const FlowSpec& flow, TaskIndex t) { return {{t}, flow.cost(t), flow.sel(t)}; }

    double rank() const { return (1.0 - agg_sel) / agg_cost; }

    /// `this` followed by `next`.
    RankedNode then(const RankedNode& next) const {
        RankedNode out;
        out.members = members;
        out.members.insert(out.members.end(), next.members.begin(), next.members.end());
        out.agg_cost = agg_cost + agg_sel * next.agg_cost;
        out.agg_sel = agg_sel * next.agg_sel;
        return out;
    }
};

/// Rooted forest over the tasks of a flow; each task has at most one parent.
class ConstraintTree {
public:
    ConstraintTree() = default;
    explicit ConstraintTree(std::size_t n) : parent_(n) {}

    static ConstraintTree from_edges(std::size_t n, std::span<const Edge> edges) {
        ConstraintTree tree(n);
        for (const auto& [p, c] : edges) {
            if (p >= n || c >= n) throw UnknownTask("tree edge outside task range");
            if (tree.parent_[c] && *tree.parent_[c] != p)
                throw NotATree("task " + std::to_string(c) + " has more than one parent");
            tree.parent_[c] = p;
        }
        for (std::size_t v = 0; v < n; ++v) {
            // Walking up from v must terminate.
            auto cur = tree.parent_[v];
            for (std::size_t steps = 0; cur; ++steps) {
                if (steps > n || *cur == v) throw NotATree("constraint tree contains a cycle");
                cur = tree.parent_[*cur];
            }
        }
        return tree;
    }

    std::size_t size() const { return parent_.size(); }
    std::optional<TaskIndex> parent(TaskIndex v) const { return parent_.at(v); }

    std::vector<TaskIndex> roots() const {
        std::vector<TaskIndex> out;
        for (std::size_t v = 0; v < size(); ++v)
            if (!parent_[v]) out.push_back(v);
        return out;
    }

    std::vector<std::vector<TaskIndex>> children() const {
        std::vector<std::vector<TaskIndex>> out(size());
        for (std::size_t v = 0; v < size(); ++v)
            if (parent_[v]) out[*parent_[v]].push_back(v);
        return out;
    }

    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        for (std::size_t v = 0; v < size(); ++v)
            if (parent_[v]) out.emplace_back(*parent_[v], v);
        return out;
    }

private:
    std::vector<std::optional<TaskIndex>> parent_;
};

namespace detail {

using RankedChain = std::vector<RankedNode>;

// Merge rank-descending chains into one rank-descending chain. Equal ranks
// are taken in order of the smaller leading task index.
inline RankedChain merge_chains(std::vector<RankedChain> chains) {
    RankedChain out;
    std::vector<std::size_t> head(chains.size(), 0);
    for (;;) {
        std::optional<std::size_t> pick;
        for (std::size_t c = 0; c < chains.size(); ++c) {
            if (head[c] == chains[c].size()) continue;
            if (!pick) {
                pick = c;
                continue;
            }
            const auto& cand = chains[c][head[c]];
            const auto& cur = chains[*pick][head[*pick]];
            if (cand.rank() > cur.rank() || (cand.rank() == cur.rank() && cand.members.front() < cur.members.front()))
                pick = c;
        }
        if (!pick) break;
        out.push_back(std::move(chains[*pick][head[*pick]++]));
    }
    return out;
}

inline RankedChain normalize_subtree(const FlowSpec& flow, TaskIndex v,
                                     const std::vector<std::vector<TaskIndex>>& children) {
    std::vector<RankedChain> subs;
    subs.reserve(children[v].size());
    for (auto c : children[v]) subs.push_back(normalize_subtree(flow, c, children));
    auto rest = merge_chains(std::move(subs));
    RankedChain out;
    out.reserve(rest.size() + 1);
    out.push_back(RankedNode::single(flow, v));
    std::size_t i = 0;
    // Fuse the root with its successors while a successor outranks it.
    while (i < rest.size() && out.front().rank() < rest[i].rank()) {
        out.front() = out.front().then(rest[i]);
        ++i;
    }
    out.insert(out.end(), std::make_move_iterator(rest.begin() + static_cast<std::ptrdiff_t>(i)),
               std::make_move_iterator(rest.end()));
    return out;
}

}  // namespace detail

/// Rank-ordered chains of a forest, before expansion into tasks.
inline std::vector<RankedNode> kbz_chain(const FlowSpec& flow, const ConstraintTree& tree) {
    if (tree.size() != flow.size()) throw InvalidFlow("constraint tree does not span the flow");
    const auto children = tree.children();
    std::vector<detail::RankedChain> chains;
    for (auto r : tree.roots()) chains.push_back(detail::normalize_subtree(flow, r, children));
    return detail::merge_chains(std::move(chains));
}

/// KBZ over a constraint forest: subtrees are normalized bottom-up (a
/// parent fuses with any successor of higher rank) and the resulting
/// chains are interleaved in descending rank.
inline LinearPlan kbz(const FlowSpec& flow, const ConstraintTree& tree) {
    LinearPlan plan;
    for (const auto& node : kbz_chain(flow, tree))
        plan.order.insert(plan.order.end(), node.members.begin(), node.members.end());
    return plan;
}

/// Forest given by the Hasse diagram of the flow's PC graph; throws
/// NotATree if some task has two immediate predecessors.
inline ConstraintTree reduction_tree(const FlowSpec& flow) {
    const auto red = flow.pc().reduction_edges();
    return ConstraintTree::from_edges(flow.size(), red);
}

// ---------------------------------------------------------------------------
// RO-I

/// Keep, for every task with several immediate predecessors, only the
/// edge from the predecessor of maximum rank.
inline ConstraintTree prune_to_max_rank_parent(const FlowSpec& flow) {
    const auto n = flow.size();
    std::vector<std::optional<TaskIndex>> parent(n);
    for (const auto& [a, b] : flow.pc().reduction_edges()) {
        if (!parent[b] || flow.rank(a) > flow.rank(*parent[b])) parent[b] = a;
    }
    std::vector<Edge> edges;
    for (std::size_t v = 0; v < n; ++v)
        if (parent[v]) edges.emplace_back(*parent[v], v);
    return ConstraintTree::from_edges(n, edges);
}

/// Left-to-right repair: when a task has PC predecessors further right,
/// those predecessors move, in a valid relative order, to just before it.
inline LinearPlan repair_upstream(const FlowSpec& flow, LinearPlan plan) {
    const auto& pc = flow.pc();
    auto& ord = plan.order;
    for (std::size_t p = 0; p < ord.size(); ++p) {
        const auto t = ord[p];
        std::vector<TaskIndex> late;
        std::vector<TaskIndex> keep;
        for (std::size_t q = p + 1; q < ord.size(); ++q) {
            if (pc.precedes(ord[q], t)) {
                late.push_back(ord[q]);
            } else {
                keep.push_back(ord[q]);
            }
        }
        if (late.empty()) continue;
        // Stable topological order of the moved tasks.
        std::vector<TaskIndex> moved;
        std::vector<char> done(late.size(), 0);
        while (moved.size() < late.size()) {
            for (std::size_t i = 0; i < late.size(); ++i) {
                if (done[i]) continue;
                bool ready = true;
                for (std::size_t j = 0; j < late.size(); ++j)
                    if (!done[j] && j != i && pc.precedes(late[j], late[i])) ready = false;
                if (ready) {
                    done[i] = 1;
                    moved.push_back(late[i]);
                    break;
                }
            }
        }
        ord.resize(p);
        ord.insert(ord.end(), moved.begin(), moved.end());
        ord.push_back(t);
        ord.insert(ord.end(), keep.begin(), keep.end());
        p += moved.size();
    }
    return plan;
}

inline LinearPlan ro_i(const FlowSpec& flow) {
    const auto tree = prune_to_max_rank_parent(flow);
    return repair_upstream(flow, kbz(flow, tree));
}

// ---------------------------------------------------------------------------
// RO-II

namespace detail {

// Topological order of `region` under `pc`, taking the eligible task of
// highest rank first.
inline std::vector<TaskIndex> rank_greedy_order(const FlowSpec& flow, const PrecedenceGraph& pc,
                                                std::vector<TaskIndex> region) {
    std::vector<TaskIndex> out;
    while (!region.empty()) {
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < region.size(); ++i) {
            bool ready = true;
            for (std::size_t j = 0; j < region.size() && ready; ++j)
                if (j != i && pc.precedes(region[j], region[i])) ready = false;
            if (!ready) continue;
            if (!best || flow.rank(region[i]) > flow.rank(region[*best]) ||
                (flow.rank(region[i]) == flow.rank(region[*best]) && region[i] < region[*best]))
                best = i;
        }
        out.push_back(region[*best]);
        region.erase(region.begin() + static_cast<std::ptrdiff_t>(*best));
    }
    return out;
}

}  // namespace detail

/// Tightens the PC graph until its Hasse diagram is a forest. Repeatedly
/// the most upstream task with several immediate predecessors is taken as
/// a join; the innermost common ancestor of those predecessors is its
/// fork, and every task strictly between fork and join is chained in
/// descending rank. The result only adds constraints.
inline PrecedenceGraph merge_parallel_paths(const FlowSpec& flow) {
    const auto n = flow.size();
    auto pc = flow.pc();
    for (;;) {
        const auto red = pc.reduction_edges();
        std::vector<std::vector<TaskIndex>> parents(n);
        for (const auto& [a, b] : red) parents[b].push_back(a);

        // Topological position in the current order.
        FlowSpec shape(flow.tasks(), pc.edges());
        const auto topo = canonical_topological_order(shape).order;
        std::vector<std::size_t> pos(n);
        for (std::size_t p = 0; p < n; ++p) pos[topo[p]] = p;

        std::optional<TaskIndex> join;
        for (auto v : topo)
            if (parents[v].size() >= 2) {
                join = v;
                break;
            }
        if (!join) return pc;

        std::optional<TaskIndex> fork;
        for (std::size_t f = 0; f < n; ++f) {
            bool common = true;
            for (auto p : parents[*join])
                if (!pc.precedes(f, p)) common = false;
            if (common && (!fork || pos[f] > pos[*fork])) fork = f;
        }

        std::vector<TaskIndex> region;
        for (std::size_t x = 0; x < n; ++x)
            if (pc.precedes(x, *join) && (!fork || pc.precedes(*fork, x))) region.push_back(x);
        const auto chain = detail::rank_greedy_order(flow, pc, region);

        auto edges = pc.edges();
        if (fork) edges.emplace_back(*fork, chain.front());
        for (std::size_t i = 1; i < chain.size(); ++i) edges.emplace_back(chain[i - 1], chain[i]);
        edges.emplace_back(chain.back(), *join);
        pc = PrecedenceGraph(n, edges);
    }
}

inline LinearPlan ro_ii(const FlowSpec& flow) {
    const auto merged = merge_parallel_paths(flow);
    const auto tree = ConstraintTree::from_edges(flow.size(), merged.reduction_edges());
    return kbz(flow, tree);
}

// ---------------------------------------------------------------------------
// RO-III

/// Block-move local search: for block sizes 1..window, every block is tried
/// after each later position; a move is applied when it keeps the plan
/// valid and lowers SCM by more than kImprovementEps. Sweeps repeat until
/// nothing changes, at most max_sweeps times (0 means the task count).
inline LinearPlan block_move_refine(const FlowSpec& flow, LinearPlan plan, std::size_t window = kRoIIIWindow,
                                    std::size_t max_sweeps = 0) {
    if (window == 0) throw std::invalid_argument("block window must be at least 1");
    detail::require_valid(plan, flow);
    const auto n = plan.size();
    if (max_sweeps == 0) max_sweeps = std::max<std::size_t>(n, 1);
    const auto& pc = flow.pc();
    auto& ord = plan.order;

    std::vector<double> prefix(n + 1);  // selectivity product before position p
    std::vector<double> acc(n + 1);     // SCM of positions [0, p)
    const auto recompute = [&] {
        prefix[0] = 1.0;
        acc[0] = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            acc[p + 1] = acc[p] + prefix[p] * flow.cost(ord[p]);
            prefix[p + 1] = prefix[p] * flow.sel(ord[p]);
        }
    };
    recompute();

    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        bool changed = false;
        for (std::size_t size = 1; size <= window && size < n; ++size) {
            for (std::size_t s = 0; s + size < n; ++s) {
                // Block [s, s+size) evaluated relative to a unit input.
                double block_cost = 0.0;
                double block_sel = 1.0;
                for (std::size_t p = s; p < s + size; ++p) {
                    block_cost += block_sel * flow.cost(ord[p]);
                    block_sel *= flow.sel(ord[p]);
                }
                double mid_cost = 0.0;
                double mid_sel = 1.0;
                for (std::size_t t = s + size; t < n; ++t) {
                    const auto x = ord[t];
                    bool blocked = false;
                    for (std::size_t p = s; p < s + size && !blocked; ++p) blocked = pc.precedes(ord[p], x);
                    if (blocked) break;
                    mid_cost += mid_sel * flow.cost(x);
                    mid_sel *= flow.sel(x);
                    const double old_seg = acc[t + 1] - acc[s];
                    const double new_seg = prefix[s] * (mid_cost + mid_sel * block_cost);
                    if (new_seg - old_seg < -kImprovementEps) {
                        std::rotate(ord.begin() + static_cast<std::ptrdiff_t>(s),
                                    ord.begin() + static_cast<std::ptrdiff_t>(s + size),
                                    ord.begin() + static_cast<std::ptrdiff_t>(t + 1));
                        recompute();
                        changed = true;
                        break;
                    }
                }
            }
        }
        if (!changed) break;
    }
    return plan;
}

inline LinearPlan ro_iii(const FlowSpec& flow, std::size_t window = kRoIIIWindow) {
    if (window == 0) throw std::invalid_argument("RO-III window must be at least 1");
    return block_move_refine(flow, ro_ii(flow), window);
}

}  // namespace flowopt
