#pragma once

// Core data-flow model: tasks, precedence constraints, plans and the
// sum cost metric (SCM) evaluated over linear and parallel plans.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace flowopt {

/// Position of a task inside its FlowSpec. External ids live on Task::id.
using TaskIndex = std::size_t;
using Edge = std::pair<TaskIndex, TaskIndex>;

// ---------------------------------------------------------------------------
// Errors

class FlowError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CycleError : public FlowError {
public:
    using FlowError::FlowError;
};

class InvalidPlan : public FlowError {
public:
    using FlowError::FlowError;
};

class InvalidFlow : public FlowError {
public:
    using FlowError::FlowError;
};

class UnknownTask : public FlowError {
public:
    using FlowError::FlowError;
};

class SizeLimitExceeded : public FlowError {
public:
    using FlowError::FlowError;
};

class TimeoutError : public FlowError {
public:
    using FlowError::FlowError;
};

// ---------------------------------------------------------------------------
// Numeric conventions

/// Relative tolerance under which two SCM values count as equal.
inline constexpr double kScmRelTol = 1e-9;

/// Minimum absolute SCM decrease an improving move must achieve.
inline constexpr double kImprovementEps = 1e-12;

inline bool scm_equal(double a, double b, double rel = kScmRelTol) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return std::abs(a - b) <= rel * scale;
}

// ---------------------------------------------------------------------------
// Task

struct Task {
    int id = 0;
    std::string label;
    double cost = 1.0;         // cost per input tuple
    double selectivity = 1.0;  // output tuples per input tuple

    /// (1 - sel) / cost; higher means "filters more per unit of work".
    double rank() const { return (1.0 - selectivity) / cost; }

    friend bool operator==(const Task&, const Task&) = default;
};

namespace detail {

// Square bit matrix, one row of 64-bit words per task.
class BitMatrix {
public:
    BitMatrix() = default;
    explicit BitMatrix(std::size_t n) : n_(n), words_((n + 63) / 64), bits_(n * words_, 0) {}

    std::size_t size() const { return n_; }

    bool test(std::size_t i, std::size_t j) const {
        return (bits_[i * words_ + j / 64] >> (j % 64)) & 1U;
    }
    void set(std::size_t i, std::size_t j) { bits_[i * words_ + j / 64] |= std::uint64_t{1} << (j % 64); }

    void or_row(std::size_t dst, std::size_t src) {
        auto* d = &bits_[dst * words_];
        const auto* s = &bits_[src * words_];
        for (std::size_t w = 0; w < words_; ++w) d[w] |= s[w];
    }

    std::span<const std::uint64_t> row(std::size_t i) const { return {&bits_[i * words_], words_}; }

    std::size_t count() const {
        std::size_t c = 0;
        for (auto w : bits_) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }

    std::size_t row_count(std::size_t i) const {
        std::size_t c = 0;
        for (auto w : row(i)) c += static_cast<std::size_t>(std::popcount(w));
        return c;
    }

    template <class F>
    void for_each_in_row(std::size_t i, F&& f) const {
        const auto r = row(i);
        for (std::size_t w = 0; w < r.size(); ++w) {
            auto word = r[w];
            while (word != 0) {
                const auto bit = static_cast<std::size_t>(std::countr_zero(word));
                f(w * 64 + bit);
                word &= word - 1;
            }
        }
    }

    static bool rows_intersect(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) {
        for (std::size_t w = 0; w < a.size(); ++w)
            if ((a[w] & b[w]) != 0) return true;
        return false;
    }

    friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

private:
    std::size_t n_ = 0;
    std::size_t words_ = 0;
    std::vector<std::uint64_t> bits_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// PrecedenceGraph

/// Precedence-constraint DAG, stored transitively closed. Construction
/// computes the closure of the supplied edges and rejects cycles.
class PrecedenceGraph {
public:
    PrecedenceGraph() = default;

    PrecedenceGraph(std::size_t n, std::span<const Edge> edges) : succ_(n), pred_(n) {
        for (const auto& [a, b] : edges) {
            if (a >= n || b >= n) {
                throw UnknownTask("precedence edge (" + std::to_string(a) + "," + std::to_string(b) +
                                  ") references a task outside [0," + std::to_string(n) + ")");
            }
            if (a == b) throw CycleError("self-loop on task " + std::to_string(a));
            succ_.set(a, b);
        }
        // Warshall over bit rows.
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i)
                if (succ_.test(i, k)) succ_.or_row(i, k);
        for (std::size_t i = 0; i < n; ++i)
            if (succ_.test(i, i)) throw CycleError("precedence constraints contain a cycle through task " +
                                                   std::to_string(i));
        for (std::size_t i = 0; i < n; ++i) succ_.for_each_in_row(i, [&](std::size_t j) { pred_.set(j, i); });
    }

    PrecedenceGraph(std::size_t n, std::initializer_list<Edge> edges)
        : PrecedenceGraph(n, std::span<const Edge>(edges.begin(), edges.size())) {}

    std::size_t size() const { return succ_.size(); }

    /// True when `a` must run before `b` in every valid plan.
    bool precedes(TaskIndex a, TaskIndex b) const { return succ_.test(a, b); }

    std::size_t edge_count() const { return succ_.count(); }

    /// Closure edges in (from, to) lexicographic order.
    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        out.reserve(edge_count());
        for (std::size_t i = 0; i < size(); ++i) succ_.for_each_in_row(i, [&](std::size_t j) { out.emplace_back(i, j); });
        return out;
    }

    /// Hasse diagram of the order: closure edges not implied by two others.
    std::vector<Edge> reduction_edges() const {
        std::vector<Edge> out;
        for (std::size_t a = 0; a < size(); ++a) {
            succ_.for_each_in_row(a, [&](std::size_t b) {
                if (!detail::BitMatrix::rows_intersect(succ_.row(a), pred_.row(b))) out.emplace_back(a, b);
            });
        }
        return out;
    }

    std::vector<TaskIndex> predecessors(TaskIndex b) const {
        std::vector<TaskIndex> out;
        pred_.for_each_in_row(b, [&](std::size_t a) { out.push_back(a); });
        return out;
    }

    std::vector<TaskIndex> successors(TaskIndex a) const {
        std::vector<TaskIndex> out;
        succ_.for_each_in_row(a, [&](std::size_t b) { out.push_back(b); });
        return out;
    }

    std::size_t predecessor_count(TaskIndex b) const { return pred_.row_count(b); }

    /// Predecessor set as a bit mask; only meaningful when size() <= 64.
    std::uint64_t predecessor_mask(TaskIndex b) const { return size() == 0 ? 0 : pred_.row(b)[0]; }

    /// Induced order on `members`, re-indexed by position in `members`.
    PrecedenceGraph restricted(std::span<const TaskIndex> members) const {
        std::vector<Edge> sub;
        for (std::size_t i = 0; i < members.size(); ++i)
            for (std::size_t j = 0; j < members.size(); ++j)
                if (i != j && precedes(members[i], members[j])) sub.emplace_back(i, j);
        return PrecedenceGraph(members.size(), sub);
    }

    friend bool operator==(const PrecedenceGraph&, const PrecedenceGraph&) = default;

private:
    detail::BitMatrix succ_;
    detail::BitMatrix pred_;
};

inline PrecedenceGraph transitive_closure(std::span<const Edge> edges, std::size_t n) {
    if (n == 0) throw InvalidFlow("transitive_closure requires at least one task");
    return PrecedenceGraph(n, edges);
}

// ---------------------------------------------------------------------------
// FlowSpec

/// Tasks plus their precedence constraints. A designated source (sink)
/// implicitly precedes (follows) every other task.
class FlowSpec {
public:
    FlowSpec() = default;

    FlowSpec(std::vector<Task> tasks, std::vector<Edge> constraints, std::optional<TaskIndex> source = {},
             std::optional<TaskIndex> sink = {})
        : tasks_(std::move(tasks)), constraints_(std::move(constraints)), source_(source), sink_(sink) {
        for (std::size_t i = 0; i < tasks_.size(); ++i) {
            const auto& t = tasks_[i];
            if (!(t.cost > 0.0) || !std::isfinite(t.cost))
                throw InvalidFlow("task " + std::to_string(t.id) + " must have a positive finite cost");
            if (!(t.selectivity > 0.0) || !std::isfinite(t.selectivity))
                throw InvalidFlow("task " + std::to_string(t.id) + " must have a positive finite selectivity");
            for (std::size_t j = 0; j < i; ++j)
                if (tasks_[j].id == t.id) throw InvalidFlow("duplicate task id " + std::to_string(t.id));
        }
        const auto n = tasks_.size();
        if (source_ && *source_ >= n) throw UnknownTask("source index out of range");
        if (sink_ && *sink_ >= n) throw UnknownTask("sink index out of range");
        if (source_ && sink_ && *source_ == *sink_ && n > 1) throw InvalidFlow("source and sink must differ");

        std::vector<Edge> all = constraints_;
        for (std::size_t i = 0; i < n; ++i) {
            if (source_ && i != *source_) all.emplace_back(*source_, i);
            if (sink_ && i != *sink_) all.emplace_back(i, *sink_);
        }
        pc_ = PrecedenceGraph(n, all);
    }

    std::size_t size() const { return tasks_.size(); }
    const std::vector<Task>& tasks() const { return tasks_; }
    const Task& task(TaskIndex i) const { return tasks_.at(i); }
    const PrecedenceGraph& pc() const { return pc_; }
    /// The user-supplied constraint edges, before closure.
    const std::vector<Edge>& constraints() const { return constraints_; }
    std::optional<TaskIndex> source() const { return source_; }
    std::optional<TaskIndex> sink() const { return sink_; }

    double cost(TaskIndex i) const { return tasks_[i].cost; }
    double sel(TaskIndex i) const { return tasks_[i].selectivity; }
    double rank(TaskIndex i) const { return tasks_[i].rank(); }

    std::optional<TaskIndex> index_of(int id) const {
        for (std::size_t i = 0; i < tasks_.size(); ++i)
            if (tasks_[i].id == id) return i;
        return std::nullopt;
    }

    /// Flow over `members` only, keeping the induced closed constraints.
    /// Task i of the result is members[i] of this flow.
    FlowSpec subflow(std::span<const TaskIndex> members) const {
        std::vector<Task> sub;
        sub.reserve(members.size());
        for (auto m : members) sub.push_back(task(m));
        return FlowSpec(std::move(sub), pc_.restricted(members).edges());
    }

    friend bool operator==(const FlowSpec&, const FlowSpec&) = default;

private:
    std::vector<Task> tasks_;
    std::vector<Edge> constraints_;
    std::optional<TaskIndex> source_;
    std::optional<TaskIndex> sink_;
    PrecedenceGraph pc_;
};

/// Label-or-id string used in messages and DOT output.
inline std::string task_name(const FlowSpec& flow, TaskIndex i) {
    const auto& t = flow.task(i);
    return t.label.empty() ? "t" + std::to_string(t.id) : t.label;
}

// ---------------------------------------------------------------------------
// Plans

struct LinearPlan {
    std::vector<TaskIndex> order;

    std::size_t size() const { return order.size(); }
    TaskIndex operator[](std::size_t p) const { return order[p]; }

    friend bool operator==(const LinearPlan&, const LinearPlan&) = default;
    friend auto operator<=>(const LinearPlan&, const LinearPlan&) = default;
};

/// General execution DAG over (a subset of) a flow's tasks.
class PlanDag {
public:
    PlanDag() = default;
    explicit PlanDag(std::size_t n, bool all_present = true)
        : present_(n, all_present ? 1 : 0), parents_(n), children_(n) {}

    static PlanDag chain(const LinearPlan& plan, std::size_t n) {
        PlanDag dag(n, false);
        for (auto t : plan.order) dag.add_node(t);
        for (std::size_t p = 1; p < plan.size(); ++p) dag.add_edge(plan[p - 1], plan[p]);
        return dag;
    }

    std::size_t size() const { return present_.size(); }
    bool contains(TaskIndex v) const { return v < size() && present_[v] != 0; }
    void add_node(TaskIndex v) {
        check(v);
        present_[v] = 1;
    }

    std::vector<TaskIndex> nodes() const {
        std::vector<TaskIndex> out;
        for (std::size_t v = 0; v < size(); ++v)
            if (present_[v]) out.push_back(v);
        return out;
    }

    void add_edge(TaskIndex u, TaskIndex v) {
        check(u);
        check(v);
        if (!contains(u) || !contains(v)) throw UnknownTask("edge endpoint is not a node of the plan");
        if (u == v) throw CycleError("self-loop in plan DAG");
        if (has_edge(u, v)) return;
        insert_sorted(children_[u], v);
        insert_sorted(parents_[v], u);
    }

    void remove_edge(TaskIndex u, TaskIndex v) {
        if (!has_edge(u, v)) return;
        std::erase(children_[u], v);
        std::erase(parents_[v], u);
    }

    bool has_edge(TaskIndex u, TaskIndex v) const {
        return u < size() && std::binary_search(children_[u].begin(), children_[u].end(), v);
    }

    const std::vector<TaskIndex>& parents(TaskIndex v) const { return parents_.at(v); }
    const std::vector<TaskIndex>& children(TaskIndex v) const { return children_.at(v); }
    std::size_t in_degree(TaskIndex v) const { return parents_.at(v).size(); }
    std::size_t out_degree(TaskIndex v) const { return children_.at(v).size(); }

    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        for (std::size_t u = 0; u < size(); ++u)
            for (auto v : children_[u]) out.emplace_back(u, v);
        return out;
    }

    std::size_t edge_count() const {
        std::size_t c = 0;
        for (const auto& ch : children_) c += ch.size();
        return c;
    }

    std::vector<TaskIndex> roots() const {
        std::vector<TaskIndex> out;
        for (std::size_t v = 0; v < size(); ++v)
            if (present_[v] && parents_[v].empty()) out.push_back(v);
        return out;
    }

    std::vector<TaskIndex> leaves() const {
        std::vector<TaskIndex> out;
        for (std::size_t v = 0; v < size(); ++v)
            if (present_[v] && children_[v].empty()) out.push_back(v);
        return out;
    }

    /// Kahn order, smallest index first among ready nodes; nullopt on a cycle.
    std::optional<std::vector<TaskIndex>> topological_order() const {
        std::vector<std::size_t> indeg(size(), 0);
        std::vector<TaskIndex> ready;
        std::size_t count = 0;
        for (std::size_t v = 0; v < size(); ++v) {
            if (!present_[v]) continue;
            ++count;
            indeg[v] = parents_[v].size();
            if (indeg[v] == 0) ready.push_back(v);
        }
        std::vector<TaskIndex> out;
        out.reserve(count);
        while (!ready.empty()) {
            auto it = std::min_element(ready.begin(), ready.end());
            const auto v = *it;
            ready.erase(it);
            out.push_back(v);
            for (auto c : children_[v])
                if (--indeg[c] == 0) ready.push_back(c);
        }
        if (out.size() != count) return std::nullopt;
        return out;
    }

    /// Ancestor flags per node (excluding the node itself). Requires acyclicity.
    std::vector<std::vector<char>> ancestor_sets() const {
        const auto topo = topological_order();
        if (!topo) throw CycleError("plan DAG contains a cycle");
        std::vector<std::vector<char>> anc(size(), std::vector<char>(size(), 0));
        for (auto v : *topo) {
            for (auto p : parents_[v]) {
                anc[v][p] = 1;
                for (std::size_t a = 0; a < size(); ++a)
                    if (anc[p][a]) anc[v][a] = 1;
            }
        }
        return anc;
    }

    friend bool operator==(const PlanDag&, const PlanDag&) = default;

private:
    void check(TaskIndex v) const {
        if (v >= size()) throw UnknownTask("task index " + std::to_string(v) + " outside plan");
    }
    static void insert_sorted(std::vector<TaskIndex>& v, TaskIndex x) { v.insert(std::lower_bound(v.begin(), v.end(), x), x); }

    std::vector<char> present_;
    std::vector<std::vector<TaskIndex>> parents_;
    std::vector<std::vector<TaskIndex>> children_;
};

struct CostModel {
    double merge_cost = 0.0;  // per input tuple at nodes with in-degree >= 2
};

// ---------------------------------------------------------------------------
// Validation

struct Violation {
    enum class Kind { missing_task, duplicate_task, unknown_task, precedence, cycle };
    Kind kind;
    TaskIndex from = 0;  // offending task, or PC edge source
    TaskIndex to = 0;    // PC edge target for precedence violations

    friend bool operator==(const Violation&, const Violation&) = default;
};

inline std::string to_string(const Violation& v) {
    switch (v.kind) {
    case Violation::Kind::missing_task: return "missing task " + std::to_string(v.from);
    case Violation::Kind::duplicate_task: return "duplicate task " + std::to_string(v.from);
    case Violation::Kind::unknown_task: return "unknown task " + std::to_string(v.from);
    case Violation::Kind::precedence:
        return "precedence (" + std::to_string(v.from) + "," + std::to_string(v.to) + ") violated";
    case Violation::Kind::cycle: return "plan contains a cycle";
    }
    return "violation";
}

inline std::vector<Violation> validate(const LinearPlan& plan, const FlowSpec& flow) {
    using K = Violation::Kind;
    std::vector<Violation> out;
    const auto n = flow.size();
    constexpr auto npos = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> pos(n, npos);
    for (std::size_t p = 0; p < plan.size(); ++p) {
        const auto t = plan[p];
        if (t >= n) {
            out.push_back({K::unknown_task, t, 0});
        } else if (pos[t] != npos) {
            out.push_back({K::duplicate_task, t, 0});
        } else {
            pos[t] = p;
        }
    }
    for (std::size_t t = 0; t < n; ++t)
        if (pos[t] == npos) out.push_back({K::missing_task, t, 0});
    for (const auto& [a, b] : flow.pc().edges())
        if (pos[a] != npos && pos[b] != npos && pos[a] > pos[b]) out.push_back({K::precedence, a, b});
    return out;
}

inline std::vector<Violation> validate(const PlanDag& dag, const FlowSpec& flow) {
    using K = Violation::Kind;
    std::vector<Violation> out;
    const auto n = flow.size();
    for (std::size_t v = n; v < dag.size(); ++v)
        if (dag.contains(v)) out.push_back({K::unknown_task, v, 0});
    for (std::size_t t = 0; t < n; ++t)
        if (!dag.contains(t)) out.push_back({K::missing_task, t, 0});
    if (!dag.topological_order()) {
        out.push_back({K::cycle, 0, 0});
        return out;
    }
    const auto anc = dag.ancestor_sets();
    for (const auto& [a, b] : flow.pc().edges())
        if (dag.contains(a) && dag.contains(b) && b < anc.size() && !anc[b][a]) out.push_back({K::precedence, a, b});
    return out;
}

namespace detail {
inline void require_valid(const auto& plan, const FlowSpec& flow) {
    const auto v = validate(plan, flow);
    if (!v.empty()) throw InvalidPlan("invalid plan: " + to_string(v.front()));
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Cost evaluation

/// SCM of an order that is already known to be valid.
inline double linear_scm(std::span<const TaskIndex> order, const FlowSpec& flow) {
    double inp = 1.0;
    double total = 0.0;
    for (auto t : order) {
        total += inp * flow.cost(t);
        inp *= flow.sel(t);
    }
    return total;
}

inline double input_cardinality(const LinearPlan& plan, TaskIndex task, const FlowSpec& flow) {
    if (task >= flow.size()) throw UnknownTask("task index " + std::to_string(task) + " not in flow");
    double inp = 1.0;
    for (auto t : plan.order) {
        if (t == task) return inp;
        inp *= flow.sel(t);
    }
    throw UnknownTask("task index " + std::to_string(task) + " not in plan");
}

inline double input_cardinality(const PlanDag& dag, TaskIndex task, const FlowSpec& flow) {
    if (task >= flow.size() || !dag.contains(task))
        throw UnknownTask("task index " + std::to_string(task) + " not in plan");
    std::vector<char> seen(dag.size(), 0);
    std::vector<TaskIndex> stack(dag.parents(task).begin(), dag.parents(task).end());
    double inp = 1.0;
    while (!stack.empty()) {
        const auto v = stack.back();
        stack.pop_back();
        if (seen[v]) continue;
        seen[v] = 1;
        inp *= flow.sel(v);
        for (auto p : dag.parents(v)) stack.push_back(p);
    }
    return inp;
}

inline double scm(const LinearPlan& plan, const FlowSpec& flow) {
    detail::require_valid(plan, flow);
    return linear_scm(plan.order, flow);
}

/// Per-node SCM terms inp_i * (c_i [+ mc]) of a DAG; does not validate.
inline std::vector<double> dag_scm_terms(const PlanDag& dag, const FlowSpec& flow, const CostModel& model) {
    const auto anc = dag.ancestor_sets();
    std::vector<double> terms(dag.size(), 0.0);
    for (std::size_t v = 0; v < dag.size(); ++v) {
        if (!dag.contains(v)) continue;
        double inp = 1.0;
        for (std::size_t a = 0; a < dag.size(); ++a)
            if (anc[v][a]) inp *= flow.sel(a);
        const double c = flow.cost(v) + (dag.in_degree(v) >= 2 ? model.merge_cost : 0.0);
        terms[v] = inp * c;
    }
    return terms;
}

inline double dag_scm(const PlanDag& dag, const FlowSpec& flow, const CostModel& model) {
    const auto terms = dag_scm_terms(dag, flow, model);
    return std::accumulate(terms.begin(), terms.end(), 0.0);
}

inline double scm(const PlanDag& dag, const FlowSpec& flow, const CostModel& model = {}) {
    if (model.merge_cost < 0.0) throw std::invalid_argument("merge cost must be non-negative");
    detail::require_valid(dag, flow);
    return dag_scm(dag, flow, model);
}

// ---------------------------------------------------------------------------
// Plan construction helpers

/// Kahn order of the PC graph, smallest index first.
inline LinearPlan canonical_topological_order(const FlowSpec& flow) {
    const auto n = flow.size();
    std::vector<std::size_t> remaining(n);
    for (std::size_t t = 0; t < n; ++t) remaining[t] = flow.pc().predecessor_count(t);
    std::vector<char> placed(n, 0);
    LinearPlan plan;
    plan.order.reserve(n);
    for (std::size_t step = 0; step < n; ++step) {
        TaskIndex pick = n;
        for (std::size_t t = 0; t < n; ++t)
            if (!placed[t] && remaining[t] == 0) {
                pick = t;
                break;
            }
        if (pick == n) throw CycleError("precedence graph has no topological order");
        placed[pick] = 1;
        plan.order.push_back(pick);
        for (auto s : flow.pc().successors(pick)) --remaining[s];
    }
    return plan;
}

/// A seeded random topological order: at each step one eligible task is
/// drawn uniformly. Deterministic for a fixed seed.
inline LinearPlan random_valid_plan(const FlowSpec& flow, std::uint64_t seed) {
    const auto n = flow.size();
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> remaining(n);
    std::vector<TaskIndex> eligible;
    for (std::size_t t = 0; t < n; ++t) {
        remaining[t] = flow.pc().predecessor_count(t);
        if (remaining[t] == 0) eligible.push_back(t);
    }
    LinearPlan plan;
    plan.order.reserve(n);
    while (!eligible.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, eligible.size() - 1);
        const auto k = pick(rng);
        const auto t = eligible[k];
        eligible.erase(eligible.begin() + static_cast<std::ptrdiff_t>(k));
        plan.order.push_back(t);
        for (auto s : flow.pc().successors(t))
            if (--remaining[s] == 0) eligible.push_back(s);
    }
    if (plan.size() != n) throw CycleError("precedence graph has no topological order");
    return plan;
}

}  // namespace flowopt
