#pragma once

// Optimal linear plans: backtracking, subset dynamic programming and
// enumeration of all linear extensions by adjacent transpositions.

#include <chrono>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flowcore.hpp"

namespace flowopt {

struct ExactOptions {
    std::size_t size_limit = 0;  // 0 means the algorithm's default guard
    bool force = false;          // ignore the size guard
    std::optional<std::chrono::steady_clock::time_point> deadline;
};

inline constexpr std::size_t kBacktrackingLimit = 12;
inline constexpr std::size_t kDynamicProgrammingLimit = 20;
// Subset masks are 64-bit and tables hold 2^n cells.
inline constexpr std::size_t kDynamicProgrammingHardLimit = 30;

namespace detail {

inline void check_guard(const char* algo, std::size_t n, const ExactOptions& opts, std::size_t default_limit) {
    const auto limit = opts.size_limit == 0 ? default_limit : opts.size_limit;
    if (!opts.force && n > limit)
        throw SizeLimitExceeded(std::string(algo) + ": " + std::to_string(n) + " tasks exceeds the guard of " +
                                std::to_string(limit) + " (use force to override)");
}

class DeadlineCheck {
public:
    explicit DeadlineCheck(const std::optional<std::chrono::steady_clock::time_point>& d) : deadline_(d) {}
    void tick() {
        if (!deadline_ || (++counter_ & 0xFFF) != 0) return;
        if (std::chrono::steady_clock::now() > *deadline_) throw TimeoutError("optimizer exceeded its deadline");
    }

private:
    std::optional<std::chrono::steady_clock::time_point> deadline_;
    std::uint64_t counter_ = 0;
};

// Keeps the minimum-SCM plan; ties within tolerance go to the
// lexicographically smaller order.
struct BestPlan {
    std::vector<TaskIndex> order;
    double cost = std::numeric_limits<double>::infinity();

    void offer(std::span<const TaskIndex> candidate, double c) {
        if (order.empty() || (c < cost && !scm_equal(c, cost))) {
            order.assign(candidate.begin(), candidate.end());
            cost = c;
        } else if (scm_equal(c, cost) &&
                   std::lexicographical_compare(candidate.begin(), candidate.end(), order.begin(), order.end())) {
            order.assign(candidate.begin(), candidate.end());
            cost = std::min(cost, c);
        }
    }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Backtracking

/// Depth-first placement of eligible tasks; every linear extension is
/// costed and the cheapest kept.
inline LinearPlan backtracking(const FlowSpec& flow, const ExactOptions& opts = {}) {
    const auto n = flow.size();
    detail::check_guard("backtracking", n, opts, kBacktrackingLimit);
    if (n == 0) return {};
    const auto& pc = flow.pc();

    std::vector<std::size_t> remaining(n);
    for (std::size_t t = 0; t < n; ++t) remaining[t] = pc.predecessor_count(t);
    std::vector<char> placed(n, 0);
    std::vector<TaskIndex> current;
    current.reserve(n);
    std::vector<std::vector<TaskIndex>> succ(n);
    for (std::size_t t = 0; t < n; ++t) succ[t] = pc.successors(t);

    detail::BestPlan best;
    detail::DeadlineCheck deadline(opts.deadline);

    std::function<void(double, double)> place = [&](double inp, double cost) {
        deadline.tick();
        if (current.size() == n) {
            best.offer(current, cost);
            return;
        }
        for (TaskIndex t = 0; t < n; ++t) {
            if (placed[t] || remaining[t] != 0) continue;
            placed[t] = 1;
            current.push_back(t);
            for (auto s : succ[t]) --remaining[s];
            place(inp * flow.sel(t), cost + inp * flow.cost(t));
            for (auto s : succ[t]) ++remaining[s];
            current.pop_back();
            placed[t] = 0;
        }
    };
    place(1.0, 0.0);
    if (best.order.size() != n) throw CycleError("precedence graph has no linear extension");
    return {best.order};
}

// ---------------------------------------------------------------------------
// Dynamic programming over task subsets

/// Subset tables indexed by bit mask: bit i set means task i is in the
/// subset. Cell 0 is the empty prefix (cost 0, selectivity 1); subsets that
/// cannot form a valid prefix have infinite cost.
struct DpTables {
    std::size_t n = 0;
    std::vector<double> costs;
    std::vector<double> sels;
    std::vector<std::int8_t> last;  // task appended last in the optimal order, -1 if none

    static std::uint64_t subset_index(std::span<const TaskIndex> members) {
        std::uint64_t mask = 0;
        for (auto m : members) mask |= std::uint64_t{1} << m;
        return mask;
    }

    std::uint64_t full() const { return n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1; }
};

inline DpTables dp_tables(const FlowSpec& flow, const ExactOptions& opts = {}) {
    const auto n = flow.size();
    detail::check_guard("dynamic programming", n, opts, kDynamicProgrammingLimit);
    if (n > kDynamicProgrammingHardLimit)
        throw SizeLimitExceeded("dynamic programming supports at most " +
                                std::to_string(kDynamicProgrammingHardLimit) + " tasks");
    DpTables tab;
    tab.n = n;
    const std::size_t cells = std::size_t{1} << n;
    tab.costs.assign(cells, std::numeric_limits<double>::infinity());
    tab.sels.assign(cells, 1.0);
    tab.last.assign(cells, -1);
    tab.costs[0] = 0.0;

    std::vector<std::uint64_t> pred(n);
    for (std::size_t t = 0; t < n; ++t) pred[t] = flow.pc().predecessor_mask(t);

    detail::DeadlineCheck deadline(opts.deadline);
    for (std::uint64_t mask = 1; mask < cells; ++mask) {
        deadline.tick();
        const auto low = static_cast<std::size_t>(std::countr_zero(mask));
        tab.sels[mask] = tab.sels[mask & (mask - 1)] * flow.sel(low);
        double best = std::numeric_limits<double>::infinity();
        std::int8_t best_t = -1;
        for (auto rest = mask; rest != 0; rest &= rest - 1) {
            const auto t = static_cast<std::size_t>(std::countr_zero(rest));
            const auto prefix = mask & ~(std::uint64_t{1} << t);
            if ((pred[t] & ~prefix) != 0) continue;
            const double prev = tab.costs[prefix];
            if (!std::isfinite(prev)) continue;
            const double c = prev + tab.sels[prefix] * flow.cost(t);
            if (c < best) {
                best = c;
                best_t = static_cast<std::int8_t>(t);
            }
        }
        tab.costs[mask] = best;
        tab.last[mask] = best_t;
    }
    return tab;
}

/// Optimal plan from the subset recurrence. Among optimal plans the
/// lexicographically smallest order is reconstructed.
inline LinearPlan dynamic_programming(const FlowSpec& flow, const ExactOptions& opts = {}) {
    const auto tab = dp_tables(flow, opts);
    const auto n = tab.n;
    if (n == 0) return {};
    const auto full = tab.full();
    if (!std::isfinite(tab.costs[full])) throw CycleError("precedence graph has no linear extension");

    const auto tight = [&](std::uint64_t prefix, std::size_t t) {
        const auto s = prefix | (std::uint64_t{1} << t);
        if (!std::isfinite(tab.costs[prefix])) return false;
        return scm_equal(tab.costs[prefix] + tab.sels[prefix] * flow.cost(t), tab.costs[s]);
    };
    std::vector<std::uint64_t> pred(n);
    for (std::size_t t = 0; t < n; ++t) pred[t] = flow.pc().predecessor_mask(t);

    // on_optimal[S]: some optimal plan starts with the tasks of S.
    std::vector<char> on_optimal(tab.costs.size(), 0);
    on_optimal[full] = 1;
    for (std::uint64_t mask = full; mask != 0; --mask) {
        if (!on_optimal[mask]) continue;
        for (auto rest = mask; rest != 0; rest &= rest - 1) {
            const auto t = static_cast<std::size_t>(std::countr_zero(rest));
            const auto prefix = mask & ~(std::uint64_t{1} << t);
            if ((pred[t] & ~prefix) == 0 && tight(prefix, t)) on_optimal[prefix] = 1;
        }
    }

    LinearPlan plan;
    std::uint64_t placed = 0;
    for (std::size_t step = 0; step < n; ++step) {
        for (std::size_t t = 0; t < n; ++t) {
            const auto bit = std::uint64_t{1} << t;
            if ((placed & bit) || (pred[t] & ~placed)) continue;
            if (on_optimal[placed | bit] && tight(placed, t)) {
                plan.order.push_back(t);
                placed |= bit;
                break;
            }
        }
    }
    if (plan.size() != n) throw FlowError("dynamic programming reconstruction failed");
    return plan;
}

// ---------------------------------------------------------------------------
// Enumeration of linear extensions

/// Walks every linear extension of a PC graph exactly once. Starting from
/// a topological order, task i (in initial-order labels) is swapped to the
/// right until blocked by a successor, then rotated back home before the
/// next task is tried. SCM is maintained incrementally from prefix
/// selectivity products.
class LinearExtensionWalker {
public:
    explicit LinearExtensionWalker(const FlowSpec& flow)
        : flow_(flow), n_(flow.size()), home_(canonical_topological_order(flow).order) {
        prec_.assign(n_ * n_, 0);
        for (std::size_t a = 0; a < n_; ++a)
            for (std::size_t b = 0; b < n_; ++b) prec_[a * n_ + b] = flow.pc().precedes(home_[a], home_[b]) ? 1 : 0;
        perm_.resize(n_);
        loc_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) perm_[i] = loc_[i] = i;
        prefix_.assign(n_ + 1, 1.0);
        terms_.assign(n_, 0.0);
        order_.resize(n_);
        refresh(0, n_ == 0 ? 0 : n_ - 1);
        total_ = 0.0;
        for (auto t : terms_) total_ += t;
    }

    /// Current plan in flow task indices.
    std::span<const TaskIndex> order() const { return order_; }

    /// Incrementally maintained SCM of the current plan.
    double cost() const { return total_; }

    /// Advances to the next linear extension; false when all were visited.
    bool next() {
        while (cursor_ + 1 < n_) {
            const auto i = cursor_;
            const auto k = loc_[i];
            const auto k1 = k + 1;
            if (k1 == n_ || prec_[i * n_ + perm_[k1]]) {
                // Rotation stage: put task i back at position i.
                for (auto p = k; p > i; --p) {
                    perm_[p] = perm_[p - 1];
                    loc_[perm_[p]] = p;
                }
                perm_[i] = i;
                loc_[i] = i;
                if (k > i) apply(i, k);
                ++cursor_;
            } else {
                // Swapping stage.
                std::swap(perm_[k], perm_[k1]);
                loc_[perm_[k]] = k;
                loc_[perm_[k1]] = k1;
                apply(k, k1);
                cursor_ = 0;
                return true;
            }
        }
        return false;
    }

private:
    void refresh(std::size_t from, std::size_t to) {
        for (auto p = from; p <= to && p < n_; ++p) {
            const auto t = home_[perm_[p]];
            order_[p] = t;
            terms_[p] = prefix_[p] * flow_.cost(t);
            prefix_[p + 1] = prefix_[p] * flow_.sel(t);
        }
    }

    void apply(std::size_t from, std::size_t to) {
        double before = 0.0;
        for (auto p = from; p <= to; ++p) before += terms_[p];
        refresh(from, to);
        double after = 0.0;
        for (auto p = from; p <= to; ++p) after += terms_[p];
        total_ += after - before;
    }

    const FlowSpec& flow_;
    std::size_t n_;
    std::vector<TaskIndex> home_;  // initial topological order
    std::vector<char> prec_;       // PC relation over home labels
    std::vector<std::size_t> perm_;
    std::vector<std::size_t> loc_;
    std::vector<TaskIndex> order_;
    std::vector<double> prefix_;
    std::vector<double> terms_;
    double total_ = 0.0;
    std::size_t cursor_ = 0;
};

struct EnumerationResult {
    LinearPlan plan;
    double cost = 0.0;
    std::uint64_t visited = 0;
};

inline EnumerationResult topsort_search(const FlowSpec& flow, const ExactOptions& opts = {}) {
    EnumerationResult res;
    if (flow.size() == 0) return res;
    LinearExtensionWalker walk(flow);
    detail::BestPlan best;
    detail::DeadlineCheck deadline(opts.deadline);
    do {
        deadline.tick();
        ++res.visited;
        const double approx = walk.cost();
        // The running total drifts by rounding; candidates are re-costed exactly.
        if (best.order.empty() || approx <= best.cost * (1.0 + 1e-7)) best.offer(walk.order(), linear_scm(walk.order(), flow));
    } while (walk.next());
    res.plan.order = best.order;
    res.cost = best.cost;
    return res;
}

inline LinearPlan topsort_enumerate(const FlowSpec& flow, const ExactOptions& opts = {}) {
    return topsort_search(flow, opts).plan;
}

inline std::uint64_t count_linear_extensions(const FlowSpec& flow, const ExactOptions& opts = {}) {
    if (flow.size() == 0) return 1;
    LinearExtensionWalker walk(flow);
    detail::DeadlineCheck deadline(opts.deadline);
    std::uint64_t count = 1;
    while (walk.next()) {
        deadline.tick();
        ++count;
    }
    return count;
}

}  // namespace flowopt
