#pragma once

// Name-based dispatch over every optimizer in the library.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "exact.hpp"
#include "heuristics.hpp"
#include "parallel.hpp"
#include "rankorder.hpp"

namespace flowopt {

class UnknownAlgorithm : public FlowError {
public:
    using FlowError::FlowError;
};

using AnyPlan = std::variant<LinearPlan, PlanDag>;

struct RunOptions {
    ExactOptions exact;
    CostModel model;
    std::uint64_t seed = 0;                // swap's random start
    std::optional<LinearPlan> initial;     // seeds swap and RO-III refinement when set
    std::size_t window = kRoIIIWindow;
    std::string parallel_base = "ro3";     // linear optimizer fed to parallelize-post
};

inline const std::vector<std::string>& linear_algorithms() {
    static const std::vector<std::string> names{"backtracking", "dp",   "topsort", "swap", "greedy1", "greedy2",
                                                "partition",    "kbz",  "ro1",     "ro2",  "ro3"};
    return names;
}

inline const std::vector<std::string>& parallel_algorithms() {
    static const std::vector<std::string> names{"pgreedy1", "pgreedy2", "parallelize-post"};
    return names;
}

inline bool is_linear_algorithm(std::string_view name) {
    for (const auto& a : linear_algorithms())
        if (a == name) return true;
    return false;
}

inline bool is_exact_algorithm(std::string_view name) {
    return name == "backtracking" || name == "dp" || name == "topsort";
}

inline LinearPlan optimize_linear(std::string_view name, const FlowSpec& flow, const RunOptions& opts = {}) {
    if (name == "backtracking") return backtracking(flow, opts.exact);
    if (name == "dp") return dynamic_programming(flow, opts.exact);
    if (name == "topsort") return topsort_enumerate(flow, opts.exact);
    if (name == "swap") return swap_opt(flow, opts.initial, opts.seed);
    if (name == "greedy1") return greedy_i(flow);
    if (name == "greedy2") return greedy_ii(flow);
    if (name == "partition") return partition(flow);
    if (name == "kbz") return kbz(flow, reduction_tree(flow));
    if (name == "ro1") return ro_i(flow);
    if (name == "ro2") return ro_ii(flow);
    if (name == "ro3") {
        if (opts.initial) return block_move_refine(flow, *opts.initial, opts.window);
        return ro_iii(flow, opts.window);
    }
    throw UnknownAlgorithm("unknown linear algorithm '" + std::string(name) + "'");
}

/// Any algorithm except the MIMO wrapper, which needs an input DAG.
inline AnyPlan optimize(std::string_view name, const FlowSpec& flow, const RunOptions& opts = {}) {
    if (name == "pgreedy1") return pgreedy_i(flow, opts.model);
    if (name == "pgreedy2") return pgreedy_ii(flow, opts.model);
    if (name == "parallelize-post") {
        if (!is_linear_algorithm(opts.parallel_base))
            throw UnknownAlgorithm("parallelize-post needs a linear base algorithm, got '" + opts.parallel_base + "'");
        return parallelize(optimize_linear(opts.parallel_base, flow, opts), flow, opts.model);
    }
    return optimize_linear(name, flow, opts);
}

inline double plan_scm(const AnyPlan& plan, const FlowSpec& flow, const CostModel& model = {}) {
    if (const auto* lin = std::get_if<LinearPlan>(&plan)) return scm(*lin, flow);
    return scm(std::get<PlanDag>(plan), flow, model);
}

inline std::vector<Violation> plan_violations(const AnyPlan& plan, const FlowSpec& flow) {
    return std::visit([&](const auto& p) { return validate(p, flow); }, plan);
}

}  // namespace flowopt
