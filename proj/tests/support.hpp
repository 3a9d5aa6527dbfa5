#pragma once

#include <cstdint>
#include <ostream>
#include <random>
#include <vector>

#include <flowopt/flowopt.hpp>

namespace flowopt {

// Readable gtest failure output.
inline void PrintTo(const LinearPlan& p, std::ostream* os) {
    *os << "(";
    for (std::size_t i = 0; i < p.order.size(); ++i) *os << (i ? "," : "") << p.order[i];
    *os << ")";
}

}  // namespace flowopt

namespace testing_support {

/// Generated flow of n tasks; alpha is the closure share of all pairs.
inline flowopt::FlowSpec random_flow(std::uint64_t seed, std::size_t n, double alpha,
                                     flowopt::Distribution dist = flowopt::Distribution::uniform) {
    flowopt::GenConfig cfg;
    cfg.n = n;
    cfg.pc_fraction = alpha;
    cfg.cost_dist = cfg.sel_dist = dist;
    cfg.seed = seed;
    return flowopt::generate(cfg);
}

/// Random flow with n in [lo, hi] and a PC share drawn from `alphas`.
inline flowopt::FlowSpec random_small_flow(std::uint64_t seed, std::size_t lo, std::size_t hi,
                                           const std::vector<double>& alphas = {0.2, 0.4, 0.6, 0.8}) {
    std::mt19937_64 rng(seed);
    const auto n = std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    const auto a = alphas[std::uniform_int_distribution<std::size_t>(0, alphas.size() - 1)(rng)];
    return random_flow(rng(), n, a);
}

inline flowopt::FlowSpec make_flow(std::vector<std::pair<double, double>> cost_sel, std::vector<flowopt::Edge> edges = {},
                                   std::optional<flowopt::TaskIndex> source = {},
                                   std::optional<flowopt::TaskIndex> sink = {}) {
    std::vector<flowopt::Task> tasks;
    for (std::size_t i = 0; i < cost_sel.size(); ++i)
        tasks.push_back({static_cast<int>(i + 1), "t" + std::to_string(i + 1), cost_sel[i].first, cost_sel[i].second});
    return flowopt::FlowSpec(std::move(tasks), std::move(edges), source, sink);
}

inline flowopt::LinearPlan plan_of(std::vector<flowopt::TaskIndex> order) { return flowopt::LinearPlan{std::move(order)}; }

}  // namespace testing_support
