#pragma once

// Synthetic flows: i.i.d. task metadata plus a random PC graph whose
// transitive closure covers a requested fraction of all task pairs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <boost/random/beta_distribution.hpp>

#include "flowcore.hpp"

namespace flowopt {

class ConfigError : public FlowError {
public:
    using FlowError::FlowError;
};

enum class Distribution { uniform, beta };

struct GenConfig {
    std::size_t n = 20;
    double pc_fraction = 0.4;  // share of the n(n-1)/2 pairs covered by the closure
    Distribution cost_dist = Distribution::uniform;
    Distribution sel_dist = Distribution::uniform;
    double beta_a = 0.5;
    double beta_b = 0.5;
    std::uint64_t seed = 1;
};

inline constexpr double kCostMin = 1.0;
inline constexpr double kCostMax = 100.0;
inline constexpr double kSelMax = 2.0;
inline constexpr double kSelFloor = 1e-9;
inline constexpr std::size_t kGeneratorMaxTasks = 1000;

inline void check_config(const GenConfig& cfg) {
    if (cfg.n < 1 || cfg.n > kGeneratorMaxTasks)
        throw ConfigError("task count must lie in [1, " + std::to_string(kGeneratorMaxTasks) + "]");
    if (!(cfg.pc_fraction >= 0.0 && cfg.pc_fraction <= 1.0))
        throw ConfigError("precedence-constraint fraction must lie in [0, 1]");
    if (!(cfg.beta_a > 0.0) || !(cfg.beta_b > 0.0)) throw ConfigError("beta parameters must be positive");
}

/// Sizes and constraint shares covered by the standard benchmark sweep.
inline bool is_benchmark_range(const GenConfig& cfg) {
    return cfg.n >= 10 && cfg.n <= 100 && cfg.pc_fraction >= 0.1 && cfg.pc_fraction <= 0.98;
}

/// SplitMix64 step; derives independent sub-seeds from one base seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::size_t target_constraint_count(std::size_t n, double pc_fraction) {
    const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
    return static_cast<std::size_t>(std::ceil(pc_fraction * pairs - 1e-9));
}

namespace detail {

class ClosureBuilder {
public:
    explicit ClosureBuilder(std::size_t n) : n_(n), reach_(n * n, 0) {}

    bool related(std::size_t a, std::size_t b) const { return reach_[a * n_ + b] || reach_[b * n_ + a]; }

    // Closure pairs that adding a -> b would create.
    std::size_t gain(std::size_t a, std::size_t b) const {
        std::size_t g = 0;
        for (std::size_t x = 0; x < n_; ++x) {
            if (x != a && !reach_[x * n_ + a]) continue;
            for (std::size_t y = 0; y < n_; ++y)
                if ((y == b || reach_[b * n_ + y]) && !reach_[x * n_ + y]) ++g;
        }
        return g;
    }

    std::size_t add(std::size_t a, std::size_t b) {
        std::size_t g = 0;
        for (std::size_t x = 0; x < n_; ++x) {
            if (x != a && !reach_[x * n_ + a]) continue;
            for (std::size_t y = 0; y < n_; ++y)
                if ((y == b || reach_[b * n_ + y]) && !reach_[x * n_ + y]) {
                    reach_[x * n_ + y] = 1;
                    ++g;
                }
        }
        count_ += g;
        return g;
    }

    std::size_t count() const { return count_; }

    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        for (std::size_t a = 0; a < n_; ++a)
            for (std::size_t b = 0; b < n_; ++b)
                if (reach_[a * n_ + b]) out.emplace_back(a, b);
        return out;
    }

private:
    std::size_t n_;
    std::vector<char> reach_;
    std::size_t count_ = 0;
};

inline double draw(Distribution d, double lo, double hi, const GenConfig& cfg, std::mt19937_64& rng) {
    if (d == Distribution::beta) {
        boost::random::beta_distribution<double> beta(cfg.beta_a, cfg.beta_b);
        return lo + (hi - lo) * beta(rng);
    }
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace detail

/// Random closed PC graph over n tasks with at least `target` closure
/// pairs and at most target + n. Pairs are forward pairs of a hidden random
/// permutation, so the result is acyclic.
inline std::vector<Edge> random_precedence_edges(std::size_t n, std::size_t target, std::mt19937_64& rng) {
    std::vector<std::size_t> hidden(n);
    for (std::size_t i = 0; i < n; ++i) hidden[i] = i;
    std::shuffle(hidden.begin(), hidden.end(), rng);

    detail::ClosureBuilder closure(n);
    const std::size_t cap = target + n;
    while (closure.count() < target) {
        std::vector<Edge> open;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (!closure.related(hidden[i], hidden[j])) open.emplace_back(hidden[i], hidden[j]);
        if (open.empty()) break;
        std::shuffle(open.begin(), open.end(), rng);
        bool added = false;
        // Random pairs first; they may not overshoot the cap.
        for (std::size_t k = 0; k < open.size() && k < 64; ++k) {
            if (closure.count() + closure.gain(open[k].first, open[k].second) <= cap) {
                closure.add(open[k].first, open[k].second);
                added = true;
                break;
            }
        }
        if (!added) {
            auto best = open.front();
            std::size_t best_gain = closure.gain(best.first, best.second);
            for (const auto& e : open) {
                const auto g = closure.gain(e.first, e.second);
                if (g < best_gain) {
                    best = e;
                    best_gain = g;
                }
            }
            closure.add(best.first, best.second);
        }
    }
    return closure.edges();
}

/// Random tasks (ids 1..n) with costs in [1,100] and selectivities in
/// (0,2], and a PC closure covering about pc_fraction of all pairs.
inline FlowSpec generate(const GenConfig& cfg) {
    check_config(cfg);
    std::mt19937_64 rng(cfg.seed);
    std::vector<Task> tasks;
    tasks.reserve(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        Task t;
        t.id = static_cast<int>(i + 1);
        t.cost = detail::draw(cfg.cost_dist, kCostMin, kCostMax, cfg, rng);
        // Uniform draws land in [0,2); reflect to (0,2].
        const double s = cfg.sel_dist == Distribution::uniform ? kSelMax - detail::draw(cfg.sel_dist, 0.0, kSelMax, cfg, rng)
                                                               : detail::draw(cfg.sel_dist, kSelFloor, kSelMax, cfg, rng);
        t.selectivity = std::max(s, kSelFloor);
        tasks.push_back(std::move(t));
    }
    auto edges = random_precedence_edges(cfg.n, target_constraint_count(cfg.n, cfg.pc_fraction), rng);
    return FlowSpec(std::move(tasks), std::move(edges));
}

}  // namespace flowopt
