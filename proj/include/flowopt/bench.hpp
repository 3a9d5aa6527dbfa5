#pragma once

// Benchmark runner: normalized SCM of several optimizers over many
// generated flows, plus optimizer wall-time measurement.

#include <chrono>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "algorithms.hpp"
#include "generator.hpp"
#include "mimo.hpp"

namespace flowopt {

struct BenchRow {
    std::uint64_t seed = 0;
    std::size_t n = 0;
    double pc_pct = 0.0;
    std::string algorithm;
    double scm = 0.0;
    double normalized_scm = 0.0;
    double wall_time_ms = 0.0;
};

struct BenchAggregate {
    std::string algorithm;
    double mean_normalized_scm = 0.0;
};

struct BenchReport {
    std::vector<BenchRow> rows;
    std::vector<BenchAggregate> means;  // in algorithm-list order
    std::string baseline;               // AvgDiff/MaxDiff compare baseline against contender
    std::string contender;
    double avg_diff = 0.0;
    double max_diff = 0.0;
};

enum class Fixture { generated, butterfly, fork };

struct BenchConfig {
    GenConfig gen;                        // gen.seed is the base seed
    std::vector<std::string> algorithms;  // "initial", linear/parallel names, or "mimo:<inner>"
    std::size_t runs = 100;
    RunOptions run;
    Fixture fixture = Fixture::generated;
    std::size_t segments = 10;            // MIMO fixtures only
    std::optional<std::string> baseline;  // default: swap if listed, else the first algorithm
    std::optional<std::string> contender; // default: ro3 if listed, else the last algorithm
};

/// Run r uses seed mix_seed(base, r) for its flow; the random initial plan
/// and swap's starting point both come from that seed.
inline std::uint64_t run_seed(std::uint64_t base, std::size_t run) { return mix_seed(base, run); }

namespace detail {

inline std::string pick_default(const std::vector<std::string>& algos, const std::optional<std::string>& chosen,
                                const char* preferred, bool first) {
    if (chosen) return *chosen;
    for (const auto& a : algos)
        if (a == preferred) return a;
    if (algos.empty()) return {};
    return first ? algos.front() : algos.back();
}

inline double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

inline void check_algorithm_name(const std::string& name, Fixture fixture) {
    if (name == "initial") return;
    if (fixture == Fixture::generated) {
        if (name.rfind("mimo:", 0) == 0) throw UnknownAlgorithm("mimo algorithms need a MIMO fixture");
        if (!is_linear_algorithm(name) && name != "pgreedy1" && name != "pgreedy2" && name != "parallelize-post")
            throw UnknownAlgorithm("unknown algorithm '" + name + "'");
        return;
    }
    if (name.rfind("mimo:", 0) != 0 || !is_linear_algorithm(name.substr(5)))
        throw UnknownAlgorithm("MIMO fixtures accept only initial and mimo:<linear algorithm>, got '" + name + "'");
}

}  // namespace detail

inline BenchReport run_bench(const BenchConfig& cfg) {
    check_config(cfg.gen);
    for (const auto& a : cfg.algorithms) detail::check_algorithm_name(a, cfg.fixture);
    BenchReport report;
    report.baseline = detail::pick_default(cfg.algorithms, cfg.baseline, "swap", true);
    report.contender = detail::pick_default(cfg.algorithms, cfg.contender, "ro3", false);

    std::map<std::string, double> sums;
    std::size_t diff_count = 0;
    for (std::size_t r = 0; r < cfg.runs; ++r) {
        const auto seed = run_seed(cfg.gen.seed, r);
        GenConfig gen = cfg.gen;
        gen.seed = seed;
        RunOptions run = cfg.run;
        run.seed = seed;

        FlowSpec flow;
        PlanDag initial_dag;
        if (cfg.fixture == Fixture::generated) {
            flow = generate(gen);
            initial_dag = PlanDag::chain(random_valid_plan(flow, seed), flow.size());
        } else {
            MimoConfig mc;
            mc.segments = cfg.segments;
            mc.segment_length = gen.n;
            mc.pc_fraction = gen.pc_fraction;
            mc.dist = gen.sel_dist;
            mc.seed = seed;
            auto fixture = cfg.fixture == Fixture::butterfly ? butterfly(mc) : fork(mc);
            flow = std::move(fixture.flow);
            initial_dag = std::move(fixture.dag);
        }
        const double initial = dag_scm(initial_dag, flow, run.model);

        std::map<std::string, double> row_scm;
        for (const auto& name : cfg.algorithms) {
            const auto start = std::chrono::steady_clock::now();
            double value = initial;
            if (name == "initial") {
                // the random start itself
            } else if (name.rfind("mimo:", 0) == 0) {
                MimoOptions mo;
                mo.inner = name.substr(5);
                mo.run = run;
                value = scm(optimize_mimo(initial_dag, flow, mo), flow, run.model);
            } else {
                value = plan_scm(optimize(name, flow, run), flow, run.model);
            }
            const double ms = detail::elapsed_ms(start);
            report.rows.push_back({seed, gen.n, gen.pc_fraction * 100.0, name, value, value / initial, ms});
            if (!row_scm.count(name)) sums[name] += value / initial;
            row_scm[name] = value;
        }
        if (row_scm.count(report.baseline) && row_scm.count(report.contender)) {
            const double base = row_scm[report.baseline];
            const double diff = (base - row_scm[report.contender]) / base;
            report.avg_diff += diff;
            report.max_diff = diff_count == 0 ? diff : std::max(report.max_diff, diff);
            ++diff_count;
        }
    }
    if (diff_count > 0) report.avg_diff /= static_cast<double>(diff_count);
    for (const auto& name : cfg.algorithms) {
        bool seen = false;
        for (const auto& m : report.means) seen = seen || m.algorithm == name;
        if (!seen) report.means.push_back({name, cfg.runs ? sums[name] / static_cast<double>(cfg.runs) : 0.0});
    }
    return report;
}

inline std::string format_g6(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string format_f4(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

inline constexpr const char* kBenchHeader = "seed,n,pc_pct,algorithm,scm,normalized_scm,wall_time_ms";

/// Rows, then a blank line and the aggregate block. With
/// include_times=false the wall_time_ms column is left empty, which makes
/// the output depend only on the configuration.
inline void write_bench_csv(std::ostream& os, const BenchReport& report, bool include_times = true) {
    os << kBenchHeader << '\n';
    for (const auto& r : report.rows) {
        os << r.seed << ',' << r.n << ',' << format_g6(r.pc_pct) << ',' << r.algorithm << ',' << format_g6(r.scm) << ','
           << format_g6(r.normalized_scm) << ',' << (include_times ? format_g6(r.wall_time_ms) : std::string{}) << '\n';
    }
    os << "\nalgorithm,mean_normalized_scm\n";
    for (const auto& m : report.means) os << m.algorithm << ',' << format_f4(m.mean_normalized_scm) << '\n';
    os << "avg_diff(" << report.baseline << "->" << report.contender << ")," << format_f4(report.avg_diff) << '\n';
    os << "max_diff(" << report.baseline << "->" << report.contender << ")," << format_f4(report.max_diff) << '\n';
}

// ---------------------------------------------------------------------------
// Overhead

struct OverheadRow {
    std::uint64_t seed = 0;
    std::size_t n = 0;
    double pc_pct = 0.0;
    std::string algorithm;
    double wall_time_ms = 0.0;
    std::string status;  // ok | timeout
};

struct OverheadConfig {
    GenConfig gen;
    std::vector<std::size_t> sizes;  // empty: just gen.n
    std::string algorithm = "dp";
    std::size_t runs = 1;
    RunOptions run;
    std::optional<std::chrono::milliseconds> timeout;
};

inline std::vector<OverheadRow> run_overhead(const OverheadConfig& cfg) {
    std::vector<OverheadRow> rows;
    auto sizes = cfg.sizes;
    if (sizes.empty()) sizes.push_back(cfg.gen.n);
    for (auto n : sizes) {
        for (std::size_t r = 0; r < cfg.runs; ++r) {
            GenConfig gen = cfg.gen;
            gen.n = n;
            gen.seed = run_seed(cfg.gen.seed, r);
            const auto flow = generate(gen);
            RunOptions run = cfg.run;
            run.seed = gen.seed;
            const auto start = std::chrono::steady_clock::now();
            if (cfg.timeout) run.exact.deadline = start + *cfg.timeout;
            std::string status = "ok";
            try {
                (void)optimize(cfg.algorithm, flow, run);
            } catch (const TimeoutError&) {
                status = "timeout";
            }
            rows.push_back({gen.seed, n, gen.pc_fraction * 100.0, cfg.algorithm, detail::elapsed_ms(start), status});
        }
    }
    return rows;
}

inline void write_overhead_csv(std::ostream& os, const std::vector<OverheadRow>& rows) {
    os << "seed,n,pc_pct,algorithm,wall_time_ms,status\n";
    for (const auto& r : rows)
        os << r.seed << ',' << r.n << ',' << format_g6(r.pc_pct) << ',' << r.algorithm << ',' << format_g6(r.wall_time_ms)
           << ',' << r.status << '\n';
}

}  // namespace flowopt
