// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "support.hpp"

using namespace flowopt;
using testing_support::plan_of;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

class Check {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok && failures_++ < 5) msg_ << (msg_.tellp() > 0 ? "; " : "") << what;
    }
    Outcome done(const std::string& summary) const {
        if (failures_ == 0) return {true, summary};
        return {false, summary + " | " + std::to_string(failures_) + " failure(s): " + msg_.str()};
    }

private:
    std::size_t failures_ = 0;
    std::ostringstream msg_;
};

std::string fmt(double v, const char* spec = "%.4f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::size_t position(const LinearPlan& p, int id) {
    return static_cast<std::size_t>(std::find(p.order.begin(), p.order.end(), TaskIndex(id - 1)) - p.order.begin());
}

double mean_of(const BenchReport& r, const std::string& algo) {
    for (const auto& m : r.means)
        if (m.algorithm == algo) return m.mean_normalized_scm;
    return std::numeric_limits<double>::quiet_NaN();
}

Outcome worked_example() {
    Check c;
    const auto f = three_task_example();
    const double a = scm(plan_of({0, 1, 2}), f), b = scm(plan_of({1, 2, 0}), f);
    c.expect(std::abs(a - 3.1) <= 1e-12, "scm(t1,t2,t3)=" + fmt(a, "%.17g"));
    c.expect(std::abs(b - 2.65) <= 1e-12, "scm(t2,t3,t1)=" + fmt(b, "%.17g"));
    for (const char* algo : {"swap", "greedy1", "partition"})
        c.expect(std::abs(scm(std::get<LinearPlan>(optimize(algo, f)), f) - 3.1) <= 1e-12, std::string(algo) + " != 3.1");
    for (const char* algo : {"backtracking", "dp", "topsort", "kbz", "ro1"})
        c.expect(std::abs(scm(std::get<LinearPlan>(optimize(algo, f)), f) - 2.65) <= 1e-12, std::string(algo) + " != 2.65");
    return c.done("scm 3.1 / 2.65; swap, greedy1, partition stop at 3.1");
}

Outcome exact_agreement() {
    Check c;
    const double alphas[] = {0.2, 0.4, 0.6, 0.8};
    std::mt19937_64 rng(2024);
    for (std::size_t i = 0; i < 200; ++i) {
        const auto n = std::uniform_int_distribution<std::size_t>(4, 9)(rng);
        const auto f = testing_support::random_flow(rng(), n, alphas[i % 4]);
        const auto bf = oracle::brute_force(f);
        const auto tag = "case " + std::to_string(i);
        c.expect(scm_equal(scm(backtracking(f), f), bf.best), tag + " backtracking");
        c.expect(scm_equal(scm(dynamic_programming(f), f), bf.best), tag + " dp");
        const auto ts = topsort_search(f);
        c.expect(scm_equal(ts.cost, bf.best), tag + " topsort");
        c.expect(ts.visited == bf.valid, tag + " visited " + std::to_string(ts.visited) + " vs " + std::to_string(bf.valid));
    }
    return c.done("200 flows, n in [4,9]");
}

Outcome pdi_structure() {
    Check c;
    const auto f = pdi_case_study();
    const auto opt = dynamic_programming(f);
    const double best = scm(opt, f);
    const auto bf = oracle::brute_force_pruned(f);
    c.expect(scm_equal(best, bf.best), "dp is not the brute-force optimum");
    c.expect(std::find(bf.optima.begin(), bf.optima.end(), opt.order) != bf.optima.end(), "dp order not an optimum");
    for (const auto& o : bf.optima) {
        const LinearPlan p{o};
        c.expect(position(p, 12) < position(p, 11), "Filter Region not before Lookup Campaign");
        c.expect(position(p, 6) < position(p, 8) && position(p, 7) < position(p, 8), "date tasks not before Sort");
    }
    const double swapped = scm(swap_opt(f, pdi_design_order()), f);
    c.expect(swapped > best && !scm_equal(swapped, best), "swap reached the optimum");
    return c.done("optimum " + fmt(best) + " (" + std::to_string(bf.optima.size()) + " optimal orders of " +
                  std::to_string(bf.valid) + "), swap from design order " + fmt(swapped) + ", design " +
                  fmt(scm(pdi_design_order(), f)));
}

BenchReport table_run(Distribution dist) {
    BenchConfig cfg;
    cfg.gen.n = 20;
    cfg.gen.pc_fraction = 0.4;
    cfg.gen.cost_dist = cfg.gen.sel_dist = dist;
    cfg.gen.beta_a = cfg.gen.beta_b = 0.5;
    cfg.gen.seed = 1;
    cfg.runs = 100;
    cfg.algorithms = {"initial", "swap", "ro1", "ro2", "ro3"};
    return run_bench(cfg);
}

Outcome table_uniform() {
    Check c;
    const auto r = table_run(Distribution::uniform);
    const double swap = mean_of(r, "swap"), r1 = mean_of(r, "ro1"), r2 = mean_of(r, "ro2"), r3 = mean_of(r, "ro3");
    c.expect(r3 < swap, "ro3 >= swap");
    c.expect(r3 < std::min(r1, r2), "ro3 >= min(ro1, ro2)");
    c.expect(std::abs(r3 - 0.2841) <= 0.10, "ro3 outside 0.2841 +/- 0.10");
    c.expect(std::abs(swap - 0.4101) <= 0.10, "swap outside 0.4101 +/- 0.10");
    return c.done("means swap " + fmt(swap) + " ro1 " + fmt(r1) + " ro2 " + fmt(r2) + " ro3 " + fmt(r3) + ", avg_diff " +
                  fmt(r.avg_diff));
}

Outcome table_beta() {
    Check c;
    const auto r = table_run(Distribution::beta);
    const double swap = mean_of(r, "swap"), r3 = mean_of(r, "ro3");
    c.expect(r3 < swap, "ro3 >= swap");
    return c.done("means swap " + fmt(swap) + " ro3 " + fmt(r3));
}

Outcome parallel_monotone() {
    Check c;
    double rel = 0.0;
    std::size_t counted = 0;
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        const auto f = testing_support::random_small_flow(seed + 7000, 4, 20);
        const auto p = random_valid_plan(f, seed);
        const auto dag = parallelize(p, f);
        c.expect(validate(dag, f).empty(), "seed " + std::to_string(seed) + " violations");
        const double zero = scm(dag, f), lin = scm(p, f);
        c.expect(zero <= lin * (1 + 1e-12), "seed " + std::to_string(seed) + " worse than linear");
        rel += (scm(dag, f, CostModel{10.0}) - zero) / zero;
        ++counted;
    }
    rel /= static_cast<double>(counted);
    c.expect(rel < 0.05, "mean merge-cost change " + fmt(rel));
    return c.done("500 flows, mean change at mc=10: " + fmt(100 * rel, "%.2f") + "%");
}

Outcome cut_optimality() {
    Check c;
    std::size_t steps = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto f = testing_support::random_small_flow(seed + 31000, 2, 7);
        for (auto metric : {PGreedyMetric::cost, PGreedyMetric::rank}) {
            // Replays PGreedy's placement order and checks each chosen cut.
            PlanDag dag(f.size(), false);
            std::vector<TaskIndex> placed;
            const auto ref = metric == PGreedyMetric::cost ? pgreedy_i(f) : pgreedy_ii(f);
            const auto order = ref.topological_order();
            for (auto t : *order) {
                const auto cut = optimal_cut(dag, f, placed, t);
                const double brute = oracle::brute_force_cut(dag, f, placed, t);
                c.expect(scm_equal(cut.input, brute), "seed " + std::to_string(seed) + " task " + std::to_string(t));
                dag.add_node(t);
                for (auto u : cut.cut) dag.add_edge(u, t);
                placed.push_back(t);
                ++steps;
            }
            c.expect(validate(dag, f).empty(), "seed " + std::to_string(seed) + " replay invalid");
        }
    }
    return c.done("100 flows, " + std::to_string(steps) + " placement steps");
}

Outcome mimo_improvement() {
    Check c;
    BenchConfig cfg;
    cfg.fixture = Fixture::butterfly;
    cfg.segments = 10;
    cfg.gen.n = 20;
    cfg.gen.pc_fraction = 0.4;
    cfg.gen.seed = 1;
    cfg.runs = 30;
    cfg.algorithms = {"initial", "mimo:swap", "mimo:ro3"};
    const auto r = run_bench(cfg);
    const double swap = mean_of(r, "mimo:swap"), r3 = mean_of(r, "mimo:ro3");
    c.expect(r3 < swap, "mimo+ro3 >= mimo+swap");
    c.expect(r3 <= 0.40, "mimo+ro3 above 0.40");
    return c.done("means mimo+swap " + fmt(swap) + " mimo+ro3 " + fmt(r3));
}

double median_dp_ms(std::size_t n) {
    std::vector<double> t;
    for (std::size_t r = 0; r < 5; ++r) {
        OverheadConfig cfg;
        cfg.gen.n = n;
        cfg.gen.pc_fraction = 0.4;
        cfg.gen.seed = 99 + r;
        cfg.algorithm = "dp";
        cfg.run.exact.force = true;
        t.push_back(run_overhead(cfg).front().wall_time_ms);
    }
    std::sort(t.begin(), t.end());
    return t[t.size() / 2];
}

Outcome overhead_shape() {
    Check c;
    std::string times;
    double prev = 0.0;
    for (std::size_t n = 15; n <= 18; ++n) {
        const double ms = median_dp_ms(n);
        times += (times.empty() ? "" : ", ") + std::string("n=") + std::to_string(n) + " " + fmt(ms, "%.1f") + "ms";
        c.expect(ms > prev, "dp time not increasing at n=" + std::to_string(n));
        prev = ms;
    }
    OverheadConfig top;
    top.gen.n = 30;
    top.gen.pc_fraction = 0.98;
    top.gen.seed = 5;
    top.algorithm = "topsort";
    top.timeout = std::chrono::milliseconds(60000);
    const auto row = run_overhead(top).front();
    c.expect(row.status == "ok", "topsort n=30 timed out");
    return c.done("dp " + times + "; topsort n=30 @98% " + fmt(row.wall_time_ms, "%.1f") + "ms");
}

Outcome property_suite() {
    Check c;
    std::mt19937_64 rng(77);
    for (std::size_t i = 0; i < 1000; ++i) {
        const auto tag = "case " + std::to_string(i);
        const auto n = std::uniform_int_distribution<std::size_t>(2, 9)(rng);
        const double alpha = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        GenConfig g;
        g.n = n;
        g.pc_fraction = alpha;
        g.seed = rng();
        if (i % 2) g.cost_dist = g.sel_dist = Distribution::beta;
        const auto f = generate(g);

        const auto target = target_constraint_count(n, alpha);
        c.expect(f.pc().edge_count() >= target && f.pc().edge_count() <= target + n, tag + " generator edge count");
        const auto edges = f.pc().edges();
        c.expect(transitive_closure(edges, n) == f.pc(), tag + " closure not idempotent");
        c.expect(f.pc().edge_count() == oracle::closure_count(oracle::closure(f)), tag + " closure differs from oracle");
        for (const auto& t : f.tasks())
            c.expect(std::abs(t.rank() * t.cost + t.selectivity - 1.0) <= 1e-9, tag + " rank identity");

        RunOptions run;
        run.seed = g.seed;
        for (const auto& a : linear_algorithms()) {
            try {
                c.expect(plan_violations(optimize(a, f, run), f).empty(), tag + " " + a + " invalid");
            } catch (const ClusterTooLarge&) {
            } catch (const NotATree&) {
            }
        }
        for (const auto& a : parallel_algorithms())
            c.expect(plan_violations(optimize(a, f, run), f).empty(), tag + " " + a + " invalid");

        const auto s = swap_opt(f, std::nullopt, g.seed);
        c.expect(swap_opt(f, s) == s, tag + " swap not idempotent");
        const auto r3 = ro_iii(f);
        c.expect(block_move_refine(f, r3) == r3, tag + " ro3 not idempotent");
        c.expect(scm(r3, f) <= scm(ro_ii(f), f) * (1 + 1e-12), tag + " ro3 worse than ro2");
    }
    return c.done("1000 randomized cases");
}

}  // namespace

// Optional arguments select criteria by number.
int main(int argc, char** argv) {
    std::vector<char> selected(11, argc == 1);
    for (int i = 1; i < argc; ++i) {
        const int k = std::atoi(argv[i]);
        if (k >= 1 && k <= 10) selected[static_cast<std::size_t>(k)] = 1;
    }
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"worked example", worked_example},      {"exact oracle agreement", exact_agreement},
        {"case-study structure", pdi_structure}, {"uniform benchmark ordering", table_uniform},
        {"beta benchmark ordering", table_beta}, {"parallel monotonicity", parallel_monotone},
        {"cut optimality", cut_optimality},      {"mimo improvement", mimo_improvement},
        {"overhead shape", overhead_shape},      {"property suite", property_suite},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!selected[i + 1]) continue;
        Outcome out;
        const auto start = std::chrono::steady_clock::now();
        try {
            out = criteria[i].second();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("criterion %zu (%s): %s - %s [%.1fs]\n", i + 1, criteria[i].first, out.pass ? "PASS" : "FAIL",
                    out.detail.c_str(), secs);
        std::fflush(stdout);
        failed += out.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
