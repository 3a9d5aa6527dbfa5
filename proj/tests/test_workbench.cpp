#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "support.hpp"

using namespace flowopt;
using testing_support::plan_of;

namespace {

std::size_t position(const LinearPlan& p, int id) {
    return static_cast<std::size_t>(std::find(p.order.begin(), p.order.end(), TaskIndex(id - 1)) - p.order.begin());
}

std::string data_file(const std::string& name) { return std::string(FLOWOPT_DATA_DIR) + "/" + name; }

}  // namespace

TEST(Pdi, MatchesPublishedMetadata) {
    const auto f = pdi_case_study();
    const std::vector<std::pair<double, double>> expect{{1.7, 1},  {4.5, 1},  {5, 1},    {1.9, 0.9}, {6.5, 1},
                                                        {19.4, 1}, {2, 0.2},  {173, 1},  {10.3, 0.1}, {10.8, 1},
                                                        {11.6, 1}, {2, 0.22}, {1, 1}};
    ASSERT_EQ(f.size(), 13u);
    for (std::size_t i = 0; i < 13; ++i) {
        EXPECT_EQ(f.task(i).id, static_cast<int>(i + 1));
        EXPECT_DOUBLE_EQ(f.cost(i), expect[i].first);
        EXPECT_DOUBLE_EQ(f.sel(i), expect[i].second);
    }
    EXPECT_EQ(f.constraints().size(), 14u);
    EXPECT_EQ(f.task(11).label, "Filter Region");
    EXPECT_TRUE(validate(pdi_design_order(), f).empty());
}

TEST(Pdi, BundledFileMatches) {
    const auto doc = load_flow(data_file("pdi_case_study.json"));
    EXPECT_EQ(doc.flow, pdi_case_study());
    const auto three = load_flow(data_file("three_task.json"));
    EXPECT_EQ(three.flow, three_task_example());
}

TEST(Pdi, OptimumStructure) {
    const auto f = pdi_case_study();
    const auto opt = dynamic_programming(f);
    EXPECT_TRUE(scm_equal(scm(opt, f), scm(backtracking(f, {0, true, {}}), f)));
    EXPECT_LT(position(opt, 12), position(opt, 11));  // Filter Region before Lookup Campaign
    EXPECT_LT(position(opt, 6), position(opt, 8));    // Extract Date before Sort
    EXPECT_LT(position(opt, 7), position(opt, 8));    // Filter Dates before Sort
    const auto swapped = swap_opt(f, pdi_design_order());
    EXPECT_GT(scm(swapped, f), scm(opt, f) * (1 + 1e-9));
    EXPECT_LT(scm(ro_iii(f), f), scm(pdi_design_order(), f));
}

TEST(Io, FlowRoundTrip) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto f = testing_support::random_flow(seed, 12, 0.5);
        const auto doc = flow_from_json(json::parse(flow_to_json(f).dump()));
        EXPECT_EQ(doc.flow.tasks(), f.tasks());
        EXPECT_EQ(doc.flow.pc(), f.pc());
        EXPECT_FALSE(doc.dag);
    }
    const auto pdi = pdi_case_study();
    EXPECT_EQ(flow_from_json(flow_to_json(pdi)).flow, pdi);
}

TEST(Io, TasksSortedById) {
    const auto j = json::parse(R"({"tasks":[{"id":5,"cost":1,"selectivity":1},{"id":2,"cost":2,"selectivity":0.5}],
                                   "constraints":[[5,2]]})");
    const auto f = flow_from_json(j).flow;
    EXPECT_EQ(f.task(0).id, 2);
    EXPECT_TRUE(f.pc().precedes(1, 0));
}

TEST(Io, MimoEdges) {
    MimoConfig cfg;
    const auto m = butterfly(cfg);
    const auto doc = flow_from_json(flow_to_json(m.flow, m.dag));
    ASSERT_TRUE(doc.dag);
    EXPECT_EQ(*doc.dag, m.dag);
}

TEST(Io, PlanRoundTrip) {
    const auto f = testing_support::random_flow(4, 10, 0.3);
    const AnyPlan lin = ro_iii(f);
    EXPECT_EQ(std::get<LinearPlan>(plan_from_json(plan_to_json(lin, f), f)), std::get<LinearPlan>(lin));
    const AnyPlan dag = pgreedy_ii(f);
    EXPECT_EQ(std::get<PlanDag>(plan_from_json(plan_to_json(dag, f), f)), std::get<PlanDag>(dag));
}

TEST(Io, ParseErrors) {
    EXPECT_THROW(flow_from_json(json::parse("[]")), ParseError);
    EXPECT_THROW(flow_from_json(json::parse(R"({"tasks":[{"id":1}]})")), ParseError);
    EXPECT_THROW(flow_from_json(json::parse(R"({"tasks":[{"id":1,"cost":1,"selectivity":1}],"constraints":[[1,9]]})")),
                 ParseError);
    EXPECT_THROW(flow_from_json(json::parse(R"({"tasks":[{"id":1,"cost":-1,"selectivity":1}]})")), ParseError);
    EXPECT_THROW(flow_from_json(json::parse(
                     R"({"tasks":[{"id":1,"cost":1,"selectivity":1},{"id":2,"cost":1,"selectivity":1}],"constraints":[[1,2],[2,1]]})")),
                 CycleError);
    EXPECT_THROW(read_json_file("/nonexistent/flow.json"), ParseError);
    const auto f = three_task_example();
    EXPECT_THROW(plan_from_json(json::parse(R"({"kind":"tree"})"), f), ParseError);
    EXPECT_THROW(plan_from_json(json::parse(R"({"kind":"linear","order":[1,7]})"), f), ParseError);
}

TEST(Dot, ChainAndFanOut) {
    const auto f = three_task_example();
    const auto dot = to_dot(AnyPlan{plan_of({0, 1, 2})}, f);
    EXPECT_NE(dot.find("digraph"), std::string::npos);
    EXPECT_NE(dot.find("label=\"2:t2\\nc=1,sel=1.1\""), std::string::npos);
    std::size_t arrows = 0;
    for (auto pos = dot.find("->"); pos != std::string::npos; pos = dot.find("->", pos + 2)) ++arrows;
    EXPECT_EQ(arrows, 2u);

    const auto g = testing_support::make_flow({{1, 0.5}, {1, 2}, {1, 3}, {1, 1.5}, {1, 0.4}});
    const auto fan = to_dot(AnyPlan{parallelize(plan_of({0, 1, 2, 3, 4}), g)}, g);
    EXPECT_NE(fan.find("t1 -> t2;\n  t1 -> t3;\n  t1 -> t4;"), std::string::npos);
}

TEST(Dot, NodesOrderedById) {
    const auto f = three_task_example();
    const auto dot = to_dot(AnyPlan{plan_of({1, 2, 0})}, f);
    EXPECT_LT(dot.find("t1 ["), dot.find("t2 ["));
    EXPECT_LT(dot.find("t2 ["), dot.find("t3 ["));
    const auto c = constraints_to_dot(f);
    EXPECT_NE(c.find("t2 -> t3;"), std::string::npos);
}

TEST(Dot, ButterflyHasManyRoots) {
    MimoConfig cfg;
    const auto m = butterfly(cfg);
    const auto dot = to_dot(AnyPlan{m.dag}, m.flow);
    EXPECT_EQ(m.dag.roots().size(), 5u);
    for (int id = 1; id <= 5; ++id) EXPECT_EQ(dot.find("-> t" + std::to_string(id) + ";"), std::string::npos);
}

TEST(Bench, HeaderAndDeterminism) {
    BenchConfig cfg;
    cfg.gen.n = 10;
    cfg.runs = 5;
    cfg.algorithms = {"initial", "swap", "ro3"};
    std::ostringstream a, b;
    write_bench_csv(a, run_bench(cfg), false);
    write_bench_csv(b, run_bench(cfg), false);
    EXPECT_EQ(a.str(), b.str());
    EXPECT_EQ(a.str().rfind(kBenchHeader, 0), 0u);
    const auto report = run_bench(cfg);
    EXPECT_EQ(report.rows.size(), 15u);
    for (const auto& r : report.rows) {
        if (r.algorithm == "initial") {
            EXPECT_DOUBLE_EQ(r.normalized_scm, 1.0);
        }
    }
    EXPECT_EQ(report.baseline, "swap");
    EXPECT_EQ(report.contender, "ro3");
}

TEST(Bench, IdenticalAlgorithmsHaveZeroDiff) {
    BenchConfig cfg;
    cfg.gen.n = 12;
    cfg.runs = 10;
    cfg.algorithms = {"swap", "swap"};
    const auto r = run_bench(cfg);
    EXPECT_DOUBLE_EQ(r.avg_diff, 0.0);
    EXPECT_DOUBLE_EQ(r.max_diff, 0.0);
}

TEST(Bench, ExactRowsAgree) {
    BenchConfig cfg;
    cfg.gen.n = 8;
    cfg.runs = 1;
    cfg.algorithms = {"backtracking", "dp", "topsort"};
    const auto r = run_bench(cfg);
    ASSERT_EQ(r.rows.size(), 3u);
    EXPECT_TRUE(scm_equal(r.rows[0].scm, r.rows[1].scm));
    EXPECT_TRUE(scm_equal(r.rows[0].scm, r.rows[2].scm));
}

TEST(Bench, RowsReplayToValidPlans) {
    BenchConfig cfg;
    cfg.gen.n = 12;
    cfg.runs = 4;
    cfg.algorithms = {"swap", "ro3", "pgreedy2", "parallelize-post"};
    const auto report = run_bench(cfg);
    for (const auto& row : report.rows) {
        GenConfig g = cfg.gen;
        g.seed = row.seed;
        const auto flow = generate(g);
        RunOptions run;
        run.seed = row.seed;
        const auto plan = optimize(row.algorithm, flow, run);
        const auto reloaded = plan_from_json(json::parse(plan_to_json(plan, flow).dump()), flow);
        EXPECT_TRUE(plan_violations(reloaded, flow).empty());
        EXPECT_TRUE(scm_equal(plan_scm(reloaded, flow), row.scm));
    }
}

TEST(Bench, MimoFixture) {
    BenchConfig cfg;
    cfg.gen.n = 8;
    cfg.runs = 2;
    cfg.fixture = Fixture::butterfly;
    cfg.algorithms = {"initial", "mimo:swap", "mimo:ro3"};
    const auto r = run_bench(cfg);
    EXPECT_EQ(r.rows.size(), 6u);
    EXPECT_EQ(r.baseline, "initial");
    EXPECT_EQ(r.contender, "mimo:ro3");
    cfg.algorithms = {"ro3"};
    EXPECT_THROW(run_bench(cfg), UnknownAlgorithm);
}

TEST(Bench, UnknownAlgorithm) {
    BenchConfig cfg;
    cfg.algorithms = {"simplex"};
    EXPECT_THROW(run_bench(cfg), UnknownAlgorithm);
}

TEST(Overhead, SmallRunsAreFast) {
    OverheadConfig cfg;
    cfg.gen.n = 5;
    for (const auto& algo : linear_algorithms()) {
        cfg.algorithm = algo;
        std::vector<OverheadRow> rows;
        try {
            rows = run_overhead(cfg);
        } catch (const NotATree&) {
            continue;
        }
        ASSERT_EQ(rows.size(), 1u);
        EXPECT_EQ(rows[0].status, "ok");
        EXPECT_LT(rows[0].wall_time_ms, 1000.0);
    }
}

TEST(Overhead, TimeoutReported) {
    OverheadConfig cfg;
    cfg.gen.n = 14;
    cfg.gen.pc_fraction = 0.0;
    cfg.algorithm = "topsort";
    cfg.timeout = std::chrono::milliseconds(10);
    const auto rows = run_overhead(cfg);
    EXPECT_EQ(rows[0].status, "timeout");
}

TEST(Algorithms, DispatchNames) {
    const auto f = three_task_example();
    for (const auto& a : linear_algorithms()) EXPECT_TRUE(plan_violations(optimize(a, f), f).empty()) << a;
    for (const auto& a : parallel_algorithms()) EXPECT_TRUE(plan_violations(optimize(a, f), f).empty()) << a;
    EXPECT_THROW(optimize("bogus", f), UnknownAlgorithm);
    RunOptions bad;
    bad.parallel_base = "pgreedy1";
    EXPECT_THROW(optimize("parallelize-post", f, bad), UnknownAlgorithm);
}
