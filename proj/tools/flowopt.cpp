// flowopt: command-line front end for the flow optimizers.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <flowopt/flowopt.hpp>

namespace {

using namespace flowopt;

enum Exit : int { kOk = 0, kViolations = 1, kParse = 2, kCycle = 3, kGuard = 4, kTimeout = 5 };

struct Globals {
    std::uint64_t seed = 1;
    double mc = 0.0;
    bool force = false;
    long timeout_ms = 0;
    std::string out;
};

RunOptions run_options(const Globals& g) {
    RunOptions run;
    run.seed = g.seed;
    run.model.merge_cost = g.mc;
    run.exact.force = g.force;
    if (g.timeout_ms > 0)
        run.exact.deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(g.timeout_ms);
    return run;
}

void emit(const Globals& g, const std::string& text) {
    if (g.out.empty()) {
        std::cout << text;
        return;
    }
    write_text_file(g.out, text);
}

Distribution parse_dist(const std::string& s) {
    if (s == "uniform") return Distribution::uniform;
    if (s == "beta") return Distribution::beta;
    throw ParseError("unknown distribution '" + s + "' (uniform or beta)");
}

Fixture parse_fixture(const std::string& s) {
    if (s == "generated") return Fixture::generated;
    if (s == "butterfly") return Fixture::butterfly;
    if (s == "fork") return Fixture::fork;
    throw ParseError("unknown fixture '" + s + "' (generated, butterfly or fork)");
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// --- optimize -------------------------------------------------------------

struct OptimizeArgs {
    std::string flow_file;
    std::string algorithm = "ro3";
    std::string base = "ro3";
    std::size_t window = kRoIIIWindow;
    bool parallel = false;
    bool print_plan = false;
};

int cmd_optimize(const Globals& g, const OptimizeArgs& a) {
    const auto doc = load_flow(a.flow_file);
    const auto& flow = doc.flow;
    RunOptions run = run_options(g);
    run.parallel_base = a.base;
    run.window = a.window;

    double before = 0.0;
    AnyPlan plan;
    if (a.algorithm.rfind("mimo:", 0) == 0) {
        if (!doc.dag) throw ParseError("mimo algorithms need a flow with an \"edges\" list");
        MimoOptions mo;
        mo.inner = a.algorithm.substr(5);
        mo.parallel = a.parallel;
        mo.run = run;
        before = scm(*doc.dag, flow, run.model);
        plan = optimize_mimo(*doc.dag, flow, mo);
    } else {
        before = doc.dag ? scm(*doc.dag, flow, run.model) : scm(canonical_topological_order(flow), flow);
        plan = optimize(a.algorithm, flow, run);
    }
    const double after = plan_scm(plan, flow, run.model);
    std::cout << "algorithm: " << a.algorithm << "\n";
    std::cout << "scm_before: " << fmt(before) << "\n";
    std::cout << "scm_after: " << fmt(after) << "\n";
    if (const auto* lin = std::get_if<LinearPlan>(&plan)) {
        std::cout << "order:";
        for (auto t : lin->order) std::cout << ' ' << flow.task(t).id;
        std::cout << "\n";
    }
    const auto text = plan_to_json(plan, flow).dump(2) + "\n";
    if (!g.out.empty()) write_text_file(g.out, text);
    if (a.print_plan) std::cout << text;
    return kOk;
}

// --- bench / overhead / generate -----------------------------------------

struct GenArgs {
    std::size_t n = 20;
    double pc = 0.4;
    std::string dist = "uniform";
};

GenConfig gen_config(const Globals& g, const GenArgs& a) {
    GenConfig cfg;
    cfg.n = a.n;
    cfg.pc_fraction = a.pc;
    cfg.cost_dist = cfg.sel_dist = parse_dist(a.dist);
    cfg.seed = g.seed;
    check_config(cfg);
    return cfg;
}

struct BenchArgs {
    GenArgs gen;
    std::string algorithms = "initial,swap,ro1,ro2,ro3";
    std::size_t runs = 100;
    std::string fixture = "generated";
    std::size_t segments = 10;
    std::string baseline;
    std::string contender;
    bool no_times = false;
};

int cmd_bench(const Globals& g, const BenchArgs& a) {
    BenchConfig cfg;
    cfg.gen = gen_config(g, a.gen);
    cfg.algorithms = split_list(a.algorithms);
    cfg.runs = a.runs;
    cfg.run = run_options(g);
    cfg.fixture = parse_fixture(a.fixture);
    cfg.segments = a.segments;
    if (!a.baseline.empty()) cfg.baseline = a.baseline;
    if (!a.contender.empty()) cfg.contender = a.contender;
    std::ostringstream os;
    write_bench_csv(os, run_bench(cfg), !a.no_times);
    emit(g, os.str());
    return kOk;
}

struct OverheadArgs {
    GenArgs gen;
    std::string sizes;
    std::string algorithm = "dp";
    std::size_t runs = 1;
};

int cmd_overhead(const Globals& g, const OverheadArgs& a) {
    OverheadConfig cfg;
    cfg.gen = gen_config(g, a.gen);
    for (const auto& s : split_list(a.sizes)) cfg.sizes.push_back(std::stoul(s));
    cfg.algorithm = a.algorithm;
    cfg.runs = a.runs;
    cfg.run = run_options(g);
    cfg.run.exact.deadline.reset();
    if (g.timeout_ms > 0) cfg.timeout = std::chrono::milliseconds(g.timeout_ms);
    std::ostringstream os;
    write_overhead_csv(os, run_overhead(cfg));
    emit(g, os.str());
    return kOk;
}

struct GenerateArgs {
    GenArgs gen;
    std::string fixture = "generated";
    std::size_t segments = 10;
};

int cmd_generate(const Globals& g, const GenerateArgs& a) {
    const auto cfg = gen_config(g, a.gen);
    const auto fixture = parse_fixture(a.fixture);
    json j;
    if (fixture == Fixture::generated) {
        j = flow_to_json(generate(cfg));
    } else {
        MimoConfig mc;
        mc.segments = a.segments;
        mc.segment_length = cfg.n;
        mc.pc_fraction = cfg.pc_fraction;
        mc.dist = cfg.sel_dist;
        mc.seed = cfg.seed;
        const auto m = fixture == Fixture::butterfly ? butterfly(mc) : fork(mc);
        j = flow_to_json(m.flow, m.dag);
    }
    emit(g, j.dump(2) + "\n");
    return kOk;
}

// --- export-dot / validate ---------------------------------------------------

int cmd_export_dot(const Globals& g, const std::string& file, const std::string& flow_file) {
    const auto j = read_json_file(file);
    std::string text;
    if (j.is_object() && j.contains("kind")) {
        if (flow_file.empty()) throw ParseError("exporting a plan needs --flow");
        const auto doc = load_flow(flow_file);
        text = to_dot(plan_from_json(j, doc.flow), doc.flow);
    } else {
        const auto doc = flow_from_json(j);
        text = doc.dag ? to_dot(AnyPlan{*doc.dag}, doc.flow) : constraints_to_dot(doc.flow);
    }
    emit(g, text);
    return kOk;
}

int cmd_validate(const Globals& g, const std::string& flow_file, const std::string& plan_file) {
    const auto doc = load_flow(flow_file);
    const auto plan = plan_from_json(read_json_file(plan_file), doc.flow);
    const auto violations = plan_violations(plan, doc.flow);
    if (violations.empty()) {
        CostModel model{g.mc};
        std::cout << "valid; scm: " << fmt(plan_scm(plan, doc.flow, model)) << "\n";
        return kOk;
    }
    for (const auto& v : violations) {
        if (v.kind == Violation::Kind::precedence)
            std::cout << "violation: task " << doc.flow.task(v.from).id << " must precede task " << doc.flow.task(v.to).id
                      << "\n";
        else
            std::cout << "violation: " << to_string(v) << "\n";
    }
    return kViolations;
}

void add_gen_options(CLI::App* sub, GenArgs& a) {
    sub->add_option("--n", a.n, "Tasks per flow (segment length for MIMO fixtures)");
    sub->add_option("--pc", a.pc, "Fraction of task pairs covered by the constraint closure")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--dist", a.dist, "Cost and selectivity distribution: uniform or beta");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Precedence-constrained data-flow task ordering"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "Base random seed");
    app.add_option("--mc", g.mc, "Merge cost per tuple at nodes with several inputs")->check(CLI::NonNegativeNumber);
    app.add_flag("--force", g.force, "Run exact algorithms beyond their size guard");
    app.add_option("--timeout-ms", g.timeout_ms, "Deadline for exact algorithms");
    app.add_option("--out", g.out, "Write output to this file");

    OptimizeArgs opt;
    auto* optimize_cmd = app.add_subcommand("optimize", "Optimize one flow");
    optimize_cmd->add_option("flow", opt.flow_file, "Flow JSON")->required();
    optimize_cmd->add_option("-a,--algorithm", opt.algorithm, "Algorithm name or mimo:<inner>");
    optimize_cmd->add_option("--base", opt.base, "Linear optimizer used by parallelize-post");
    optimize_cmd->add_option("--window", opt.window, "Largest block moved by ro3")->check(CLI::PositiveNumber);
    optimize_cmd->add_flag("--parallel", opt.parallel, "Parallelize optimized MIMO segments");
    optimize_cmd->add_flag("--print-plan", opt.print_plan, "Also print the plan JSON");

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "Normalized SCM over generated flows (CSV)");
    add_gen_options(bench_cmd, bench.gen);
    bench_cmd->add_option("--algorithms", bench.algorithms, "Comma-separated algorithm list");
    bench_cmd->add_option("--runs", bench.runs, "Number of flows");
    bench_cmd->add_option("--fixture", bench.fixture, "generated, butterfly or fork");
    bench_cmd->add_option("--segments", bench.segments, "Segments in a MIMO fixture");
    bench_cmd->add_option("--baseline", bench.baseline, "Baseline algorithm for avg_diff/max_diff");
    bench_cmd->add_option("--contender", bench.contender, "Contender algorithm for avg_diff/max_diff");
    bench_cmd->add_flag("--no-times", bench.no_times, "Leave wall_time_ms empty");

    OverheadArgs overhead;
    auto* overhead_cmd = app.add_subcommand("overhead", "Optimizer wall times (CSV)");
    add_gen_options(overhead_cmd, overhead.gen);
    overhead_cmd->add_option("--sizes", overhead.sizes, "Comma-separated task counts (default: --n)");
    overhead_cmd->add_option("-a,--algorithm", overhead.algorithm, "Algorithm to time");
    overhead_cmd->add_option("--runs", overhead.runs, "Flows per size");

    GenerateArgs gen;
    auto* generate_cmd = app.add_subcommand("generate", "Write a random flow as JSON");
    add_gen_options(generate_cmd, gen.gen);
    generate_cmd->add_option("--fixture", gen.fixture, "generated, butterfly or fork");
    generate_cmd->add_option("--segments", gen.segments, "Segments in a MIMO fixture");

    std::string dot_file;
    std::string dot_flow;
    auto* dot_cmd = app.add_subcommand("export-dot", "Graphviz rendering of a flow or plan");
    dot_cmd->add_option("file", dot_file, "Flow or plan JSON")->required();
    dot_cmd->add_option("--flow", dot_flow, "Flow JSON, when exporting a plan");

    std::string val_flow;
    std::string val_plan;
    auto* validate_cmd = app.add_subcommand("validate", "Check a plan against a flow");
    validate_cmd->add_option("flow", val_flow, "Flow JSON")->required();
    validate_cmd->add_option("plan", val_plan, "Plan JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kParse;
    }

    try {
        if (*optimize_cmd) return cmd_optimize(g, opt);
        if (*bench_cmd) return cmd_bench(g, bench);
        if (*overhead_cmd) return cmd_overhead(g, overhead);
        if (*generate_cmd) return cmd_generate(g, gen);
        if (*dot_cmd) return cmd_export_dot(g, dot_file, dot_flow);
        if (*validate_cmd) return cmd_validate(g, val_flow, val_plan);
    } catch (const CycleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kCycle;
    } catch (const SizeLimitExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kGuard;
    } catch (const ClusterTooLarge& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kGuard;
    } catch (const TimeoutError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kTimeout;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kParse;
    } catch (const UnknownAlgorithm& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kParse;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kParse;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kViolations;
    }
    return kOk;
}
