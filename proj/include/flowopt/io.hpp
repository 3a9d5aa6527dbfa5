#pragma once

// JSON reading and writing for flows and plans.
//
// Flow:  {"tasks": [{"id", "label", "cost", "selectivity"}],
//         "constraints": [[from_id, to_id]], "source": id, "sink": id,
//         "edges": [[from_id, to_id]]}          (edges: MIMO input DAG)
// Plan:  {"kind": "linear", "order": [ids]}
//        {"kind": "dag", "nodes": [ids], "edges": [[from_id, to_id]]}

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "algorithms.hpp"

namespace flowopt {

using nlohmann::json;

class ParseError : public FlowError {
public:
    using FlowError::FlowError;
};

struct FlowDocument {
    FlowSpec flow;
    std::optional<PlanDag> dag;  // present when the file lists "edges"
};

namespace detail {

inline TaskIndex lookup(const FlowSpec& flow, const json& id) {
    if (!id.is_number_integer()) throw ParseError("task reference must be an integer id");
    const auto idx = flow.index_of(id.get<int>());
    if (!idx) throw ParseError("reference to unknown task id " + std::to_string(id.get<int>()));
    return *idx;
}

inline std::vector<Edge> read_pairs(const FlowSpec& flow, const json& arr, const char* what) {
    if (!arr.is_array()) throw ParseError(std::string(what) + " must be an array of [from, to] pairs");
    std::vector<Edge> out;
    for (const auto& e : arr) {
        if (!e.is_array() || e.size() != 2) throw ParseError(std::string(what) + " entries must be [from, to] pairs");
        out.emplace_back(lookup(flow, e[0]), lookup(flow, e[1]));
    }
    return out;
}

inline json write_pairs(const FlowSpec& flow, const std::vector<Edge>& edges) {
    json arr = json::array();
    for (const auto& [a, b] : edges) arr.push_back({flow.task(a).id, flow.task(b).id});
    return arr;
}

}  // namespace detail

/// Tasks are indexed in ascending id order regardless of file order.
/// Structural problems raise ParseError; cyclic constraints raise CycleError.
inline FlowDocument flow_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("flow must be a JSON object");
    if (!j.contains("tasks") || !j["tasks"].is_array()) throw ParseError("flow needs a \"tasks\" array");
    std::vector<Task> tasks;
    try {
        for (const auto& t : j["tasks"]) {
            Task task;
            task.id = t.at("id").get<int>();
            task.label = t.value("label", std::string{});
            task.cost = t.at("cost").get<double>();
            task.selectivity = t.at("selectivity").get<double>();
            tasks.push_back(std::move(task));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed task entry: ") + e.what());
    }
    std::sort(tasks.begin(), tasks.end(), [](const Task& a, const Task& b) { return a.id < b.id; });

    FlowSpec bare;
    try {
        bare = FlowSpec(tasks, {});
    } catch (const InvalidFlow& e) {
        throw ParseError(e.what());
    }
    const auto constraints = j.contains("constraints") ? detail::read_pairs(bare, j["constraints"], "constraints")
                                                       : std::vector<Edge>{};
    std::optional<TaskIndex> source;
    std::optional<TaskIndex> sink;
    if (j.contains("source") && !j["source"].is_null()) source = detail::lookup(bare, j["source"]);
    if (j.contains("sink") && !j["sink"].is_null()) sink = detail::lookup(bare, j["sink"]);

    FlowDocument doc;
    try {
        doc.flow = FlowSpec(std::move(tasks), constraints, source, sink);
    } catch (const InvalidFlow& e) {
        throw ParseError(e.what());
    }
    if (j.contains("edges")) {
        PlanDag dag(doc.flow.size());
        for (const auto& [a, b] : detail::read_pairs(doc.flow, j["edges"], "edges")) dag.add_edge(a, b);
        doc.dag = std::move(dag);
    }
    return doc;
}

inline json flow_to_json(const FlowSpec& flow, const std::optional<PlanDag>& dag = std::nullopt) {
    json j;
    j["tasks"] = json::array();
    for (const auto& t : flow.tasks()) {
        json task{{"id", t.id}, {"cost", t.cost}, {"selectivity", t.selectivity}};
        if (!t.label.empty()) task["label"] = t.label;
        j["tasks"].push_back(std::move(task));
    }
    j["constraints"] = detail::write_pairs(flow, flow.constraints());
    if (flow.source()) j["source"] = flow.task(*flow.source()).id;
    if (flow.sink()) j["sink"] = flow.task(*flow.sink()).id;
    if (dag) j["edges"] = detail::write_pairs(flow, dag->edges());
    return j;
}

inline json plan_to_json(const AnyPlan& plan, const FlowSpec& flow) {
    json j;
    if (const auto* lin = std::get_if<LinearPlan>(&plan)) {
        j["kind"] = "linear";
        j["order"] = json::array();
        for (auto t : lin->order) j["order"].push_back(flow.task(t).id);
        return j;
    }
    const auto& dag = std::get<PlanDag>(plan);
    j["kind"] = "dag";
    j["nodes"] = json::array();
    for (auto t : dag.nodes()) j["nodes"].push_back(flow.task(t).id);
    j["edges"] = detail::write_pairs(flow, dag.edges());
    return j;
}

inline AnyPlan plan_from_json(const json& j, const FlowSpec& flow) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) throw ParseError("plan needs a \"kind\" string");
    const auto kind = j["kind"].get<std::string>();
    if (kind == "linear") {
        if (!j.contains("order") || !j["order"].is_array()) throw ParseError("linear plan needs an \"order\" array");
        LinearPlan plan;
        for (const auto& id : j["order"]) plan.order.push_back(detail::lookup(flow, id));
        return plan;
    }
    if (kind == "dag") {
        if (!j.contains("nodes") || !j["nodes"].is_array()) throw ParseError("DAG plan needs a \"nodes\" array");
        PlanDag dag(flow.size(), false);
        for (const auto& id : j["nodes"]) dag.add_node(detail::lookup(flow, id));
        if (j.contains("edges"))
            for (const auto& [a, b] : detail::read_pairs(flow, j["edges"], "edges")) dag.add_edge(a, b);
        return dag;
    }
    throw ParseError("unknown plan kind '" + kind + "'");
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline FlowDocument load_flow(const std::string& path) { return flow_from_json(read_json_file(path)); }

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

}  // namespace flowopt
