#pragma once

// Graphviz export.

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "algorithms.hpp"

namespace flowopt {

namespace detail {

inline std::string short_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

inline std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

inline std::string dot_graph(const FlowSpec& flow, const std::vector<TaskIndex>& nodes, const std::vector<Edge>& edges,
                             const std::string& name) {
    // Emitted in ascending id order.
    auto by_id = nodes;
    std::sort(by_id.begin(), by_id.end(), [&](TaskIndex a, TaskIndex b) { return flow.task(a).id < flow.task(b).id; });
    auto sorted_edges = edges;
    std::sort(sorted_edges.begin(), sorted_edges.end(), [&](const Edge& x, const Edge& y) {
        return std::pair(flow.task(x.first).id, flow.task(x.second).id) <
               std::pair(flow.task(y.first).id, flow.task(y.second).id);
    });

    std::ostringstream os;
    os << "digraph " << name << " {\n  rankdir=LR;\n  node [shape=box];\n";
    for (auto t : by_id) {
        const auto& task = flow.task(t);
        os << "  t" << task.id << " [label=\"" << task.id << ':' << dot_escape(task.label) << "\\nc="
           << short_number(task.cost) << ",sel=" << short_number(task.selectivity) << "\"];\n";
    }
    for (const auto& [a, b] : sorted_edges) os << "  t" << flow.task(a).id << " -> t" << flow.task(b).id << ";\n";
    os << "}\n";
    return os.str();
}

}  // namespace detail

inline std::string to_dot(const AnyPlan& plan, const FlowSpec& flow) {
    if (const auto* lin = std::get_if<LinearPlan>(&plan)) {
        std::vector<Edge> edges;
        for (std::size_t p = 1; p < lin->size(); ++p) edges.emplace_back((*lin)[p - 1], (*lin)[p]);
        return detail::dot_graph(flow, lin->order, edges, "plan");
    }
    const auto& dag = std::get<PlanDag>(plan);
    return detail::dot_graph(flow, dag.nodes(), dag.edges(), "plan");
}

/// The flow's precedence constraints, drawn as their transitive reduction.
inline std::string constraints_to_dot(const FlowSpec& flow) {
    std::vector<TaskIndex> nodes;
    for (std::size_t t = 0; t < flow.size(); ++t) nodes.push_back(t);
    return detail::dot_graph(flow, nodes, flow.pc().reduction_edges(), "constraints");
}

}  // namespace flowopt
