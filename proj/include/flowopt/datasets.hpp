#pragma once

// Bundled flows.

#include <vector>

#include "flowcore.hpp"

namespace flowopt {

/// Thirteen-task tweet-sentiment ETL flow (Pentaho Data Integration case
/// study). Tweets (id 1) is the source and Report Output (id 13) the sink.
inline FlowSpec pdi_case_study() {
    std::vector<Task> tasks{
        {1, "Tweets", 1.7, 1.0},
        {2, "Sentiment Analysis", 4.5, 1.0},
        {3, "Lookup ProductID", 5.0, 1.0},
        {4, "Filter Products", 1.9, 0.9},
        {5, "Lookup Region", 6.5, 1.0},
        {6, "Extract Date", 19.4, 1.0},
        {7, "Filter Dates", 2.0, 0.2},
        {8, "Sort", 173.0, 1.0},
        {9, "SentimentAvg", 10.3, 0.1},
        {10, "Lookup Total Sales", 10.8, 1.0},
        {11, "Lookup Campaign", 11.6, 1.0},
        {12, "Filter Region", 2.0, 0.22},
        {13, "Report Output", 1.0, 1.0},
    };
    const std::vector<std::pair<int, int>> pairs{{2, 9}, {3, 4},  {3, 8},  {3, 10}, {3, 11}, {5, 8},  {5, 10},
                                                 {5, 11}, {5, 12}, {6, 7}, {6, 8},  {6, 10}, {6, 11}, {8, 9}};
    std::vector<Edge> edges;
    for (const auto& [a, b] : pairs) edges.emplace_back(a - 1, b - 1);
    return FlowSpec(std::move(tasks), std::move(edges), TaskIndex{0}, TaskIndex{12});
}

/// The order in which the case-study flow was originally designed.
inline LinearPlan pdi_design_order() {
    LinearPlan plan;
    for (TaskIndex t = 0; t < 13; ++t) plan.order.push_back(t);
    return plan;
}

/// Three unit-cost tasks with selectivities 1, 1.1 and 0.5, and t2 before t3.
inline FlowSpec three_task_example() {
    std::vector<Task> tasks{{1, "t1", 1.0, 1.0}, {2, "t2", 1.0, 1.1}, {3, "t3", 1.0, 0.5}};
    return FlowSpec(std::move(tasks), {{1, 2}});
}

}  // namespace flowopt
