#pragma once

// Test-only oracles, kept independent of the scheduling implementation:
// a discrete-event replay of a finished schedule and a deterministic
// random-instance generator shared by the unit and acceptance suites.

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "wfcarbon/model.hpp"
#include "wfcarbon/sched.hpp"

namespace oracle {

struct ReplayResult {
    bool valid = true;
    std::string reason;
    double makespan_s = 0.0;
    double energy_wh = 0.0;
};

// Replays the schedule event by event: walks assignments in start order,
// re-checks precedence and core usage against every overlapping interval,
// then recomputes the objectives from the estimate table.
inline ReplayResult replay(const wfcarbon::Schedule& schedule, const wfcarbon::WorkflowDag& dag,
                           const wfcarbon::ClusterSpec& cluster,
                           const wfcarbon::TaskNodeEstimates& table,
                           double comm_rate_mb_s = 0.0) {
    using namespace wfcarbon;
    ReplayResult result;
    auto fail = [&](const std::string& why) {
        result.valid = false;
        result.reason = why;
        return result;
    };

    if (schedule.assignments.size() != dag.tasks.size())
        return fail("assignment count does not match task count");

    std::vector<std::pair<std::string, Assignment>> order(schedule.assignments.begin(),
                                                          schedule.assignments.end());
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        if (a.second.start_s != b.second.start_s) return a.second.start_s < b.second.start_s;
        return a.first < b.first;
    });

    constexpr double eps = 1e-6;
    for (const auto& [task_id, a] : order) {
        const TaskSpec& task = dag.task(task_id);
        const NodeSpec& node = cluster.node(a.node_id);

        const double runtime = table.at(task_id, a.node_id).runtime_s;
        const double beta = task.cpu_bound_fraction;
        const double expected = runtime * ((1.0 - beta) + beta / a.frequency_ratio);
        if (std::abs((a.finish_s - a.start_s) - expected) > eps * std::max(1.0, expected))
            return fail("duration mismatch for task " + task_id);

        for (const std::string& pred : dag.predecessors(task_id)) {
            const auto it = schedule.assignments.find(pred);
            if (it == schedule.assignments.end()) return fail("missing predecessor " + pred);
            double ready = it->second.finish_s;
            if (it->second.node_id != a.node_id && comm_rate_mb_s > 0.0) {
                double mb = 0.0;
                for (const Channel& c : dag.channels)
                    if (c.producer == pred && c.consumer == task_id) mb += c.data_size_mb;
                ready += mb / comm_rate_mb_s;
            }
            if (a.start_s + eps < ready)
                return fail("task " + task_id + " starts before " + pred + " finishes");
        }

        // concurrent core usage at this task's start, counted pairwise
        int used = task.cores_required;
        for (const auto& [other_id, other] : schedule.assignments) {
            if (other_id == task_id || other.node_id != a.node_id) continue;
            if (other.start_s < a.finish_s - eps && other.finish_s > a.start_s + eps &&
                other.start_s <= a.start_s + eps)
                used += dag.task(other_id).cores_required;
        }
        if (used > node.virtual_cores) return fail("capacity exceeded on node " + a.node_id);

        result.makespan_s = std::max(result.makespan_s, a.finish_s);
    }

    for (const auto& [task_id, a] : schedule.assignments)
        result.energy_wh += table.at(task_id, a.node_id).energy_wh();
    return result;
}

struct Instance {
    wfcarbon::WorkflowDag dag;
    wfcarbon::ClusterSpec cluster;
};

// Random desk-scale instance: <= max_tasks tasks, <= max_nodes heterogeneous
// nodes, sparse precedence edges, quarter-second runtimes.
inline Instance random_instance(std::mt19937& rng, int max_tasks = 6, int max_nodes = 3) {
    using namespace wfcarbon;
    std::uniform_int_distribution<int> n_tasks(1, max_tasks);
    std::uniform_int_distribution<int> n_nodes(1, max_nodes);
    std::uniform_int_distribution<int> node_cores(2, 4);
    std::uniform_int_distribution<int> task_cores(1, 2);
    std::uniform_int_distribution<int> runtime_quarters(0, 40);
    std::uniform_int_distribution<int> util_pct(0, 100);
    std::uniform_real_distribution<double> watts(1.0, 200.0);
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    Instance inst;
    const int nodes = n_nodes(rng);
    for (int i = 0; i < nodes; ++i) {
        NodeSpec node;
        node.id = "n" + std::to_string(i);
        const double a = watts(rng), b = watts(rng);
        node.cpu = PowerModel{std::min(a, b), std::max(a, b)};
        node.virtual_cores = node_cores(rng);
        inst.cluster.nodes.push_back(node);
    }
    inst.cluster.pue = 1.0;

    const int tasks = n_tasks(rng);
    for (int i = 0; i < tasks; ++i) {
        TaskSpec task;
        task.id = "t" + std::to_string(i);
        task.cores_required = task_cores(rng);
        for (const NodeSpec& node : inst.cluster.nodes)
            task.cost_table[node.id] =
                CostEntry{runtime_quarters(rng) / 4.0, util_pct(rng) / 100.0};
        inst.dag.tasks.push_back(task);
    }
    for (int i = 0; i < tasks; ++i)
        for (int j = i + 1; j < tasks; ++j)
            if (coin(rng) < 0.3)
                inst.dag.channels.push_back(
                    Channel{"t" + std::to_string(i), "t" + std::to_string(j), 0.0});
    return inst;
}

} // namespace oracle
