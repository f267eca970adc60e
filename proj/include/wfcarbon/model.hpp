#pragma once

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "wfcarbon/errors.hpp"
#include "wfcarbon/power.hpp"

namespace wfcarbon {

// Shared bare-metal nodes carry a whole-node PowerModel; cloud instances a
// PerCorePowerModel (see power.hpp).
using CpuModel = std::variant<PowerModel, PerCorePowerModel>;

struct NodeSpec {
    std::string id;
    CpuModel cpu = PowerModel{};
    int virtual_cores = 1;
    double memory_gb = 0.0;
    std::vector<DiskSpec> disks;
    double lifetime_years = 1.0;
    double embodied_kgco2e = 0.0;
    // Admissible DVFS frequency ratios; must contain 1.0.
    std::vector<double> max_frequency_ratio = {1.0};

    void validate() const {
        if (id.empty()) raise("InvalidSpec", "node id must not be empty");
        std::visit([](const auto& m) { m.validate(); }, cpu);
        if (virtual_cores < 1) raise("InvalidSpec", "node '" + id + "': virtual_cores must be >= 1");
        if (memory_gb < 0.0) raise("InvalidSpec", "node '" + id + "': memory_gb must be non-negative");
        if (lifetime_years <= 0.0) raise("InvalidSpec", "node '" + id + "': lifetime_years must be > 0");
        if (embodied_kgco2e < 0.0)
            raise("InvalidSpec", "node '" + id + "': embodied_kgco2e must be non-negative");
        for (const DiskSpec& d : disks) d.validate();
        if (std::find(max_frequency_ratio.begin(), max_frequency_ratio.end(), 1.0) ==
            max_frequency_ratio.end())
            raise("InvalidSpec", "node '" + id + "': DVFS ratio list must contain 1.0");
        for (double f : max_frequency_ratio)
            if (!(f > 0.0 && f <= 1.0))
                raise("InvalidSpec", "node '" + id + "': DVFS ratios must lie in (0,1]");
    }

    // Draw of the whole node when idle, in watts.
    double idle_power_w() const {
        if (const auto* shared = std::get_if<PowerModel>(&cpu)) return shared->static_w;
        return std::get<PerCorePowerModel>(cpu).min_w_per_core * virtual_cores;
    }
};

inline ComponentPower component_power(const NodeSpec& node, const ComponentCoefficients& coeffs) {
    return component_power(node.memory_gb, node.disks, coeffs);
}

struct ClusterSpec {
    std::vector<NodeSpec> nodes;
    double pue = 1.0;
    std::string region;

    void validate() const {
        if (pue < 1.0) raise("InvalidPue", "pue must be >= 1.0, got " + std::to_string(pue));
        std::set<std::string> seen;
        for (const NodeSpec& n : nodes) {
            n.validate();
            if (!seen.insert(n.id).second)
                raise("InvalidSpec", "duplicate node id '" + n.id + "'");
        }
    }

    const NodeSpec& node(const std::string& id) const {
        for (const NodeSpec& n : nodes)
            if (n.id == id) return n;
        raise("UnknownNode", "no node '" + id + "' in cluster");
    }

    bool has_node(const std::string& id) const {
        return std::any_of(nodes.begin(), nodes.end(),
                           [&](const NodeSpec& n) { return n.id == id; });
    }
};

struct CostEntry {
    double runtime_s = 0.0;
    double mean_cpu_utilisation = 0.0;
};

struct TaskSpec {
    std::string id;
    int cores_required = 1;
    double memory_gb_required = 0.0;
    std::map<std::string, CostEntry> cost_table; // node id -> cost
    double cpu_bound_fraction = 1.0;

    void validate() const {
        if (id.empty()) raise("InvalidSpec", "task id must not be empty");
        if (cores_required < 1)
            raise("InvalidSpec", "task '" + id + "': cores_required must be >= 1");
        if (memory_gb_required < 0.0)
            raise("InvalidSpec", "task '" + id + "': memory_gb_required must be non-negative");
        if (!(cpu_bound_fraction >= 0.0 && cpu_bound_fraction <= 1.0))
            raise("InvalidSpec", "task '" + id + "': cpu_bound_fraction must lie in [0,1]");
        for (const auto& [node_id, cost] : cost_table) {
            if (cost.runtime_s < 0.0)
                raise("InvalidSpec", "task '" + id + "': runtime on '" + node_id +
                                         "' must be non-negative");
            if (cost.mean_cpu_utilisation < 0.0)
                raise("InvalidSpec", "task '" + id + "': utilisation on '" + node_id +
                                         "' must be non-negative");
        }
    }
};

// Tasks plus directed channels; a channel carries the producer's output
// volume (0 when unknown, which disables transfer costs).
struct Channel {
    std::string producer;
    std::string consumer;
    double data_size_mb = 0.0;
};

struct WorkflowDag {
    std::vector<TaskSpec> tasks;
    std::vector<Channel> channels;

    const TaskSpec& task(const std::string& id) const {
        for (const TaskSpec& t : tasks)
            if (t.id == id) return t;
        raise("UnknownTask", "no task '" + id + "' in workflow");
    }

    std::vector<std::string> predecessors(const std::string& id) const {
        std::vector<std::string> out;
        for (const Channel& c : channels)
            if (c.consumer == id) out.push_back(c.producer);
        return out;
    }

    std::vector<std::string> successors(const std::string& id) const {
        std::vector<std::string> out;
        for (const Channel& c : channels)
            if (c.producer == id) out.push_back(c.consumer);
        return out;
    }
};

// Rejects dangling channel endpoints, duplicate task ids, and cycles; the
// error message names the offending reference or the tasks on the cycle.
inline void validate_dag(const WorkflowDag& dag) {
    std::set<std::string> ids;
    for (const TaskSpec& t : dag.tasks) {
        t.validate();
        if (!ids.insert(t.id).second)
            raise("DuplicateTask", "duplicate task id '" + t.id + "'");
    }
    for (const Channel& c : dag.channels) {
        if (!ids.count(c.producer)) raise("UnknownTask", "channel references unknown task '" + c.producer + "'");
        if (!ids.count(c.consumer)) raise("UnknownTask", "channel references unknown task '" + c.consumer + "'");
        if (c.data_size_mb < 0.0)
            raise("InvalidSpec", "channel " + c.producer + "->" + c.consumer +
                                     ": data_size_mb must be non-negative");
    }

    // Iterative colouring DFS; on a back edge the stack suffix is the cycle.
    std::map<std::string, int> colour; // 0 white, 1 grey, 2 black
    for (const std::string& id : ids) colour[id] = 0;
    std::vector<std::string> stack;
    for (const std::string& root : ids) {
        if (colour[root] != 0) continue;
        std::vector<std::pair<std::string, std::size_t>> work{{root, 0}};
        while (!work.empty()) {
            auto& [id, next] = work.back();
            if (next == 0) {
                colour[id] = 1;
                stack.push_back(id);
            }
            const std::vector<std::string> succ = dag.successors(id);
            if (next < succ.size()) {
                const std::string s = succ[next++];
                if (colour[s] == 1) {
                    auto it = std::find(stack.begin(), stack.end(), s);
                    std::string cycle;
                    for (; it != stack.end(); ++it) cycle += (cycle.empty() ? "" : ", ") + *it;
                    raise("CycleDetected", "cycle involving tasks: " + cycle);
                }
                if (colour[s] == 0) work.emplace_back(s, 0);
            } else {
                colour[id] = 2;
                stack.pop_back();
                work.pop_back();
            }
        }
    }
}

// Kahn's algorithm with a min-heap on task id, so producers precede
// consumers and ties break lexicographically.
inline std::vector<std::string> topological_order(const WorkflowDag& dag) {
    validate_dag(dag);
    std::map<std::string, int> in_degree;
    for (const TaskSpec& t : dag.tasks) in_degree[t.id] = 0;
    for (const Channel& c : dag.channels) ++in_degree[c.consumer];

    std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
    for (const auto& [id, deg] : in_degree)
        if (deg == 0) ready.push(id);

    std::vector<std::string> order;
    order.reserve(dag.tasks.size());
    while (!ready.empty()) {
        const std::string id = ready.top();
        ready.pop();
        order.push_back(id);
        for (const std::string& s : dag.successors(id))
            if (--in_degree[s] == 0) ready.push(s);
    }
    return order;
}

// Tasks whose predecessors are all in `completed` and which are not
// completed themselves. `completed` must be downward-closed.
inline std::set<std::string> ready_tasks(const WorkflowDag& dag,
                                         const std::set<std::string>& completed) {
    for (const std::string& id : completed) {
        dag.task(id); // membership check
        for (const std::string& p : dag.predecessors(id))
            if (!completed.count(p))
                raise("NotDownwardClosed",
                      "completed task '" + id + "' has uncompleted predecessor '" + p + "'");
    }
    std::set<std::string> out;
    for (const TaskSpec& t : dag.tasks) {
        if (completed.count(t.id)) continue;
        const std::vector<std::string> preds = dag.predecessors(t.id);
        if (std::all_of(preds.begin(), preds.end(),
                        [&](const std::string& p) { return completed.count(p) > 0; }))
            out.insert(t.id);
    }
    return out;
}

} // namespace wfcarbon
