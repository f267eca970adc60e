#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "wfcarbon/errors.hpp"
#include "wfcarbon/model.hpp"
#include "wfcarbon/power.hpp"

namespace wfcarbon {

struct Assignment {
    std::string node_id;
    double start_s = 0.0;
    double finish_s = 0.0;
    double frequency_ratio = 1.0;

    auto operator<=>(const Assignment&) const = default;
};

struct Schedule {
    std::map<std::string, Assignment> assignments; // task id -> placement
    double makespan_s = 0.0;
    double energy_wh = 0.0;

    bool operator==(const Schedule&) const = default;
};

struct ParetoFront {
    std::vector<Schedule> solutions; // mutually non-dominated, sorted by makespan
};

// Power decomposition of one (task, node) pairing at frequency ratio 1.
// Keeping the components separate lets DVFS and idle accounting rescale
// them without re-deriving the attribution.
struct TaskNodePower {
    double runtime_s = 0.0;
    double cpu_static_w = 0.0;
    double cpu_dynamic_w = 0.0;
    double memory_w = 0.0;
    bool fits = true; // false when the task needs more cores than the node has

    double power_w() const { return cpu_static_w + cpu_dynamic_w + memory_w; }
    double energy_wh() const { return power_w() * runtime_s / 3600.0; }
};

class TaskNodeEstimates {
public:
    void set(const std::string& task, const std::string& node, TaskNodePower p) {
        table_[task][node] = p;
    }

    const TaskNodePower& at(const std::string& task, const std::string& node) const {
        auto t = table_.find(task);
        if (t != table_.end()) {
            auto n = t->second.find(node);
            if (n != t->second.end()) return n->second;
        }
        raise("MissingCostEntry", "no estimate for task '" + task + "' on node '" + node + "'");
    }

    double mean_runtime_s(const std::string& task) const {
        auto t = table_.find(task);
        if (t == table_.end() || t->second.empty())
            raise("MissingCostEntry", "no estimates for task '" + task + "'");
        double sum = 0.0;
        for (const auto& [_, p] : t->second) sum += p.runtime_s;
        return sum / static_cast<double>(t->second.size());
    }

private:
    std::map<std::string, std::map<std::string, TaskNodePower>> table_;
};

// Builds the (task, node) runtime/energy table the HEFT family maps with:
// proportional CPU attribution on shared nodes, per-core power on cloud
// nodes, plus the flat memory coefficient for the task's requirement.
inline TaskNodeEstimates task_node_estimates(const WorkflowDag& dag, const ClusterSpec& cluster,
                                             const ComponentCoefficients& coeffs) {
    TaskNodeEstimates table;
    for (const TaskSpec& task : dag.tasks) {
        for (const NodeSpec& node : cluster.nodes) {
            auto it = task.cost_table.find(node.id);
            if (it == task.cost_table.end())
                raise("MissingCostEntry",
                      "task '" + task.id + "' has no cost entry for node '" + node.id + "'");
            const CostEntry& cost = it->second;
            const double u = clamp_utilisation(cost.mean_cpu_utilisation);

            TaskNodePower p;
            p.runtime_s = cost.runtime_s;
            p.memory_w = task.memory_gb_required * coeffs.memory_w_per_gb;
            p.fits = task.cores_required <= node.virtual_cores;
            if (p.fits) {
                if (const auto* shared = std::get_if<PowerModel>(&node.cpu)) {
                    const double share =
                        static_cast<double>(task.cores_required) / node.virtual_cores;
                    p.cpu_static_w = shared->static_w * share;
                    p.cpu_dynamic_w = (shared->peak_w - shared->static_w) * share * u;
                } else {
                    const auto& per_core = std::get<PerCorePowerModel>(node.cpu);
                    p.cpu_static_w = task.cores_required * per_core.min_w_per_core;
                    p.cpu_dynamic_w = task.cores_required *
                                      (per_core.max_w_per_core - per_core.min_w_per_core) * u;
                }
            }
            table.set(task.id, node.id, p);
        }
    }
    return table;
}

namespace detail {

inline double channel_data_mb(const WorkflowDag& dag, const std::string& producer,
                              const std::string& consumer) {
    double mb = 0.0;
    for (const Channel& c : dag.channels)
        if (c.producer == producer && c.consumer == consumer) mb += c.data_size_mb;
    return mb;
}

inline double transfer_s(double data_mb, double comm_rate_mb_s) {
    if (comm_rate_mb_s <= 0.0 || data_mb <= 0.0) return 0.0;
    return data_mb / comm_rate_mb_s;
}

} // namespace detail

// Task priority: mean runtime across nodes plus the most expensive
// downstream chain, with transfer costs on channels when a rate is given.
inline std::map<std::string, double> upward_rank(const WorkflowDag& dag,
                                                 const TaskNodeEstimates& estimates,
                                                 double comm_rate_mb_s = 0.0) {
    const std::vector<std::string> topo = topological_order(dag);
    std::map<std::string, double> rank;
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        const std::string& id = *it;
        double downstream = 0.0;
        for (const std::string& succ : dag.successors(id)) {
            const double t =
                detail::transfer_s(detail::channel_data_mb(dag, id, succ), comm_rate_mb_s);
            downstream = std::max(downstream, t + rank.at(succ));
        }
        rank[id] = estimates.mean_runtime_s(id) + downstream;
    }
    return rank;
}

struct SchedOptions {
    double comm_rate_mb_s = 0.0;
};

struct MappingCandidate {
    std::string node_id;
    double start_s = 0.0;
    double finish_s = 0.0;
    double energy_wh = 0.0;
};

// Called once per mapped task with the evaluated candidates; used by tests
// to check the per-step argmin contracts.
using MappingObserver =
    std::function<void(const std::string& task, const std::string& chosen_node,
                       const std::vector<MappingCandidate>& candidates)>;

namespace detail {

struct BusyInterval {
    double start = 0.0;
    double finish = 0.0;
    int cores = 0;
};

struct NodeTimeline {
    int capacity = 0;
    std::vector<BusyInterval> busy;
};

inline bool window_fits(const NodeTimeline& tl, double start, double duration, int cores) {
    const double end = start + duration;
    // usage is piecewise constant; its maximum over [start, end) is attained
    // at `start` or at an interval start inside the window
    std::vector<double> probes{start};
    for (const BusyInterval& iv : tl.busy)
        if (iv.start > start && iv.start < end) probes.push_back(iv.start);
    for (double t : probes) {
        int used = 0;
        for (const BusyInterval& iv : tl.busy)
            if (iv.start <= t && t < iv.finish) used += iv.cores;
        if (used + cores > tl.capacity) return false;
    }
    return true;
}

// Earliest capacity-respecting start at or after `ready` (insertion-based:
// gaps before already-placed work are considered).
inline double earliest_start(const NodeTimeline& tl, double ready, double duration, int cores) {
    if (duration <= 0.0) return ready;
    std::vector<double> candidates{ready};
    for (const BusyInterval& iv : tl.busy)
        if (iv.finish > ready) candidates.push_back(iv.finish);
    std::sort(candidates.begin(), candidates.end());
    for (double t : candidates)
        if (window_fits(tl, t, duration, cores)) return t;
    return candidates.back(); // unreachable: usage is zero after the last finish
}

struct ListState {
    const WorkflowDag* dag = nullptr;
    const ClusterSpec* cluster = nullptr;
    const TaskNodeEstimates* table = nullptr;
    double comm_rate_mb_s = 0.0;
    std::map<std::string, NodeTimeline> timelines;
    std::map<std::string, Assignment> assignments;

    void init(const WorkflowDag& dag_in, const ClusterSpec& cluster_in,
              const TaskNodeEstimates& table_in, const SchedOptions& options) {
        dag = &dag_in;
        cluster = &cluster_in;
        table = &table_in;
        comm_rate_mb_s = options.comm_rate_mb_s;
        for (const NodeSpec& n : cluster_in.nodes)
            timelines[n.id] = NodeTimeline{n.virtual_cores, {}};
    }

    std::pair<double, double> try_place(const std::string& task_id,
                                        const std::string& node_id) const {
        const TaskSpec& task = dag->task(task_id);
        double ready = 0.0;
        for (const std::string& pred : dag->predecessors(task_id)) {
            const Assignment& pa = assignments.at(pred);
            double t = pa.finish_s;
            if (pa.node_id != node_id)
                t += transfer_s(channel_data_mb(*dag, pred, task_id), comm_rate_mb_s);
            ready = std::max(ready, t);
        }
        const double runtime = table->at(task_id, node_id).runtime_s;
        const double start =
            earliest_start(timelines.at(node_id), ready, runtime, task.cores_required);
        return {start, start + runtime};
    }

    void commit(const std::string& task_id, const std::string& node_id, double start,
                double finish) {
        timelines[node_id].busy.push_back(
            BusyInterval{start, finish, dag->task(task_id).cores_required});
        assignments[task_id] = Assignment{node_id, start, finish, 1.0};
    }
};

// Rank-descending processing order; ties resolved by topological position
// so zero-cost tasks can never overtake their producers.
inline std::vector<std::string> rank_order(const WorkflowDag& dag,
                                           const std::map<std::string, double>& ranks) {
    const std::vector<std::string> topo = topological_order(dag);
    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < topo.size(); ++i) position[topo[i]] = i;
    std::vector<std::string> order = topo;
    std::sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
        const double ra = ranks.at(a), rb = ranks.at(b);
        if (ra != rb) return ra > rb;
        return position.at(a) < position.at(b);
    });
    return order;
}

// Recompute the schedule's energy as the task-id-ordered sum so the figure
// is identical no matter which algorithm produced the assignments.
inline double schedule_energy_wh(const std::map<std::string, Assignment>& assignments,
                                 const TaskNodeEstimates& table) {
    double wh = 0.0;
    for (const auto& [task_id, a] : assignments) wh += table.at(task_id, a.node_id).energy_wh();
    return wh;
}

inline Schedule finish_schedule(ListState&& state, const TaskNodeEstimates& table) {
    Schedule s;
    s.assignments = std::move(state.assignments);
    for (const auto& [_, a] : s.assignments) s.makespan_s = std::max(s.makespan_s, a.finish_s);
    s.energy_wh = schedule_energy_wh(s.assignments, table);
    return s;
}

enum class MappingGoal { earliest_finish, lowest_energy };

inline Schedule list_schedule(const WorkflowDag& dag, const ClusterSpec& cluster,
                              const TaskNodeEstimates& table, const SchedOptions& options,
                              MappingGoal goal, const MappingObserver& observer) {
    validate_dag(dag);
    cluster.validate();
    const auto ranks = upward_rank(dag, table, options.comm_rate_mb_s);

    ListState state;
    state.init(dag, cluster, table, options);

    for (const std::string& task_id : rank_order(dag, ranks)) {
        std::vector<MappingCandidate> candidates;
        for (const NodeSpec& node : cluster.nodes) {
            const TaskNodePower& p = table.at(task_id, node.id);
            if (!p.fits) continue;
            const auto [start, finish] = state.try_place(task_id, node.id);
            candidates.push_back(MappingCandidate{node.id, start, finish, p.energy_wh()});
        }
        if (candidates.empty())
            raise("TaskTooLarge", "task '" + task_id + "' fits on no node in the cluster");

        std::sort(candidates.begin(), candidates.end(),
                  [goal](const MappingCandidate& a, const MappingCandidate& b) {
                      if (goal == MappingGoal::lowest_energy && a.energy_wh != b.energy_wh)
                          return a.energy_wh < b.energy_wh;
                      if (a.finish_s != b.finish_s) return a.finish_s < b.finish_s;
                      return a.node_id < b.node_id;
                  });
        const MappingCandidate& best = candidates.front();
        state.commit(task_id, best.node_id, best.start_s, best.finish_s);
        if (observer) observer(task_id, best.node_id, candidates);
    }
    return finish_schedule(std::move(state), table);
}

} // namespace detail

// HEFT: rank phase orders tasks by upward rank, mapping phase assigns each
// task the node and insertion slot with the earliest finish time.
inline Schedule heft(const WorkflowDag& dag, const ClusterSpec& cluster,
                     const TaskNodeEstimates& estimates, const SchedOptions& options = {},
                     const MappingObserver& observer = nullptr) {
    return detail::list_schedule(dag, cluster, estimates, options,
                                 detail::MappingGoal::earliest_finish, observer);
}

// GreenHEFT: identical ranking, but the mapping phase picks the node with
// the lowest estimated energy for the task (ties: earlier finish, node id).
inline Schedule greenheft(const WorkflowDag& dag, const ClusterSpec& cluster,
                          const TaskNodeEstimates& estimates, const SchedOptions& options = {},
                          const MappingObserver& observer = nullptr) {
    return detail::list_schedule(dag, cluster, estimates, options,
                                 detail::MappingGoal::lowest_energy, observer);
}

namespace detail {

struct Partial {
    ListState state;
    std::vector<int> signature; // node index per task in rank order
    double makespan = 0.0;
    double energy_wh = 0.0;
};

inline bool dominates(double m1, double e1, double m2, double e2) {
    return m1 <= m2 && e1 <= e2 && (m1 < m2 || e1 < e2);
}

// NSGA-II style selection: non-dominated sorting into fronts, then crowding
// distance within the cut front. Fully deterministic via signature ordering.
inline std::vector<Partial> select_diverse(std::vector<Partial>&& pool, std::size_t k) {
    if (pool.size() <= k) return std::move(pool);

    std::sort(pool.begin(), pool.end(), [](const Partial& a, const Partial& b) {
        if (a.makespan != b.makespan) return a.makespan < b.makespan;
        if (a.energy_wh != b.energy_wh) return a.energy_wh < b.energy_wh;
        return a.signature < b.signature;
    });

    std::vector<int> front_of(pool.size(), -1);
    std::size_t assigned = 0;
    for (int front = 0; assigned < pool.size(); ++front) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (front_of[i] != -1) continue;
            bool dominated = false;
            for (std::size_t j = 0; j < pool.size(); ++j) {
                if (i == j || front_of[j] != -1) continue;
                if (dominates(pool[j].makespan, pool[j].energy_wh, pool[i].makespan,
                              pool[i].energy_wh)) {
                    dominated = true;
                    break;
                }
            }
            if (!dominated) members.push_back(i);
        }
        for (std::size_t m : members) front_of[m] = front;
        assigned += members.size();
    }

    std::vector<double> crowding(pool.size(), 0.0);
    const int max_front = *std::max_element(front_of.begin(), front_of.end());
    for (int front = 0; front <= max_front; ++front) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < pool.size(); ++i)
            if (front_of[i] == front) members.push_back(i);
        if (members.empty()) continue;
        // members are already makespan-sorted (energy anti-sorted on a front)
        for (int objective = 0; objective < 2; ++objective) {
            auto value = [&](std::size_t i) {
                return objective == 0 ? pool[i].makespan : pool[i].energy_wh;
            };
            std::vector<std::size_t> by_obj = members;
            std::stable_sort(by_obj.begin(), by_obj.end(),
                             [&](std::size_t a, std::size_t b) { return value(a) < value(b); });
            const double span = value(by_obj.back()) - value(by_obj.front());
            crowding[by_obj.front()] = std::numeric_limits<double>::infinity();
            crowding[by_obj.back()] = std::numeric_limits<double>::infinity();
            if (span > 0.0)
                for (std::size_t m = 1; m + 1 < by_obj.size(); ++m)
                    crowding[by_obj[m]] += (value(by_obj[m + 1]) - value(by_obj[m - 1])) / span;
        }
    }

    std::vector<std::size_t> order(pool.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (front_of[a] != front_of[b]) return front_of[a] < front_of[b];
        if (crowding[a] != crowding[b]) return crowding[a] > crowding[b];
        if (pool[a].makespan != pool[b].makespan) return pool[a].makespan < pool[b].makespan;
        if (pool[a].energy_wh != pool[b].energy_wh) return pool[a].energy_wh < pool[b].energy_wh;
        return pool[a].signature < pool[b].signature;
    });

    std::vector<Partial> kept;
    kept.reserve(k);
    for (std::size_t i = 0; i < k; ++i) kept.push_back(std::move(pool[order[i]]));
    return kept;
}

inline ParetoFront pareto_filter(std::vector<Schedule>&& pool) {
    // one representative per distinct (makespan, energy) point
    std::sort(pool.begin(), pool.end(), [](const Schedule& a, const Schedule& b) {
        if (a.makespan_s != b.makespan_s) return a.makespan_s < b.makespan_s;
        if (a.energy_wh != b.energy_wh) return a.energy_wh < b.energy_wh;
        return a.assignments < b.assignments;
    });
    pool.erase(std::unique(pool.begin(), pool.end(),
                           [](const Schedule& a, const Schedule& b) {
                               return a.makespan_s == b.makespan_s && a.energy_wh == b.energy_wh;
                           }),
               pool.end());

    ParetoFront front;
    for (const Schedule& s : pool) {
        bool dominated = false;
        for (const Schedule& other : pool)
            if (dominates(other.makespan_s, other.energy_wh, s.makespan_s, s.energy_wh)) {
                dominated = true;
                break;
            }
        if (!dominated) front.solutions.push_back(s);
    }
    return front;
}

} // namespace detail

// MOHEFT: rank order as HEFT, but the mapping phase grows up to k partial
// schedules, extending each with every node choice and pruning with
// non-dominated sorting plus crowding distance. Returns the mutually
// non-dominated complete schedules.
inline ParetoFront moheft(const WorkflowDag& dag, const ClusterSpec& cluster,
                          const TaskNodeEstimates& estimates, int k,
                          const SchedOptions& options = {}) {
    if (k < 1) raise("InvalidSpec", "moheft population size k must be >= 1");
    validate_dag(dag);
    cluster.validate();
    const auto ranks = upward_rank(dag, estimates, options.comm_rate_mb_s);
    const std::vector<std::string> order = detail::rank_order(dag, ranks);

    std::vector<detail::Partial> partials(1);
    partials[0].state.init(dag, cluster, estimates, options);

    for (const std::string& task_id : order) {
        std::vector<detail::Partial> extended;
        for (const detail::Partial& base : partials) {
            for (std::size_t n = 0; n < cluster.nodes.size(); ++n) {
                const NodeSpec& node = cluster.nodes[n];
                const TaskNodePower& p = estimates.at(task_id, node.id);
                if (!p.fits) continue;
                detail::Partial next = base;
                const auto [start, finish] = next.state.try_place(task_id, node.id);
                next.state.commit(task_id, node.id, start, finish);
                next.signature.push_back(static_cast<int>(n));
                next.makespan = std::max(next.makespan, finish);
                next.energy_wh += p.energy_wh();
                extended.push_back(std::move(next));
            }
        }
        if (extended.empty())
            raise("TaskTooLarge", "task '" + task_id + "' fits on no node in the cluster");
        partials = detail::select_diverse(std::move(extended), static_cast<std::size_t>(k));
    }

    std::vector<Schedule> complete;
    complete.reserve(partials.size());
    for (detail::Partial& p : partials)
        complete.push_back(detail::finish_schedule(std::move(p.state), estimates));
    return detail::pareto_filter(std::move(complete));
}

// Exhaustive mapping enumeration sharing the HEFT slot policy; the exact
// Pareto front for desk-scale instances.
inline ParetoFront brute_force_front(const WorkflowDag& dag, const ClusterSpec& cluster,
                                     const TaskNodeEstimates& estimates,
                                     const SchedOptions& options = {}) {
    if (dag.tasks.size() > 8 || cluster.nodes.size() > 3)
        raise("InstanceTooLarge", "brute force is limited to 8 tasks and 3 nodes");
    validate_dag(dag);
    cluster.validate();
    if (cluster.nodes.empty() && !dag.tasks.empty())
        raise("TaskTooLarge", "cluster has no nodes");
    const auto ranks = upward_rank(dag, estimates, options.comm_rate_mb_s);
    const std::vector<std::string> order = detail::rank_order(dag, ranks);
    const std::size_t n_nodes = cluster.nodes.size();

    std::vector<Schedule> pool;
    std::vector<std::size_t> mapping(order.size(), 0);
    while (true) {
        bool feasible = true;
        for (std::size_t i = 0; i < order.size() && feasible; ++i)
            feasible = estimates.at(order[i], cluster.nodes[mapping[i]].id).fits;
        if (feasible) {
            detail::ListState state;
            state.init(dag, cluster, estimates, options);
            for (std::size_t i = 0; i < order.size(); ++i) {
                const std::string& node_id = cluster.nodes[mapping[i]].id;
                const auto [start, finish] = state.try_place(order[i], node_id);
                state.commit(order[i], node_id, start, finish);
            }
            pool.push_back(detail::finish_schedule(std::move(state), estimates));
        }
        // odometer increment
        std::size_t pos = 0;
        while (pos < mapping.size() && ++mapping[pos] == n_nodes) mapping[pos++] = 0;
        if (pos == mapping.size()) break;
    }
    return detail::pareto_filter(std::move(pool));
}

struct EvalOptions {
    double comm_rate_mb_s = 0.0;
    bool idle_static = false;  // charge unattributed static energy of powered-on nodes
    double dvfs_alpha = 3.0;   // dynamic power ~ f^alpha
};

struct EvalResult {
    double makespan_s = 0.0;
    double energy_wh = 0.0;
};

// Recomputes makespan and energy from first principles and rejects any
// structural violation (coverage, precedence, capacity, runtime mismatch).
inline EvalResult evaluate_schedule(const Schedule& schedule, const WorkflowDag& dag,
                                    const ClusterSpec& cluster, const TaskNodeEstimates& estimates,
                                    const EvalOptions& options = {}) {
    validate_dag(dag);
    cluster.validate();

    for (const TaskSpec& t : dag.tasks)
        if (!schedule.assignments.count(t.id))
            raise("InvalidSchedule", "task '" + t.id + "' is not assigned");
    for (const auto& [task_id, a] : schedule.assignments) {
        dag.task(task_id); // rejects assignments for unknown tasks
        if (!cluster.has_node(a.node_id))
            raise("InvalidSchedule", "task '" + task_id + "' assigned to unknown node '" +
                                         a.node_id + "'");
        if (!(a.frequency_ratio > 0.0 && a.frequency_ratio <= 1.0))
            raise("InvalidSchedule", "task '" + task_id + "' has frequency ratio outside (0,1]");
        if (a.start_s < 0.0 || a.finish_s < a.start_s)
            raise("InvalidSchedule", "task '" + task_id + "' has an inverted or negative interval");
    }

    constexpr double eps = 1e-6;
    EvalResult result;

    for (const auto& [task_id, a] : schedule.assignments) {
        const TaskSpec& task = dag.task(task_id);
        const TaskNodePower& p = estimates.at(task_id, a.node_id);
        const NodeSpec& node = cluster.node(a.node_id);
        if (!p.fits || task.cores_required > node.virtual_cores)
            raise("InvalidSchedule", "task '" + task_id + "' exceeds the cores of node '" +
                                         a.node_id + "'");
        const double beta = task.cpu_bound_fraction;
        const double stretch = (1.0 - beta) + beta / a.frequency_ratio;
        const double expected_runtime = p.runtime_s * stretch;
        if (std::abs((a.finish_s - a.start_s) - expected_runtime) >
            eps * std::max(1.0, expected_runtime))
            raise("InvalidSchedule", "task '" + task_id + "' duration does not match its runtime");

        for (const std::string& pred : dag.predecessors(task_id)) {
            auto it = schedule.assignments.find(pred);
            if (it == schedule.assignments.end())
                raise("InvalidSchedule", "predecessor '" + pred + "' is not assigned");
            double ready = it->second.finish_s;
            if (it->second.node_id != a.node_id)
                ready += detail::transfer_s(detail::channel_data_mb(dag, pred, task_id),
                                            options.comm_rate_mb_s);
            if (a.start_s + eps < ready)
                raise("InvalidSchedule",
                      "task '" + task_id + "' starts before predecessor '" + pred + "' completes");
        }
        result.makespan_s = std::max(result.makespan_s, a.finish_s);
    }

    // capacity sweep per node: +cores at start, -cores at finish
    for (const NodeSpec& node : cluster.nodes) {
        std::vector<std::pair<double, int>> events;
        for (const auto& [task_id, a] : schedule.assignments) {
            if (a.node_id != node.id || a.finish_s <= a.start_s) continue;
            const int cores = dag.task(task_id).cores_required;
            events.emplace_back(a.start_s, cores);
            events.emplace_back(a.finish_s, -cores);
        }
        std::sort(events.begin(), events.end(), [](const auto& x, const auto& y) {
            if (x.first != y.first) return x.first < y.first;
            return x.second < y.second; // releases before grabs at the same instant
        });
        int used = 0;
        for (const auto& [_, delta] : events) {
            used += delta;
            if (used > node.virtual_cores)
                raise("InvalidSchedule", "core capacity exceeded on node '" + node.id + "'");
        }
    }

    // per-assignment energy in task-id order, then idle remainders per node
    for (const auto& [task_id, a] : schedule.assignments) {
        const TaskSpec& task = dag.task(task_id);
        const TaskNodePower& p = estimates.at(task_id, a.node_id);
        const double beta = task.cpu_bound_fraction;
        const double stretch = (1.0 - beta) + beta / a.frequency_ratio;
        const double dyn_scale = std::pow(a.frequency_ratio, options.dvfs_alpha);
        const double watts = p.cpu_static_w + p.cpu_dynamic_w * dyn_scale + p.memory_w;
        result.energy_wh += watts * (p.runtime_s * stretch) / 3600.0;
    }
    if (options.idle_static) {
        for (const NodeSpec& node : cluster.nodes) {
            double attributed_ws = 0.0;
            bool powered = false;
            for (const auto& [task_id, a] : schedule.assignments) {
                if (a.node_id != node.id) continue;
                powered = true;
                attributed_ws +=
                    estimates.at(task_id, a.node_id).cpu_static_w * (a.finish_s - a.start_s);
            }
            if (powered)
                result.energy_wh +=
                    std::max(0.0, node.idle_power_w() * result.makespan_s - attributed_ws) / 3600.0;
        }
    }
    return result;
}

// --- consolidation -------------------------------------------------------

struct ConsolidationTask {
    int cores = 1;
    double duration_s = 0.0;
};

struct ConsolidationReport {
    std::vector<std::string> assignment; // node id per task, input order
    int nodes_powered_on = 0;
    double consolidated_static_wh = 0.0;
    double spread_static_wh = 0.0; // one task per node of the same spec
    double saving_wh = 0.0;
};

// First-fit-decreasing by core demand onto the fewest powered-on nodes;
// only static energy is reported since placement leaves the dynamic term
// unchanged. Unpowered nodes contribute nothing.
inline ConsolidationReport consolidate(const std::vector<ConsolidationTask>& tasks,
                                       const ClusterSpec& cluster) {
    cluster.validate();
    std::vector<const NodeSpec*> nodes;
    for (const NodeSpec& n : cluster.nodes) nodes.push_back(&n);
    std::sort(nodes.begin(), nodes.end(),
              [](const NodeSpec* a, const NodeSpec* b) { return a->id < b->id; });

    std::vector<std::size_t> order(tasks.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (tasks[a].cores != tasks[b].cores) return tasks[a].cores > tasks[b].cores;
        if (tasks[a].duration_s != tasks[b].duration_s)
            return tasks[a].duration_s > tasks[b].duration_s;
        return a < b;
    });

    std::map<std::string, int> used;
    std::map<std::string, double> longest;
    ConsolidationReport report;
    report.assignment.resize(tasks.size());

    for (std::size_t idx : order) {
        const ConsolidationTask& task = tasks[idx];
        if (task.cores < 1 || task.duration_s < 0.0)
            raise("InvalidSpec", "consolidation tasks need cores >= 1 and duration >= 0");
        const NodeSpec* chosen = nullptr;
        for (const NodeSpec* n : nodes) {
            if (used[n->id] + task.cores <= n->virtual_cores) {
                chosen = n;
                break;
            }
        }
        if (!chosen)
            raise("TaskTooLarge", "a " + std::to_string(task.cores) +
                                      "-core task fits on no remaining node capacity");
        used[chosen->id] += task.cores;
        longest[chosen->id] = std::max(longest[chosen->id], task.duration_s);
        report.assignment[idx] = chosen->id;
        report.spread_static_wh += chosen->idle_power_w() * task.duration_s / 3600.0;
    }

    for (const auto& [node_id, duration] : longest) {
        ++report.nodes_powered_on;
        report.consolidated_static_wh += cluster.node(node_id).idle_power_w() * duration / 3600.0;
    }
    report.saving_wh = report.spread_static_wh - report.consolidated_static_wh;
    return report;
}

// --- DVFS what-if --------------------------------------------------------

struct DvfsResult {
    double runtime_s = 0.0;
    double power_w = 0.0;
    double energy_wh = 0.0;
};

// Frequency scaling model: only the CPU-bound fraction of the runtime
// stretches by 1/f, dynamic power scales by f^alpha, static is unchanged.
inline DvfsResult dvfs_whatif(double runtime_s, double utilisation, double cpu_bound_fraction,
                              const PowerModel& model, double frequency_ratio, double alpha = 3.0) {
    if (!(frequency_ratio > 0.0 && frequency_ratio <= 1.0))
        raise("InvalidRatio", "frequency ratio must lie in (0,1], got " +
                                  std::to_string(frequency_ratio));
    if (!(cpu_bound_fraction >= 0.0 && cpu_bound_fraction <= 1.0))
        raise("InvalidSpec", "cpu_bound_fraction must lie in [0,1]");
    if (alpha < 1.0) raise("InvalidSpec", "alpha must be >= 1");
    if (runtime_s < 0.0) raise("InvalidSpec", "runtime_s must be non-negative");
    check_utilisation(utilisation);

    DvfsResult out;
    out.runtime_s =
        runtime_s * ((1.0 - cpu_bound_fraction) + cpu_bound_fraction / frequency_ratio);
    out.power_w = model.static_w +
                  dynamic_power(model, utilisation) * std::pow(frequency_ratio, alpha);
    out.energy_wh = out.power_w * out.runtime_s / 3600.0;
    return out;
}

} // namespace wfcarbon
