#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wfcarbon/carbon.hpp"
#include "wfcarbon/errors.hpp"
#include "wfcarbon/model.hpp"
#include "wfcarbon/power.hpp"
#include "wfcarbon/trace.hpp"

namespace wfcarbon {

inline constexpr double kHoursPerYear = 8760.0;
// Total (embodied + operational) emissions of cold storage on LTO-8 tape.
inline constexpr double kTapeKgCo2ePerTbYear = 0.114;
// Dell R740 lifecycle assessment: 422.37 kg CO2e per 3.84 TB SSD.
inline constexpr double kSsdLcaKgCo2e = 422.37;
inline constexpr double kSsdLcaCapacityTb = 3.84;

// Embodied carbon of SSD capacity, scaling the LCA figure linearly.
inline double ssd_embodied_kgco2e(double capacity_tb) {
    if (capacity_tb < 0.0) raise("InvalidSpec", "capacity_tb must be non-negative");
    return capacity_tb * kSsdLcaKgCo2e / kSsdLcaCapacityTb;
}

// Whole-run description without per-task detail (one node spec, identical
// utilisation across nodes).
struct BulkRun {
    int node_count = 0;
    double duration_s = 0.0;
    double mean_cpu_utilisation = 0.5;
    int repetitions = 1;
};

struct CoreHoursRun {
    double core_hours = 0.0;
    PerCorePowerModel per_core;
    double utilisation = 0.5;
};

enum class MemoryAttribution { allocated_gb, full_node };

struct TaskFootprint {
    std::string task_id;
    std::string node_id;
    double duration_s = 0.0;
    double cpu_wh = 0.0;
    double memory_wh = 0.0;
    double storage_wh = 0.0;
    double total_wh = 0.0;
    double with_pue_wh = 0.0;
    double emissions_g = 0.0;

    bool operator==(const TaskFootprint&) const = default;
};

struct FootprintReport {
    std::vector<TaskFootprint> tasks; // per-task rows; empty for bulk forms

    // run totals, base units
    double cpu_wh = 0.0;
    double memory_wh = 0.0;
    double storage_wh = 0.0;
    double total_wh = 0.0;
    double with_pue_wh = 0.0;
    double operational_g = 0.0;
    double embodied_kgco2e = 0.0;

    int repetitions = 1;
    double repeated_operational_g = 0.0;
    double repeated_embodied_kgco2e = 0.0;

    bool lower_bound = false;
    double pue = 1.0;
    double ci_g_per_kwh = 0.0;
    std::string ci_source;
    std::string coefficient_set{kDefaultCoefficientSet};

    // storage-year extras
    std::optional<double> tape_kgco2e_per_year;
    std::optional<double> ssd_embodied_kg;

    std::vector<std::string> assumptions;

    bool operator==(const FootprintReport&) const = default;
};

namespace detail {

inline void finalise_totals(FootprintReport& report) {
    report.total_wh = report.cpu_wh + report.memory_wh + report.storage_wh;
    report.with_pue_wh = report.total_wh * report.pue;
    report.operational_g =
        operational_emissions(report.total_wh / 1000.0, report.pue, report.ci_g_per_kwh);
    report.repeated_operational_g = report.operational_g * report.repetitions;
    report.repeated_embodied_kgco2e = report.embodied_kgco2e * report.repetitions;
}

inline double node_cpu_power_w(const NodeSpec& node, double utilisation) {
    if (const auto* shared = std::get_if<PowerModel>(&node.cpu))
        return total_power(*shared, utilisation);
    return node.virtual_cores * total_power(std::get<PerCorePowerModel>(node.cpu), utilisation);
}

} // namespace detail

// Whole-cluster estimate from node count, duration, and mean utilisation,
// attributing the full node (memory, disks) to the run.
inline FootprintReport estimate_bulk(const BulkRun& run, const NodeSpec& node,
                                     const ComponentCoefficients& coeffs, double pue,
                                     double ci_g_per_kwh) {
    if (run.node_count < 0 || run.duration_s < 0.0 || run.repetitions < 1)
        raise("InvalidSpec", "bulk run requires non-negative count/duration and repetitions >= 1");
    node.validate();
    coeffs.validate();

    FootprintReport report;
    report.pue = pue;
    report.ci_g_per_kwh = ci_g_per_kwh;
    report.repetitions = run.repetitions;

    bool clamped = false;
    const double u = clamp_utilisation(run.mean_cpu_utilisation, &clamped);
    if (clamped)
        report.assumptions.push_back("mean cpu utilisation above 100% clamped to 1.0");

    const double node_hours = static_cast<double>(run.node_count) * run.duration_s / 3600.0;
    const ComponentPower comp = component_power(node, coeffs);
    report.cpu_wh = detail::node_cpu_power_w(node, u) * node_hours;
    report.memory_wh = comp.memory_w * node_hours;
    report.storage_wh = comp.storage_w * node_hours;
    report.embodied_kgco2e =
        embodied_share({node.embodied_kgco2e, node.lifetime_years}, run.duration_s, run.node_count);
    report.assumptions.push_back("memory attribution: full_node");
    detail::finalise_totals(report);
    return report;
}

// CPU-only estimate from aggregate core-hours; marked as a lower bound since
// memory and storage are not covered.
inline FootprintReport estimate_core_hours(const CoreHoursRun& run, double pue,
                                           double ci_g_per_kwh) {
    if (run.core_hours < 0.0) raise("InvalidSpec", "core_hours must be non-negative");
    run.per_core.validate();

    FootprintReport report;
    report.pue = pue;
    report.ci_g_per_kwh = ci_g_per_kwh;

    bool clamped = false;
    const double u = clamp_utilisation(run.utilisation, &clamped);
    if (clamped) report.assumptions.push_back("utilisation above 100% clamped to 1.0");

    report.cpu_wh = run.core_hours * total_power(run.per_core, u);
    report.lower_bound = true;
    report.assumptions.push_back("CPU energy only; memory and storage unknown (lower bound)");
    detail::finalise_totals(report);
    return report;
}

// Footprint of a single traced task execution on `node`. Memory attribution
// follows the policy; storage is attributed only when requested, since
// shared-node disk usage is rarely attributable to one task.
inline TaskFootprint estimate_task(const TraceRecord& record, const NodeSpec& node,
                                   const ComponentCoefficients& coeffs, double pue,
                                   double ci_g_per_kwh,
                                   MemoryAttribution memory_attribution = MemoryAttribution::allocated_gb,
                                   bool attribute_storage = false) {
    if (pue < 1.0) raise("InvalidPue", "pue must be >= 1.0, got " + std::to_string(pue));
    const double u = clamp_utilisation(record.cpu_utilisation);

    TaskFootprint fp;
    fp.task_id = record.task_id;
    fp.node_id = node.id;
    fp.duration_s = record.realtime_s;

    double cpu_w = 0.0;
    if (const auto* shared = std::get_if<PowerModel>(&node.cpu))
        cpu_w = attributed_cpu_power(*shared, node.virtual_cores, record.allocated_cores, u);
    else
        cpu_w = record.allocated_cores * total_power(std::get<PerCorePowerModel>(node.cpu), u);

    const double memory_gb = memory_attribution == MemoryAttribution::full_node
                                 ? node.memory_gb
                                 : record.peak_memory_gb;
    const double memory_w = memory_gb * coeffs.memory_w_per_gb;
    const double storage_w =
        attribute_storage ? component_power(node, coeffs).storage_w : 0.0;

    fp.cpu_wh = energy_wh(cpu_w, record.realtime_s);
    fp.memory_wh = energy_wh(memory_w, record.realtime_s);
    fp.storage_wh = energy_wh(storage_w, record.realtime_s);
    fp.total_wh = fp.cpu_wh + fp.memory_wh + fp.storage_wh;
    fp.with_pue_wh = fp.total_wh * pue;
    fp.emissions_g = operational_emissions(fp.total_wh / 1000.0, pue, ci_g_per_kwh);
    return fp;
}

// Per-task estimation over a whole trace; rows ordered by task_id so the
// report is identical regardless of record order or parallel estimation.
inline FootprintReport estimate_trace(const RunTrace& trace, const ClusterSpec& cluster,
                                      const ComponentCoefficients& coeffs, double pue,
                                      double ci_g_per_kwh,
                                      MemoryAttribution memory_attribution = MemoryAttribution::allocated_gb,
                                      bool attribute_storage = false) {
    FootprintReport report;
    report.pue = pue;
    report.ci_g_per_kwh = ci_g_per_kwh;
    report.assumptions = trace.assumptions;
    report.assumptions.push_back(memory_attribution == MemoryAttribution::full_node
                                     ? "memory attribution: full_node"
                                     : "memory attribution: allocated_gb");

    std::vector<const TraceRecord*> ordered;
    ordered.reserve(trace.records.size());
    for (const TraceRecord& r : trace.records) ordered.push_back(&r);
    std::sort(ordered.begin(), ordered.end(),
              [](const TraceRecord* a, const TraceRecord* b) { return a->task_id < b->task_id; });

    for (const TraceRecord* r : ordered) {
        const NodeSpec& node = cluster.node(r->node_id);
        if (r->cpu_utilisation > 1.0)
            report.assumptions.push_back("task '" + r->task_id +
                                         "': utilisation above 100% clamped to 1.0");
        TaskFootprint fp = estimate_task(*r, node, coeffs, pue, ci_g_per_kwh, memory_attribution,
                                         attribute_storage);
        report.cpu_wh += fp.cpu_wh;
        report.memory_wh += fp.memory_wh;
        report.storage_wh += fp.storage_wh;
        report.tasks.push_back(std::move(fp));
    }
    detail::finalise_totals(report);
    return report;
}

// Energy and emissions of keeping `capacity_tb` on SSD for one year, with
// the tape-storage figure and the SSD embodied carbon for comparison.
inline FootprintReport storage_year_estimate(double capacity_tb,
                                             const ComponentCoefficients& coeffs, double pue,
                                             double ci_g_per_kwh) {
    if (capacity_tb < 0.0) raise("InvalidSpec", "capacity_tb must be non-negative");
    FootprintReport report;
    report.pue = pue;
    report.ci_g_per_kwh = ci_g_per_kwh;
    report.storage_wh = capacity_tb * coeffs.ssd_w_per_tb * kHoursPerYear;
    report.tape_kgco2e_per_year = capacity_tb * kTapeKgCo2ePerTbYear;
    report.ssd_embodied_kg = ssd_embodied_kgco2e(capacity_tb);
    report.assumptions.push_back("figures are per year of SSD storage");
    detail::finalise_totals(report);
    return report;
}

// Component-wise ratios a/b; a zero denominator yields an undefined ratio
// rather than infinity.
struct ComparisonReport {
    std::optional<double> cpu;
    std::optional<double> memory;
    std::optional<double> storage;
    std::optional<double> total;
    std::optional<double> with_pue;
    std::optional<double> emissions;
};

inline ComparisonReport compare_reports(const FootprintReport& a, const FootprintReport& b) {
    auto ratio = [](double x, double y) -> std::optional<double> {
        if (y == 0.0) return std::nullopt;
        return x / y;
    };
    ComparisonReport cmp;
    cmp.cpu = ratio(a.cpu_wh, b.cpu_wh);
    cmp.memory = ratio(a.memory_wh, b.memory_wh);
    cmp.storage = ratio(a.storage_wh, b.storage_wh);
    cmp.total = ratio(a.total_wh, b.total_wh);
    cmp.with_pue = ratio(a.with_pue_wh, b.with_pue_wh);
    cmp.emissions = ratio(a.operational_g, b.operational_g);
    return cmp;
}

} // namespace wfcarbon
