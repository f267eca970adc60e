#include <catch2/catch_amalgamated.hpp>

#include "wfcarbon/estimate.hpp"

using namespace wfcarbon;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

NodeSpec force_node() {
    NodeSpec node;
    node.id = "tub-node";
    node.cpu = PowerModel{34.0, 94.0};
    node.virtual_cores = 8;
    node.memory_gb = 16.0;
    node.disks = {DiskSpec{DiskKind::hdd, 1.0, {}, {}}, DiskSpec{DiskKind::hdd, 1.0, {}, {}},
                  DiskSpec{DiskKind::hdd, 1.0, {}, {}}};
    node.lifetime_years = 10.0;
    node.embodied_kgco2e = 1200.0;
    return node;
}

const BulkRun kForceRun{21, 315.0 * 60.0, 0.5, 3};

} // namespace

TEST_CASE("geoscience bulk case study", "[estimate]") {
    const FootprintReport r = estimate_bulk(kForceRun, force_node(), {}, 1.6, 439.0);

    CHECK_THAT(r.cpu_wh / 1000.0, WithinRel(7.06, 0.005));
    CHECK_THAT(r.memory_wh / 1000.0, WithinRel(0.691, 0.005));
    CHECK_THAT(r.storage_wh / 1000.0, WithinRel(2.14, 0.005));
    CHECK_THAT(r.total_wh / 1000.0, WithinRel(9.90, 0.005));
    CHECK_THAT(r.with_pue_wh / 1000.0, WithinRel(15.8, 0.005));
    CHECK_THAT(r.operational_g / 1000.0, WithinRel(6.95, 0.01));
    CHECK_THAT(r.repeated_operational_g / 1000.0, WithinRel(20.8, 0.01));
    CHECK_THAT(r.embodied_kgco2e, WithinRel(1.5, 0.05));
    CHECK(r.repetitions == 3);
}

TEST_CASE("bulk estimate with zero nodes is all zero", "[estimate]") {
    const FootprintReport r = estimate_bulk({0, 1000.0, 0.5, 1}, force_node(), {}, 1.6, 439.0);
    CHECK(r.total_wh == 0.0);
    CHECK(r.operational_g == 0.0);
    CHECK(r.embodied_kgco2e == 0.0);
}

TEST_CASE("astronomy core-hours case study", "[estimate]") {
    const CoreHoursRun run{318000.0, PerCorePowerModel{0.74, 3.5}, 0.5};
    const FootprintReport r = estimate_core_hours(run, 1.2, 433.0);
    CHECK_THAT(r.cpu_wh / 1000.0, WithinRel(674.0, 0.005));
    CHECK_THAT(r.with_pue_wh / 1000.0, WithinRel(809.0, 0.005));
    CHECK_THAT(r.operational_g / 1000.0, WithinRel(350.0, 0.01));
    CHECK(r.lower_bound);

    CHECK(estimate_core_hours({0.0, {0.74, 3.5}, 0.5}, 1.2, 433.0).total_wh == 0.0);
    CHECK_THAT(estimate_core_hours({1.0, {0.74, 3.5}, 1.0}, 1.0, 0.0).cpu_wh,
               WithinAbs(3.5, 1e-12));
}

TEST_CASE("storage year estimate with tape and embodied comparison", "[estimate]") {
    const FootprintReport r = storage_year_estimate(45.0, {}, 1.2, 433.0);
    CHECK_THAT(r.storage_wh / 1000.0, WithinRel(473.0, 0.005));
    CHECK_THAT(r.with_pue_wh / 1000.0, WithinRel(568.0, 0.005));
    CHECK_THAT(r.operational_g / 1000.0, WithinRel(246.0, 0.01));
    REQUIRE(r.tape_kgco2e_per_year.has_value());
    CHECK_THAT(*r.tape_kgco2e_per_year, WithinAbs(5.13, 1e-9));
    REQUIRE(r.ssd_embodied_kg.has_value());
    CHECK_THAT(*r.ssd_embodied_kg / 1000.0, WithinRel(4.95, 0.01));

    CHECK(storage_year_estimate(0.0, {}, 1.2, 433.0).total_wh == 0.0);
}

namespace {

TraceRecord fastqc_cluster_record() {
    return TraceRecord{"fq1", "FastQC", "tub-node", 155.4, 2, 0.8375, 0.0, 0.0, 0.0, {}};
}

NodeSpec gcp_node() {
    NodeSpec node;
    node.id = "gcp-n2";
    node.cpu = PerCorePowerModel{0.63, 3.64};
    node.virtual_cores = 8;
    node.memory_gb = 16.0;
    node.lifetime_years = 4.0;
    return node;
}

} // namespace

TEST_CASE("bioinformatics task on cluster and cloud", "[estimate]") {
    const TaskFootprint cluster_fp =
        estimate_task(fastqc_cluster_record(), force_node(), {}, 1.6, 473.0);
    CHECK_THAT(cluster_fp.total_wh, WithinRel(0.91, 0.02));
    CHECK_THAT(cluster_fp.with_pue_wh, WithinRel(1.46, 0.02));
    CHECK_THAT(cluster_fp.emissions_g, WithinRel(0.69, 0.02));

    const TraceRecord gcp_record{"fq1", "FastQC", "gcp-n2", 157.4, 2, 0.9415, 0.0, 0.0, 0.0, {}};
    const TaskFootprint gcp_fp = estimate_task(gcp_record, gcp_node(), {}, 1.1, 473.0);
    CHECK_THAT(gcp_fp.total_wh, WithinRel(0.30, 0.02));
    CHECK_THAT(gcp_fp.with_pue_wh, WithinRel(0.33, 0.02));
    CHECK_THAT(gcp_fp.emissions_g, WithinRel(0.16, 0.02));

    // the PUE-adjusted efficiency gap of the cloud VM
    CHECK(cluster_fp.with_pue_wh / gcp_fp.with_pue_wh > 4.3);
    CHECK(cluster_fp.with_pue_wh / gcp_fp.with_pue_wh < 4.5);
}

TEST_CASE("zero-duration record gives a zero footprint", "[estimate]") {
    TraceRecord r = fastqc_cluster_record();
    r.realtime_s = 0.0;
    const TaskFootprint fp = estimate_task(r, force_node(), {}, 1.6, 473.0);
    CHECK(fp.total_wh == 0.0);
    CHECK(fp.emissions_g == 0.0);
}

TEST_CASE("memory attribution policy changes the result", "[estimate]") {
    TraceRecord r = fastqc_cluster_record();
    r.peak_memory_gb = 2.0;
    const TaskFootprint allocated =
        estimate_task(r, force_node(), {}, 1.6, 473.0, MemoryAttribution::allocated_gb);
    const TaskFootprint full =
        estimate_task(r, force_node(), {}, 1.6, 473.0, MemoryAttribution::full_node);
    CHECK_THAT(allocated.memory_wh, WithinRel(energy_wh(2.0 * 0.392, 155.4), 1e-12));
    CHECK_THAT(full.memory_wh, WithinRel(energy_wh(16.0 * 0.392, 155.4), 1e-12));
}

TEST_CASE("trace estimation orders tasks and sums totals", "[estimate]") {
    ClusterSpec cluster;
    cluster.nodes = {force_node()};
    cluster.pue = 1.6;
    RunTrace trace;
    trace.records.push_back(TraceRecord{"b", "T", "tub-node", 100.0, 2, 0.5, 0.0, 0, 0, {}});
    trace.records.push_back(TraceRecord{"a", "T", "tub-node", 50.0, 1, 1.5, 0.0, 0, 0, {}});

    const FootprintReport r = estimate_trace(trace, cluster, {}, 1.6, 473.0);
    REQUIRE(r.tasks.size() == 2);
    CHECK(r.tasks[0].task_id == "a");
    CHECK(r.tasks[1].task_id == "b");
    CHECK_THAT(r.total_wh, WithinAbs(r.tasks[0].total_wh + r.tasks[1].total_wh, 1e-12));
    // the >100% utilisation row is clamped and flagged
    bool flagged = false;
    for (const std::string& a : r.assumptions)
        flagged = flagged || a.find("clamped") != std::string::npos;
    CHECK(flagged);

    RunTrace unknown;
    unknown.records.push_back(TraceRecord{"x", "T", "ghost", 1.0, 1, 0.5, 0.0, 0, 0, {}});
    CHECK_THROWS_AS(estimate_trace(unknown, cluster, {}, 1.6, 473.0), Error);
}

TEST_CASE("report emissions re-derive from report fields", "[estimate]") {
    const FootprintReport r = estimate_bulk(kForceRun, force_node(), {}, 1.6, 439.0);
    CHECK_THAT(r.operational_g, WithinRel(r.total_wh / 1000.0 * r.pue * r.ci_g_per_kwh, 1e-12));
    CHECK_THAT(r.with_pue_wh, WithinRel(r.total_wh * r.pue, 1e-12));
    CHECK_THAT(r.total_wh, WithinAbs(r.cpu_wh + r.memory_wh + r.storage_wh, 1e-9));
}

TEST_CASE("bulk reports are linear under splitting", "[estimate]") {
    const NodeSpec node = force_node();
    const FootprintReport whole = estimate_bulk({20, 6000.0, 0.5, 1}, node, {}, 1.6, 439.0);

    FootprintReport halves_sum;
    const FootprintReport half = estimate_bulk({20, 3000.0, 0.5, 1}, node, {}, 1.6, 439.0);
    CHECK_THAT(whole.total_wh, WithinRel(2.0 * half.total_wh, 1e-12));
    CHECK_THAT(whole.operational_g, WithinRel(2.0 * half.operational_g, 1e-12));
    CHECK_THAT(whole.embodied_kgco2e, WithinRel(2.0 * half.embodied_kgco2e, 1e-12));

    const FootprintReport by_nodes = estimate_bulk({10, 6000.0, 0.5, 1}, node, {}, 1.6, 439.0);
    CHECK_THAT(whole.total_wh, WithinRel(2.0 * by_nodes.total_wh, 1e-12));
}

TEST_CASE("single full-node task reproduces a single-node bulk run", "[estimate]") {
    const NodeSpec node = force_node();
    TraceRecord r{"only", "T", node.id, 3600.0, 8, 0.5, 0.0, 0.0, 0.0, {}};
    const TaskFootprint task_fp = estimate_task(r, node, {}, 1.6, 439.0,
                                                MemoryAttribution::full_node, true);
    const FootprintReport bulk = estimate_bulk({1, 3600.0, 0.5, 1}, node, {}, 1.6, 439.0);
    CHECK_THAT(task_fp.cpu_wh, WithinRel(bulk.cpu_wh, 1e-12));
    CHECK_THAT(task_fp.memory_wh, WithinRel(bulk.memory_wh, 1e-12));
    CHECK_THAT(task_fp.storage_wh, WithinRel(bulk.storage_wh, 1e-12));
    CHECK_THAT(task_fp.emissions_g, WithinRel(bulk.operational_g, 1e-12));
}

TEST_CASE("report comparison ratios", "[estimate]") {
    FootprintReport a, b;
    a.with_pue_wh = 1.46;
    b.with_pue_wh = 0.333;
    a.total_wh = 0.91;
    b.total_wh = 0.30;
    const ComparisonReport cmp = compare_reports(a, b);
    REQUIRE(cmp.with_pue.has_value());
    CHECK(*cmp.with_pue > 4.3);
    CHECK(*cmp.with_pue < 4.5);

    const ComparisonReport same = compare_reports(a, a);
    CHECK(*same.total == 1.0);
    CHECK(*same.with_pue == 1.0);

    const ComparisonReport undef = compare_reports(a, FootprintReport{});
    CHECK(!undef.total.has_value());
    CHECK(!undef.emissions.has_value());
}

TEST_CASE("ssd embodied scaling", "[estimate]") {
    CHECK_THAT(ssd_embodied_kgco2e(45.0) / 1000.0, WithinRel(4.95, 0.01));
    CHECK(ssd_embodied_kgco2e(0.0) == 0.0);
    CHECK_THAT(ssd_embodied_kgco2e(3.84), WithinRel(422.37, 1e-12));
}
