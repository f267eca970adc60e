#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "wfcarbon/model.hpp"
#include "wfcarbon/power.hpp"

using namespace wfcarbon;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
const PowerModel kXeon{34.0, 94.0}; // static/peak watts used throughout
}

TEST_CASE("dynamic and total power at the documented points", "[power]") {
    CHECK(dynamic_power(kXeon, 0.5) == 30.0);
    CHECK(total_power(kXeon, 0.5) == 64.0);
    CHECK(dynamic_power(kXeon, 0.0) == 0.0);
    CHECK(dynamic_power(kXeon, 1.0) == 60.0);
    CHECK(total_power(kXeon, 0.0) == 34.0);

    const PerCorePowerModel aws{0.74, 3.5};
    CHECK_THAT(total_power(aws, 0.5), WithinAbs(2.12, 1e-12));
}

TEST_CASE("utilisation outside [0,1] is rejected", "[power]") {
    CHECK_THROWS_AS(dynamic_power(kXeon, -0.1), Error);
    CHECK_THROWS_AS(total_power(kXeon, 1.1), Error);
}

TEST_CASE("proportional attribution on a shared node", "[power]") {
    // 2 of 8 cores at 83.75%: 8.5 W static share + 12.5625 W dynamic share
    const double w = attributed_cpu_power(kXeon, 8, 2, 0.8375);
    CHECK_THAT(w, WithinAbs(8.5 + 12.5625, 1e-12));
    CHECK(attributed_cpu_power(kXeon, 8, 8, 0.5) == total_power(kXeon, 0.5));
    CHECK(attributed_cpu_power(kXeon, 8, 4, 0.0) == 17.0);
    CHECK_THROWS_AS(attributed_cpu_power(kXeon, 8, 9, 0.5), Error);
    CHECK_THROWS_AS(attributed_cpu_power(kXeon, 8, 0, 0.5), Error);
}

TEST_CASE("component power from coefficients", "[power]") {
    const ComponentCoefficients coeffs;
    NodeSpec node;
    node.id = "n";
    node.cpu = kXeon;
    node.virtual_cores = 8;
    node.memory_gb = 16.0;
    node.disks = {DiskSpec{DiskKind::hdd, 1.0, {}, {}}, DiskSpec{DiskKind::hdd, 1.0, {}, {}},
                  DiskSpec{DiskKind::hdd, 1.0, {}, {}}};

    const ComponentPower p = component_power(node, coeffs);
    CHECK_THAT(p.memory_w, WithinAbs(6.272, 1e-12));
    CHECK_THAT(p.storage_w, WithinAbs(19.5, 1e-12));

    NodeSpec empty;
    empty.id = "e";
    empty.cpu = PowerModel{};
    const ComponentPower zero = component_power(empty, coeffs);
    CHECK(zero.memory_w == 0.0);
    CHECK(zero.storage_w == 0.0);

    NodeSpec ssd_node;
    ssd_node.id = "s";
    ssd_node.cpu = PowerModel{};
    ssd_node.disks = {DiskSpec{DiskKind::ssd, 45.0, {}, {}}};
    const ComponentPower ssd = component_power(ssd_node, coeffs);
    CHECK_THAT(ssd.storage_w, WithinAbs(54.0, 1e-12));
    CHECK_THAT(energy_wh(ssd.storage_w, 8760.0 * 3600.0) / 1000.0, WithinAbs(473.04, 1e-9));
}

TEST_CASE("disk parameterisation is per kind", "[power]") {
    DiskSpec bad_hdd{DiskKind::hdd, 1.0, {}, 1.2};
    CHECK_THROWS_AS(bad_hdd.validate(), Error);
    DiskSpec bad_ssd{DiskKind::ssd, 1.0, 6.5, {}};
    CHECK_THROWS_AS(bad_ssd.validate(), Error);
    DiskSpec own_power{DiskKind::hdd, 1.0, 4.0, {}};
    CHECK(component_power(0.0, std::span(&own_power, 1), {}).storage_w == 4.0);
}

TEST_CASE("energy bridges watts and durations", "[power]") {
    // 64 W on 21 nodes for 315 minutes
    CHECK_THAT(energy_wh(64.0 * 21.0, 315.0 * 60.0) / 1000.0, WithinAbs(7.056, 1e-12));
    CHECK(energy_wh(123.0, 0.0) == 0.0);
    CHECK_THAT(energy_wh(21.0625, 155.4), WithinAbs(0.909196, 1e-5));
    CHECK_THROWS_AS(energy_wh(-1.0, 10.0), Error);
}

TEST_CASE("power model properties over random models", "[power]") {
    std::mt19937 rng(123);
    std::uniform_real_distribution<double> watts(0.0, 500.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> cores(1, 64);

    for (int i = 0; i < 10000; ++i) {
        const double a = watts(rng), b = watts(rng);
        const PowerModel m{std::min(a, b), std::max(a, b)};
        const double u1 = unit(rng), u2 = unit(rng);

        // monotone, pinned at the ends
        const double lo = std::min(u1, u2), hi = std::max(u1, u2);
        CHECK(total_power(m, lo) <= total_power(m, hi));
        CHECK(total_power(m, 0.0) == m.static_w);
        CHECK_THAT(total_power(m, 1.0), Catch::Matchers::WithinULP(m.peak_w, 4));

        // full allocation reduces to total power
        const int n = cores(rng);
        CHECK_THAT(attributed_cpu_power(m, n, n, u1), WithinRel(total_power(m, u1), 1e-12));

        // attribution is additive over a split of the node
        if (n >= 2) {
            std::uniform_int_distribution<int> split(1, n - 1);
            const int k = split(rng);
            const double sum = attributed_cpu_power(m, n, k, u1) +
                               attributed_cpu_power(m, n, n - k, u1);
            CHECK_THAT(sum, WithinRel(total_power(m, u1), 1e-9));
        }

        // energy is bilinear
        const double p = watts(rng), t1 = unit(rng) * 1e4, t2 = unit(rng) * 1e4, k = unit(rng) * 9.0;
        CHECK_THAT(energy_wh(k * p, t1), WithinRel(k * energy_wh(p, t1), 1e-12));
        CHECK_THAT(energy_wh(p, t1 + t2),
                   WithinAbs(energy_wh(p, t1) + energy_wh(p, t2), 1e-9));
    }
}

TEST_CASE("clamping flags only above-range utilisation", "[power]") {
    bool clamped = false;
    CHECK(clamp_utilisation(1.675, &clamped) == 1.0);
    CHECK(clamped);
    CHECK(clamp_utilisation(0.8375, &clamped) == 0.8375);
    CHECK(!clamped);
}

TEST_CASE("named coefficient sets", "[power]") {
    const ComponentCoefficients c = coefficient_set("ccf-2023");
    CHECK(c.memory_w_per_gb == 0.392);
    CHECK(c.hdd_w_per_disk == 6.5);
    CHECK(c.ssd_w_per_tb == 1.2);
    CHECK_THROWS_AS(coefficient_set("ccf-1999"), Error);
}
