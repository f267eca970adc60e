#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "wfcarbon/units.hpp"

using namespace wfcarbon;

TEST_CASE("conversion constants are exact", "[units]") {
    CHECK(Quantity(1.0, Unit::kilowatt_hours).to(Unit::watt_hours).value() == 1000.0);
    CHECK(Quantity(1000.0, Unit::watt_hours).to(Unit::kilowatt_hours).value() == 1.0);
    CHECK(Quantity(1.0, Unit::kilograms_co2e).to(Unit::grams_co2e).value() == 1000.0);
    CHECK(Quantity(1.0, Unit::hours).to(Unit::seconds).value() == 3600.0);
    CHECK(Quantity(7200.0, Unit::seconds).to(Unit::hours).value() == 2.0);
}

TEST_CASE("conversions round-trip exactly", "[units]") {
    // dyadic values convert from the larger unit through *1000 or *3600 and
    // back without rounding
    std::mt19937 rng(42);
    std::uniform_int_distribution<int> numerator(0, 1 << 20);
    for (int i = 0; i < 1000; ++i) {
        const double v = numerator(rng) / 1024.0;
        CHECK(Quantity(v, Unit::kilowatt_hours).to(Unit::watt_hours).to(Unit::kilowatt_hours).value() == v);
        CHECK(Quantity(v, Unit::kilograms_co2e).to(Unit::grams_co2e).to(Unit::kilograms_co2e).value() == v);
        CHECK(Quantity(v, Unit::hours).to(Unit::seconds).to(Unit::hours).value() == v);
    }
}

TEST_CASE("cross-dimension arithmetic is rejected", "[units]") {
    const Quantity energy(1.0, Unit::kilowatt_hours);
    const Quantity time(1.0, Unit::hours);
    CHECK_THROWS_AS(energy.to(Unit::seconds), Error);
    CHECK_THROWS_AS(energy + time, Error);
    CHECK_THROWS_AS(Quantity(1.0, Unit::watts) + Quantity(1.0, Unit::watt_hours), Error);
}

TEST_CASE("same-dimension addition converts", "[units]") {
    const Quantity sum = Quantity(1.0, Unit::kilowatt_hours) + Quantity(500.0, Unit::watt_hours);
    CHECK(sum.unit() == Unit::kilowatt_hours);
    CHECK(sum.value() == 1.5);
}

TEST_CASE("negative quantities are rejected", "[units]") {
    CHECK_THROWS_AS(Quantity(-1.0, Unit::watts), Error);
    CHECK_THROWS_AS(Quantity(1.0, Unit::watt_hours) - Quantity(2.0, Unit::watt_hours), Error);
}

TEST_CASE("energy times intensity yields grams", "[units]") {
    const Quantity g = Quantity(9.90, Unit::kilowatt_hours) * Quantity(439.0, Unit::grams_co2e_per_kwh);
    CHECK(g.unit() == Unit::grams_co2e);
    CHECK_THAT(g.value(), Catch::Matchers::WithinRel(4346.1, 1e-12));

    const Quantity wh = Quantity(64.0, Unit::watts) * Quantity(2.0, Unit::hours);
    CHECK(wh.unit() == Unit::watt_hours);
    CHECK(wh.value() == 128.0);
}

TEST_CASE("unit names round-trip", "[units]") {
    for (Unit u : {Unit::watts, Unit::watt_hours, Unit::kilowatt_hours, Unit::grams_co2e,
                   Unit::kilograms_co2e, Unit::grams_co2e_per_kwh, Unit::seconds, Unit::hours})
        CHECK(unit_from_name(unit_name(u)) == u);
    CHECK_THROWS_AS(unit_from_name("joules"), Error);
}
