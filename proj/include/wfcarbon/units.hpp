#pragma once

#include <array>
#include <string>
#include <string_view>

#include "wfcarbon/errors.hpp"

namespace wfcarbon {

// Units appearing at API boundaries. Internal computation uses base units
// (W, Wh, g, s) as plain doubles; Quantity exists to tag values crossing a
// boundary and to make unit slips fail loudly instead of silently.
enum class Unit {
    watts,
    watt_hours,
    kilowatt_hours,
    grams_co2e,
    kilograms_co2e,
    grams_co2e_per_kwh,
    seconds,
    hours,
};

enum class Dimension { power, energy, mass, intensity, time };

constexpr Dimension dimension_of(Unit u) {
    switch (u) {
    case Unit::watts: return Dimension::power;
    case Unit::watt_hours:
    case Unit::kilowatt_hours: return Dimension::energy;
    case Unit::grams_co2e:
    case Unit::kilograms_co2e: return Dimension::mass;
    case Unit::grams_co2e_per_kwh: return Dimension::intensity;
    case Unit::seconds:
    case Unit::hours: return Dimension::time;
    }
    return Dimension::power; // unreachable
}

// Factor from `u` to the base unit of its dimension (W, Wh, g, g/kWh, s).
constexpr double base_factor(Unit u) {
    switch (u) {
    case Unit::watts: return 1.0;
    case Unit::watt_hours: return 1.0;
    case Unit::kilowatt_hours: return 1000.0;
    case Unit::grams_co2e: return 1.0;
    case Unit::kilograms_co2e: return 1000.0;
    case Unit::grams_co2e_per_kwh: return 1.0;
    case Unit::seconds: return 1.0;
    case Unit::hours: return 3600.0;
    }
    return 1.0;
}

constexpr std::string_view unit_name(Unit u) {
    switch (u) {
    case Unit::watts: return "W";
    case Unit::watt_hours: return "Wh";
    case Unit::kilowatt_hours: return "kWh";
    case Unit::grams_co2e: return "gCO2e";
    case Unit::kilograms_co2e: return "kgCO2e";
    case Unit::grams_co2e_per_kwh: return "gCO2e_per_kWh";
    case Unit::seconds: return "seconds";
    case Unit::hours: return "hours";
    }
    return "";
}

inline Unit unit_from_name(std::string_view name) {
    constexpr std::array all = {Unit::watts,          Unit::watt_hours, Unit::kilowatt_hours,
                                Unit::grams_co2e,     Unit::kilograms_co2e,
                                Unit::grams_co2e_per_kwh, Unit::seconds, Unit::hours};
    for (Unit u : all)
        if (unit_name(u) == name) return u;
    raise("UnknownUnit", "no such unit: " + std::string(name));
}

class Quantity {
public:
    Quantity(double value, Unit unit) : value_(value), unit_(unit) {
        if (value < 0.0)
            raise("NegativeQuantity",
                  "negative " + std::string(unit_name(unit)) + " value: " + std::to_string(value));
    }

    double value() const noexcept { return value_; }
    Unit unit() const noexcept { return unit_; }

    // Exact conversion within a dimension (1 kWh = 1000 Wh, 1 kg = 1000 g,
    // 1 h = 3600 s). Cross-dimension conversion is rejected.
    Quantity to(Unit target) const {
        if (dimension_of(unit_) != dimension_of(target))
            raise("IncompatibleUnits", "cannot convert " + std::string(unit_name(unit_)) +
                                           " to " + std::string(unit_name(target)));
        if (unit_ == target) return *this;
        return Quantity(value_ * base_factor(unit_) / base_factor(target), target);
    }

    Quantity operator+(const Quantity& rhs) const {
        return Quantity(value_ + rhs.to(unit_).value(), unit_);
    }

    Quantity operator-(const Quantity& rhs) const {
        double v = value_ - rhs.to(unit_).value();
        if (v < 0.0)
            raise("NegativeQuantity", "subtraction yields a negative quantity");
        return Quantity(v, unit_);
    }

    Quantity operator*(double scalar) const { return Quantity(value_ * scalar, unit_); }

    bool operator==(const Quantity& rhs) const {
        return unit_ == rhs.unit_ && value_ == rhs.value_;
    }

private:
    double value_;
    Unit unit_;
};

// energy * carbon intensity -> mass of CO2e (in grams)
inline Quantity operator*(const Quantity& energy, const Quantity& intensity) {
    if (dimension_of(energy.unit()) == Dimension::energy &&
        intensity.unit() == Unit::grams_co2e_per_kwh)
        return Quantity(energy.to(Unit::kilowatt_hours).value() * intensity.value(),
                        Unit::grams_co2e);
    if (dimension_of(energy.unit()) == Dimension::power &&
        dimension_of(intensity.unit()) == Dimension::time)
        return Quantity(energy.value() * intensity.to(Unit::hours).value(), Unit::watt_hours);
    raise("IncompatibleUnits", "no product rule for " + std::string(unit_name(energy.unit())) +
                                   " * " + std::string(unit_name(intensity.unit())));
}

} // namespace wfcarbon
