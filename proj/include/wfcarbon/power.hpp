#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wfcarbon/errors.hpp"

namespace wfcarbon {

// Linear CPU power model: total draw interpolates between static_w (idle)
// and peak_w (fully utilised).
struct PowerModel {
    double static_w = 0.0;
    double peak_w = 0.0;

    void validate() const {
        if (static_w < 0.0 || peak_w < 0.0)
            raise("InvalidSpec", "power model watts must be non-negative");
        if (peak_w < static_w)
            raise("InvalidSpec", "peak_w must be >= static_w");
    }
};

// Per-virtual-core power range used for cloud instances, where the provider
// coefficient already folds the node's static share into the per-core value.
struct PerCorePowerModel {
    double min_w_per_core = 0.0;
    double max_w_per_core = 0.0;

    void validate() const {
        if (min_w_per_core < 0.0 || max_w_per_core < 0.0)
            raise("InvalidSpec", "per-core watts must be non-negative");
        if (max_w_per_core < min_w_per_core)
            raise("InvalidSpec", "max_w_per_core must be >= min_w_per_core");
    }
};

enum class DiskKind { hdd, ssd };

// HDDs are modelled with a flat per-disk draw, SSDs with a per-TB draw.
// A disk may carry its own value; otherwise the coefficient set applies.
struct DiskSpec {
    DiskKind kind = DiskKind::hdd;
    double capacity_tb = 0.0;
    std::optional<double> power_w;        // HDD only
    std::optional<double> power_w_per_tb; // SSD only

    void validate() const {
        if (capacity_tb < 0.0)
            raise("InvalidSpec", "disk capacity_tb must be non-negative");
        if (kind == DiskKind::hdd && power_w_per_tb)
            raise("InvalidSpec", "HDD takes power_w, not power_w_per_tb");
        if (kind == DiskKind::ssd && power_w)
            raise("InvalidSpec", "SSD takes power_w_per_tb, not power_w");
        if ((power_w && *power_w < 0.0) || (power_w_per_tb && *power_w_per_tb < 0.0))
            raise("InvalidSpec", "disk power must be non-negative");
    }
};

// Load-independent component coefficients. Defaults are the "ccf-2023" set.
struct ComponentCoefficients {
    double memory_w_per_gb = 0.392;
    double hdd_w_per_disk = 6.5;
    double ssd_w_per_tb = 1.2;

    void validate() const {
        if (memory_w_per_gb < 0.0 || hdd_w_per_disk < 0.0 || ssd_w_per_tb < 0.0)
            raise("InvalidSpec", "coefficients must be non-negative");
    }
};

inline constexpr std::string_view kDefaultCoefficientSet = "ccf-2023";

inline ComponentCoefficients coefficient_set(std::string_view name) {
    if (name == kDefaultCoefficientSet) return ComponentCoefficients{};
    raise("UnknownCoefficientSet", "no bundled coefficient set named '" + std::string(name) + "'");
}

inline void check_utilisation(double u) {
    if (!(u >= 0.0 && u <= 1.0))
        raise("UtilisationOutOfRange", "utilisation must be in [0,1], got " + std::to_string(u));
}

// Traces can report >100% utilisation of allocated cores; the linear model
// is only defined on [0,1], so such values are clamped (callers flag it).
inline double clamp_utilisation(double u, bool* clamped = nullptr) {
    if (clamped) *clamped = u > 1.0;
    if (u < 0.0) return 0.0;
    return u > 1.0 ? 1.0 : u;
}

inline double dynamic_power(const PowerModel& model, double utilisation) {
    check_utilisation(utilisation);
    return (model.peak_w - model.static_w) * utilisation;
}

inline double total_power(const PowerModel& model, double utilisation) {
    return model.static_w + dynamic_power(model, utilisation);
}

// Watts drawn by a single virtual core of a cloud instance.
inline double total_power(const PerCorePowerModel& model, double utilisation) {
    check_utilisation(utilisation);
    return model.min_w_per_core + (model.max_w_per_core - model.min_w_per_core) * utilisation;
}

// Power attributable to a task holding `allocated_cores` of a shared node:
// the static draw is split proportionally to the core share, the dynamic
// range likewise, scaled by the utilisation of the allocated cores.
inline double attributed_cpu_power(const PowerModel& model, int node_cores, int allocated_cores,
                                   double utilisation_of_allocated) {
    if (allocated_cores < 1 || allocated_cores > node_cores)
        raise("AllocationExceedsNode", std::to_string(allocated_cores) + " cores allocated on a " +
                                           std::to_string(node_cores) + "-core node");
    check_utilisation(utilisation_of_allocated);
    const double share = static_cast<double>(allocated_cores) / node_cores;
    return model.static_w * share +
           (model.peak_w - model.static_w) * share * utilisation_of_allocated;
}

struct ComponentPower {
    double memory_w = 0.0;
    double storage_w = 0.0;
};

inline ComponentPower component_power(double memory_gb, std::span<const DiskSpec> disks,
                                      const ComponentCoefficients& coeffs) {
    ComponentPower out;
    out.memory_w = memory_gb * coeffs.memory_w_per_gb;
    for (const DiskSpec& disk : disks) {
        if (disk.kind == DiskKind::hdd)
            out.storage_w += disk.power_w.value_or(coeffs.hdd_w_per_disk);
        else
            out.storage_w += disk.capacity_tb * disk.power_w_per_tb.value_or(coeffs.ssd_w_per_tb);
    }
    return out;
}

// Wh from a constant draw over a duration.
inline double energy_wh(double power_w, double duration_s) {
    if (power_w < 0.0 || duration_s < 0.0)
        raise("InvalidSpec", "energy requires non-negative power and duration");
    return power_w * duration_s / 3600.0;
}

} // namespace wfcarbon
