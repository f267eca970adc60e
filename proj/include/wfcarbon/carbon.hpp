#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wfcarbon/errors.hpp"

namespace wfcarbon {

struct CarbonIntensity {
    double value = 0.0; // gCO2e per kWh
    std::string region;
    std::string period;
};

// Annual national averages, keyed by (region, year). The bundled table
// carries only values we can source; anything else is user-supplied.
class AnnualCiTable {
public:
    void set(const std::string& region, int year, double g_per_kwh) {
        if (g_per_kwh < 0.0) raise("InvalidSpec", "carbon intensity must be non-negative");
        values_[{region, year}] = g_per_kwh;
    }

    double lookup(const std::string& region, int year) const {
        auto it = values_.find({region, year});
        if (it != values_.end()) return it->second;
        const bool region_known =
            std::any_of(values_.begin(), values_.end(),
                        [&](const auto& kv) { return kv.first.first == region; });
        if (!region_known) raise("UnknownRegion", "no carbon intensity data for region '" + region + "'");
        raise("TimestampOutOfRange", "no " + std::to_string(year) + " average for region '" + region + "'");
    }

    bool empty() const { return values_.empty(); }

private:
    std::map<std::pair<std::string, int>, double> values_;
};

inline const AnnualCiTable& bundled_ci_table() {
    static const AnnualCiTable table = [] {
        AnnualCiTable t;
        t.set("DE", 2021, 439.0);
        t.set("DE", 2022, 473.0);
        t.set("UK", 2022, 235.0);
        t.set("FR", 2022, 90.0);
        t.set("SE", 2022, 24.0);
        t.set("US", 2019, 433.0);
        return t;
    }();
    return table;
}

struct CiSample {
    std::int64_t timestamp = 0; // Unix seconds, UTC
    double g_per_kwh = 0.0;
};

// Piecewise-constant, left-closed grid intensity over time: sample i covers
// [t_i, t_{i+1}), the last sample extends indefinitely.
struct CarbonIntensitySeries {
    std::string region;
    std::vector<CiSample> samples;

    void validate() const {
        if (samples.empty()) raise("InvalidSpec", "carbon intensity series has no samples");
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (samples[i].g_per_kwh < 0.0)
                raise("InvalidSpec", "carbon intensity must be non-negative");
            if (i > 0 && samples[i].timestamp <= samples[i - 1].timestamp)
                raise("InvalidSpec", "series timestamps must be strictly increasing");
        }
    }

    double value_at(std::int64_t when) const {
        if (samples.empty() || when < samples.front().timestamp)
            raise("TimestampOutOfRange", "no sample covers the requested timestamp");
        auto it = std::upper_bound(samples.begin(), samples.end(), when,
                                   [](std::int64_t t, const CiSample& s) { return t < s.timestamp; });
        return std::prev(it)->g_per_kwh;
    }
};

// Operational emissions in grams: E = energy * PUE * CI.
inline double operational_emissions(double energy_kwh, double pue, double ci_g_per_kwh) {
    if (pue < 1.0) raise("InvalidPue", "pue must be >= 1.0, got " + std::to_string(pue));
    if (energy_kwh < 0.0 || ci_g_per_kwh < 0.0)
        raise("InvalidSpec", "energy and carbon intensity must be non-negative");
    return energy_kwh * pue * ci_g_per_kwh;
}

struct EmbodiedProfile {
    double embodied_kgco2e = 0.0; // per node
    double lifetime_years = 1.0;
};

// Manufacturing emissions attributed by the share of hardware lifetime the
// usage occupies (365-day years).
inline double embodied_share(const EmbodiedProfile& profile, double usage_duration_s,
                             int node_count) {
    if (profile.lifetime_years <= 0.0) raise("InvalidSpec", "lifetime_years must be > 0");
    if (usage_duration_s < 0.0 || node_count < 0)
        raise("InvalidSpec", "duration and node count must be non-negative");
    const double lifetime_s = profile.lifetime_years * 365.0 * 24.0 * 3600.0;
    return profile.embodied_kgco2e * node_count * (usage_duration_s / lifetime_s);
}

// One segment of a piecewise-constant power trace.
struct PowerSegment {
    double duration_s = 0.0;
    double watts = 0.0;
};

struct ShiftResult {
    std::int64_t start = 0;
    double emissions_g = 0.0;
};

namespace detail {

// Exact emissions of running `profile` starting at `start`: the integral of
// power * CI, with segments split at CI grid boundaries. PUE is not applied.
inline double profile_emissions_g(const std::vector<PowerSegment>& profile,
                                  const CarbonIntensitySeries& series, std::int64_t start) {
    double total_g = 0.0;
    double offset_s = 0.0;
    for (const PowerSegment& seg : profile) {
        if (seg.duration_s < 0.0 || seg.watts < 0.0)
            raise("InvalidSpec", "power profile segments must be non-negative");
        double t0 = static_cast<double>(start) + offset_s;
        const double t1 = t0 + seg.duration_s;
        if (t0 < static_cast<double>(series.samples.front().timestamp))
            raise("SeriesCoverageInsufficient",
                  "profile extends before the first carbon intensity sample");
        while (t0 < t1) {
            // end of the CI interval containing t0 (last interval is open-ended)
            auto it = std::upper_bound(
                series.samples.begin(), series.samples.end(),
                static_cast<std::int64_t>(std::floor(t0)),
                [](std::int64_t t, const CiSample& s) { return t < s.timestamp; });
            const double ci = std::prev(it)->g_per_kwh;
            const double interval_end =
                it == series.samples.end() ? t1 : std::min(t1, static_cast<double>(it->timestamp));
            total_g += seg.watts * (interval_end - t0) / 3600.0 / 1000.0 * ci;
            t0 = interval_end;
        }
        offset_s += seg.duration_s;
    }
    return total_g;
}

} // namespace detail

// Scans candidate start times earliest, earliest+step, ... <= latest and
// returns the start minimising operational emissions of the fixed power
// profile (earliest on ties). PUE is applied by the caller.
inline ShiftResult best_start_time(const std::vector<PowerSegment>& profile,
                                   const CarbonIntensitySeries& series, std::int64_t earliest_start,
                                   std::int64_t latest_start, std::int64_t step_s) {
    series.validate();
    if (latest_start < earliest_start)
        raise("InvalidWindow", "window end precedes window start");
    if (step_s <= 0) raise("InvalidSpec", "step_s must be positive");

    ShiftResult best{0, 0.0};
    bool have_best = false;
    for (std::int64_t start = earliest_start; start <= latest_start; start += step_s) {
        const double g = detail::profile_emissions_g(profile, series, start);
        if (!have_best || g < best.emissions_g) {
            best = {start, g};
            have_best = true;
        }
    }
    return best;
}

} // namespace wfcarbon
