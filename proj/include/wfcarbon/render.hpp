#pragma once

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include <json.hpp>

#include "wfcarbon/errors.hpp"
#include "wfcarbon/estimate.hpp"
#include "wfcarbon/sched.hpp"
#include "wfcarbon/units.hpp"

namespace wfcarbon {

enum class RenderFormat { text, json, csv };

inline RenderFormat render_format_from_name(const std::string& name) {
    if (name == "text") return RenderFormat::text;
    if (name == "json") return RenderFormat::json;
    if (name == "csv") return RenderFormat::csv;
    raise("UnknownFormat", "unknown output format '" + name + "'");
}

namespace detail {

// Three significant figures in fixed notation ("9.90", "15.8", "473"),
// falling back to scientific for extreme magnitudes.
inline std::string format_sig3(double v) {
    if (v == 0.0) return "0";
    char probe[32];
    std::snprintf(probe, sizeof(probe), "%.2e", v);
    const char* e = std::strchr(probe, 'e');
    const int exponent = std::atoi(e + 1);
    if (exponent > 6 || exponent < -4) {
        std::string out(probe);
        return out;
    }
    const int decimals = std::max(0, 2 - exponent);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

inline std::string format_full(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

inline std::string energy_str(double wh, bool as_kwh) {
    return as_kwh ? format_sig3(wh / 1000.0) + " kWh" : format_sig3(wh) + " Wh";
}

inline std::string mass_str_from_g(double g) {
    if (g >= 1e6) return format_sig3(g / 1e6) + " t CO2e";
    if (g >= 1000.0) return format_sig3(g / 1000.0) + " kg CO2e";
    return format_sig3(g) + " g CO2e";
}

inline std::string mass_str_from_kg(double kg) { return mass_str_from_g(kg * 1000.0); }

inline nlohmann::json quantity_json(double value, Unit unit) {
    return nlohmann::json{{"value", value}, {"unit", std::string(unit_name(unit))}};
}

inline double quantity_value(const nlohmann::json& q, Unit expected) {
    if (!q.is_object() || !q.contains("value") || !q.contains("unit"))
        raise("MalformedInput", "expected a unit-tagged quantity");
    if (q["unit"].get<std::string>() != unit_name(expected))
        raise("IncompatibleUnits", "expected unit " + std::string(unit_name(expected)) +
                                       ", got " + q["unit"].get<std::string>());
    return q["value"].get<double>();
}

} // namespace detail

// --- footprint reports ---------------------------------------------------

inline nlohmann::json report_to_json(const FootprintReport& report) {
    using detail::quantity_json;
    nlohmann::json doc;
    doc["kind"] = "footprint";
    doc["tasks"] = nlohmann::json::array();
    for (const TaskFootprint& t : report.tasks) {
        nlohmann::json row;
        row["task_id"] = t.task_id;
        row["node_id"] = t.node_id;
        row["duration"] = quantity_json(t.duration_s, Unit::seconds);
        row["cpu"] = quantity_json(t.cpu_wh, Unit::watt_hours);
        row["memory"] = quantity_json(t.memory_wh, Unit::watt_hours);
        row["storage"] = quantity_json(t.storage_wh, Unit::watt_hours);
        row["total"] = quantity_json(t.total_wh, Unit::watt_hours);
        row["with_pue"] = quantity_json(t.with_pue_wh, Unit::watt_hours);
        row["emissions"] = quantity_json(t.emissions_g, Unit::grams_co2e);
        doc["tasks"].push_back(std::move(row));
    }
    doc["totals"]["cpu"] = quantity_json(report.cpu_wh, Unit::watt_hours);
    doc["totals"]["memory"] = quantity_json(report.memory_wh, Unit::watt_hours);
    doc["totals"]["storage"] = quantity_json(report.storage_wh, Unit::watt_hours);
    doc["totals"]["total"] = quantity_json(report.total_wh, Unit::watt_hours);
    doc["totals"]["with_pue"] = quantity_json(report.with_pue_wh, Unit::watt_hours);
    doc["totals"]["operational"] = quantity_json(report.operational_g, Unit::grams_co2e);
    doc["totals"]["embodied"] = quantity_json(report.embodied_kgco2e, Unit::kilograms_co2e);
    doc["repetitions"] = report.repetitions;
    doc["repeated"]["operational"] =
        quantity_json(report.repeated_operational_g, Unit::grams_co2e);
    doc["repeated"]["embodied"] =
        quantity_json(report.repeated_embodied_kgco2e, Unit::kilograms_co2e);
    doc["lower_bound"] = report.lower_bound;
    doc["pue"] = report.pue;
    doc["ci"] = quantity_json(report.ci_g_per_kwh, Unit::grams_co2e_per_kwh);
    doc["ci_source"] = report.ci_source;
    doc["coefficient_set"] = report.coefficient_set;
    if (report.tape_kgco2e_per_year)
        doc["tape_per_year"] = quantity_json(*report.tape_kgco2e_per_year, Unit::kilograms_co2e);
    if (report.ssd_embodied_kg)
        doc["ssd_embodied"] = quantity_json(*report.ssd_embodied_kg, Unit::kilograms_co2e);
    doc["assumptions"] = report.assumptions;
    return doc;
}

inline FootprintReport report_from_json(const nlohmann::json& doc) {
    using detail::quantity_value;
    FootprintReport report;
    for (const auto& row : doc.value("tasks", nlohmann::json::array())) {
        TaskFootprint t;
        t.task_id = row.value("task_id", "");
        t.node_id = row.value("node_id", "");
        t.duration_s = quantity_value(row.at("duration"), Unit::seconds);
        t.cpu_wh = quantity_value(row.at("cpu"), Unit::watt_hours);
        t.memory_wh = quantity_value(row.at("memory"), Unit::watt_hours);
        t.storage_wh = quantity_value(row.at("storage"), Unit::watt_hours);
        t.total_wh = quantity_value(row.at("total"), Unit::watt_hours);
        t.with_pue_wh = quantity_value(row.at("with_pue"), Unit::watt_hours);
        t.emissions_g = quantity_value(row.at("emissions"), Unit::grams_co2e);
        report.tasks.push_back(std::move(t));
    }
    const auto& totals = doc.at("totals");
    report.cpu_wh = quantity_value(totals.at("cpu"), Unit::watt_hours);
    report.memory_wh = quantity_value(totals.at("memory"), Unit::watt_hours);
    report.storage_wh = quantity_value(totals.at("storage"), Unit::watt_hours);
    report.total_wh = quantity_value(totals.at("total"), Unit::watt_hours);
    report.with_pue_wh = quantity_value(totals.at("with_pue"), Unit::watt_hours);
    report.operational_g = quantity_value(totals.at("operational"), Unit::grams_co2e);
    report.embodied_kgco2e = quantity_value(totals.at("embodied"), Unit::kilograms_co2e);
    report.repetitions = doc.value("repetitions", 1);
    report.repeated_operational_g =
        quantity_value(doc.at("repeated").at("operational"), Unit::grams_co2e);
    report.repeated_embodied_kgco2e =
        quantity_value(doc.at("repeated").at("embodied"), Unit::kilograms_co2e);
    report.lower_bound = doc.value("lower_bound", false);
    report.pue = doc.value("pue", 1.0);
    report.ci_g_per_kwh = quantity_value(doc.at("ci"), Unit::grams_co2e_per_kwh);
    report.ci_source = doc.value("ci_source", "");
    report.coefficient_set = doc.value("coefficient_set", std::string(kDefaultCoefficientSet));
    if (doc.contains("tape_per_year"))
        report.tape_kgco2e_per_year = quantity_value(doc["tape_per_year"], Unit::kilograms_co2e);
    if (doc.contains("ssd_embodied"))
        report.ssd_embodied_kg = quantity_value(doc["ssd_embodied"], Unit::kilograms_co2e);
    report.assumptions = doc.value("assumptions", std::vector<std::string>{});
    return report;
}

inline std::string render_report(const FootprintReport& report, RenderFormat format,
                                 bool include_assumptions = false) {
    using namespace detail;
    if (format == RenderFormat::json) return report_to_json(report).dump(2) + "\n";

    if (format == RenderFormat::csv) {
        std::string out =
            "task_id,node_id,duration_s,cpu_wh,memory_wh,storage_wh,total_wh,with_pue_wh,"
            "emissions_g\n";
        for (const TaskFootprint& t : report.tasks) {
            out += t.task_id + ',' + t.node_id + ',' + format_full(t.duration_s) + ',' +
                   format_full(t.cpu_wh) + ',' + format_full(t.memory_wh) + ',' +
                   format_full(t.storage_wh) + ',' + format_full(t.total_wh) + ',' +
                   format_full(t.with_pue_wh) + ',' + format_full(t.emissions_g) + '\n';
        }
        if (!report.tasks.empty() || report.total_wh != 0.0) {
            out += "TOTAL,,," + format_full(report.cpu_wh) + ',' + format_full(report.memory_wh) +
                   ',' + format_full(report.storage_wh) + ',' + format_full(report.total_wh) +
                   ',' + format_full(report.with_pue_wh) + ',' +
                   format_full(report.operational_g) + '\n';
        }
        return out;
    }

    const bool kwh = report.total_wh >= 1000.0;
    std::string out = "footprint report\n";
    for (const TaskFootprint& t : report.tasks) {
        out += "  task " + t.task_id + ": node " + t.node_id + ", " + format_sig3(t.duration_s) +
               " s, total " + energy_str(t.total_wh, kwh) + ", with PUE " +
               energy_str(t.with_pue_wh, kwh) + ", emissions " + mass_str_from_g(t.emissions_g) +
               '\n';
    }
    out += "cpu: " + energy_str(report.cpu_wh, kwh) + '\n';
    out += "memory: " + energy_str(report.memory_wh, kwh) + '\n';
    out += "storage: " + energy_str(report.storage_wh, kwh) + '\n';
    out += "total: " + energy_str(report.total_wh, kwh) + '\n';
    out += "with PUE: " + energy_str(report.with_pue_wh, kwh) + '\n';
    out += "emissions: " + mass_str_from_g(report.operational_g) + '\n';
    if (report.embodied_kgco2e > 0.0)
        out += "embodied share: " + mass_str_from_kg(report.embodied_kgco2e) + '\n';
    if (report.repetitions > 1) {
        out += "emissions for " + std::to_string(report.repetitions) +
               " runs: " + mass_str_from_g(report.repeated_operational_g) + '\n';
        if (report.repeated_embodied_kgco2e > 0.0)
            out += "embodied share for " + std::to_string(report.repetitions) +
                   " runs: " + mass_str_from_kg(report.repeated_embodied_kgco2e) + '\n';
    }
    if (report.tape_kgco2e_per_year)
        out += "tape storage comparison: " + mass_str_from_kg(*report.tape_kgco2e_per_year) +
               " per year\n";
    if (report.ssd_embodied_kg)
        out += "ssd embodied: " + mass_str_from_kg(*report.ssd_embodied_kg) + '\n';
    if (report.lower_bound) out += "note: lower-bound estimate\n";
    out += "pue: " + format_sig3(report.pue) + '\n';
    out += "carbon intensity: " + format_sig3(report.ci_g_per_kwh) + " gCO2e/kWh";
    if (!report.ci_source.empty()) out += " (" + report.ci_source + ")";
    out += '\n';
    out += "coefficients: " + report.coefficient_set + '\n';
    if (include_assumptions && !report.assumptions.empty()) {
        out += "assumptions:\n";
        for (const std::string& a : report.assumptions) out += "  - " + a + '\n';
    }
    return out;
}

// --- schedules ------------------------------------------------------------

inline nlohmann::json schedule_to_json(const Schedule& schedule) {
    nlohmann::json doc;
    doc["kind"] = "schedule";
    doc["assignments"] = nlohmann::json::array();
    for (const auto& [task_id, a] : schedule.assignments) {
        nlohmann::json row;
        row["task"] = task_id;
        row["node"] = a.node_id;
        row["start_s"] = a.start_s;
        row["finish_s"] = a.finish_s;
        row["frequency_ratio"] = a.frequency_ratio;
        doc["assignments"].push_back(std::move(row));
    }
    doc["makespan_s"] = schedule.makespan_s;
    doc["energy_wh"] = schedule.energy_wh;
    return doc;
}

inline Schedule schedule_from_json(const nlohmann::json& doc) {
    Schedule s;
    for (const auto& row : doc.value("assignments", nlohmann::json::array())) {
        Assignment a;
        a.node_id = row.at("node").get<std::string>();
        a.start_s = row.at("start_s").get<double>();
        a.finish_s = row.at("finish_s").get<double>();
        a.frequency_ratio = row.value("frequency_ratio", 1.0);
        s.assignments[row.at("task").get<std::string>()] = a;
    }
    s.makespan_s = doc.value("makespan_s", 0.0);
    s.energy_wh = doc.value("energy_wh", 0.0);
    return s;
}

namespace detail {

inline std::vector<std::pair<std::string, Assignment>> gantt_order(const Schedule& s) {
    std::vector<std::pair<std::string, Assignment>> rows(s.assignments.begin(),
                                                         s.assignments.end());
    std::sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) {
        if (x.second.start_s != y.second.start_s) return x.second.start_s < y.second.start_s;
        return x.first < y.first;
    });
    return rows;
}

} // namespace detail

inline std::string render_report(const Schedule& schedule, RenderFormat format) {
    using namespace detail;
    if (format == RenderFormat::json) return schedule_to_json(schedule).dump(2) + "\n";
    if (format == RenderFormat::csv) {
        std::string out = "task,node,start_s,finish_s\n";
        for (const auto& [task_id, a] : gantt_order(schedule))
            out += task_id + ',' + a.node_id + ',' + format_full(a.start_s) + ',' +
                   format_full(a.finish_s) + '\n';
        return out;
    }
    std::string out = "schedule\n";
    for (const auto& [task_id, a] : gantt_order(schedule))
        out += "  " + task_id + ": node " + a.node_id + ", start " + format_sig3(a.start_s) +
               " s, finish " + format_sig3(a.finish_s) + " s\n";
    out += "makespan: " + format_sig3(schedule.makespan_s) + " s\n";
    out += "energy: " + format_sig3(schedule.energy_wh) + " Wh\n";
    return out;
}

inline nlohmann::json front_to_json(const ParetoFront& front) {
    nlohmann::json doc;
    doc["kind"] = "pareto_front";
    doc["solutions"] = nlohmann::json::array();
    for (const Schedule& s : front.solutions) doc["solutions"].push_back(schedule_to_json(s));
    return doc;
}

inline ParetoFront front_from_json(const nlohmann::json& doc) {
    ParetoFront front;
    for (const auto& s : doc.value("solutions", nlohmann::json::array()))
        front.solutions.push_back(schedule_from_json(s));
    return front;
}

inline std::string render_report(const ParetoFront& front, RenderFormat format) {
    using namespace detail;
    if (format == RenderFormat::json) return front_to_json(front).dump(2) + "\n";
    if (format == RenderFormat::csv) {
        std::string out = "solution,task,node,start_s,finish_s\n";
        for (std::size_t i = 0; i < front.solutions.size(); ++i)
            for (const auto& [task_id, a] : gantt_order(front.solutions[i]))
                out += std::to_string(i + 1) + ',' + task_id + ',' + a.node_id + ',' +
                       format_full(a.start_s) + ',' + format_full(a.finish_s) + '\n';
        return out;
    }
    std::string out = "pareto front (" + std::to_string(front.solutions.size()) + " solutions)\n";
    for (std::size_t i = 0; i < front.solutions.size(); ++i) {
        const Schedule& s = front.solutions[i];
        out += "solution " + std::to_string(i + 1) + ": makespan " + format_sig3(s.makespan_s) +
               " s, energy " + format_sig3(s.energy_wh) + " Wh\n";
    }
    return out;
}

} // namespace wfcarbon
