#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wfcarbon/carbon.hpp"
#include "wfcarbon/errors.hpp"
#include "wfcarbon/estimate.hpp"
#include "wfcarbon/model.hpp"
#include "wfcarbon/sched.hpp"
#include "wfcarbon/timeutil.hpp"

namespace wfcarbon {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise("IoError", "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

namespace detail {

using Json = nlohmann::json;

inline Json parse_json(const std::string& text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const Json::exception& e) {
        raise("MalformedInput", what + ": " + e.what());
    }
}

// Configuration objects accept exactly the documented snake_case fields.
inline void expect_fields(const Json& obj, const std::set<std::string>& allowed,
                          const std::string& what) {
    if (!obj.is_object()) raise("MalformedInput", what + " must be a JSON object");
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key))
            raise("UnknownField", what + ": unknown field '" + key + "'");
}

inline double get_number(const Json& obj, const std::string& key, const std::string& what) {
    if (!obj.contains(key)) raise("MissingField", what + ": missing field '" + key + "'");
    if (!obj[key].is_number()) raise("MalformedInput", what + ": '" + key + "' must be a number");
    return obj[key].get<double>();
}

inline double get_number_or(const Json& obj, const std::string& key, double fallback,
                            const std::string& what) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) raise("MalformedInput", what + ": '" + key + "' must be a number");
    return obj[key].get<double>();
}

inline int get_int(const Json& obj, const std::string& key, const std::string& what) {
    if (!obj.contains(key)) raise("MissingField", what + ": missing field '" + key + "'");
    if (!obj[key].is_number_integer())
        raise("MalformedInput", what + ": '" + key + "' must be an integer");
    return obj[key].get<int>();
}

inline int get_int_or(const Json& obj, const std::string& key, int fallback,
                      const std::string& what) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer())
        raise("MalformedInput", what + ": '" + key + "' must be an integer");
    return obj[key].get<int>();
}

inline std::string get_string(const Json& obj, const std::string& key, const std::string& what) {
    if (!obj.contains(key)) raise("MissingField", what + ": missing field '" + key + "'");
    if (!obj[key].is_string()) raise("MalformedInput", what + ": '" + key + "' must be a string");
    return obj[key].get<std::string>();
}

inline CpuModel cpu_model_from_json(const Json& obj, const std::string& what) {
    if (!obj.is_object()) raise("MalformedInput", what + ": cpu must be an object");
    if (obj.contains("static_w") || obj.contains("peak_w")) {
        expect_fields(obj, {"static_w", "peak_w"}, what + ".cpu");
        PowerModel m;
        m.static_w = get_number(obj, "static_w", what + ".cpu");
        m.peak_w = get_number(obj, "peak_w", what + ".cpu");
        return m;
    }
    expect_fields(obj, {"min_w_per_core", "max_w_per_core"}, what + ".cpu");
    PerCorePowerModel m;
    m.min_w_per_core = get_number(obj, "min_w_per_core", what + ".cpu");
    m.max_w_per_core = get_number(obj, "max_w_per_core", what + ".cpu");
    return m;
}

inline DiskSpec disk_from_json(const Json& obj, const std::string& what) {
    expect_fields(obj, {"kind", "capacity_tb", "power_w", "power_w_per_tb"}, what);
    DiskSpec d;
    const std::string kind = get_string(obj, "kind", what);
    if (kind == "HDD")
        d.kind = DiskKind::hdd;
    else if (kind == "SSD")
        d.kind = DiskKind::ssd;
    else
        raise("MalformedInput", what + ": disk kind must be HDD or SSD");
    d.capacity_tb = get_number_or(obj, "capacity_tb", 0.0, what);
    if (obj.contains("power_w")) d.power_w = get_number(obj, "power_w", what);
    if (obj.contains("power_w_per_tb")) d.power_w_per_tb = get_number(obj, "power_w_per_tb", what);
    d.validate();
    return d;
}

inline NodeSpec node_from_json(const Json& obj) {
    static const std::set<std::string> fields = {"id",        "cpu",
                                                 "virtual_cores",  "memory_gb",
                                                 "disks",          "lifetime_years",
                                                 "embodied_kgco2e", "max_frequency_ratio"};
    expect_fields(obj, fields, "node");
    NodeSpec n;
    n.id = get_string(obj, "id", "node");
    const std::string what = "node '" + n.id + "'";
    if (!obj.contains("cpu")) raise("MissingField", what + ": missing field 'cpu'");
    n.cpu = cpu_model_from_json(obj["cpu"], what);
    n.virtual_cores = get_int(obj, "virtual_cores", what);
    n.memory_gb = get_number_or(obj, "memory_gb", 0.0, what);
    if (obj.contains("disks")) {
        if (!obj["disks"].is_array()) raise("MalformedInput", what + ": disks must be an array");
        for (const auto& d : obj["disks"]) n.disks.push_back(disk_from_json(d, what + " disk"));
    }
    n.lifetime_years = get_number_or(obj, "lifetime_years", 1.0, what);
    n.embodied_kgco2e = get_number_or(obj, "embodied_kgco2e", 0.0, what);
    if (obj.contains("max_frequency_ratio")) {
        if (!obj["max_frequency_ratio"].is_array())
            raise("MalformedInput", what + ": max_frequency_ratio must be an array");
        n.max_frequency_ratio.clear();
        for (const auto& f : obj["max_frequency_ratio"]) {
            if (!f.is_number())
                raise("MalformedInput", what + ": max_frequency_ratio entries must be numbers");
            n.max_frequency_ratio.push_back(f.get<double>());
        }
    }
    n.validate();
    return n;
}

} // namespace detail

inline ClusterSpec cluster_from_json_text(const std::string& text) {
    const auto doc = detail::parse_json(text, "cluster file");
    detail::expect_fields(doc, {"nodes", "pue", "region"}, "cluster");
    ClusterSpec cluster;
    if (!doc.contains("nodes") || !doc["nodes"].is_array())
        raise("MissingField", "cluster: 'nodes' array is required");
    for (const auto& n : doc["nodes"]) cluster.nodes.push_back(detail::node_from_json(n));
    cluster.pue = detail::get_number_or(doc, "pue", 1.0, "cluster");
    if (doc.contains("region")) cluster.region = detail::get_string(doc, "region", "cluster");
    cluster.validate();
    return cluster;
}

inline WorkflowDag dag_from_json_text(const std::string& text) {
    const auto doc = detail::parse_json(text, "workflow file");
    detail::expect_fields(doc, {"tasks", "channels"}, "workflow");
    WorkflowDag dag;
    if (!doc.contains("tasks") || !doc["tasks"].is_array())
        raise("MissingField", "workflow: 'tasks' array is required");
    for (const auto& t : doc["tasks"]) {
        static const std::set<std::string> fields = {"id", "cores_required", "memory_gb_required",
                                                     "cost_table", "cpu_bound_fraction"};
        detail::expect_fields(t, fields, "task");
        TaskSpec task;
        task.id = detail::get_string(t, "id", "task");
        const std::string what = "task '" + task.id + "'";
        task.cores_required = detail::get_int_or(t, "cores_required", 1, what);
        task.memory_gb_required = detail::get_number_or(t, "memory_gb_required", 0.0, what);
        task.cpu_bound_fraction = detail::get_number_or(t, "cpu_bound_fraction", 1.0, what);
        if (t.contains("cost_table")) {
            if (!t["cost_table"].is_object())
                raise("MalformedInput", what + ": cost_table must be an object");
            for (const auto& [node_id, entry] : t["cost_table"].items()) {
                detail::expect_fields(entry, {"runtime_s", "mean_cpu_utilisation"},
                                      what + " cost entry");
                CostEntry cost;
                cost.runtime_s = detail::get_number(entry, "runtime_s", what);
                cost.mean_cpu_utilisation =
                    detail::get_number_or(entry, "mean_cpu_utilisation", 0.5, what);
                task.cost_table[node_id] = cost;
            }
        }
        task.validate();
        dag.tasks.push_back(std::move(task));
    }
    if (doc.contains("channels")) {
        if (!doc["channels"].is_array())
            raise("MalformedInput", "workflow: channels must be an array");
        for (const auto& c : doc["channels"]) {
            detail::expect_fields(c, {"producer", "consumer", "data_size_mb"}, "channel");
            Channel channel;
            channel.producer = detail::get_string(c, "producer", "channel");
            channel.consumer = detail::get_string(c, "consumer", "channel");
            channel.data_size_mb = detail::get_number_or(c, "data_size_mb", 0.0, "channel");
            dag.channels.push_back(std::move(channel));
        }
    }
    validate_dag(dag);
    return dag;
}

struct BulkRunFile {
    BulkRun run;
    NodeSpec node;
};

inline BulkRunFile bulk_from_json_text(const std::string& text) {
    const auto doc = detail::parse_json(text, "bulk run file");
    detail::expect_fields(
        doc, {"node", "node_count", "duration_s", "mean_cpu_utilisation", "repetitions"},
        "bulk run");
    BulkRunFile out;
    if (!doc.contains("node")) raise("MissingField", "bulk run: missing field 'node'");
    out.node = detail::node_from_json(doc["node"]);
    out.run.node_count = detail::get_int(doc, "node_count", "bulk run");
    out.run.duration_s = detail::get_number(doc, "duration_s", "bulk run");
    out.run.mean_cpu_utilisation =
        detail::get_number_or(doc, "mean_cpu_utilisation", 0.5, "bulk run");
    out.run.repetitions = detail::get_int_or(doc, "repetitions", 1, "bulk run");
    return out;
}

inline CoreHoursRun core_hours_from_json_text(const std::string& text) {
    const auto doc = detail::parse_json(text, "core-hours file");
    detail::expect_fields(doc, {"core_hours", "per_core", "mean_cpu_utilisation"}, "core-hours run");
    CoreHoursRun run;
    run.core_hours = detail::get_number(doc, "core_hours", "core-hours run");
    if (!doc.contains("per_core")) raise("MissingField", "core-hours run: missing field 'per_core'");
    detail::expect_fields(doc["per_core"], {"min_w_per_core", "max_w_per_core"}, "per_core");
    run.per_core.min_w_per_core =
        detail::get_number(doc["per_core"], "min_w_per_core", "per_core");
    run.per_core.max_w_per_core =
        detail::get_number(doc["per_core"], "max_w_per_core", "per_core");
    run.utilisation = detail::get_number_or(doc, "mean_cpu_utilisation", 0.5, "core-hours run");
    return run;
}

// Partial override of a named coefficient set.
inline ComponentCoefficients coefficients_from_json_text(const std::string& text,
                                                         const ComponentCoefficients& base) {
    const auto doc = detail::parse_json(text, "coefficients file");
    detail::expect_fields(doc, {"memory_w_per_gb", "hdd_w_per_disk", "ssd_w_per_tb"},
                          "coefficients");
    ComponentCoefficients c = base;
    c.memory_w_per_gb = detail::get_number_or(doc, "memory_w_per_gb", c.memory_w_per_gb, "coefficients");
    c.hdd_w_per_disk = detail::get_number_or(doc, "hdd_w_per_disk", c.hdd_w_per_disk, "coefficients");
    c.ssd_w_per_tb = detail::get_number_or(doc, "ssd_w_per_tb", c.ssd_w_per_tb, "coefficients");
    c.validate();
    return c;
}

inline std::vector<ConsolidationTask> consolidation_tasks_from_json_text(const std::string& text) {
    const auto doc = detail::parse_json(text, "tasks file");
    if (!doc.is_array()) raise("MalformedInput", "tasks file must be a JSON array");
    std::vector<ConsolidationTask> tasks;
    for (const auto& t : doc) {
        detail::expect_fields(t, {"cores", "duration_s"}, "consolidation task");
        ConsolidationTask task;
        task.cores = detail::get_int(t, "cores", "consolidation task");
        task.duration_s = detail::get_number(t, "duration_s", "consolidation task");
        tasks.push_back(task);
    }
    return tasks;
}

// Power profile: CSV "duration_s,watts" or a JSON array of such objects.
inline std::vector<PowerSegment> power_profile_from_text(const std::string& text) {
    std::string trimmed = text;
    const auto first = trimmed.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && trimmed[first] == '[') {
        const auto doc = detail::parse_json(text, "power profile");
        std::vector<PowerSegment> profile;
        for (const auto& s : doc) {
            detail::expect_fields(s, {"duration_s", "watts"}, "power segment");
            profile.push_back(PowerSegment{detail::get_number(s, "duration_s", "power segment"),
                                           detail::get_number(s, "watts", "power segment")});
        }
        return profile;
    }
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    std::vector<PowerSegment> profile;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != "duration_s,watts")
                raise("MalformedRow", "power profile line 1: expected header 'duration_s,watts'");
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            raise("MalformedRow", "power profile line " + std::to_string(line_no) +
                                      ": expected 'duration_s,watts'");
        try {
            profile.push_back(PowerSegment{std::stod(line.substr(0, comma)),
                                           std::stod(line.substr(comma + 1))});
        } catch (const std::exception&) {
            raise("MalformedRow", "power profile line " + std::to_string(line_no) +
                                      ": numeric fields expected");
        }
    }
    return profile;
}

// CSV "timestamp,gco2e_per_kwh" with ISO-8601 UTC timestamps.
inline CarbonIntensitySeries ci_series_from_csv_text(const std::string& text,
                                                     const std::string& region = "") {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    CarbonIntensitySeries series;
    series.region = region;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != "timestamp,gco2e_per_kwh")
                raise("MalformedRow",
                      "ci series line 1: expected header 'timestamp,gco2e_per_kwh'");
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            raise("MalformedRow",
                  "ci series line " + std::to_string(line_no) + ": expected two fields");
        CiSample sample;
        try {
            sample.timestamp = parse_iso8601_utc(line.substr(0, comma));
            sample.g_per_kwh = std::stod(line.substr(comma + 1));
        } catch (const Error&) {
            raise("MalformedRow",
                  "ci series line " + std::to_string(line_no) + ": bad timestamp");
        } catch (const std::exception&) {
            raise("MalformedRow",
                  "ci series line " + std::to_string(line_no) + ": bad intensity value");
        }
        series.samples.push_back(sample);
    }
    series.validate();
    return series;
}

// CSV "region,year,gco2e_per_kwh" overriding/extending the bundled table.
inline AnnualCiTable annual_ci_from_csv_text(const std::string& text, AnnualCiTable base) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != "region,year,gco2e_per_kwh")
                raise("MalformedRow",
                      "annual ci line 1: expected header 'region,year,gco2e_per_kwh'");
            continue;
        }
        const auto c1 = line.find(',');
        const auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c2 == std::string::npos)
            raise("MalformedRow",
                  "annual ci line " + std::to_string(line_no) + ": expected three fields");
        try {
            base.set(line.substr(0, c1), std::stoi(line.substr(c1 + 1, c2 - c1 - 1)),
                     std::stod(line.substr(c2 + 1)));
        } catch (const std::exception&) {
            raise("MalformedRow",
                  "annual ci line " + std::to_string(line_no) + ": numeric fields expected");
        }
    }
    return base;
}

} // namespace wfcarbon
