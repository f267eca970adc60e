#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wfcarbon/errors.hpp"
#include "wfcarbon/timeutil.hpp"

namespace wfcarbon {

// One observed task execution. cpu_utilisation is the fraction of the
// allocated cores that was busy on average; traces may report more than 1.
struct TraceRecord {
    std::string task_id;
    std::string task_name;
    std::string node_id;
    double realtime_s = 0.0;
    int allocated_cores = 1;
    double cpu_utilisation = 0.0;
    double peak_memory_gb = 0.0;
    double read_mb = 0.0;
    double write_mb = 0.0;
    std::optional<std::int64_t> start_time; // Unix seconds, UTC

    bool operator==(const TraceRecord&) const = default;
};

struct RunTrace {
    std::vector<TraceRecord> records;
    std::string workflow_name;
    std::string cluster_id;
    std::string execution_date;
    // Defaults applied while parsing, for the report's assumptions log.
    std::vector<std::string> assumptions;
};

enum class TraceFormat { canonical_csv, canonical_json };

inline TraceFormat trace_format_from_name(const std::string& name) {
    if (name == "canonical-csv" || name == "csv") return TraceFormat::canonical_csv;
    if (name == "canonical-json" || name == "json") return TraceFormat::canonical_json;
    raise("UnknownFormat", "unknown trace format '" + name + "'");
}

namespace detail {

inline const std::vector<std::string>& trace_columns() {
    static const std::vector<std::string> cols = {
        "task_id",  "task_name",   "node_id", "realtime_s", "allocated_cores",
        "pcpu",     "peak_rss_gb", "read_mb", "write_mb",   "start_time"};
    return cols;
}

inline std::vector<std::string> split_csv_line(const std::string& line, int line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (quoted) raise("MalformedRow", "line " + std::to_string(line_no) + ": unterminated quote");
    fields.push_back(cur);
    return fields;
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

inline double parse_double_field(std::string field, int line_no, const std::string& what) {
    // tolerate a percent suffix on CPU fields ("83.75%")
    if (!field.empty() && field.back() == '%') field.pop_back();
    double v = 0.0;
    const auto* begin = field.data();
    const auto* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end)
        raise("MalformedRow", "line " + std::to_string(line_no) + ": bad " + what + " '" + field + "'");
    return v;
}

inline int parse_int_field(const std::string& field, int line_no, const std::string& what) {
    int v = 0;
    const auto* begin = field.data();
    const auto* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end)
        raise("MalformedRow", "line " + std::to_string(line_no) + ": bad " + what + " '" + field + "'");
    return v;
}

inline void validate_record(const TraceRecord& r, int line_no) {
    if (r.task_id.empty())
        raise("MalformedRow", "line " + std::to_string(line_no) + ": task_id must not be empty");
    if (r.realtime_s < 0.0)
        raise("MalformedRow", "line " + std::to_string(line_no) + ": negative realtime_s");
    if (r.allocated_cores < 1)
        raise("MalformedRow", "line " + std::to_string(line_no) + ": allocated_cores must be >= 1");
    if (r.cpu_utilisation < 0.0)
        raise("MalformedRow", "line " + std::to_string(line_no) + ": negative cpu utilisation");
    if (r.peak_memory_gb < 0.0 || r.read_mb < 0.0 || r.write_mb < 0.0)
        raise("MalformedRow", "line " + std::to_string(line_no) + ": negative resource figure");
}

inline RunTrace parse_trace_csv(const std::string& input) {
    RunTrace trace;
    std::istringstream in(input);
    std::string line;
    int line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!saw_header) {
            const auto header = split_csv_line(line, line_no);
            if (header != trace_columns())
                raise("MalformedRow", "line 1: header does not match the canonical column set");
            saw_header = true;
            continue;
        }
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line, line_no);
        if (fields.size() != trace_columns().size())
            raise("MalformedRow", "line " + std::to_string(line_no) + ": expected " +
                                      std::to_string(trace_columns().size()) + " fields, got " +
                                      std::to_string(fields.size()));
        TraceRecord r;
        r.task_id = fields[0];
        r.task_name = fields[1];
        r.node_id = fields[2];
        r.realtime_s = parse_double_field(fields[3], line_no, "realtime_s");
        r.allocated_cores = parse_int_field(fields[4], line_no, "allocated_cores");
        if (r.allocated_cores < 1)
            raise("MalformedRow", "line " + std::to_string(line_no) + ": allocated_cores must be >= 1");
        if (fields[5].empty()) {
            r.cpu_utilisation = 0.5;
            trace.assumptions.push_back("line " + std::to_string(line_no) +
                                        ": cpu utilisation missing, defaulted to 50%");
        } else {
            // pcpu is percent-of-one-core; normalise to fraction-of-allocated
            const double pcpu = parse_double_field(fields[5], line_no, "pcpu");
            if (pcpu < 0.0)
                raise("MalformedRow", "line " + std::to_string(line_no) + ": negative pcpu");
            r.cpu_utilisation = pcpu / (100.0 * r.allocated_cores);
        }
        auto opt_double = [&](const std::string& f, const char* what) {
            if (f.empty()) {
                trace.assumptions.push_back("line " + std::to_string(line_no) + ": " + what +
                                            " missing, defaulted to 0");
                return 0.0;
            }
            return parse_double_field(f, line_no, what);
        };
        r.peak_memory_gb = opt_double(fields[6], "peak_rss_gb");
        r.read_mb = opt_double(fields[7], "read_mb");
        r.write_mb = opt_double(fields[8], "write_mb");
        if (!fields[9].empty()) {
            try {
                r.start_time = parse_iso8601_utc(fields[9]);
            } catch (const Error& e) {
                raise("MalformedRow", "line " + std::to_string(line_no) + ": " + e.what());
            }
        }
        validate_record(r, line_no);
        trace.records.push_back(std::move(r));
    }
    if (!saw_header) raise("MalformedRow", "line 1: missing header");
    return trace;
}

inline RunTrace parse_trace_json(const std::string& input) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(input);
    } catch (const nlohmann::json::exception& e) {
        raise("MalformedRow", std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_array()) raise("MalformedRow", "canonical JSON trace must be an array of objects");

    RunTrace trace;
    int row = 0;
    for (const auto& obj : doc) {
        ++row;
        const std::string where = "record " + std::to_string(row);
        if (!obj.is_object()) raise("MalformedRow", where + ": not an object");
        for (const auto& [key, _] : obj.items()) {
            const auto& cols = trace_columns();
            if (std::find(cols.begin(), cols.end(), key) == cols.end())
                raise("MalformedRow", where + ": unknown field '" + key + "'");
        }
        auto get_str = [&](const char* key) -> std::string {
            if (!obj.contains(key)) return "";
            if (!obj[key].is_string()) raise("MalformedRow", where + ": '" + key + "' must be a string");
            return obj[key].get<std::string>();
        };
        auto get_num = [&](const char* key, double fallback) -> double {
            if (!obj.contains(key)) return fallback;
            if (!obj[key].is_number()) raise("MalformedRow", where + ": '" + key + "' must be a number");
            return obj[key].get<double>();
        };
        TraceRecord r;
        r.task_id = get_str("task_id");
        r.task_name = get_str("task_name");
        r.node_id = get_str("node_id");
        if (!obj.contains("realtime_s") || !obj.contains("allocated_cores"))
            raise("MalformedRow", where + ": realtime_s and allocated_cores are required");
        r.realtime_s = get_num("realtime_s", 0.0);
        if (!obj["allocated_cores"].is_number_integer())
            raise("MalformedRow", where + ": allocated_cores must be an integer");
        r.allocated_cores = obj["allocated_cores"].get<int>();
        if (r.allocated_cores < 1)
            raise("MalformedRow", where + ": allocated_cores must be >= 1");
        if (obj.contains("pcpu")) {
            const double pcpu = get_num("pcpu", 0.0);
            if (pcpu < 0.0) raise("MalformedRow", where + ": negative pcpu");
            r.cpu_utilisation = pcpu / (100.0 * r.allocated_cores);
        } else {
            r.cpu_utilisation = 0.5;
            trace.assumptions.push_back(where + ": cpu utilisation missing, defaulted to 50%");
        }
        auto opt_num = [&](const char* key) {
            if (!obj.contains(key)) {
                trace.assumptions.push_back(where + ": " + key + " missing, defaulted to 0");
                return 0.0;
            }
            return get_num(key, 0.0);
        };
        r.peak_memory_gb = opt_num("peak_rss_gb");
        r.read_mb = opt_num("read_mb");
        r.write_mb = opt_num("write_mb");
        if (obj.contains("start_time")) {
            try {
                r.start_time = parse_iso8601_utc(get_str("start_time"));
            } catch (const Error& e) {
                raise("MalformedRow", where + ": " + e.what());
            }
        }
        validate_record(r, row);
        trace.records.push_back(std::move(r));
    }
    return trace;
}

} // namespace detail

inline RunTrace parse_trace(const std::string& input, TraceFormat format) {
    RunTrace trace = format == TraceFormat::canonical_csv ? detail::parse_trace_csv(input)
                                                          : detail::parse_trace_json(input);
    std::map<std::string, int> seen;
    for (const TraceRecord& r : trace.records)
        if (++seen[r.task_id] > 1)
            raise("MalformedRow", "duplicate task_id '" + r.task_id + "' in run trace");
    return trace;
}

inline std::string serialise_trace(const RunTrace& trace, TraceFormat format) {
    using detail::csv_escape;
    using detail::format_double;
    if (format == TraceFormat::canonical_csv) {
        std::string out;
        for (std::size_t i = 0; i < detail::trace_columns().size(); ++i)
            out += (i ? "," : "") + detail::trace_columns()[i];
        out += '\n';
        for (const TraceRecord& r : trace.records) {
            out += csv_escape(r.task_id) + ',' + csv_escape(r.task_name) + ',' +
                   csv_escape(r.node_id) + ',';
            out += format_double(r.realtime_s) + ',' + std::to_string(r.allocated_cores) + ',';
            out += format_double(r.cpu_utilisation * 100.0 * r.allocated_cores) + ',';
            out += format_double(r.peak_memory_gb) + ',' + format_double(r.read_mb) + ',' +
                   format_double(r.write_mb) + ',';
            if (r.start_time) out += format_iso8601_utc(*r.start_time);
            out += '\n';
        }
        return out;
    }
    nlohmann::json arr = nlohmann::json::array();
    for (const TraceRecord& r : trace.records) {
        nlohmann::json obj;
        obj["task_id"] = r.task_id;
        obj["task_name"] = r.task_name;
        obj["node_id"] = r.node_id;
        obj["realtime_s"] = r.realtime_s;
        obj["allocated_cores"] = r.allocated_cores;
        obj["pcpu"] = r.cpu_utilisation * 100.0 * r.allocated_cores;
        obj["peak_rss_gb"] = r.peak_memory_gb;
        obj["read_mb"] = r.read_mb;
        obj["write_mb"] = r.write_mb;
        if (r.start_time) obj["start_time"] = format_iso8601_utc(*r.start_time);
        arr.push_back(std::move(obj));
    }
    return arr.dump(2) + "\n";
}

struct TaskAggregate {
    int count = 0;
    double total_cpu_core_seconds = 0.0;
    double mean_utilisation = 0.0; // core-second weighted
    double max_memory_gb = 0.0;
};

inline std::map<std::string, TaskAggregate> aggregate_by_task_name(const RunTrace& trace) {
    std::map<std::string, TaskAggregate> out;
    std::map<std::string, double> weighted_u;
    for (const TraceRecord& r : trace.records) {
        TaskAggregate& agg = out[r.task_name];
        const double core_seconds = r.realtime_s * r.allocated_cores;
        ++agg.count;
        agg.total_cpu_core_seconds += core_seconds;
        agg.max_memory_gb = std::max(agg.max_memory_gb, r.peak_memory_gb);
        weighted_u[r.task_name] += r.cpu_utilisation * core_seconds;
    }
    for (auto& [name, agg] : out)
        agg.mean_utilisation =
            agg.total_cpu_core_seconds > 0.0 ? weighted_u[name] / agg.total_cpu_core_seconds : 0.0;
    return out;
}

} // namespace wfcarbon
