// wfcarbon: workflow carbon-footprint estimation and energy-aware
// scheduling from the command line.
//
// Exit codes: 0 success, 1 domain error (invalid workflow, missing cost
// entry, unknown region, ...), 2 usage error (bad flags, missing files).

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wfcarbon/carbon.hpp"
#include "wfcarbon/config.hpp"
#include "wfcarbon/estimate.hpp"
#include "wfcarbon/model.hpp"
#include "wfcarbon/render.hpp"
#include "wfcarbon/sched.hpp"
#include "wfcarbon/timeutil.hpp"
#include "wfcarbon/trace.hpp"

namespace {

using namespace wfcarbon;

struct CommonOptions {
    std::string format = "text";
    bool assumptions = false;
    std::optional<double> pue;
    std::string ci_region;
    std::optional<int> ci_year;
    std::string ci_series_path;
    std::string annual_ci_path;
    std::string coeffs_path;
};

void add_common_flags(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--format", opt.format, "Output format: text, json, csv")
        ->check(CLI::IsMember({"text", "json", "csv"}));
    cmd->add_flag("--assumptions", opt.assumptions, "Print the assumptions log (text format)");
    cmd->add_option("--pue", opt.pue, "Power usage effectiveness (>= 1.0)");
    cmd->add_option("--ci-region", opt.ci_region, "Region key for the annual CI table");
    cmd->add_option("--ci-year", opt.ci_year, "Year for the annual CI table");
    cmd->add_option("--ci-annual", opt.annual_ci_path,
                    "CSV region,year,gco2e_per_kwh overriding the bundled annual table")
        ->check(CLI::ExistingFile);
    cmd->add_option("--coeffs", opt.coeffs_path,
                    "JSON file overriding the component coefficients")
        ->check(CLI::ExistingFile);
}

ComponentCoefficients resolve_coefficients(const CommonOptions& opt, std::string& set_name) {
    set_name = std::string(kDefaultCoefficientSet);
    if (const char* env = std::getenv("WFCARBON_COEFF_SET")) set_name = env;
    ComponentCoefficients coeffs = coefficient_set(set_name);
    if (!opt.coeffs_path.empty()) {
        coeffs = coefficients_from_json_text(read_file(opt.coeffs_path), coeffs);
        set_name += " (overridden by " + opt.coeffs_path + ")";
    }
    return coeffs;
}

struct CiChoice {
    double g_per_kwh = 0.0;
    std::string source;
};

CiChoice resolve_annual_ci(const CommonOptions& opt) {
    if (opt.ci_region.empty() || !opt.ci_year)
        raise("MissingCi", "carbon intensity requires --ci-region and --ci-year");
    AnnualCiTable table = bundled_ci_table();
    if (!opt.annual_ci_path.empty())
        table = annual_ci_from_csv_text(read_file(opt.annual_ci_path), table);
    CiChoice ci;
    ci.g_per_kwh = table.lookup(opt.ci_region, *opt.ci_year);
    ci.source = opt.ci_region + " " + std::to_string(*opt.ci_year) + " annual average";
    return ci;
}

void emit(const std::string& text) { std::cout << text; }

int run_cli(int argc, char** argv) {
    CLI::App app{"workflow carbon footprint estimation and energy-aware scheduling"};
    app.require_subcommand(1);

    // ---- estimate ----
    auto* estimate_cmd = app.add_subcommand("estimate", "Energy and CO2e of a workflow run");
    CommonOptions est_opt;
    std::string bulk_path, core_hours_path, trace_path, trace_format = "csv", cluster_path;
    double storage_tb = -1.0;
    std::string memory_policy = "allocated_gb";
    bool attribute_storage = false;
    add_common_flags(estimate_cmd, est_opt);
    estimate_cmd->add_option("--bulk", bulk_path, "Bulk run description (JSON)")
        ->check(CLI::ExistingFile);
    estimate_cmd->add_option("--core-hours", core_hours_path, "Core-hours run description (JSON)")
        ->check(CLI::ExistingFile);
    estimate_cmd->add_option("--trace", trace_path, "Execution trace (canonical CSV or JSON)")
        ->check(CLI::ExistingFile);
    estimate_cmd->add_option("--trace-format", trace_format, "Trace format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    estimate_cmd->add_option("--cluster", cluster_path, "Cluster description (JSON)")
        ->check(CLI::ExistingFile);
    estimate_cmd->add_option("--storage-tb", storage_tb, "Year of SSD storage for this capacity");
    estimate_cmd->add_option("--memory-attribution", memory_policy,
                             "Memory attribution policy: allocated_gb or full_node")
        ->check(CLI::IsMember({"allocated_gb", "full_node"}));
    estimate_cmd->add_flag("--attribute-storage", attribute_storage,
                           "Attribute node disk power to traced tasks");

    // ---- schedule ----
    auto* schedule_cmd = app.add_subcommand("schedule", "Energy-aware DAG scheduling");
    CommonOptions sched_opt;
    std::string dag_path, sched_cluster_path, algo = "heft";
    int k = 8;
    double comm_rate = 0.0;
    bool idle_static = false;
    schedule_cmd->add_option("--format", sched_opt.format, "Output format: text, json, csv")
        ->check(CLI::IsMember({"text", "json", "csv"}));
    schedule_cmd->add_option("--algo", algo, "Scheduler: heft, greenheft, moheft, brute")
        ->check(CLI::IsMember({"heft", "greenheft", "moheft", "brute"}));
    schedule_cmd->add_option("--dag", dag_path, "Workflow DAG (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    schedule_cmd->add_option("--cluster", sched_cluster_path, "Cluster description (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    schedule_cmd->add_option("--k", k, "MOHEFT population size");
    schedule_cmd->add_option("--comm-rate", comm_rate, "Channel transfer rate in MB/s (0 = free)");
    schedule_cmd->add_flag("--idle-static", idle_static,
                           "Charge idle static energy of powered-on nodes in evaluation");
    schedule_cmd->add_option("--coeffs", sched_opt.coeffs_path,
                             "JSON file overriding the component coefficients")
        ->check(CLI::ExistingFile);

    // ---- shift ----
    auto* shift_cmd = app.add_subcommand("shift", "Carbon-aware temporal shifting");
    std::string profile_path, series_path, window_spec;
    std::int64_t step_s = 3600;
    double shift_pue = 1.0;
    std::string shift_format = "text";
    shift_cmd->add_option("--profile", profile_path, "Power profile (CSV duration_s,watts or JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    shift_cmd->add_option("--ci-series", series_path, "CI series CSV (timestamp,gco2e_per_kwh)")
        ->required()
        ->check(CLI::ExistingFile);
    shift_cmd
        ->add_option("--window", window_spec,
                     "Candidate start window 'earliest,latest' (ISO-8601 UTC)")
        ->required();
    shift_cmd->add_option("--step-s", step_s, "Candidate grid step in seconds");
    shift_cmd->add_option("--pue", shift_pue, "PUE applied to the reported emissions");
    shift_cmd->add_option("--format", shift_format, "Output format: text, json")
        ->check(CLI::IsMember({"text", "json"}));

    // ---- whatif-dvfs ----
    auto* dvfs_cmd = app.add_subcommand("whatif-dvfs", "DVFS what-if for one task");
    double dv_runtime = 0.0, dv_util = 0.5, dv_beta = 1.0, dv_static = 0.0, dv_peak = 0.0,
           dv_alpha = 3.0;
    std::vector<double> dv_ratios;
    std::string dvfs_format = "text";
    dvfs_cmd->add_option("--runtime-s", dv_runtime, "Baseline runtime in seconds")->required();
    dvfs_cmd->add_option("--utilisation", dv_util, "CPU utilisation in [0,1]");
    dvfs_cmd->add_option("--beta", dv_beta, "CPU-bound fraction of the runtime in [0,1]");
    dvfs_cmd->add_option("--static-w", dv_static, "Static watts")->required();
    dvfs_cmd->add_option("--peak-w", dv_peak, "Peak watts")->required();
    dvfs_cmd->add_option("--alpha", dv_alpha, "Dynamic power exponent (power ~ f^alpha)");
    dvfs_cmd->add_option("--ratio", dv_ratios, "Frequency ratio in (0,1]; repeatable")
        ->required();
    dvfs_cmd->add_option("--format", dvfs_format, "Output format: text, json, csv")
        ->check(CLI::IsMember({"text", "json", "csv"}));

    // ---- consolidate ----
    auto* cons_cmd = app.add_subcommand("consolidate", "Pack tasks onto fewer powered-on nodes");
    std::string cons_tasks_path, cons_cluster_path, cons_format = "text";
    cons_cmd->add_option("--tasks", cons_tasks_path, "Tasks (JSON array of {cores, duration_s})")
        ->required()
        ->check(CLI::ExistingFile);
    cons_cmd->add_option("--cluster", cons_cluster_path, "Cluster description (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    cons_cmd->add_option("--format", cons_format, "Output format: text, json")
        ->check(CLI::IsMember({"text", "json"}));

    // ---- report ----
    auto* report_cmd = app.add_subcommand("report", "Re-render a JSON report");
    std::string report_path, report_format = "text";
    bool report_assumptions = false;
    report_cmd->add_option("--input", report_path, "Report JSON produced by this tool")
        ->required()
        ->check(CLI::ExistingFile);
    report_cmd->add_option("--format", report_format, "Output format: text, json, csv")
        ->check(CLI::IsMember({"text", "json", "csv"}));
    report_cmd->add_flag("--assumptions", report_assumptions,
                         "Print the assumptions log (text format)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    if (estimate_cmd->parsed()) {
        const int forms = (!bulk_path.empty() ? 1 : 0) + (!core_hours_path.empty() ? 1 : 0) +
                          (!trace_path.empty() ? 1 : 0) + (storage_tb >= 0.0 ? 1 : 0);
        if (forms != 1) {
            std::cerr << "error[Usage]: estimate needs exactly one of --bulk, --core-hours, "
                         "--trace, --storage-tb\n";
            return 2;
        }
        if (!trace_path.empty() && cluster_path.empty()) {
            std::cerr << "error[Usage]: --trace requires --cluster\n";
            return 2;
        }

        std::string coeff_set_name;
        const ComponentCoefficients coeffs = resolve_coefficients(est_opt, coeff_set_name);
        const CiChoice ci = resolve_annual_ci(est_opt);
        const RenderFormat format = render_format_from_name(est_opt.format);

        FootprintReport report;
        if (!bulk_path.empty()) {
            const BulkRunFile bulk = bulk_from_json_text(read_file(bulk_path));
            report = estimate_bulk(bulk.run, bulk.node, coeffs, est_opt.pue.value_or(1.0),
                                   ci.g_per_kwh);
            if (!est_opt.pue) report.assumptions.push_back("pue not given, defaulted to 1.0");
        } else if (!core_hours_path.empty()) {
            const CoreHoursRun run = core_hours_from_json_text(read_file(core_hours_path));
            report = estimate_core_hours(run, est_opt.pue.value_or(1.0), ci.g_per_kwh);
            if (!est_opt.pue) report.assumptions.push_back("pue not given, defaulted to 1.0");
        } else if (!trace_path.empty()) {
            const ClusterSpec cluster = cluster_from_json_text(read_file(cluster_path));
            const RunTrace trace =
                parse_trace(read_file(trace_path), trace_format_from_name(trace_format));
            const MemoryAttribution policy = memory_policy == "full_node"
                                                 ? MemoryAttribution::full_node
                                                 : MemoryAttribution::allocated_gb;
            report = estimate_trace(trace, cluster, coeffs, est_opt.pue.value_or(cluster.pue),
                                    ci.g_per_kwh, policy, attribute_storage);
        } else {
            report = storage_year_estimate(storage_tb, coeffs, est_opt.pue.value_or(1.0),
                                           ci.g_per_kwh);
            if (!est_opt.pue) report.assumptions.push_back("pue not given, defaulted to 1.0");
        }
        report.ci_source = ci.source;
        report.coefficient_set = coeff_set_name;
        emit(render_report(report, format, est_opt.assumptions));
        return 0;
    }

    if (schedule_cmd->parsed()) {
        const WorkflowDag dag = dag_from_json_text(read_file(dag_path));
        const ClusterSpec cluster = cluster_from_json_text(read_file(sched_cluster_path));
        ComponentCoefficients coeffs;
        if (!sched_opt.coeffs_path.empty())
            coeffs = coefficients_from_json_text(read_file(sched_opt.coeffs_path), coeffs);
        const TaskNodeEstimates estimates = task_node_estimates(dag, cluster, coeffs);
        const SchedOptions options{comm_rate};
        const RenderFormat format = render_format_from_name(sched_opt.format);

        if (algo == "moheft") {
            emit(render_report(moheft(dag, cluster, estimates, k, options), format));
        } else if (algo == "brute") {
            emit(render_report(brute_force_front(dag, cluster, estimates, options), format));
        } else {
            Schedule schedule = algo == "greenheft" ? greenheft(dag, cluster, estimates, options)
                                                    : heft(dag, cluster, estimates, options);
            EvalOptions eval_options;
            eval_options.comm_rate_mb_s = comm_rate;
            eval_options.idle_static = idle_static;
            const EvalResult eval =
                evaluate_schedule(schedule, dag, cluster, estimates, eval_options);
            schedule.energy_wh = eval.energy_wh;
            emit(render_report(schedule, format));
        }
        return 0;
    }

    if (shift_cmd->parsed()) {
        const auto comma = window_spec.find(',');
        if (comma == std::string::npos) {
            std::cerr << "error[Usage]: --window expects 'earliest,latest'\n";
            return 2;
        }
        const std::int64_t earliest = parse_iso8601_utc(window_spec.substr(0, comma));
        const std::int64_t latest = parse_iso8601_utc(window_spec.substr(comma + 1));
        const auto profile = power_profile_from_text(read_file(profile_path));
        const CarbonIntensitySeries series = ci_series_from_csv_text(read_file(series_path));
        const ShiftResult result = best_start_time(profile, series, earliest, latest, step_s);
        const double with_pue_g = result.emissions_g * shift_pue;
        if (shift_format == "json") {
            nlohmann::json doc;
            doc["kind"] = "shift";
            doc["best_start"] = format_iso8601_utc(result.start);
            doc["emissions"] = detail::quantity_json(result.emissions_g, Unit::grams_co2e);
            doc["emissions_with_pue"] = detail::quantity_json(with_pue_g, Unit::grams_co2e);
            doc["pue"] = shift_pue;
            emit(doc.dump(2) + "\n");
        } else {
            emit("best start: " + format_iso8601_utc(result.start) + "\n");
            emit("emissions: " + detail::mass_str_from_g(result.emissions_g) + "\n");
            emit("emissions with PUE: " + detail::mass_str_from_g(with_pue_g) + "\n");
        }
        return 0;
    }

    if (dvfs_cmd->parsed()) {
        const PowerModel model{dv_static, dv_peak};
        model.validate();
        std::string csv = "ratio,runtime_s,power_w,energy_wh\n";
        nlohmann::json rows = nlohmann::json::array();
        std::string text = "dvfs what-if (alpha " + detail::format_sig3(dv_alpha) + ")\n";
        for (double f : dv_ratios) {
            const DvfsResult r = dvfs_whatif(dv_runtime, dv_util, dv_beta, model, f, dv_alpha);
            csv += detail::format_full(f) + ',' + detail::format_full(r.runtime_s) + ',' +
                   detail::format_full(r.power_w) + ',' + detail::format_full(r.energy_wh) + '\n';
            rows.push_back({{"ratio", f},
                            {"runtime_s", r.runtime_s},
                            {"power_w", r.power_w},
                            {"energy_wh", r.energy_wh}});
            text += "  f=" + detail::format_sig3(f) + ": runtime " +
                    detail::format_sig3(r.runtime_s) + " s, power " +
                    detail::format_sig3(r.power_w) + " W, energy " +
                    detail::format_sig3(r.energy_wh) + " Wh\n";
        }
        if (dvfs_format == "csv")
            emit(csv);
        else if (dvfs_format == "json")
            emit(nlohmann::json{{"kind", "dvfs_whatif"}, {"results", rows}}.dump(2) + "\n");
        else
            emit(text);
        return 0;
    }

    if (cons_cmd->parsed()) {
        const auto tasks = consolidation_tasks_from_json_text(read_file(cons_tasks_path));
        const ClusterSpec cluster = cluster_from_json_text(read_file(cons_cluster_path));
        const ConsolidationReport report = consolidate(tasks, cluster);
        if (cons_format == "json") {
            nlohmann::json doc;
            doc["kind"] = "consolidation";
            doc["assignment"] = report.assignment;
            doc["nodes_powered_on"] = report.nodes_powered_on;
            doc["consolidated_static"] =
                detail::quantity_json(report.consolidated_static_wh, Unit::watt_hours);
            doc["spread_static"] =
                detail::quantity_json(report.spread_static_wh, Unit::watt_hours);
            doc["saving"] = detail::quantity_json(report.saving_wh, Unit::watt_hours);
            emit(doc.dump(2) + "\n");
        } else {
            std::string text = "consolidation\n";
            for (std::size_t i = 0; i < report.assignment.size(); ++i)
                text += "  task " + std::to_string(i + 1) + " -> " + report.assignment[i] + "\n";
            text += "nodes powered on: " + std::to_string(report.nodes_powered_on) + "\n";
            text += "static energy consolidated: " +
                    detail::format_sig3(report.consolidated_static_wh) + " Wh\n";
            text += "static energy spread: " + detail::format_sig3(report.spread_static_wh) +
                    " Wh\n";
            text += "saving: " + detail::format_sig3(report.saving_wh) + " Wh\n";
            emit(text);
        }
        return 0;
    }

    if (report_cmd->parsed()) {
        const auto doc = detail::parse_json(read_file(report_path), "report file");
        const std::string kind = doc.value("kind", "");
        const RenderFormat format = render_format_from_name(report_format);
        if (kind == "schedule")
            emit(render_report(schedule_from_json(doc), format));
        else if (kind == "pareto_front")
            emit(render_report(front_from_json(doc), format));
        else if (kind == "footprint")
            emit(render_report(report_from_json(doc), format, report_assumptions));
        else
            raise("UnknownFormat", "report file has no recognisable 'kind'");
        return 0;
    }

    return 2;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const wfcarbon::Error& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error[Internal]: " << e.what() << "\n";
        return 1;
    }
}
