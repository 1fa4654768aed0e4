#include "cohortsim/cli.hpp"

#include "cohortsim/audit.hpp"
#include "cohortsim/calibration.hpp"
#include "cohortsim/output.hpp"
#include "cohortsim/svg.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <map>
#include <sstream>

namespace cohortsim {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CommonOptions {
    std::string config = default_config_path().string();
    std::string out;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;
    std::optional<int> threads;
    std::vector<std::string> scenarios;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool out_required)
{
    cmd->add_option("--config", o.config, "experiment config JSON")->capture_default_str();
    auto* out = cmd->add_option("--out", o.out, "output directory");
    if (out_required) {
        out->required();
    }
    cmd->add_option("--seed", o.seed, "master seed override");
    cmd->add_option("--set", o.overrides, "dotted-path override key=value (repeatable)");
    cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)");
}

ExperimentConfig load(const CommonOptions& o, const std::vector<std::string>& extra = {})
{
    auto overrides = o.overrides;
    overrides.insert(overrides.end(), extra.begin(), extra.end());
    auto cfg = load_config_file(o.config, overrides, o.seed);
    if (!o.scenarios.empty()) {
        std::vector<ScenarioPolicy> kept;
        for (const auto& s : o.scenarios) {
            const auto kind = parse_scenario(s);
            const auto* p = cfg.scenario(kind);
            if (p == nullptr) {
                throw ConfigError("scenario " + s + " is not in the config");
            }
            if (std::none_of(kept.begin(), kept.end(),
                             [&](const ScenarioPolicy& k) { return k.kind == kind; })) {
                kept.push_back(*p);
            }
        }
        std::sort(kept.begin(), kept.end(),
                  [](const auto& a, const auto& b) { return a.kind < b.kind; });
        cfg.scenarios = std::move(kept);
    }
    if (o.threads) {
        cfg.threads = *o.threads;
    }
    return cfg;
}

void print_summaries(std::ostream& out, std::span<const ScenarioSummary> summaries)
{
    for (const auto& s : summaries) {
        out << scenario_label(s.scenario) << ": dropout " << format_real(s.overall_dropout_rate)
            << " (std " << format_real(s.dropout_rate_std) << "), equity gap "
            << format_real(s.equity_gap_low_vs_high_resilience) << ", mean final debt "
            << format_real(s.mean_final_debt) << ", remedial acceptances "
            << format_real(s.mean_remedial_acceptances) << "\n";
    }
}

int cmd_simulate(const CommonOptions& o, std::ostream& out)
{
    const auto cfg = load(o);
    RunOptions run;
    run.output_dir = fs::path(o.out);
    const auto result = run_experiment(cfg, run);
    const auto rows = outcome_rows(cfg, result);
    print_summaries(out, summarize_all(rows));
    out << "wrote " << rows.size() << " agent records to " << o.out << "\n";
    return kExitOk;
}

int cmd_calibrate(const CommonOptions& o, double tolerance, std::ostream& out)
{
    const auto cfg = load(o);
    const auto space = SearchSpace::from_json(cfg.calibration);
    const EmpiricalCurve target =
        space.target.empty() ? default_empirical_target() : EmpiricalCurve{space.target};
    const auto result = calibrate(space, cfg, target, tolerance, o.threads);

    std::error_code ec;
    fs::create_directories(o.out, ec);
    if (ec) {
        throw IoError("cannot create " + o.out + ": " + ec.message());
    }
    const fs::path dir(o.out);
    write_text_file(dir / kCalibrationReportFile, calibration_report(result, space).dump(2) + "\n");
    auto effective = config_effective_json(apply_calibration(cfg, result.best));
    effective["calibration_result"] = {{"winner", result.best.to_json()},
                                       {"achieved_rmse", result.achieved_rmse},
                                       {"tolerance", tolerance},
                                       {"accepted", result.accepted}};
    write_text_file(dir / kConfigEffectiveFile, effective.dump(2) + "\n");

    out << "evaluated " << result.candidates.size() << " candidates (" << result.pruned
        << " pruned)\n";
    out << "best rmse " << format_real(result.achieved_rmse) << " at "
        << result.best.to_json().dump() << "\n";
    out << (result.accepted ? "accepted" : "NOT accepted") << " at tolerance " << tolerance
        << "\n";
    return result.accepted ? kExitOk : kExitCheckFailed;
}

int cmd_audit(const std::string& dir, std::ostream& out)
{
    const auto report = audit(dir);
    write_text_file(fs::path(dir) / kAuditReportFile, report.to_json().dump(2) + "\n");
    for (const auto& c : report.checks) {
        const char* status = c.status == CheckStatus::pass   ? "PASS"
                             : c.status == CheckStatus::fail ? "FAIL"
                                                             : "SKIP";
        out << status << " " << c.name;
        if (!c.detail.empty()) {
            out << ": " << c.detail;
        }
        out << "\n";
    }
    return report.passed() ? kExitOk : kExitCheckFailed;
}

int cmd_report(const std::string& dir, const std::string& out_dir, bool svg, std::ostream& out)
{
    const fs::path in(dir);
    const fs::path target = out_dir.empty() ? in : fs::path(out_dir);
    const auto rows = parse_agent_outcomes_csv(read_text_file(in / kAgentOutcomesFile));
    if (rows.empty()) {
        throw ConfigError(std::string(kAgentOutcomesFile) + " has no rows");
    }
    int horizon = 12;
    const auto config_path = in / kConfigEffectiveFile;
    if (fs::exists(config_path)) {
        try {
            horizon = json::parse(read_text_file(config_path)).value("horizon_semesters", 12);
        } catch (const json::exception& e) {
            throw ConfigError(std::string(kConfigEffectiveFile) + ": " + e.what());
        }
    }
    std::vector<SemesterAggregateRow> aggregates;
    if (fs::exists(in / kSemesterAggregatesFile)) {
        aggregates = parse_semester_aggregates_csv(read_text_file(in / kSemesterAggregatesFile));
    }
    const auto summaries = summarize_all(rows);
    const auto curves = dropout_curve_points(rows, aggregates, horizon);

    std::error_code ec;
    fs::create_directories(target, ec);
    if (ec) {
        throw IoError("cannot create " + target.string() + ": " + ec.message());
    }
    write_text_file(target / kSummaryFile, summary_csv(summaries));
    write_text_file(target / kDropoutCurvesFile, dropout_curves_csv(curves));
    print_summaries(out, summaries);
    if (svg) {
        for (const auto& name : write_report_figures(target, curves, rows, summaries)) {
            out << "wrote " << (target / name).string() << "\n";
        }
    }
    return kExitOk;
}

struct SweepAxis {
    std::string key;
    std::vector<std::string> values;
};

SweepAxis parse_sweep_param(const std::string& text)
{
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == text.size()) {
        throw ConfigError("--param '" + text + "' is not of the form key=v1[,v2...]");
    }
    SweepAxis axis{text.substr(0, eq), {}};
    std::stringstream ss(text.substr(eq + 1));
    std::string v;
    while (std::getline(ss, v, ',')) {
        if (v.empty()) {
            throw ConfigError("--param '" + text + "' has an empty value");
        }
        axis.values.push_back(v);
    }
    return axis;
}

// Scenarios a sweep must run: those named by scenarios.<K>.* keys when every key has
// that form, otherwise all of them.
std::vector<std::string> swept_scenarios(const std::vector<SweepAxis>& axes)
{
    std::vector<std::string> out;
    for (const auto& a : axes) {
        if (a.key.rfind("scenarios.", 0) != 0) {
            return {};
        }
        const auto rest = a.key.substr(10);
        const auto dot = rest.find('.');
        const auto key = rest.substr(0, dot);
        if (std::find(out.begin(), out.end(), key) == out.end()) {
            out.push_back(key);
        }
    }
    return out;
}

int cmd_sweep(CommonOptions o, const std::vector<std::string>& params, std::ostream& out)
{
    if (params.empty()) {
        throw ConfigError("sweep needs at least one --param");
    }
    std::vector<SweepAxis> axes;
    for (const auto& p : params) {
        axes.push_back(parse_sweep_param(p));
    }
    if (o.scenarios.empty()) {
        o.scenarios = swept_scenarios(axes);
    }

    std::string csv = "point";
    for (const auto& a : axes) {
        csv += "," + a.key;
    }
    csv += ",fidelity,replications_used,";
    {
        const auto header = summary_csv({});
        csv += header.substr(0, header.size() - 1) + ",dropout_rate_std\n";
    }

    std::vector<std::size_t> idx(axes.size(), 0);
    int point = 0;
    while (true) {
        std::vector<std::string> assignment;
        for (std::size_t i = 0; i < axes.size(); ++i) {
            assignment.push_back(axes[i].key + "=" + axes[i].values[idx[i]]);
        }
        auto cfg = load(o, assignment);
        cfg.replications_per_scenario = std::max(5, cfg.replications_per_scenario / 4);
        const auto result = run_experiment(cfg);
        const auto rows = outcome_rows(cfg, result);
        const auto summaries = summarize_all(rows);
        const auto body = summary_csv(summaries);
        std::stringstream lines(body);
        std::string line;
        std::getline(lines, line);
        for (const auto& s : summaries) {
            std::getline(lines, line);
            csv += std::to_string(point);
            for (std::size_t i = 0; i < axes.size(); ++i) {
                csv += "," + axes[i].values[idx[i]];
            }
            csv += ",reduced," + std::to_string(cfg.replications_per_scenario) + "," + line + "," +
                   format_real(s.dropout_rate_std) + "\n";
            out << "point " << point;
            for (const auto& a : assignment) {
                out << " " << a;
            }
            out << " " << scenario_label(s.scenario) << " dropout "
                << format_real(s.overall_dropout_rate) << "\n";
        }
        ++point;

        std::size_t d = axes.size();
        bool done = true;
        while (d > 0) {
            --d;
            if (++idx[d] < axes[d].values.size()) {
                done = false;
                break;
            }
            idx[d] = 0;
        }
        if (done) {
            break;
        }
    }

    std::error_code ec;
    fs::create_directories(o.out, ec);
    if (ec) {
        throw IoError("cannot create " + o.out + ": " + ec.message());
    }
    write_text_file(fs::path(o.out) / "sweep_summary.csv", csv);
    out << "reduced-fidelity sweep of " << point << " points written to "
        << (fs::path(o.out) / "sweep_summary.csv").string() << "\n";
    return kExitOk;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Cohort progression-policy simulator", "cohortsim"};
    app.require_subcommand(1);

    CommonOptions sim_opts;
    auto* simulate = app.add_subcommand("simulate", "run all scenarios and write outputs");
    add_common(simulate, sim_opts, true);
    simulate->add_option("--scenarios", sim_opts.scenarios, "subset of A, B, C")->delimiter(',');

    CommonOptions cal_opts;
    double tolerance = 0.05;
    auto* calibrate_cmd = app.add_subcommand("calibrate", "fit historical-regime parameters");
    add_common(calibrate_cmd, cal_opts, true);
    calibrate_cmd->add_option("--tolerance", tolerance, "accepted RMSE")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    std::string audit_dir;
    auto* audit_cmd = app.add_subcommand("audit", "check a run directory");
    audit_cmd->add_option("dir", audit_dir, "run directory")->required();

    std::string report_dir;
    std::string report_out;
    bool svg = false;
    auto* report = app.add_subcommand("report", "recompute summary and curves from outcomes");
    report->add_option("dir", report_dir, "run directory")->required();
    report->add_option("--out", report_out, "write here instead of the run directory");
    report->add_flag("--svg", svg, "also write SVG figures");

    CommonOptions sweep_opts;
    std::vector<std::string> params;
    auto* sweep = app.add_subcommand("sweep", "reduced-replication parameter sweep");
    add_common(sweep, sweep_opts, true);
    sweep->add_option("--param", params, "key=v1[,v2...] (repeatable)")->required();
    sweep->add_option("--scenarios", sweep_opts.scenarios, "subset of A, B, C")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitInvalid;
    }

    try {
        if (simulate->parsed()) {
            return cmd_simulate(sim_opts, out);
        }
        if (calibrate_cmd->parsed()) {
            return cmd_calibrate(cal_opts, tolerance, out);
        }
        if (audit_cmd->parsed()) {
            return cmd_audit(audit_dir, out);
        }
        if (report->parsed()) {
            return cmd_report(report_dir, report_out, svg, out);
        }
        if (sweep->parsed()) {
            return cmd_sweep(sweep_opts, params, out);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalid;
    }
    return kExitInvalid;
}

int run_cli(int argc, const char* const* argv)
{
    return run_cli(argc, argv, std::cout, std::cerr);
}

} // namespace cohortsim
