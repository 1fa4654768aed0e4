#include "cohortsim/output.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace cohortsim {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* const kAgentHeader =
    "scenario,replication,agent_id,archetype_id,resilience,status,dropout_semester,"
    "dropout_cause,final_stress,final_belonging,final_debt,killer_failures,"
    "remedial_acceptances,courses_passed";

const char* const kSummaryHeader =
    "scenario,n_agents,n_replications,overall_dropout_rate,overall_graduation_rate,"
    "normative_dropout_frac,academic_dropout_frac,other_dropout_frac,mean_time_to_event,"
    "median_time_to_event,mean_final_debt,mean_killer_failures,mean_remedial_acceptances,"
    "equity_gap_low_vs_high_resilience,dropout_rate_low_resilience,dropout_rate_high_resilience";

const char* const kAggregateHeader =
    "scenario,replication,semester,active,dropped,graduated,mean_stress_active,"
    "mean_belonging_active";

const char* const kCurveHeader =
    "scenario,semester,cumulative_dropout,mean_stress_active,mean_belonging_active";

std::vector<std::string_view> split(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
        if (comma == std::string_view::npos) {
            return out;
        }
        start = comma + 1;
    }
}

std::vector<std::string_view> lines_of(std::string_view text)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start < text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            nl = text.size();
        }
        auto line = text.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (!line.empty()) {
            out.push_back(line);
        }
        start = nl + 1;
    }
    return out;
}

class RowReader {
public:
    RowReader(std::string_view line, std::size_t line_no, std::size_t expected)
        : fields_(split(line)), line_no_(line_no)
    {
        if (fields_.size() != expected) {
            fail("expected " + std::to_string(expected) + " fields, found " +
                 std::to_string(fields_.size()));
        }
    }

    std::string_view text() { return fields_[next_++]; }

    int integer()
    {
        const auto f = text();
        int v = 0;
        const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
        if (ec != std::errc{} || ptr != f.data() + f.size()) {
            fail("'" + std::string(f) + "' is not an integer");
        }
        return v;
    }

    std::optional<int> optional_integer()
    {
        if (fields_[next_].empty()) {
            ++next_;
            return std::nullopt;
        }
        return integer();
    }

    double real()
    {
        const auto v = optional_real();
        if (!v) {
            fail("missing numeric field");
        }
        return *v;
    }

    std::optional<double> optional_real()
    {
        const auto f = text();
        if (f.empty()) {
            return std::nullopt;
        }
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
        if (ec != std::errc{} || ptr != f.data() + f.size()) {
            fail("'" + std::string(f) + "' is not a number");
        }
        return v;
    }

    ScenarioKind scenario()
    {
        const auto f = text();
        try {
            return parse_scenario(f);
        } catch (const ConfigError&) {
            fail("unknown scenario '" + std::string(f) + "'");
        }
        return ScenarioKind::historical;
    }

    template <class Enum, std::size_t N>
    Enum label(const Enum (&values)[N], std::string_view (*to_label)(Enum))
    {
        const auto f = text();
        for (auto v : values) {
            if (to_label(v) == f) {
                return v;
            }
        }
        fail("unknown label '" + std::string(f) + "'");
        return values[0];
    }

    template <class Enum, std::size_t N>
    std::optional<Enum> optional_label(const Enum (&values)[N], std::string_view (*to_label)(Enum))
    {
        if (fields_[next_].empty()) {
            ++next_;
            return std::nullopt;
        }
        return label(values, to_label);
    }

    [[noreturn]] void fail(const std::string& what) const
    {
        throw ConfigError("line " + std::to_string(line_no_) + ": " + what);
    }

private:
    std::vector<std::string_view> fields_;
    std::size_t line_no_;
    std::size_t next_ = 0;
};

std::vector<std::string_view> body_lines(const std::string& text, const char* header,
                                         const char* what)
{
    auto lines = lines_of(text);
    if (lines.empty() || lines.front() != header) {
        throw ConfigError(std::string(what) + ": unexpected or missing header");
    }
    lines.erase(lines.begin());
    return lines;
}

std::string format_optional(const std::optional<double>& v)
{
    return v ? format_real(*v) : std::string();
}

std::string format_exact(double value)
{
    if (std::isnan(value)) {
        return {};
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

} // namespace

std::string format_real(double value)
{
    if (std::isnan(value)) {
        return {};
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", value);
    return buf;
}

std::string agent_outcomes_csv(std::span<const AgentOutcomeRow> rows)
{
    std::string out = kAgentHeader;
    out += '\n';
    out.reserve(rows.size() * 96);
    for (const auto& r : rows) {
        out += scenario_label(r.scenario);
        out += ',' + std::to_string(r.replication);
        out += ',' + std::to_string(r.agent_id);
        out += ',' + std::to_string(r.archetype_id);
        out += ',';
        out += resilience_label(r.resilience);
        out += ',';
        out += status_label(r.status);
        out += ',';
        if (r.dropout_semester) {
            out += std::to_string(*r.dropout_semester);
        }
        out += ',';
        if (r.dropout_cause) {
            out += cause_label(*r.dropout_cause);
        }
        out += ',' + format_real(r.final_stress);
        out += ',' + format_real(r.final_belonging);
        out += ',' + std::to_string(r.final_debt);
        out += ',' + std::to_string(r.killer_failures);
        out += ',' + std::to_string(r.remedial_acceptances);
        out += ',' + std::to_string(r.courses_passed);
        out += '\n';
    }
    return out;
}

std::vector<AgentOutcomeRow> parse_agent_outcomes_csv(const std::string& text)
{
    static constexpr Resilience kRes[] = {Resilience::low, Resilience::medium, Resilience::high};
    static constexpr AgentStatus kStatus[] = {AgentStatus::active, AgentStatus::dropped,
                                              AgentStatus::graduated};
    static constexpr DropoutCause kCause[] = {DropoutCause::normative, DropoutCause::academic,
                                              DropoutCause::other};
    std::vector<AgentOutcomeRow> rows;
    const auto lines = body_lines(text, kAgentHeader, kAgentOutcomesFile);
    rows.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        RowReader in(lines[i], i + 2, 14);
        AgentOutcomeRow r;
        r.scenario = in.scenario();
        r.replication = in.integer();
        r.agent_id = in.integer();
        r.archetype_id = in.integer();
        r.resilience = in.label(kRes, resilience_label);
        r.status = in.label(kStatus, status_label);
        r.dropout_semester = in.optional_integer();
        r.dropout_cause = in.optional_label(kCause, cause_label);
        r.final_stress = in.real();
        r.final_belonging = in.real();
        r.final_debt = in.integer();
        r.killer_failures = in.integer();
        r.remedial_acceptances = in.integer();
        r.courses_passed = in.integer();
        if ((r.status == AgentStatus::dropped) != r.dropout_semester.has_value() ||
            (r.status == AgentStatus::dropped) != r.dropout_cause.has_value()) {
            in.fail("dropout fields inconsistent with status");
        }
        rows.push_back(r);
    }
    return rows;
}

std::string summary_csv(std::span<const ScenarioSummary> summaries)
{
    std::string out = kSummaryHeader;
    out += '\n';
    for (const auto& s : summaries) {
        out += scenario_label(s.scenario);
        out += ',' + std::to_string(s.n_agents);
        out += ',' + std::to_string(s.n_replications);
        for (double v : {s.overall_dropout_rate, s.overall_graduation_rate, s.normative_dropout_frac,
                         s.academic_dropout_frac, s.other_dropout_frac}) {
            out += ',' + format_real(v);
        }
        out += ',' + format_optional(s.mean_time_to_event);
        out += ',' + format_optional(s.median_time_to_event);
        for (double v : {s.mean_final_debt, s.mean_killer_failures, s.mean_remedial_acceptances,
                         s.equity_gap_low_vs_high_resilience, s.dropout_rate_low_resilience,
                         s.dropout_rate_high_resilience}) {
            out += ',' + format_real(v);
        }
        out += '\n';
    }
    return out;
}

std::vector<ScenarioSummary> parse_summary_csv(const std::string& text)
{
    std::vector<ScenarioSummary> out;
    const auto lines = body_lines(text, kSummaryHeader, kSummaryFile);
    const auto nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < lines.size(); ++i) {
        RowReader in(lines[i], i + 2, 16);
        ScenarioSummary s;
        s.scenario = in.scenario();
        s.n_agents = in.integer();
        s.n_replications = in.integer();
        s.overall_dropout_rate = in.real();
        s.overall_graduation_rate = in.real();
        s.normative_dropout_frac = in.real();
        s.academic_dropout_frac = in.real();
        s.other_dropout_frac = in.real();
        s.mean_time_to_event = in.optional_real();
        s.median_time_to_event = in.optional_real();
        s.mean_final_debt = in.real();
        s.mean_killer_failures = in.real();
        s.mean_remedial_acceptances = in.real();
        s.equity_gap_low_vs_high_resilience = in.optional_real().value_or(nan);
        s.dropout_rate_low_resilience = in.optional_real().value_or(nan);
        s.dropout_rate_high_resilience = in.optional_real().value_or(nan);
        out.push_back(s);
    }
    return out;
}

std::string semester_aggregates_csv(const ExperimentResult& result)
{
    std::string out = kAggregateHeader;
    out += '\n';
    for (const auto& run : result.scenarios) {
        for (const auto& rep : run.replications) {
            for (const auto& a : rep.semesters) {
                out += scenario_label(rep.scenario);
                out += ',' + std::to_string(rep.replication);
                out += ',' + std::to_string(a.semester);
                out += ',' + std::to_string(a.active);
                out += ',' + std::to_string(a.dropped);
                out += ',' + std::to_string(a.graduated);
                out += ',' + (a.active > 0 ? format_exact(a.mean_stress_active) : std::string());
                out += ',' +
                       (a.active > 0 ? format_exact(a.mean_belonging_active) : std::string());
                out += '\n';
            }
        }
    }
    return out;
}

std::vector<SemesterAggregateRow> parse_semester_aggregates_csv(const std::string& text)
{
    std::vector<SemesterAggregateRow> out;
    const auto lines = body_lines(text, kAggregateHeader, kSemesterAggregatesFile);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        RowReader in(lines[i], i + 2, 8);
        SemesterAggregateRow r;
        r.scenario = in.scenario();
        r.replication = in.integer();
        r.aggregate.semester = in.integer();
        r.aggregate.active = in.integer();
        r.aggregate.dropped = in.integer();
        r.aggregate.graduated = in.integer();
        r.aggregate.mean_stress_active = in.optional_real().value_or(0.0);
        r.aggregate.mean_belonging_active = in.optional_real().value_or(0.0);
        out.push_back(r);
    }
    return out;
}

std::string dropout_curves_csv(std::span<const CurvePoint> points)
{
    std::string out = kCurveHeader;
    out += '\n';
    for (const auto& p : points) {
        out += scenario_label(p.scenario);
        out += ',' + std::to_string(p.semester);
        out += ',' + format_real(p.cumulative_dropout);
        out += ',' + format_real(p.mean_stress_active);
        out += ',' + format_real(p.mean_belonging_active);
        out += '\n';
    }
    return out;
}

std::vector<CurvePoint> dropout_curve_points(const ExperimentResult& result)
{
    std::vector<CurvePoint> out;
    for (const auto& run : result.scenarios) {
        if (run.replications.empty()) {
            continue;
        }
        const auto t = psychosocial_trajectories(run.replications);
        for (std::size_t s = 0; s < t.cumulative_dropout.size(); ++s) {
            out.push_back({run.policy.kind, static_cast<int>(s + 1), t.cumulative_dropout[s],
                           t.mean_stress_active[s], t.mean_belonging_active[s]});
        }
    }
    return out;
}

std::vector<CurvePoint> dropout_curve_points(std::span<const AgentOutcomeRow> rows,
                                             std::span<const SemesterAggregateRow> aggregates,
                                             int horizon)
{
    const auto nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<CurvePoint> out;
    for (auto kind : scenarios_in(rows)) {
        const auto subset = rows_for(rows, kind);
        const auto curve = km_dropout_curve(dropout_histories(subset), horizon);
        for (int s = 1; s <= horizon; ++s) {
            double stress = 0.0;
            double belonging = 0.0;
            int counted = 0;
            for (const auto& a : aggregates) {
                if (a.scenario == kind && a.aggregate.semester == s && a.aggregate.active > 0) {
                    stress += a.aggregate.mean_stress_active;
                    belonging += a.aggregate.mean_belonging_active;
                    ++counted;
                }
            }
            out.push_back({kind, s, curve[static_cast<std::size_t>(s - 1)],
                           counted ? stress / counted : nan, counted ? belonging / counted : nan});
        }
    }
    return out;
}

json config_effective_json(const ExperimentConfig& cfg)
{
    json doc = config_to_json(cfg);
    json seeds = json::object();
    json frictions = json::object();
    for (const auto& policy : cfg.scenarios) {
        const std::string key(scenario_key(policy.kind));
        json list = json::array();
        for (int r = 0; r < cfg.replications_per_scenario; ++r) {
            list.push_back(replication_seed(cfg.master_seed, policy.kind, r));
        }
        seeds[key] = std::move(list);
        const double ability = cfg.representative_ability(policy);
        json per_course = json::object();
        const auto eff = effective_frictions(cfg.curriculum, policy, ability);
        for (std::size_t c = 0; c < eff.size(); ++c) {
            per_course[cfg.curriculum.course(c).id] = eff[c].friction;
        }
        frictions[key] = {{"representative_ability", ability}, {"courses", std::move(per_course)}};
    }
    json labels = json::array();
    for (const auto& policy : cfg.scenarios) {
        labels.push_back(std::string(scenario_label(policy.kind)));
    }
    doc["derived"] = {
        {"scenarios", std::move(labels)},
        {"n_scenarios", cfg.scenarios.size()},
        {"cohort_size", cfg.cohort_size},
        {"replications_per_scenario", cfg.replications_per_scenario},
        {"total_agent_records", static_cast<long long>(cfg.cohort_size) *
                                    static_cast<long long>(cfg.scenarios.size()) *
                                    cfg.replications_per_scenario},
        {"replication_seeds", std::move(seeds)},
        {"effective_frictions", std::move(frictions)},
    };
    return doc;
}

std::string read_text_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << text;
    out.close();
    if (!out) {
        throw IoError("write failed for " + path.string());
    }
}

void write_experiment_outputs(const ExperimentConfig& cfg, const ExperimentResult& result,
                              const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    }
    const auto rows = outcome_rows(cfg, result);
    const auto summaries = summarize_all(rows);
    const auto curves = dropout_curve_points(result);

    write_text_file(dir / kAgentOutcomesFile, agent_outcomes_csv(rows));
    write_text_file(dir / kSummaryFile, summary_csv(summaries));
    write_text_file(dir / kDropoutCurvesFile, dropout_curves_csv(curves));
    write_text_file(dir / kSemesterAggregatesFile, semester_aggregates_csv(result));
    write_text_file(dir / kConfigEffectiveFile, config_effective_json(cfg).dump(2) + "\n");

    std::string log;
    for (const auto& s : summaries) {
        char line[200];
        std::snprintf(line, sizeof line, "%s: dropout %.6f (std %.6f over %d replications)",
                      std::string(scenario_label(s.scenario)).c_str(), s.overall_dropout_rate,
                      s.dropout_rate_std, s.n_replications);
        log += line;
        log += '\n';
    }
    for (const auto& l : result.log) {
        log += l + '\n';
    }
    write_text_file(dir / kRunLogFile, log);
}

} // namespace cohortsim
