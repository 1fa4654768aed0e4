#include "cohortsim/calibration.hpp"

#include "cohortsim/rng.hpp"

#include <algorithm>
#include <cmath>

namespace cohortsim {

using nlohmann::json;

void EmpiricalCurve::validate() const
{
    const auto& v = yearly_cumulative_dropout;
    if (v.size() != 6) {
        throw ConfigError("empirical curve must have 6 yearly values, got " +
                          std::to_string(v.size()));
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] >= 0.0 && v[i] <= 1.0)) {
            throw ConfigError("empirical curve value " + std::to_string(i + 1) +
                              " outside [0,1]");
        }
        if (i > 0 && v[i] < v[i - 1]) {
            throw ConfigError("empirical curve must be non-decreasing");
        }
    }
}

EmpiricalCurve default_empirical_target()
{
    return {{0.234, 0.328, 0.39, 0.42, 0.45, 0.48}};
}

std::vector<double> cumulative_dropout_by_year(const DropoutHistories& histories, int horizon)
{
    if (horizon < 12) {
        throw ConfigError("yearly dropout needs a horizon of at least 12 semesters, got " +
                          std::to_string(horizon));
    }
    const auto per_semester = km_dropout_curve(histories, horizon);
    std::vector<double> yearly(6);
    for (std::size_t k = 0; k < 6; ++k) {
        yearly[k] = per_semester[2 * k + 1];
    }
    return yearly;
}

std::vector<double> cumulative_dropout_by_year(std::span<const ReplicationResult> reps)
{
    if (reps.empty()) {
        throw ContractError("yearly dropout requested for an empty result set");
    }
    return cumulative_dropout_by_year(dropout_histories(reps),
                                      static_cast<int>(reps.front().semesters.size()));
}

double rmse(std::span<const double> sim, std::span<const double> target)
{
    if (sim.size() != target.size()) {
        throw ContractError("rmse: length mismatch (" + std::to_string(sim.size()) + " vs " +
                            std::to_string(target.size()) + ")");
    }
    if (sim.empty()) {
        throw ContractError("rmse: empty vectors");
    }
    double ss = 0.0;
    for (std::size_t i = 0; i < sim.size(); ++i) {
        const double d = sim[i] - target[i];
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(sim.size()));
}

std::array<double, CalibrationParams::kCount> CalibrationParams::values() const
{
    return {alpha0, alpha1, alpha2, reg_success_scale, stress_fail_gain, debt_stress_per_item};
}

CalibrationParams CalibrationParams::from_values(const std::array<double, kCount>& v)
{
    return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

CalibrationParams CalibrationParams::from_config(const ExperimentConfig& cfg)
{
    CalibrationParams p;
    p.alpha0 = cfg.hazard.alpha0;
    p.alpha1 = cfg.hazard.alpha1;
    p.alpha2 = cfg.hazard.alpha2;
    p.stress_fail_gain = cfg.psych.stress_fail_gain;
    p.debt_stress_per_item = cfg.psych.debt_stress_per_item;
    if (const auto* a = cfg.scenario(ScenarioKind::historical)) {
        p.reg_success_scale = a->reg_success_scale;
    }
    return p;
}

json CalibrationParams::to_json() const
{
    json j = json::object();
    const auto v = values();
    for (std::size_t i = 0; i < kCount; ++i) {
        j[kNames[i]] = v[i];
    }
    return j;
}

ExperimentConfig apply_calibration(const ExperimentConfig& cfg, const CalibrationParams& p)
{
    ExperimentConfig out = cfg;
    out.hazard.alpha0 = p.alpha0;
    out.hazard.alpha1 = p.alpha1;
    out.hazard.alpha2 = p.alpha2;
    out.psych.stress_fail_gain = p.stress_fail_gain;
    out.psych.debt_stress_per_item = p.debt_stress_per_item;
    for (auto& s : out.scenarios) {
        if (s.kind == ScenarioKind::historical) {
            s.reg_success_scale = p.reg_success_scale;
        }
    }
    return out;
}

std::vector<double> Axis::grid() const
{
    if (points == 1) {
        return {0.5 * (lo + hi)};
    }
    std::vector<double> out(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
    }
    out.back() = hi;
    return out;
}

void SearchSpace::validate() const
{
    for (std::size_t i = 0; i < axes.size(); ++i) {
        const auto& a = axes[i];
        const std::string name = CalibrationParams::kNames[i];
        if (a.points < 1) {
            throw ConfigError("calibration: axis " + name + " has no points");
        }
        if (!(a.lo <= a.hi)) {
            throw ConfigError("calibration: axis " + name + " has lo > hi");
        }
    }
    if (axes[1].lo <= 0.0) {
        throw ConfigError("calibration: alpha1 range must be positive");
    }
    if (axes[2].hi >= 0.0) {
        throw ConfigError("calibration: alpha2 range must be negative");
    }
    for (std::size_t i = 3; i < axes.size(); ++i) {
        if (axes[i].lo < 0.0) {
            throw ConfigError(std::string("calibration: ") + CalibrationParams::kNames[i] +
                              " range must be non-negative");
        }
    }
    if (calibration_replications < 1) {
        throw ConfigError("calibration: calibration_replications must be >= 1");
    }
    if (!(prune_rmse > 0.0)) {
        throw ConfigError("calibration: prune_rmse must be > 0");
    }
    if (refine_samples < 0) {
        throw ConfigError("calibration: refine_samples must be >= 0");
    }
    if (!target.empty()) {
        EmpiricalCurve{target}.validate();
    }
}

std::size_t SearchSpace::grid_size() const
{
    std::size_t n = 1;
    for (const auto& a : axes) {
        n *= static_cast<std::size_t>(a.points);
    }
    return n;
}

std::vector<CalibrationParams> SearchSpace::grid() const
{
    std::array<std::vector<double>, CalibrationParams::kCount> values;
    for (std::size_t i = 0; i < axes.size(); ++i) {
        values[i] = axes[i].grid();
    }
    std::vector<CalibrationParams> out;
    out.reserve(grid_size());
    std::array<std::size_t, CalibrationParams::kCount> idx{};
    while (true) {
        std::array<double, CalibrationParams::kCount> v;
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] = values[i][idx[i]];
        }
        out.push_back(CalibrationParams::from_values(v));
        std::size_t d = idx.size();
        while (d > 0) {
            --d;
            if (++idx[d] < values[d].size()) {
                break;
            }
            idx[d] = 0;
            if (d == 0) {
                return out;
            }
        }
    }
}

SearchSpace SearchSpace::from_json(const json& section)
{
    SearchSpace s;
    if (section.is_null()) {
        return s;
    }
    if (!section.is_object()) {
        throw ConfigError("calibration: expected an object");
    }
    try {
        for (const auto& [key, value] : section.items()) {
            const auto* name = std::find(CalibrationParams::kNames.begin(),
                                         CalibrationParams::kNames.end(), key);
            if (name != CalibrationParams::kNames.end()) {
                auto& axis = s.axes[static_cast<std::size_t>(name - CalibrationParams::kNames.begin())];
                for (const auto& [field, _] : value.items()) {
                    if (field != "lo" && field != "hi" && field != "points") {
                        throw ConfigError("calibration." + key + ": unknown field '" + field + "'");
                    }
                }
                axis.lo = value.value("lo", axis.lo);
                axis.hi = value.value("hi", axis.hi);
                axis.points = value.value("points", axis.points);
            } else if (key == "calibration_replications") {
                s.calibration_replications = value.get<int>();
            } else if (key == "prune_rmse") {
                s.prune_rmse = value.get<double>();
            } else if (key == "refine_samples") {
                s.refine_samples = value.get<int>();
            } else if (key == "target") {
                s.target = value.get<std::vector<double>>();
            } else {
                throw ConfigError("calibration: unknown field '" + key + "'");
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("calibration: ") + e.what());
    }
    s.validate();
    return s;
}

json SearchSpace::to_json() const
{
    json j = json::object();
    for (std::size_t i = 0; i < axes.size(); ++i) {
        j[CalibrationParams::kNames[i]] = {
            {"lo", axes[i].lo}, {"hi", axes[i].hi}, {"points", axes[i].points}};
    }
    j["calibration_replications"] = calibration_replications;
    j["prune_rmse"] = prune_rmse;
    j["refine_samples"] = refine_samples;
    if (!target.empty()) {
        j["target"] = target;
    }
    return j;
}

bool candidate_before(const CandidateResult& a, const CandidateResult& b)
{
    if (a.pruned != b.pruned) {
        return !a.pruned;
    }
    if (a.rmse != b.rmse) {
        return a.rmse < b.rmse;
    }
    return a.params.values() < b.params.values();
}

namespace {

ExperimentConfig historical_only(const ExperimentConfig& cfg)
{
    const auto* a = cfg.scenario(ScenarioKind::historical);
    if (a == nullptr) {
        throw ConfigError("calibration needs the historical scenario (A) in the config");
    }
    ExperimentConfig out = cfg;
    out.scenarios = {*a};
    return out;
}

CandidateResult evaluate(const ExperimentConfig& base, const CalibrationParams& p,
                         const SearchSpace& space, std::span<const double> target)
{
    const ExperimentConfig cfg = apply_calibration(base, p);
    const auto& policy = cfg.scenarios.front();
    CandidateResult c;
    c.params = p;
    DropoutHistories histories;
    for (int r = 0; r < space.calibration_replications; ++r) {
        const auto rep = run_replication(cfg, policy, r);
        histories.push_back(dropout_histories(std::span(&rep, 1)).front());
        c.replications = r + 1;
        c.curve = cumulative_dropout_by_year(histories, cfg.horizon_semesters);
        c.rmse = rmse(c.curve, target);
        if (r == 0 && space.calibration_replications > 1 && c.rmse > space.prune_rmse) {
            c.pruned = true;
            break;
        }
    }
    return c;
}

std::vector<CalibrationParams> refinement_candidates(const SearchSpace& space,
                                                     const CalibrationParams& centre,
                                                     std::uint64_t seed)
{
    std::vector<CalibrationParams> out;
    const auto c = centre.values();
    for (int i = 0; i < space.refine_samples; ++i) {
        RandomStream rng(mix_key({seed, static_cast<std::uint64_t>(Purpose::calibration),
                                  static_cast<std::uint64_t>(i)}));
        std::array<double, CalibrationParams::kCount> v;
        for (std::size_t k = 0; k < v.size(); ++k) {
            const auto& a = space.axes[k];
            const double step = a.points > 1 ? (a.hi - a.lo) / (a.points - 1) : 0.0;
            v[k] = std::clamp(c[k] + (2.0 * rng.uniform() - 1.0) * 0.5 * step, a.lo, a.hi);
        }
        out.push_back(CalibrationParams::from_values(v));
    }
    return out;
}

} // namespace

std::vector<double> simulate_target_curve(const ExperimentConfig& cfg, const CalibrationParams& p,
                                          int replications)
{
    SearchSpace space;
    space.calibration_replications = replications;
    space.prune_rmse = 1e9;
    const auto base = historical_only(cfg);
    const std::vector<double> zeros(6, 0.0);
    return evaluate(base, p, space, zeros).curve;
}

CalibrationResult calibrate(const SearchSpace& space, const ExperimentConfig& cfg,
                            const EmpiricalCurve& target, double tolerance,
                            std::optional<int> threads)
{
    space.validate();
    target.validate();
    if (!(tolerance > 0.0)) {
        throw ConfigError("calibration tolerance must be > 0");
    }
    const auto base = historical_only(cfg);
    base.validate();
    const int workers = resolve_threads(threads.value_or(cfg.threads));
    const auto& tv = target.yearly_cumulative_dropout;

    auto run_batch = [&](const std::vector<CalibrationParams>& batch, bool refinement) {
        std::vector<CandidateResult> out(batch.size());
        parallel_for(static_cast<int>(batch.size()), workers, [&](int i) {
            out[static_cast<std::size_t>(i)] =
                evaluate(base, batch[static_cast<std::size_t>(i)], space, tv);
            out[static_cast<std::size_t>(i)].refinement = refinement;
        });
        return out;
    };

    CalibrationResult result;
    result.target = tv;
    result.tolerance = tolerance;
    result.candidates = run_batch(space.grid(), false);
    if (result.candidates.empty()) {
        throw ConfigError("calibration search space is empty");
    }
    if (space.refine_samples > 0) {
        const auto best = *std::min_element(result.candidates.begin(), result.candidates.end(),
                                            candidate_before);
        auto extra = run_batch(refinement_candidates(space, best.params, cfg.master_seed), true);
        result.candidates.insert(result.candidates.end(), extra.begin(), extra.end());
    }

    const auto& best = *std::min_element(result.candidates.begin(), result.candidates.end(),
                                         candidate_before);
    result.best = best.params;
    result.achieved_rmse = best.rmse;
    result.curve = best.curve;
    result.accepted = !best.pruned && best.rmse <= tolerance;
    result.pruned = static_cast<int>(std::count_if(
        result.candidates.begin(), result.candidates.end(),
        [](const CandidateResult& c) { return c.pruned; }));
    return result;
}

json calibration_report(const CalibrationResult& result, const SearchSpace& space)
{
    json candidates = json::array();
    for (const auto& c : result.candidates) {
        candidates.push_back({{"params", c.params.to_json()},
                              {"rmse", c.rmse},
                              {"pruned", c.pruned},
                              {"replications", c.replications},
                              {"refinement", c.refinement}});
    }
    return {{"search_space", space.to_json()},
            {"tolerance", result.tolerance},
            {"accepted", result.accepted},
            {"achieved_rmse", result.achieved_rmse},
            {"winner", result.best.to_json()},
            {"achieved_curve", result.curve},
            {"target_curve", result.target},
            {"candidates_evaluated", result.candidates.size()},
            {"candidates_pruned", result.pruned},
            {"candidates", std::move(candidates)}};
}

} // namespace cohortsim
