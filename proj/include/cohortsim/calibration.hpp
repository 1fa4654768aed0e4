#pragma once

#include "cohortsim/analysis.hpp"
#include "cohortsim/config.hpp"
#include "cohortsim/engine.hpp"

#include <json.hpp>

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace cohortsim {

struct EmpiricalCurve {
    std::vector<double> yearly_cumulative_dropout;

    /// Length 6, values in [0,1], non-decreasing. Throws ConfigError.
    void validate() const;
};

/// [0.234, 0.328, 0.39, 0.42, 0.45, 0.48]
EmpiricalCurve default_empirical_target();

/// Fraction of each cohort dropped by the end of semester 2k, k = 1..6, averaged
/// over replications. Throws ConfigError when horizon < 12.
std::vector<double> cumulative_dropout_by_year(const DropoutHistories& histories, int horizon);
std::vector<double> cumulative_dropout_by_year(std::span<const ReplicationResult> reps);

/// Throws ContractError on a length mismatch or empty input.
double rmse(std::span<const double> sim, std::span<const double> target);

/// Parameters fitted on the historical regime. Field order is the tie-break order.
struct CalibrationParams {
    double alpha0 = -4.0;
    double alpha1 = 3.0;
    double alpha2 = -3.0;
    double reg_success_scale = 1.2;
    double stress_fail_gain = 0.15;
    double debt_stress_per_item = 0.02;

    static constexpr std::size_t kCount = 6;
    static constexpr std::array<const char*, kCount> kNames{
        "alpha0", "alpha1", "alpha2", "reg_success_scale", "stress_fail_gain",
        "debt_stress_per_item"};

    std::array<double, kCount> values() const;
    static CalibrationParams from_values(const std::array<double, kCount>& v);
    static CalibrationParams from_config(const ExperimentConfig& cfg);
    nlohmann::json to_json() const;

    bool operator==(const CalibrationParams&) const = default;
};

/// Writes the parameters into a copy of `cfg`. Hazard and psych constants are
/// shared by all scenarios; the regularisation scale only affects the historical one.
ExperimentConfig apply_calibration(const ExperimentConfig& cfg, const CalibrationParams& p);

struct Axis {
    double lo = 0.0;
    double hi = 0.0;
    int points = 1;

    std::vector<double> grid() const;
};

struct SearchSpace {
    std::array<Axis, CalibrationParams::kCount> axes{{
        {-6.0, -2.0, 4},
        {1.0, 6.0, 4},
        {-6.0, -1.0, 4},
        {0.8, 1.6, 4},
        {0.05, 0.3, 4},
        {0.005, 0.05, 3},
    }};
    int calibration_replications = 5;
    /// A candidate whose first replication misses the target by more than this is not
    /// evaluated further.
    double prune_rmse = 0.15;
    /// Seeded random candidates drawn around the best grid point.
    int refine_samples = 0;
    std::vector<double> target; ///< empty means the default target

    /// Throws ConfigError on empty axes, inverted bounds or sign violations.
    void validate() const;
    std::vector<CalibrationParams> grid() const;
    std::size_t grid_size() const;

    /// Reads a `calibration` config section. Unknown keys are rejected.
    static SearchSpace from_json(const nlohmann::json& section);
    nlohmann::json to_json() const;
};

struct CandidateResult {
    CalibrationParams params;
    double rmse = 0.0;
    bool pruned = false;
    int replications = 0;
    std::vector<double> curve;
    bool refinement = false;
};

struct CalibrationResult {
    CalibrationParams best;
    double achieved_rmse = 0.0;
    std::vector<double> curve;
    std::vector<double> target;
    double tolerance = 0.05;
    bool accepted = false;
    std::vector<CandidateResult> candidates;
    int pruned = 0;
};

/// True when `a` ranks before `b`: full evaluations first, then RMSE, then parameters.
bool candidate_before(const CandidateResult& a, const CandidateResult& b);

/// Simulated yearly curve of the historical regime under `p`, over `replications`
/// replications of `cfg` (which must contain the historical scenario).
std::vector<double> simulate_target_curve(const ExperimentConfig& cfg, const CalibrationParams& p,
                                          int replications);

/**
 * Grid search (plus optional seeded refinement) on the historical regime.
 * Deterministic for a given config regardless of `threads`. Throws ConfigError
 * when the space is invalid or the config lacks the historical scenario.
 */
CalibrationResult calibrate(const SearchSpace& space, const ExperimentConfig& cfg,
                            const EmpiricalCurve& target, double tolerance = 0.05,
                            std::optional<int> threads = std::nullopt);

nlohmann::json calibration_report(const CalibrationResult& result, const SearchSpace& space);

} // namespace cohortsim
