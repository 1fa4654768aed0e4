#pragma once

#include "cohortsim/analysis.hpp"
#include "cohortsim/output.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace cohortsim {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct BarGroup {
    std::string label;
    std::vector<std::pair<std::string, double>> bars;
};

std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label, std::span<const Series> series);
std::string scatter_svg(const std::string& title, const std::string& x_label,
                        const std::string& y_label, std::span<const Series> series);
std::string bar_chart_svg(const std::string& title, const std::string& y_label,
                          std::span<const BarGroup> groups);

/// Writes fig1..fig4 into `dir` and returns their file names.
std::vector<std::string> write_report_figures(const std::filesystem::path& dir,
                                              std::span<const CurvePoint> curves,
                                              std::span<const AgentOutcomeRow> rows,
                                              std::span<const ScenarioSummary> summaries);

} // namespace cohortsim
