#include "cohortsim/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace cohortsim {

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 420;
constexpr double kLeft = 70;
constexpr double kRight = 150;
constexpr double kTop = 40;
constexpr double kBottom = 60;

const char* const kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

struct Frame {
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;

    double px(double x) const
    {
        return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight);
    }
    double py(double y) const
    {
        return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom);
    }
};

Frame frame_for(std::span<const Series> series)
{
    double xmin = std::numeric_limits<double>::infinity();
    double xmax = -xmin;
    double ymin = 0.0;
    double ymax = -xmin;
    for (const auto& s : series) {
        for (double x : s.x) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
        }
        for (double y : s.y) {
            if (!std::isnan(y)) {
                ymin = std::min(ymin, y);
                ymax = std::max(ymax, y);
            }
        }
    }
    if (!std::isfinite(xmin)) {
        return {};
    }
    if (xmax <= xmin) {
        xmax = xmin + 1.0;
    }
    if (!std::isfinite(ymax) || ymax <= ymin) {
        ymax = ymin + 1.0;
    }
    return {xmin, xmax, ymin, ymax * 1.05};
}

std::string open_svg(const std::string& title, const std::string& x_label,
                     const std::string& y_label)
{
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
                    "\" height=\"" + num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + num(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
         escape(title) + "</text>\n";
    s += "<text x=\"" + num(kLeft + (kWidth - kLeft - kRight) / 2) + "\" y=\"" +
         num(kHeight - 15) + "\" text-anchor=\"middle\">" + escape(x_label) + "</text>\n";
    s += "<text transform=\"translate(18," + num(kHeight / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" + escape(y_label) + "</text>\n";
    return s;
}

std::string axes(const Frame& f)
{
    std::string s;
    const double xa = kLeft;
    const double xb = kWidth - kRight;
    const double ya = kHeight - kBottom;
    s += "<line x1=\"" + num(xa) + "\" y1=\"" + num(ya) + "\" x2=\"" + num(xb) + "\" y2=\"" +
         num(ya) + "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + num(xa) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(xa) + "\" y2=\"" +
         num(ya) + "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double x = f.x0 + (f.x1 - f.x0) * i / 4;
        const double y = f.y0 + (f.y1 - f.y0) * i / 4;
        s += "<text x=\"" + num(f.px(x)) + "\" y=\"" + num(ya + 16) +
             "\" text-anchor=\"middle\">" + num(x) + "</text>\n";
        s += "<text x=\"" + num(xa - 6) + "\" y=\"" + num(f.py(y) + 4) +
             "\" text-anchor=\"end\">" + num(y) + "</text>\n";
    }
    return s;
}

std::string legend(const std::vector<std::string>& labels)
{
    std::string s;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double y = kTop + 10 + 18.0 * static_cast<double>(i);
        s += "<rect x=\"" + num(kWidth - kRight + 12) + "\" y=\"" + num(y - 9) +
             "\" width=\"10\" height=\"10\" fill=\"" + kColours[i % 5] + "\"/>\n";
        s += "<text x=\"" + num(kWidth - kRight + 27) + "\" y=\"" + num(y) + "\">" +
             escape(labels[i]) + "</text>\n";
    }
    return s;
}

std::vector<std::string> labels_of(std::span<const Series> series)
{
    std::vector<std::string> out;
    for (const auto& s : series) {
        out.push_back(s.label);
    }
    return out;
}

} // namespace

std::string line_chart_svg(const std::string& title, const std::string& x_label,
                           const std::string& y_label, std::span<const Series> series)
{
    const Frame f = frame_for(series);
    std::string s = open_svg(title, x_label, y_label) + axes(f);
    for (std::size_t i = 0; i < series.size(); ++i) {
        std::string pts;
        for (std::size_t k = 0; k < series[i].x.size() && k < series[i].y.size(); ++k) {
            if (std::isnan(series[i].y[k])) {
                continue;
            }
            pts += num(f.px(series[i].x[k])) + "," + num(f.py(series[i].y[k])) + " ";
        }
        s += "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" +
             std::string(kColours[i % 5]) + "\" points=\"" + pts + "\"/>\n";
    }
    return s + legend(labels_of(series)) + "</svg>\n";
}

std::string scatter_svg(const std::string& title, const std::string& x_label,
                        const std::string& y_label, std::span<const Series> series)
{
    const Frame f = frame_for(series);
    std::string s = open_svg(title, x_label, y_label) + axes(f);
    for (std::size_t i = 0; i < series.size(); ++i) {
        for (std::size_t k = 0; k < series[i].x.size() && k < series[i].y.size(); ++k) {
            s += "<circle r=\"1.6\" fill-opacity=\"0.5\" fill=\"" + std::string(kColours[i % 5]) +
                 "\" cx=\"" + num(f.px(series[i].x[k])) + "\" cy=\"" +
                 num(f.py(series[i].y[k])) + "\"/>\n";
        }
    }
    return s + legend(labels_of(series)) + "</svg>\n";
}

std::string bar_chart_svg(const std::string& title, const std::string& y_label,
                          std::span<const BarGroup> groups)
{
    double ymax = 0.0;
    std::vector<std::string> bar_labels;
    for (const auto& g : groups) {
        for (const auto& [label, v] : g.bars) {
            if (!std::isnan(v)) {
                ymax = std::max(ymax, v);
            }
            if (std::find(bar_labels.begin(), bar_labels.end(), label) == bar_labels.end()) {
                bar_labels.push_back(label);
            }
        }
    }
    Frame f{0.0, std::max<double>(1.0, static_cast<double>(groups.size())), 0.0,
            ymax > 0 ? ymax * 1.1 : 1.0};
    std::string s = open_svg(title, "", y_label);
    const double ya = kHeight - kBottom;
    s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(ya) + "\" x2=\"" + num(kWidth - kRight) +
         "\" y2=\"" + num(ya) + "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double y = f.y1 * i / 4;
        s += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(f.py(y) + 4) +
             "\" text-anchor=\"end\">" + num(y) + "</text>\n";
    }
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const double slot = f.px(static_cast<double>(g) + 1.0) - f.px(static_cast<double>(g));
        const double width = 0.8 * slot / static_cast<double>(std::max<std::size_t>(1, groups[g].bars.size()));
        const double start = f.px(static_cast<double>(g)) + 0.1 * slot;
        for (std::size_t b = 0; b < groups[g].bars.size(); ++b) {
            const auto& [label, v] = groups[g].bars[b];
            if (std::isnan(v)) {
                continue;
            }
            const auto colour = std::find(bar_labels.begin(), bar_labels.end(), label) -
                                bar_labels.begin();
            const double top = f.py(std::max(v, 0.0));
            s += "<rect x=\"" + num(start + width * static_cast<double>(b)) + "\" y=\"" +
                 num(top) + "\" width=\"" + num(width * 0.95) + "\" height=\"" + num(ya - top) +
                 "\" fill=\"" + kColours[colour % 5] + "\"/>\n";
        }
        s += "<text x=\"" + num(start + 0.4 * slot) + "\" y=\"" + num(ya + 16) +
             "\" text-anchor=\"middle\">" + escape(groups[g].label) + "</text>\n";
    }
    return s + legend(bar_labels) + "</svg>\n";
}

std::vector<std::string> write_report_figures(const std::filesystem::path& dir,
                                              std::span<const CurvePoint> curves,
                                              std::span<const AgentOutcomeRow> rows,
                                              std::span<const ScenarioSummary> summaries)
{
    std::vector<Series> dropout;
    std::vector<Series> stress;
    for (auto kind : {ScenarioKind::historical, ScenarioKind::direct_promotion,
                      ScenarioKind::safety_net}) {
        Series d{std::string(scenario_label(kind)), {}, {}};
        Series st = d;
        for (const auto& p : curves) {
            if (p.scenario == kind && p.semester % 2 == 0) {
                d.x.push_back(p.semester / 2);
                d.y.push_back(p.cumulative_dropout);
            }
            if (p.scenario == kind) {
                st.x.push_back(p.semester);
                st.y.push_back(p.mean_stress_active);
            }
        }
        if (!d.x.empty() || !st.x.empty()) {
            dropout.push_back(std::move(d));
            stress.push_back(std::move(st));
        }
    }

    // One replication per scenario keeps the scatter readable.
    std::vector<Series> scatter;
    for (auto kind : scenarios_in(rows)) {
        Series s{std::string(scenario_label(kind)), {}, {}};
        for (const auto& r : rows) {
            if (r.scenario == kind && r.replication == 0) {
                s.x.push_back(r.final_belonging);
                s.y.push_back(r.final_stress);
            }
        }
        scatter.push_back(std::move(s));
    }

    std::vector<BarGroup> bars;
    for (const auto& s : summaries) {
        bars.push_back({std::string(scenario_label(s.scenario)),
                        {{"LOW resilience", s.dropout_rate_low_resilience},
                         {"HIGH resilience", s.dropout_rate_high_resilience},
                         {"overall", s.overall_dropout_rate}}});
    }

    const std::vector<std::pair<std::string, std::string>> files{
        {"fig1_cumulative_dropout.svg",
         line_chart_svg("Cumulative dropout by academic year", "year", "cumulative dropout",
                        dropout)},
        {"fig2_stress_trajectories.svg",
         line_chart_svg("Mean stress of active students", "semester", "stress", stress)},
        {"fig3_final_stress_belonging.svg",
         scatter_svg("Final stress against final belonging (replication 0)", "belonging",
                     "stress", scatter)},
        {"fig4_dropout_by_resilience.svg",
         bar_chart_svg("Dropout rate by resilience class", "dropout rate", bars)},
    };
    std::vector<std::string> names;
    for (const auto& [name, text] : files) {
        write_text_file(dir / name, text);
        names.push_back(name);
    }
    return names;
}

} // namespace cohortsim
