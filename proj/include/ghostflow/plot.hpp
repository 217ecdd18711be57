#pragma once

#include "ghostflow/bundle.hpp"
#include "ghostflow/diagnostics.hpp"

#include <nlohmann/json_fwd.hpp>

#include <string>
#include <vector>

namespace ghostflow {

// Data behind the four figure panels: the position-plane trajectory families
// and three diagnostic time series. Trajectory families render as <polyline>,
// time-series curves as <path>, so the polyline count equals the number of
// plotted trajectories.
struct PlotFamily {
    std::string label;
    std::string css_class;  // classical | bohmian | bohmian-alt | centre
    std::vector<std::vector<Vec2>> members;
};

struct PlotCurve {
    std::string label;
    std::string css_class;
    std::vector<double> values;
};

struct PlotPanel {
    std::string title;
    std::vector<PlotCurve> curves;
};

struct PlotBundle {
    std::string title;
    std::vector<double> times;
    std::vector<PlotFamily> families;
    std::vector<PlotPanel> panels;  // up to three time-series panels
};

PlotBundle make_plot_bundle(const SeriesBundle& bundle, const std::string& title);
PlotBundle make_plot_bundle(const BihamComparison& cmp, const std::string& title);

// Rebuilds plot data from an exported JSON series file (classical member
// positions are recovered as q_B - delta).
PlotBundle plot_bundle_from_json(const nlohmann::json& doc);

std::string render_svg(const PlotBundle& bundle);
void emit_plot(const PlotBundle& bundle, const std::string& path);

}  // namespace ghostflow
