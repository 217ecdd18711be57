#pragma once

#include "ghostflow/bundle.hpp"
#include "ghostflow/diagnostics.hpp"
#include "ghostflow/evolve.hpp"
#include "ghostflow/model.hpp"
#include "ghostflow/trajectories.hpp"

#include <nlohmann/json_fwd.hpp>

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ghostflow {

struct ModelConfig {
    double nu = 0.0;
    double omega = 0.0;
    double g = 0.0;
    double hbar = 1.0;
};

struct BihamConfig {
    double nu = 0.0;
    double omega = 0.0;
    double hbar = 1.0;
    GuidanceConvention convention = GuidanceConvention::Canonical;
};

struct PacketConfig {
    Vec2 q_c = Vec2::Zero();
    Vec2 p_c = Vec2::Zero();
    Mat2 A = Mat2::Zero();
    Mat2 B = Mat2::Zero();
};

enum class SeriesFormat { Csv, Json };

struct OutputConfig {
    std::string dir = "out";
    SeriesFormat format = SeriesFormat::Csv;
    bool plot = true;
};

struct Scenario {
    std::string name = "scenario";
    std::string description;
    std::vector<std::string> notes;  // parameter-interpretation remarks, echoed in outputs
    std::variant<ModelConfig, BihamConfig> system = ModelConfig{};
    PacketConfig packet;
    TimeGrid grid;
    EnsembleSpec ensemble;
    RegimeThresholds thresholds;
    IntegratorConfig integrator;
    OutputConfig output;

    bool is_biham() const { return std::holds_alternative<BihamConfig>(system); }
    PacketState initial_packet() const;
};

// Built-in presets fig1..fig7 (figure-caption parameters; fig6/fig7 carry
// materialised fixed offsets drawn from the reference Gaussian).
std::vector<std::string> preset_names();
bool is_preset(const std::string& name);
Scenario preset(const std::string& name);

// Redraws the fixed offsets from the reference Gaussian with covariance
// (hbar/2)|A(0)|^-1 using the scenario's current seed and size. Used when a
// seed or size override invalidates the materialised list.
void regenerate_reference_offsets(Scenario& s);

// Preset name or path of a JSON scenario file. A file may reference a preset
// ({"preset": "fig3", ...overrides}). Throws ScenarioError listing every
// violated invariant.
Scenario load_scenario(const std::string& source);

nlohmann::json scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j, const std::string& context);

struct RunReport {
    std::string scenario_name;
    std::optional<RegimeLabel> regime;
    std::map<std::string, double> metrics;
    std::vector<std::string> files;         // only files actually written
    std::vector<std::string> truncations;   // human-readable flags
    bool truncated = false;
    double wall_seconds = 0.0;
    std::string config_echo;  // scenario serialised back, for reproducibility
};

struct RunOptions {
    int workers = 0;       // 0 = hardware concurrency
    bool write_files = true;
};

// Single-model pipeline pieces, exposed for tests and the validation suite.
SeriesBundle run_single_model(const Scenario& s, const QuadraticModel& model,
                              const RunOptions& opt = {});

// Full pipeline: evolve, diagnose, classify, export, plot, report.
RunReport run_scenario(const Scenario& s, const RunOptions& opt = {});

nlohmann::json report_to_json(const RunReport& r);

}  // namespace ghostflow
