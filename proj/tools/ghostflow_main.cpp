#include "ghostflow/errors.hpp"
#include "ghostflow/export.hpp"
#include "ghostflow/plot.hpp"
#include "ghostflow/scenario.hpp"
#include "ghostflow/validate.hpp"
#include "ghostflow/version.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

// Exit codes: 0 success, 1 validation failure, 2 configuration error,
// 3 runtime blow-up truncation.
constexpr int kExitOk = 0;
constexpr int kExitValidationFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitTruncated = 3;

struct Overrides {
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> step;
    std::optional<double> t_end;
    std::optional<std::size_t> ensemble_size;
    std::optional<std::string> format;
    std::optional<std::string> biham_convention;
};

void apply(const Overrides& ov, ghostflow::Scenario& s) {
    if (ov.out_dir) s.output.dir = *ov.out_dir;
    if (ov.seed) s.ensemble.seed = *ov.seed;
    if (ov.step) s.grid.step = *ov.step;
    if (ov.t_end) s.grid.t_end = *ov.t_end;
    if (ov.ensemble_size) s.ensemble.size = *ov.ensemble_size;
    if ((ov.seed || ov.ensemble_size) &&
        s.ensemble.sampling == ghostflow::SamplingMode::FixedOffsets) {
        ghostflow::regenerate_reference_offsets(s);
    }
    if (ov.format) {
        if (*ov.format == "csv") {
            s.output.format = ghostflow::SeriesFormat::Csv;
        } else if (*ov.format == "json") {
            s.output.format = ghostflow::SeriesFormat::Json;
        } else {
            throw ghostflow::ScenarioError(s.name, {"--format expects csv|json"});
        }
    }
    if (ov.biham_convention && s.is_biham()) {
        auto bc = std::get<ghostflow::BihamConfig>(s.system);
        if (*ov.biham_convention == "canonical") {
            bc.convention = ghostflow::GuidanceConvention::Canonical;
        } else if (*ov.biham_convention == "paper-literal") {
            bc.convention = ghostflow::GuidanceConvention::PaperLiteral;
        } else {
            throw ghostflow::ScenarioError(s.name,
                                           {"--biham-convention expects canonical|paper-literal"});
        }
        s.system = bc;
    }
}

std::string default_out_dir() {
    if (const char* env = std::getenv("GHOSTFLOW_OUT_DIR")) return env;
    return "out";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ghostflow: Gaussian packets, Bohmian and classical ensembles, and "
                 "quantum-classical diagnostics for 2d indefinite-metric quadratic Hamiltonians"};
    app.set_version_flag("--version", std::string("ghostflow ") + ghostflow::kVersion);
    app.require_subcommand(1);
    app.fallthrough();

    Overrides ov;
    std::string out_dir_flag;
    app.add_option("--out-dir", out_dir_flag, "output directory (default: $GHOSTFLOW_OUT_DIR or ./out)");

    std::vector<std::string> run_sources;
    std::uint64_t seed_flag = 0;
    double step_flag = 0, t_end_flag = 0;
    std::size_t size_flag = 0;
    std::string format_flag, conv_flag;

    CLI::App* cmd_run = app.add_subcommand("run", "run scenarios (preset names or file paths)");
    cmd_run->add_option("scenarios", run_sources, "preset names (fig1..fig7) or JSON files")
        ->required();
    cmd_run->add_option("--seed", seed_flag, "ensemble seed override");
    cmd_run->add_option("--step", step_flag, "time step override");
    cmd_run->add_option("--t-end", t_end_flag, "horizon override");
    cmd_run->add_option("--ensemble-size", size_flag, "ensemble size override");
    cmd_run->add_option("--format", format_flag, "series format: csv|json");
    cmd_run->add_option("--biham-convention", conv_flag,
                        "guidance convention for bi-Hamiltonian scenarios: canonical|paper-literal");

    CLI::App* cmd_presets = app.add_subcommand("presets", "list built-in presets");

    CLI::App* cmd_validate =
        app.add_subcommand("validate", "run the oracle and invariant suite on the presets");

    std::string plot_in, plot_out;
    CLI::App* cmd_plot = app.add_subcommand("plot", "render an SVG from an exported JSON series");
    cmd_plot->add_option("input", plot_in, "exported _series.json file")->required();
    cmd_plot->add_option("output", plot_out, "output SVG path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfigError;
    }

    if (!out_dir_flag.empty()) ov.out_dir = out_dir_flag;
    if (cmd_run->count("--seed")) ov.seed = seed_flag;
    if (cmd_run->count("--step")) ov.step = step_flag;
    if (cmd_run->count("--t-end")) ov.t_end = t_end_flag;
    if (cmd_run->count("--ensemble-size")) ov.ensemble_size = size_flag;
    if (cmd_run->count("--format")) ov.format = format_flag;
    if (cmd_run->count("--biham-convention")) ov.biham_convention = conv_flag;

    try {
        if (cmd_presets->parsed()) {
            for (const auto& name : ghostflow::preset_names()) {
                const ghostflow::Scenario s = ghostflow::preset(name);
                std::cout << name << "  " << s.description << "\n";
            }
            return kExitOk;
        }

        if (cmd_validate->parsed()) {
            const std::string dir = ov.out_dir.value_or(default_out_dir());
            std::filesystem::create_directories(dir);
            const std::string summary =
                (std::filesystem::path(dir) / "validation_summary.json").string();
            const ghostflow::ValidationReport report =
                ghostflow::run_validation(std::cout, summary);
            std::cout << (report.all_pass ? "all checks passed" : "CHECKS FAILED") << "; summary: "
                      << summary << "\n";
            return report.all_pass ? kExitOk : kExitValidationFailure;
        }

        if (cmd_plot->parsed()) {
            std::ifstream f(plot_in);
            if (!f) throw ghostflow::IoError("cannot open " + plot_in);
            const nlohmann::json doc = nlohmann::json::parse(f);
            ghostflow::emit_plot(ghostflow::plot_bundle_from_json(doc), plot_out);
            std::cout << "wrote " << plot_out << "\n";
            return kExitOk;
        }

        if (cmd_run->parsed()) {
            bool any_truncated = false;
            for (const auto& source : run_sources) {
                ghostflow::Scenario s = ghostflow::load_scenario(source);
                if (!ov.out_dir) s.output.dir = default_out_dir();
                apply(ov, s);
                const ghostflow::RunReport report = ghostflow::run_scenario(s);
                std::cout << "scenario " << report.scenario_name;
                if (report.regime) {
                    std::cout << "  regime=" << ghostflow::to_string(report.regime->kind);
                }
                std::cout << "  wall=" << report.wall_seconds << "s\n";
                for (const auto& fpath : report.files) std::cout << "  wrote " << fpath << "\n";
                for (const auto& note : report.truncations) std::cout << "  note: " << note << "\n";
                any_truncated |= report.truncated;
            }
            return any_truncated ? kExitTruncated : kExitOk;
        }
    } catch (const ghostflow::ScenarioError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const ghostflow::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
    return kExitOk;
}
