#include "ghostflow/scenario.hpp"

#include "ghostflow/errors.hpp"
#include "ghostflow/export.hpp"
#include "ghostflow/parallel.hpp"
#include "ghostflow/plot.hpp"
#include "ghostflow/rng.hpp"
#include "ghostflow/version.hpp"

#include <nlohmann/json.hpp>

#include <Eigen/Cholesky>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ghostflow {

namespace {

// Figure-caption parameters shared by the presets.
constexpr double kNu = 0.200703;
constexpr double kOmega = -0.105;
constexpr double kG = -0.0305556;
constexpr double kSigmaX = 1.2;
constexpr double kSigmaY = 1.0;

PacketConfig base_packet() {
    PacketConfig p;
    p.q_c = Vec2(-3.0, 2.0);
    p.p_c = Vec2(1.0, -0.75);
    p.A << 1.0 / (2.0 * kSigmaX * kSigmaX), 0.2, 0.2, 1.0 / (2.0 * kSigmaY * kSigmaY);
    p.B = Mat2::Zero();
    return p;
}

Scenario base_scenario(const std::string& name, const std::string& description) {
    Scenario s;
    s.name = name;
    s.description = description;
    s.packet = base_packet();
    s.grid = TimeGrid{0.0, 115.0, 1e-2};
    s.ensemble.size = 20;
    s.ensemble.seed = 1;
    s.ensemble.sampling = SamplingMode::Density;
    return s;
}

// Offsets for presets whose density is not a probability distribution: drawn
// once from the reference Gaussian with covariance (hbar/2)|A(0)|^{-1} and
// materialised into the scenario.
std::vector<Vec2> reference_offsets(const PacketConfig& packet, std::size_t size,
                                    std::uint64_t seed, double hbar) {
    const Mat2 abs_a = abs_sym(packet.A);
    const Mat2 cov = 0.5 * hbar * inverse_2x2(abs_a);
    Eigen::LLT<Mat2> llt(cov);
    const Mat2 L = llt.matrixL();
    std::vector<Vec2> out(size);
    for (std::size_t k = 0; k < size; ++k) {
        RngStream rng(seed, k);
        out[k] = L * rng.normal2();
    }
    return out;
}

}  // namespace

void regenerate_reference_offsets(Scenario& s) {
    double hbar = 1.0;
    if (s.is_biham()) {
        hbar = std::get<BihamConfig>(s.system).hbar;
    } else {
        hbar = std::get<ModelConfig>(s.system).hbar;
    }
    s.ensemble.offsets = reference_offsets(s.packet, s.ensemble.size, s.ensemble.seed, hbar);
}

PacketState Scenario::initial_packet() const {
    PacketState s;
    s.t = grid.t_start;
    s.q_c = packet.q_c;
    s.p_c = packet.p_c;
    s.A = symmetrized(packet.A);
    s.B = symmetrized(packet.B);
    return s;
}

std::vector<std::string> preset_names() {
    return {"fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7"};
}

bool is_preset(const std::string& name) {
    for (const auto& n : preset_names()) {
        if (n == name) return true;
    }
    return false;
}

Scenario preset(const std::string& name) {
    if (name == "fig1") {
        Scenario s = base_scenario("fig1", "rigid transport (Lambda ~ 0, B = 0)");
        s.system = ModelConfig{kNu, kOmega, kG, 1.0};
        return s;
    }
    if (name == "fig2") {
        Scenario s = base_scenario("fig2", "rigid transport, diagnostics view");
        s.system = ModelConfig{kNu, kOmega, kG, 1.0};
        return s;
    }
    if (name == "fig3") {
        Scenario s = base_scenario("fig3", "quasi-semiclassical (Omega lowered by 0.4)");
        s.system = ModelConfig{kNu, kOmega - 0.4, kG, 1.0};
        s.notes = {"Omega is fig1's value minus 0.4 (read as subtraction)."};
        return s;
    }
    if (name == "fig4") {
        Scenario s = base_scenario("fig4", "unstable spiral (nu shifted by 0.1)");
        s.system = ModelConfig{kNu + 0.1, kOmega, kG, 1.0};
        s.notes = {"nu is fig1's value shifted by +0.1: the spiral spectrum requires "
                   "|nu^2 + Omega| < |g|, i.e. nu in (0.27285, 0.36818); subtracting 0.1 "
                   "would leave a bounded-oscillatory flow."};
        return s;
    }
    if (name == "fig5") {
        Scenario s = base_scenario("fig5", "critical runaway (det C = 0)");
        s.system = ModelConfig{kNu, kG * kG / (4.0 * kNu * kNu), kG, 1.0};
        s.notes = {"Omega is the computed root of det C = 4 nu^2 Omega - g^2 (0.00579446 at "
                   "6-digit precision); the rounded value misses det C = 0 by ~2e-9."};
        return s;
    }
    if (name == "fig6") {
        Scenario s = base_scenario("fig6", "non-normalisable rigid sector (A < 0, g sign flipped)");
        s.system = ModelConfig{kNu, kOmega, -kG, 1.0};
        // A11 = -1/2 sigma_x^2, A22 = -1/2 sigma_y^2, off-diagonal +0.2
        s.packet.A = -base_packet().A;
        s.packet.A(0, 1) = 0.2;
        s.packet.A(1, 0) = 0.2;
        s.ensemble.sampling = SamplingMode::FixedOffsets;
        s.ensemble.offsets =
            reference_offsets(s.packet, s.ensemble.size, s.ensemble.seed, 1.0);
        s.notes = {"A12 = A21 = 0.2, the value that makes Lambda(0) vanish for the "
                   "sign-flipped coupling.",
                   "|psi|^2 is not a probability density here; offsets are drawn once from "
                   "the reference Gaussian with covariance (hbar/2)|A(0)|^-1."};
        return s;
    }
    if (name == "fig7") {
        Scenario s = base_scenario("fig7", "bi-Hamiltonian pair at the degenerate point");
        s.system = BihamConfig{kNu, kOmega, 1.0, GuidanceConvention::Canonical};
        s.packet.B << 0.0, 0.01, 0.01, 0.0;
        s.ensemble.sampling = SamplingMode::FixedOffsets;
        s.ensemble.offsets =
            reference_offsets(s.packet, s.ensemble.size, s.ensemble.seed, 1.0);
        s.notes = {"A(0) as listed is positive definite, so the packet is normalisable even "
                   "though this scenario is grouped with the fixed-offsets family.",
                   "canonical convention: the guidance tensor equals the kinetic tensor of "
                   "H = 1/2 p^T G p + 1/2 q^T C q, so the guidance law matches the classical "
                   "flow; paper-literal halves it."};
        return s;
    }
    throw ScenarioError(name, {"unknown preset '" + name + "' (known: fig1..fig7)"});
}

namespace {

nlohmann::json mat_to_json(const Mat2& m) {
    return nlohmann::json::array(
        {nlohmann::json::array({m(0, 0), m(0, 1)}), nlohmann::json::array({m(1, 0), m(1, 1)})});
}

nlohmann::json vec_to_json(const Vec2& v) { return nlohmann::json::array({v.x(), v.y()}); }

Mat2 mat_from_json(const nlohmann::json& j, const std::string& field,
                   std::vector<std::string>& issues) {
    Mat2 m = Mat2::Zero();
    if (!j.is_array() || j.size() != 2 || !j[0].is_array() || j[0].size() != 2 ||
        !j[1].is_array() || j[1].size() != 2) {
        issues.push_back(field + ": expected a 2x2 row-major nested array");
        return m;
    }
    m << j[0][0].get<double>(), j[0][1].get<double>(), j[1][0].get<double>(),
        j[1][1].get<double>();
    if (std::abs(m(0, 1) - m(1, 0)) > 0.0) {
        issues.push_back(field + ": matrix must be symmetric as parsed");
    }
    return m;
}

Vec2 vec_from_json(const nlohmann::json& j, const std::string& field,
                   std::vector<std::string>& issues) {
    if (!j.is_array() || j.size() != 2) {
        issues.push_back(field + ": expected a 2-vector");
        return Vec2::Zero();
    }
    return Vec2(j[0].get<double>(), j[1].get<double>());
}

}  // namespace

nlohmann::json scenario_to_json(const Scenario& s) {
    nlohmann::json j;
    j["name"] = s.name;
    j["description"] = s.description;
    if (!s.notes.empty()) j["notes"] = s.notes;
    if (s.is_biham()) {
        const auto& b = std::get<BihamConfig>(s.system);
        j["bihamiltonian"] = {{"nu", b.nu},
                              {"omega", b.omega},
                              {"hbar", b.hbar},
                              {"convention", to_string(b.convention)}};
    } else {
        const auto& m = std::get<ModelConfig>(s.system);
        j["model"] = {{"nu", m.nu}, {"omega", m.omega}, {"g", m.g}, {"hbar", m.hbar}};
    }
    j["packet"] = {{"q_c", vec_to_json(s.packet.q_c)},
                   {"p_c", vec_to_json(s.packet.p_c)},
                   {"A", mat_to_json(s.packet.A)},
                   {"B", mat_to_json(s.packet.B)}};
    j["grid"] = {{"t_start", s.grid.t_start}, {"t_end", s.grid.t_end}, {"step", s.grid.step}};
    nlohmann::json ens = {{"size", s.ensemble.size},
                          {"seed", s.ensemble.seed},
                          {"sampling", s.ensemble.sampling == SamplingMode::Density
                                           ? "density"
                                           : "fixed-offsets"}};
    if (s.ensemble.sampling == SamplingMode::FixedOffsets) {
        nlohmann::json offs = nlohmann::json::array();
        for (const auto& o : s.ensemble.offsets) offs.push_back(vec_to_json(o));
        ens["offsets"] = offs;
    }
    j["ensemble"] = ens;
    j["thresholds"] = {{"lambda_rigid_rel", s.thresholds.lambda_rigid_rel},
                       {"spiral_growth_min", s.thresholds.spiral_growth_min},
                       {"det_c_tol", s.thresholds.det_c_tol},
                       {"bounded_ratio", s.thresholds.bounded_ratio},
                       {"spectral_rel", s.thresholds.spectral.spectral_rel}};
    j["integrator"] = {{"blowup_guard", s.integrator.blowup_guard}};
    j["output"] = {{"dir", s.output.dir},
                   {"format", s.output.format == SeriesFormat::Csv ? "csv" : "json"},
                   {"plot", s.output.plot}};
    return j;
}

Scenario scenario_from_json(const nlohmann::json& j, const std::string& context) {
    std::vector<std::string> issues;
    Scenario s;
    if (j.contains("preset")) {
        const std::string p = j.at("preset").get<std::string>();
        if (!is_preset(p)) {
            throw ScenarioError(context, {"preset: unknown preset name '" + p + "'"});
        }
        s = preset(p);
    }
    try {
        if (j.contains("name")) s.name = j.at("name").get<std::string>();
        if (j.contains("description")) s.description = j.at("description").get<std::string>();
        if (j.contains("notes")) s.notes = j.at("notes").get<std::vector<std::string>>();

        if (j.contains("model") && j.contains("bihamiltonian")) {
            issues.push_back("system: give either 'model' or 'bihamiltonian', not both");
        }
        if (j.contains("model")) {
            const auto& m = j.at("model");
            ModelConfig mc;
            mc.nu = m.value("nu", 0.0);
            mc.omega = m.value("omega", 0.0);
            mc.g = m.value("g", 0.0);
            mc.hbar = m.value("hbar", 1.0);
            s.system = mc;
        } else if (j.contains("bihamiltonian")) {
            const auto& b = j.at("bihamiltonian");
            BihamConfig bc;
            bc.nu = b.value("nu", 0.0);
            bc.omega = b.value("omega", 0.0);
            bc.hbar = b.value("hbar", 1.0);
            const std::string conv = b.value("convention", "canonical");
            if (conv == "canonical") {
                bc.convention = GuidanceConvention::Canonical;
            } else if (conv == "paper-literal") {
                bc.convention = GuidanceConvention::PaperLiteral;
            } else {
                issues.push_back("bihamiltonian.convention: expected canonical|paper-literal");
            }
            s.system = bc;
        } else if (!j.contains("preset")) {
            issues.push_back("system: missing 'model' or 'bihamiltonian' section");
        }

        if (j.contains("packet")) {
            const auto& p = j.at("packet");
            if (p.contains("q_c")) s.packet.q_c = vec_from_json(p.at("q_c"), "packet.q_c", issues);
            if (p.contains("p_c")) s.packet.p_c = vec_from_json(p.at("p_c"), "packet.p_c", issues);
            if (p.contains("A")) s.packet.A = mat_from_json(p.at("A"), "packet.A", issues);
            if (p.contains("B")) s.packet.B = mat_from_json(p.at("B"), "packet.B", issues);
        }
        if (j.contains("grid")) {
            const auto& g = j.at("grid");
            s.grid.t_start = g.value("t_start", s.grid.t_start);
            s.grid.t_end = g.value("t_end", s.grid.t_end);
            s.grid.step = g.value("step", s.grid.step);
        }
        if (j.contains("ensemble")) {
            const auto& e = j.at("ensemble");
            s.ensemble.size = e.value("size", s.ensemble.size);
            s.ensemble.seed = e.value("seed", s.ensemble.seed);
            if (e.contains("sampling")) {
                const std::string mode = e.at("sampling").get<std::string>();
                if (mode == "density") {
                    s.ensemble.sampling = SamplingMode::Density;
                } else if (mode == "fixed-offsets") {
                    s.ensemble.sampling = SamplingMode::FixedOffsets;
                } else {
                    issues.push_back("ensemble.sampling: expected density|fixed-offsets");
                }
            }
            if (e.contains("offsets")) {
                s.ensemble.offsets.clear();
                for (const auto& o : e.at("offsets")) {
                    s.ensemble.offsets.push_back(vec_from_json(o, "ensemble.offsets[]", issues));
                }
            }
        }
        if (j.contains("thresholds")) {
            const auto& t = j.at("thresholds");
            s.thresholds.lambda_rigid_rel =
                t.value("lambda_rigid_rel", s.thresholds.lambda_rigid_rel);
            s.thresholds.spiral_growth_min =
                t.value("spiral_growth_min", s.thresholds.spiral_growth_min);
            s.thresholds.det_c_tol = t.value("det_c_tol", s.thresholds.det_c_tol);
            s.thresholds.bounded_ratio = t.value("bounded_ratio", s.thresholds.bounded_ratio);
            s.thresholds.spectral.spectral_rel =
                t.value("spectral_rel", s.thresholds.spectral.spectral_rel);
        }
        if (j.contains("integrator")) {
            s.integrator.blowup_guard =
                j.at("integrator").value("blowup_guard", s.integrator.blowup_guard);
        }
        if (j.contains("output")) {
            const auto& o = j.at("output");
            s.output.dir = o.value("dir", s.output.dir);
            if (o.contains("format")) {
                const std::string f = o.at("format").get<std::string>();
                if (f == "csv") {
                    s.output.format = SeriesFormat::Csv;
                } else if (f == "json") {
                    s.output.format = SeriesFormat::Json;
                } else {
                    issues.push_back("output.format: expected csv|json");
                }
            }
            s.output.plot = o.value("plot", s.output.plot);
        }
    } catch (const nlohmann::json::exception& e) {
        issues.push_back(std::string("parse: ") + e.what());
    }

    // Validation (every violated invariant is reported).
    if (!(s.grid.step > 0.0)) issues.push_back("grid.step: must be positive");
    if (!(s.grid.t_end > s.grid.t_start)) issues.push_back("grid.t_end: must exceed grid.t_start");
    if (s.ensemble.size < 1) issues.push_back("ensemble.size: must be >= 1");
    if (s.ensemble.sampling == SamplingMode::FixedOffsets &&
        s.ensemble.offsets.size() != s.ensemble.size) {
        issues.push_back("ensemble.offsets: fixed-offsets list length must equal ensemble.size");
    }
    if (!all_finite(s.packet.A) || !all_finite(s.packet.B) || !all_finite(s.packet.q_c) ||
        !all_finite(s.packet.p_c)) {
        issues.push_back("packet: non-finite entries");
    }
    if (s.is_biham()) {
        const auto& b = std::get<BihamConfig>(s.system);
        if (!(b.hbar > 0.0)) issues.push_back("bihamiltonian.hbar: must be positive");
        if (std::abs(b.nu * b.nu - b.omega) <= 1e-10) {
            issues.push_back("bihamiltonian: nu^2 - Omega vanishes (degenerate pair)");
        }
    } else {
        const auto& m = std::get<ModelConfig>(s.system);
        if (!(m.hbar > 0.0)) issues.push_back("model.hbar: must be positive");
        if (!std::isfinite(m.nu) || !std::isfinite(m.omega) || !std::isfinite(m.g)) {
            issues.push_back("model: non-finite parameters");
        }
    }
    if (!(s.integrator.blowup_guard > 0.0)) issues.push_back("integrator.blowup_guard: must be positive");
    if (!issues.empty()) throw ScenarioError(context, std::move(issues));
    return s;
}

Scenario load_scenario(const std::string& source) {
    if (is_preset(source)) return preset(source);
    std::ifstream f(source);
    if (!f) throw ScenarioError(source, {"cannot open scenario file"});
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw ScenarioError(source, {std::string("parse error: ") + e.what()});
    }
    return scenario_from_json(j, source);
}

SeriesBundle run_single_model(const Scenario& s, const QuadraticModel& model,
                              const RunOptions& opt) {
    const PacketState p0 = s.initial_packet();
    PacketSeries packet = evolve_packet(p0, model, s.grid, s.integrator);

    const std::vector<Vec2> positions = sample_ensemble(p0, s.ensemble, model.hbar());
    const std::size_t m = positions.size();

    std::vector<TrajectorySeries> bohm(m), cls(m);
    std::vector<std::vector<DiagnosticsSample>> diag(m);
    parallel_for(m, opt.workers, [&](std::size_t k) {
        const Vec2 q0 = positions[k];
        const Vec2 pk = p0.p_c - p0.B * (q0 - p0.q_c);  // p(0) = grad S(q(0), 0)
        TrajectorySeries c = evolve_classical(q0, pk, model, s.grid, s.integrator);
        c.member_id = static_cast<int>(k);
        BohmianTrajectory b = evolve_bohmian(q0, packet, s.integrator);
        b.series.member_id = static_cast<int>(k);
        diag[k] = diagnostics_series(b.series, c, packet);
        bohm[k] = std::move(b.series);
        cls[k] = std::move(c);
    });

    SeriesBundle bundle{std::move(packet), std::move(bohm), std::move(cls),
                        TrajectorySeries{}, TrajectorySeries{}, EnsembleDiagnostics{}};
    bundle.centre = centre_series(bundle.packet);
    bundle.classical_ref = evolve_classical(p0.q_c, p0.p_c, model, s.grid, s.integrator);
    bundle.classical_ref.member_id = -2;
    bundle.diag = aggregate_diagnostics(std::move(diag));
    for (const auto& t : bundle.bohmian) bundle.diag.any_truncated |= t.truncated;
    for (const auto& t : bundle.classical) bundle.diag.any_truncated |= t.truncated;
    return bundle;
}

namespace {

nlohmann::json run_metadata(const Scenario& s) {
    return nlohmann::json{{"scenario_name", s.name},
                          {"tool_version", kVersion},
                          {"seed", s.ensemble.seed},
                          {"scenario", scenario_to_json(s)}};
}

void note_truncation(RunReport& report, const std::string& what, bool truncated) {
    if (truncated) {
        report.truncated = true;
        report.truncations.push_back(what);
    }
}

}  // namespace

RunReport run_scenario(const Scenario& s, const RunOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    RunReport report;
    report.scenario_name = s.name;
    report.config_echo = scenario_to_json(s).dump(1);

    namespace fs = std::filesystem;
    if (opt.write_files) fs::create_directories(s.output.dir);
    auto out_path = [&](const std::string& suffix) {
        return (fs::path(s.output.dir) / (s.name + suffix)).string();
    };
    const char* series_ext = s.output.format == SeriesFormat::Csv ? "_series.csv" : "_series.json";

    if (!s.is_biham()) {
        const auto& mc = std::get<ModelConfig>(s.system);
        const QuadraticModel model = build_ghost_model(mc.nu, mc.omega, mc.g, mc.hbar);
        SeriesBundle bundle = run_single_model(s, model, opt);

        note_truncation(report, "packet series truncated at t=" +
                                    std::to_string(bundle.packet.truncation_time()),
                        bundle.packet.truncated());
        for (const auto& t : bundle.bohmian) {
            note_truncation(report,
                            "bohmian member " + std::to_string(t.member_id) + " truncated",
                            t.truncated);
        }
        for (const auto& t : bundle.classical) {
            note_truncation(report,
                            "classical member " + std::to_string(t.member_id) + " truncated",
                            t.truncated);
        }

        try {
            report.regime = classify_regime(model, bundle.packet, bundle.diag, s.thresholds);
            for (const auto& [k, v] : report.regime->evidence) report.metrics[k] = v;
        } catch (const InconclusiveRegimeError& e) {
            report.truncations.push_back(std::string("regime inconclusive: ") + e.what());
            for (const auto& [k, v] : e.evidence) report.metrics[k] = v;
        }

        if (opt.write_files) {
            if (s.output.format == SeriesFormat::Csv) {
                const std::string p = out_path(series_ext);
                export_series_csv(bundle, p);
                report.files.push_back(p);
            } else {
                const std::string p = out_path(series_ext);
                export_series_json(bundle, run_metadata(s), p);
                report.files.push_back(p);
            }
            if (s.output.plot) {
                const std::string p = out_path("_plot.svg");
                emit_plot(make_plot_bundle(bundle, s.name), p);
                report.files.push_back(p);
            }
        }
    } else {
        const auto& bc = std::get<BihamConfig>(s.system);
        const BiHamiltonianPair pair = build_biham_pair(bc.nu, bc.omega, bc.hbar);
        const PacketState p0 = s.initial_packet();
        std::vector<Vec2> offsets;
        if (s.ensemble.sampling == SamplingMode::FixedOffsets) {
            offsets = s.ensemble.offsets;
        } else {
            for (const Vec2& q : sample_ensemble(p0, s.ensemble, bc.hbar)) {
                offsets.push_back(q - p0.q_c);
            }
        }
        const BihamComparison cmp = biham_compare(pair, p0, offsets, s.grid, bc.convention,
                                                  s.integrator, opt.workers);

        note_truncation(report, "packet (H_g) truncated", cmp.packet_g.truncated());
        note_truncation(report, "packet (H_2) truncated", cmp.packet_2.truncated());
        for (const auto& r : cmp.rep_g) {
            note_truncation(report, "bohmian (H_g) member truncated", r.bohmian.truncated);
        }
        for (const auto& r : cmp.rep_2) {
            note_truncation(report, "bohmian (H_2) member truncated", r.bohmian.truncated);
        }

        report.metrics["max_gap"] = cmp.max_gap;
        report.metrics["mean_final_delta_g"] = cmp.mean_final_delta_g;
        report.metrics["mean_final_delta_2"] = cmp.mean_final_delta_2;
        report.metrics["var_qb_g"] = cmp.var_qb_g;
        report.metrics["var_qb_2"] = cmp.var_qb_2;

        if (opt.write_files) {
            if (s.output.format == SeriesFormat::Csv) {
                const std::string pg = out_path("_g" + std::string(series_ext));
                const std::string p2 = out_path("_2" + std::string(series_ext));
                write_text_file(pg, biham_rep_to_csv(cmp, false));
                write_text_file(p2, biham_rep_to_csv(cmp, true));
                report.files.push_back(pg);
                report.files.push_back(p2);
            } else {
                const std::string pg = out_path("_g" + std::string(series_ext));
                const std::string p2 = out_path("_2" + std::string(series_ext));
                write_text_file(pg, biham_rep_to_json(cmp, false, run_metadata(s)).dump(1) + "\n");
                write_text_file(p2, biham_rep_to_json(cmp, true, run_metadata(s)).dump(1) + "\n");
                report.files.push_back(pg);
                report.files.push_back(p2);
            }
            const std::string pgap = out_path("_gap.csv");
            write_text_file(pgap, gap_to_csv(cmp));
            report.files.push_back(pgap);
            if (s.output.plot) {
                const std::string p = out_path("_plot.svg");
                emit_plot(make_plot_bundle(cmp, s.name), p);
                report.files.push_back(p);
            }
        }
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (opt.write_files) {
        const std::string p = out_path("_report.json");
        report.files.push_back(p);
        write_text_file(p, report_to_json(report).dump(1) + "\n");
    }
    return report;
}

nlohmann::json report_to_json(const RunReport& r) {
    nlohmann::json j;
    j["scenario"] = r.scenario_name;
    if (r.regime) {
        j["regime"] = to_string(r.regime->kind);
        nlohmann::json ev;
        for (const auto& [k, v] : r.regime->evidence) ev[k] = v;
        j["evidence"] = ev;
    }
    nlohmann::json metrics;
    for (const auto& [k, v] : r.metrics) metrics[k] = v;
    j["metrics"] = metrics;
    j["files"] = r.files;
    j["truncated"] = r.truncated;
    j["truncations"] = r.truncations;
    j["wall_seconds"] = r.wall_seconds;
    j["config_echo"] = nlohmann::json::parse(r.config_echo);
    return j;
}

}  // namespace ghostflow
