#include "ghostflow/validate.hpp"

#include "ghostflow/errors.hpp"
#include "ghostflow/export.hpp"
#include "ghostflow/plot.hpp"
#include "ghostflow/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

namespace ghostflow {

namespace {

std::string fmt(double v) {
    char b[40];
    std::snprintf(b, sizeof(b), "%.4g", v);
    return b;
}

// A model whose curvature is exactly A0 G A0 in double arithmetic, so the
// rigid fixed point holds to machine precision.
QuadraticModel exact_rigid_model(const Mat2& A0, double hbar) {
    Mat2 G;
    G << 1.0, 0.0, 0.0, -1.0;
    const Mat2 C = symmetrized(A0 * G * A0);
    return QuadraticModel(G, C, hbar, "exact-rigid");
}

Mat2 fig1_A() {
    Mat2 A;
    A << 1.0 / 2.88, 0.2, 0.2, 0.5;
    return A;
}

// Fourth-order centered first/second differences on a uniform grid.
double fd1(const std::vector<double>& f, std::size_t i, double h) {
    return (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) / (12.0 * h);
}

Vec2 fd2(const std::vector<Vec2>& f, std::size_t i, double h) {
    return (-f[i + 2] + 16.0 * f[i + 1] - 30.0 * f[i] + 16.0 * f[i - 1] - f[i - 2]) /
           (12.0 * h * h);
}

}  // namespace

const Scenario& CheckContext::scenario(const std::string& name) {
    auto it = scenarios_.find(name);
    if (it == scenarios_.end()) it = scenarios_.emplace(name, preset(name)).first;
    return it->second;
}

const CheckContext::PresetRun& CheckContext::run(const std::string& name) {
    auto it = runs_.find(name);
    if (it == runs_.end()) {
        const Scenario& s = scenario(name);
        const auto& mc = std::get<ModelConfig>(s.system);
        QuadraticModel model = build_ghost_model(mc.nu, mc.omega, mc.g, mc.hbar);
        auto run = std::make_unique<PresetRun>(
            PresetRun{s, model, run_single_model(s, model, RunOptions{})});
        it = runs_.emplace(name, std::move(run)).first;
    }
    return *it->second;
}

const CheckContext::BihamRun& CheckContext::biham() {
    if (!biham_) {
        const Scenario& s = scenario("fig7");
        const auto& bc = std::get<BihamConfig>(s.system);
        BiHamiltonianPair pair = build_biham_pair(bc.nu, bc.omega, bc.hbar);
        BihamComparison cmp = biham_compare(pair, s.initial_packet(), s.ensemble.offsets, s.grid,
                                            bc.convention, s.integrator);
        biham_ = std::make_unique<BihamRun>(BihamRun{s, std::move(pair), std::move(cmp)});
    }
    return *biham_;
}

namespace {

// ----- acceptance criteria ---------------------------------------------------

CheckResult criterion_rigid_fixed_point(CheckContext& ctx) {
    const auto& r = ctx.run("fig1");
    const PacketSeries& packet = r.bundle.packet;
    const Mat2 A0 = packet.state(0).A;
    double sup_lambda = 0.0, sup_da = 0.0, sup_b = 0.0;
    for (std::size_t i = 0; i < packet.size(); ++i) {
        const PacketState& s = packet.state(i);
        sup_lambda = std::max(sup_lambda, inf_norm(curvature_mismatch(s.A, r.model)));
        sup_da = std::max(sup_da, inf_norm(Mat2(s.A - A0)));
        sup_b = std::max(sup_b, inf_norm(s.B));
    }
    const auto& mu = r.bundle.diag.mean_u_norm;
    double lo = mu.front(), hi = mu.front();
    for (double v : mu) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double u_var_rel = (hi - lo) / mu.front();
    const bool pass = sup_lambda < 1e-4 && sup_da < 1e-6 && sup_b < 1e-6 && u_var_rel < 1e-4;
    std::ostringstream d;
    d << "sup|Lambda|=" << fmt(sup_lambda) << " (<1e-4), sup|A-A0|=" << fmt(sup_da)
      << " (<1e-6), sup|B|=" << fmt(sup_b) << " (<1e-6), mean|u| rel variation="
      << fmt(u_var_rel) << " (<1e-4)";
    return {"criterion-01-rigid-fixed-point", pass, d.str()};
}

CheckResult criterion_riccati_oracle(CheckContext& ctx) {
    double worst = 0.0;
    std::string worst_name = "-";
    for (const char* name : {"fig1", "fig2", "fig3", "fig4", "fig5"}) {
        const auto& r = ctx.run(name);
        const PacketSeries& packet = r.bundle.packet;
        const std::size_t i10 =
            static_cast<std::size_t>(std::llround((10.0 - r.scenario.grid.t_start) /
                                                  r.scenario.grid.step));
        if (i10 >= packet.size()) return {"criterion-02-riccati-oracle", false,
                                          std::string(name) + ": packet truncated before t=10"};
        const PacketState& s = packet.state(i10);
        const CMat2 K_rk4 = s.A.cast<Complex>() + Complex(0, 1) * s.B.cast<Complex>();
        const CMat2 K0 =
            packet.state(0).A.cast<Complex>() + Complex(0, 1) * packet.state(0).B.cast<Complex>();
        const CMat2 K_oracle = riccati_linear_oracle(K0, r.model, 10.0);
        const double err = inf_norm(CMat2(K_rk4 - K_oracle));
        if (err > worst) {
            worst = err;
            worst_name = name;
        }
    }
    std::ostringstream d;
    d << "max |K_RK4(10)-K_lin(10)| over fig1..fig5 = " << fmt(worst) << " at " << worst_name
      << " (<1e-6)";
    return {"criterion-02-riccati-oracle", worst < 1e-6, d.str()};
}

CheckResult criterion_centre_ehrenfest(CheckContext& ctx) {
    double worst = 0.0;
    for (const char* name : {"fig1", "fig2", "fig3", "fig4", "fig5", "fig6"}) {
        const auto& r = ctx.run(name);
        const TrajectorySeries& cl = r.bundle.classical_ref;
        const std::size_t n = std::min(cl.valid_count(), r.bundle.packet.size());
        for (std::size_t i = 0; i < n; ++i) {
            worst = std::max(worst,
                             inf_norm(Vec2(r.bundle.packet.state(i).q_c - cl.positions[i])));
        }
    }
    // Bi-Hamiltonian packets against their own canonical classical flows.
    const auto& b = ctx.biham();
    for (int rep = 0; rep < 2; ++rep) {
        const PacketSeries& packet = rep == 0 ? b.cmp.packet_g : b.cmp.packet_2;
        const QuadraticModel& model = rep == 0 ? b.pair.model_g() : b.pair.model_2();
        const TrajectorySeries cl = evolve_classical(packet.state(0).q_c, packet.state(0).p_c,
                                                     model, b.scenario.grid);
        const std::size_t n = std::min(cl.valid_count(), packet.size());
        for (std::size_t i = 0; i < n; ++i) {
            worst = std::max(worst, inf_norm(Vec2(packet.state(i).q_c - cl.positions[i])));
        }
    }
    std::ostringstream d;
    d << "max |q_c - q_cl| over presets (incl. fig7 reps) = " << fmt(worst) << " (<1e-8)";
    return {"criterion-03-centre-ehrenfest", worst < 1e-8, d.str()};
}

CheckResult criterion_equivariance(CheckContext& ctx) {
    double worst = 0.0;
    std::string skipped;
    auto check_packet = [&](const PacketSeries& packet, const Mat2& guide,
                            const std::string& name) {
        const std::vector<Mat2> U = deviation_propagator(packet, guide);
        if (U.size() < packet.size()) {
            skipped += name + " (truncated flow) ";
            return;
        }
        const Mat2 A0 = packet.state(0).A;
        for (std::size_t i = 0; i < packet.size(); ++i) {
            const Mat2 Uinv = inverse_2x2(U[i]);
            const Mat2 rec = Uinv.transpose() * A0 * Uinv;
            worst = std::max(worst, inf_norm(Mat2(packet.state(i).A - rec)));
        }
    };
    for (const char* name : {"fig1", "fig2", "fig3", "fig4", "fig5", "fig6"}) {
        const auto& r = ctx.run(name);
        check_packet(r.bundle.packet, r.model.kinetic(), name);
    }
    const auto& b = ctx.biham();
    check_packet(b.cmp.packet_g, b.pair.model_g().kinetic(), "fig7-g");
    check_packet(b.cmp.packet_2, b.pair.model_2().kinetic(), "fig7-2");
    std::ostringstream d;
    d << "max |A(t) - U^-T A0 U^-1| = " << fmt(worst) << " (<1e-6)";
    if (!skipped.empty()) d << "; skipped: " << skipped;
    return {"criterion-04-equivariance", worst < 1e-6, d.str()};
}

CheckResult criterion_quantum_potential_oracle(CheckContext& ctx) {
    double worst = 0.0;
    auto probe = [&](const PacketState& s, const QuadraticModel& model, std::uint64_t seed) {
        RngStream rng(seed, 0);
        for (int i = 0; i < 100; ++i) {
            const Vec2 q = s.q_c + Vec2(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
            const double qa = quantum_potential(q, s, model);
            const double qf = quantum_potential_fd(q, s, model, 1e-3);
            worst = std::max(worst, std::abs(qa - qf));
        }
    };
    std::uint64_t seed = 11;
    for (const char* name : {"fig1", "fig2", "fig3", "fig4", "fig5", "fig6"}) {
        const auto& r = ctx.run(name);
        probe(r.bundle.packet.state(0), r.model, seed++);
    }
    const auto& b = ctx.biham();
    probe(b.cmp.packet_g.state(0), b.pair.model_g(), seed++);
    probe(b.cmp.packet_2.state(0), b.pair.model_2(), seed++);

    // Exact spot value for fig-1 at the centre: Q(q_c) = (hbar/2) Tr(G A0).
    const auto& r1 = ctx.run("fig1");
    const PacketState& s0 = r1.bundle.packet.state(0);
    const double q_centre = quantum_potential(s0.q_c, s0, r1.model);
    const double expected =
        0.5 * r1.model.hbar() * (r1.model.kinetic() * s0.A).trace();
    const double spot_err = std::abs(q_centre - expected);
    const double print_err = std::abs(q_centre - (-0.0763889));

    const bool pass = worst < 1e-4 && spot_err < 1e-9 && print_err < 1e-6;
    std::ostringstream d;
    d << "max |Q - Q_fd| = " << fmt(worst) << " (<1e-4); |Q(q_c) - (hbar/2)Tr(GA0)| = "
      << fmt(spot_err) << " (<1e-9); vs printed -0.0763889: " << fmt(print_err) << " (<1e-6)";
    return {"criterion-05-quantum-potential-oracle", pass, d.str()};
}

CheckResult criterion_trajectory_identities(CheckContext& ctx) {
    // Presets where Lambda and B are O(1), so both identities carry signal
    // well above the finite-difference roundoff floor. (In the rigid presets
    // the right-hand sides are ~1e-8 and sit at that floor; the rigid limit
    // is covered by criterion 1.)
    double worst_ng = 0.0, worst_so = 0.0;
    for (const char* name : {"fig3", "fig4", "fig5"}) {
        const auto& r = ctx.run(name);
        const PacketSeries& packet = r.bundle.packet;
        const double h = r.scenario.grid.step;
        const Mat2& G = r.model.kinetic();
        for (std::size_t k = 0; k < r.bundle.diag.members.size(); ++k) {
            const auto& mem = r.bundle.diag.members[k];
            const std::size_t n = mem.size();
            if (n < 7) continue;
            std::vector<double> unorm2(n);
            std::vector<Vec2> u(n);
            std::vector<double> rhs_ng(n);
            std::vector<Vec2> rhs_so(n);
            for (std::size_t i = 0; i < n; ++i) {
                u[i] = mem[i].u;
                unorm2[i] = mem[i].u.squaredNorm();
                const Mat2 S_M = symmetrized(-(G * packet.state(i).B));
                rhs_ng[i] = 2.0 * mem[i].u.dot(S_M * mem[i].u);
                rhs_so[i] = -(G * (mem[i].lambda * mem[i].u));
            }
            double scale_ng = 0.0, scale_so = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                scale_ng = std::max(scale_ng, std::abs(rhs_ng[i]));
                scale_so = std::max(scale_so, inf_norm(rhs_so[i]));
            }
            double err_ng = 0.0, err_so = 0.0;
            for (std::size_t i = 2; i + 2 < n; ++i) {
                err_ng = std::max(err_ng, std::abs(fd1(unorm2, i, h) - rhs_ng[i]));
                err_so = std::max(err_so, inf_norm(Vec2(fd2(u, i, h) - rhs_so[i])));
            }
            worst_ng = std::max(worst_ng, err_ng / std::max(scale_ng, 1e-30));
            worst_so = std::max(worst_so, err_so / std::max(scale_so, 1e-30));
        }
    }
    const bool pass = worst_ng < 1e-5 && worst_so < 1e-4;
    std::ostringstream d;
    d << "d|u|^2/dt vs 2 u.S_M u rel err = " << fmt(worst_ng)
      << " (<1e-5); u'' vs -G Lambda u rel err = " << fmt(worst_so) << " (<1e-4)";
    return {"criterion-06-trajectory-identities", pass, d.str()};
}

CheckResult criterion_critical_point(CheckContext& ctx) {
    const double nu = 0.200703, g = -0.0305556;
    const double root = g * g / (4.0 * nu * nu);
    const double root_err = std::abs(root - 0.00579446);

    const auto& r = ctx.run("fig5");
    bool is_critical = false;
    std::string label = "inconclusive";
    try {
        const RegimeLabel lab =
            classify_regime(r.model, r.bundle.packet, r.bundle.diag, r.scenario.thresholds);
        label = to_string(lab.kind);
        is_critical = lab.kind == RegimeKind::CriticalRunaway;
    } catch (const InconclusiveRegimeError&) {
    }

    double centre_amp = 0.0;
    for (const Vec2& q : r.bundle.centre.positions) centre_amp = std::max(centre_amp, q.norm());
    double member_amp = 0.0;
    for (const auto& t : r.bundle.bohmian) {
        for (const Vec2& q : t.positions) member_amp = std::max(member_amp, q.norm());
    }

    const bool pass = root_err < 1e-6 && is_critical && centre_amp > 1e3;
    std::ostringstream d;
    d << "root(det C)=" << format_double(root) << ", |root-0.00579446|=" << fmt(root_err)
      << " (<1e-6); label=" << label << "; centre max|q|=" << fmt(centre_amp)
      << " (required >1e3; Jordan-block growth is linear at rate 0.463, so the centre reaches "
         "~53 by t=115 while Bohmian members reach "
      << fmt(member_amp) << ")";
    return {"criterion-07-critical-point", pass, d.str()};
}

CheckResult criterion_regime_labels(CheckContext& ctx) {
    const std::map<std::string, RegimeKind> expected = {
        {"fig1", RegimeKind::RigidTransport},
        {"fig3", RegimeKind::QuasiSemiclassical},
        {"fig4", RegimeKind::SpiralInstability},
        {"fig5", RegimeKind::CriticalRunaway},
        {"fig6", RegimeKind::NonNormalisableSector},
    };
    bool pass = true;
    std::ostringstream d;
    for (const auto& [name, want] : expected) {
        const auto& r = ctx.run(name);
        std::string got = "inconclusive";
        try {
            const RegimeLabel lab =
                classify_regime(r.model, r.bundle.packet, r.bundle.diag, r.scenario.thresholds);
            got = to_string(lab.kind);
            if (lab.kind != want) pass = false;
        } catch (const InconclusiveRegimeError&) {
            pass = false;
        }
        d << name << "=" << got << " ";
    }
    return {"criterion-08-regime-labels", pass, d.str()};
}

CheckResult criterion_biham_classical(CheckContext& ctx) {
    const auto& b = ctx.biham();
    RngStream rng(99, 0);
    double worst_residual = 0.0;
    for (int i = 0; i < 100; ++i) {
        Vec4 z;
        for (int j = 0; j < 4; ++j) z[j] = rng.uniform(-5.0, 5.0);
        worst_residual = std::max(worst_residual, classical_equivalence_residual(b.pair, z));
    }

    const Mat4 Fg = b.pair.flow_matrix_g();
    const Mat4 F2 = b.pair.flow_matrix_2();
    const PacketState p0 = b.scenario.initial_packet();
    double worst_traj = 0.0;
    for (const Vec2& off : b.scenario.ensemble.offsets) {
        const Vec2 q0 = p0.q_c + off;
        const Vec2 pm = p0.p_c - p0.B * (q0 - p0.q_c);
        Vec4 z0;
        z0 << q0, pm;
        const TrajectorySeries tg = evolve_linear_flow(z0, Fg, b.scenario.grid);
        const TrajectorySeries t2 = evolve_linear_flow(z0, F2, b.scenario.grid);
        const std::size_t n = std::min(tg.valid_count(), t2.valid_count());
        for (std::size_t i = 0; i < n; ++i) {
            worst_traj = std::max(worst_traj, inf_norm(Vec2(tg.positions[i] - t2.positions[i])));
        }
    }

    const bool pass = worst_residual < 1e-12 && worst_traj < 1e-10;
    std::ostringstream d;
    d << "max residual |J_g grad(H_g) - J_2 grad(H_2)| over 100 pts = " << fmt(worst_residual)
      << " (<1e-12); classical ensembles max gap = " << fmt(worst_traj) << " (<1e-10)";
    return {"criterion-09-biham-classical-equivalence", pass, d.str()};
}

CheckResult criterion_bohmian_inequivalence(CheckContext& ctx) {
    const auto& b = ctx.biham();
    const bool pass = b.cmp.max_gap > 1e-2 &&
                      b.cmp.mean_final_delta_2 >= b.cmp.mean_final_delta_g &&
                      b.cmp.var_qb_2 > b.cmp.var_qb_g;
    std::ostringstream d;
    d << "max gap = " << fmt(b.cmp.max_gap) << " (>1e-2); mean final |Delta_2| = "
      << fmt(b.cmp.mean_final_delta_2) << " >= |Delta_g| = " << fmt(b.cmp.mean_final_delta_g)
      << "; Var(Q_B2) = " << fmt(b.cmp.var_qb_2) << " > Var(Q_Bg) = " << fmt(b.cmp.var_qb_g);
    return {"criterion-10-bohmian-inequivalence", pass, d.str()};
}

CheckResult criterion_determinism(CheckContext& ctx) {
    const Scenario& s = ctx.scenario("fig1");
    const auto& mc = std::get<ModelConfig>(s.system);
    const QuadraticModel model = build_ghost_model(mc.nu, mc.omega, mc.g, mc.hbar);
    RunOptions one, four;
    one.workers = 1;
    four.workers = 4;
    const std::string csv1 = series_to_csv(run_single_model(s, model, one));
    const std::string csv4 = series_to_csv(run_single_model(s, model, four));
    const bool pass = csv1 == csv4 && !csv1.empty();
    std::ostringstream d;
    d << "CSV bytes with 1 vs 4 workers: " << (pass ? "identical" : "DIFFER") << " ("
      << csv1.size() << " bytes)";
    return {"criterion-11-determinism", pass, d.str()};
}

// ----- module invariants -----------------------------------------------------

CheckResult invariant_model_symmetry(CheckContext& ctx) {
    const auto& r = ctx.run("fig1");
    const Mat2& G = r.model.kinetic();
    const Mat2& C = r.model.curvature();
    const double gg = inf_norm(Mat2(G.transpose() * G - Mat2::Identity()));
    const double gsym = inf_norm(Mat2(G - G.transpose()));
    const double csym = inf_norm(Mat2(C - C.transpose()));
    const bool pass = gg == 0.0 && gsym == 0.0 && csym == 0.0;
    std::ostringstream d;
    d << "G^T G - I = " << fmt(gg) << ", asymmetries G: " << fmt(gsym) << ", C: " << fmt(csym);
    return {"invariant-model-symmetry", pass, d.str()};
}

CheckResult invariant_flow_spectrum_symmetry(CheckContext& ctx) {
    double worst = 0.0;
    auto check_model = [&](const QuadraticModel& m) {
        const FlowSpectrum sp = flow_spectrum(m);
        double max_abs = 1.0;
        for (const auto& e : sp.eigenvalues) max_abs = std::max(max_abs, std::abs(e));
        for (const auto& e : sp.eigenvalues) {
            double best_neg = std::numeric_limits<double>::infinity();
            double best_conj = std::numeric_limits<double>::infinity();
            for (const auto& f : sp.eigenvalues) {
                best_neg = std::min(best_neg, std::abs(e + f));
                best_conj = std::min(best_conj, std::abs(std::conj(e) - f));
            }
            worst = std::max(worst, std::max(best_neg, best_conj) / max_abs);
        }
    };
    for (const char* name : {"fig1", "fig3", "fig4", "fig5", "fig6"}) {
        check_model(ctx.run(name).model);
    }
    RngStream rng(5, 0);
    for (int i = 0; i < 20; ++i) {
        check_model(build_ghost_model(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
                                      1.0));
    }
    std::ostringstream d;
    d << "worst +/- and conjugate multiset mismatch = " << fmt(worst) << " (<1e-10)";
    return {"invariant-flow-spectrum-symmetry", worst < 1e-10, d.str()};
}

CheckResult invariant_equivalence_residual_random(CheckContext&) {
    RngStream rng(17, 0);
    double worst = 0.0;
    for (int p = 0; p < 5; ++p) {
        const double nu = rng.uniform(0.05, 0.6);
        const double om = rng.uniform(-0.6, -0.01);
        const BiHamiltonianPair pair = build_biham_pair(nu, om, 1.0);
        for (int i = 0; i < 20; ++i) {
            Vec4 z;
            for (int j = 0; j < 4; ++j) z[j] = rng.uniform(-5.0, 5.0);
            worst = std::max(worst, classical_equivalence_residual(pair, z));
        }
    }
    std::ostringstream d;
    d << "max residual over 5 random pairs x 20 points = " << fmt(worst) << " (<1e-12)";
    return {"invariant-equivalence-residual-random", worst < 1e-12, d.str()};
}

CheckResult invariant_biham_flow_agreement(CheckContext& ctx) {
    const auto& b = ctx.biham();
    const double diff =
        (b.pair.flow_matrix_g() - b.pair.flow_matrix_2()).cwiseAbs().maxCoeff();
    std::ostringstream d;
    d << "|F_g - F_2|_max = " << fmt(diff) << " (<1e-12)";
    return {"invariant-biham-flow-matrix-agreement", diff < 1e-12, d.str()};
}

CheckResult invariant_linear_flow_consistency(CheckContext& ctx) {
    double worst = 0.0;
    for (const char* name : {"fig1", "fig3", "fig4", "fig6"}) {
        const auto& r = ctx.run(name);
        const PacketSeries& packet = r.bundle.packet;
        const std::vector<Mat2> U = deviation_propagator(packet, r.model.kinetic());
        for (const auto& traj : r.bundle.bohmian) {
            const Vec2 u0 = traj.positions[0] - packet.state(0).q_c;
            const std::size_t n = std::min({traj.valid_count(), U.size(), packet.size()});
            for (std::size_t i = 0; i < n; ++i) {
                const Vec2 rec = packet.state(i).q_c + U[i] * u0;
                const Vec2 u = traj.positions[i] - packet.state(i).q_c;
                const double scale = std::max(1.0, u.norm());
                worst = std::max(worst, inf_norm(Vec2(traj.positions[i] - rec)) / scale);
            }
        }
    }
    std::ostringstream d;
    d << "max |q_B - (q_c + U u0)| / max(1, |u|) = " << fmt(worst) << " (<1e-6)";
    return {"invariant-linear-flow-consistency", worst < 1e-6, d.str()};
}

CheckResult invariant_rigid_obstruction(CheckContext& ctx) {
    bool pass = true;
    double tightest = std::numeric_limits<double>::infinity();
    for (const char* name : {"fig1", "fig2", "fig3", "fig4", "fig5", "fig6"}) {
        const auto& r = ctx.run(name);
        const PacketSeries& packet = r.bundle.packet;
        for (std::size_t i = 0; i < packet.size(); i += 50) {
            const RigidObstruction ob =
                check_rigid_obstruction(packet.state(i).A, r.model, 1e-8);
            if (!ob.consistent) pass = false;
            if (ob.lambda_vanishes) tightest = std::min(tightest, ob.det_c);
        }
    }
    std::ostringstream d;
    d << "whenever |Lambda| < 1e-8, det C < 0 held (tightest det C = "
      << (std::isfinite(tightest) ? fmt(tightest) : "n/a") << ")";
    return {"invariant-rigid-obstruction", pass, d.str()};
}

CheckResult invariant_sample_mean(CheckContext& ctx) {
    const Scenario& s = ctx.scenario("fig1");
    EnsembleSpec spec;
    spec.size = 1000;
    spec.seed = 7;
    spec.sampling = SamplingMode::Density;
    const PacketState p0 = s.initial_packet();
    const auto pts = sample_ensemble(p0, spec, 1.0);
    Vec2 mean = Vec2::Zero();
    for (const auto& q : pts) mean += q;
    mean /= static_cast<double>(pts.size());
    const Mat2 cov = 0.5 * inverse_2x2(p0.A);
    const Vec2 tol(4.0 * std::sqrt(cov(0, 0) / 1000.0), 4.0 * std::sqrt(cov(1, 1) / 1000.0));
    const Vec2 err = (mean - p0.q_c).cwiseAbs();
    const bool pass = err.x() < tol.x() && err.y() < tol.y();
    std::ostringstream d;
    d << "sample mean err = (" << fmt(err.x()) << ", " << fmt(err.y()) << "), 4 sigma/sqrt(N) = ("
      << fmt(tol.x()) << ", " << fmt(tol.y()) << ")";
    return {"invariant-sample-mean", pass, d.str()};
}

CheckResult invariant_preset_roundtrip(CheckContext&) {
    bool pass = true;
    std::string bad;
    for (const auto& name : preset_names()) {
        const Scenario s = preset(name);
        const nlohmann::json j1 = scenario_to_json(s);
        const Scenario s2 = scenario_from_json(j1, name + "-roundtrip");
        const nlohmann::json j2 = scenario_to_json(s2);
        if (j1 != j2) {
            pass = false;
            bad += name + " ";
        }
    }
    return {"invariant-preset-roundtrip", pass,
            pass ? "all presets serialise and re-load identically" : "mismatch: " + bad};
}

CheckResult invariant_export_roundtrip(CheckContext& ctx) {
    Scenario s = ctx.scenario("fig1");
    s.grid.t_end = 5.0;
    s.ensemble.size = 3;
    const auto& mc = std::get<ModelConfig>(s.system);
    const QuadraticModel model = build_ghost_model(mc.nu, mc.omega, mc.g, mc.hbar);
    const SeriesBundle bundle = run_single_model(s, model);
    const nlohmann::json j1 = series_to_json(bundle, nlohmann::json{{"scenario_name", s.name}});
    const nlohmann::json j2 = nlohmann::json::parse(j1.dump());
    const bool pass = j1 == j2;
    return {"invariant-export-roundtrip", pass,
            pass ? "JSON series round-trips numerically identical"
                 : "serialised JSON differs after re-parse"};
}

CheckResult invariant_csv_row_count(CheckContext& ctx) {
    const auto& r = ctx.run("fig1");
    const std::string csv = series_to_csv(r.bundle);
    const std::size_t rows = static_cast<std::size_t>(
        std::count(csv.begin(), csv.end(), '\n'));
    const std::size_t expected =
        r.scenario.grid.count() * (r.scenario.ensemble.size + 2) + 1;  // + header
    std::ostringstream d;
    d << "rows (incl. header) = " << rows << ", expected grid*(members+2)+1 = " << expected;
    return {"invariant-csv-row-count", rows == expected, d.str()};
}

CheckResult invariant_svg_polyline_count(CheckContext& ctx) {
    const auto& r = ctx.run("fig1");
    const std::string svg = render_svg(make_plot_bundle(r.bundle, "fig1"));
    std::size_t count = 0;
    for (std::size_t pos = svg.find("<polyline"); pos != std::string::npos;
         pos = svg.find("<polyline", pos + 1)) {
        ++count;
    }
    const std::size_t expected = 2 * r.scenario.ensemble.size + 1;
    std::ostringstream d;
    d << "polylines = " << count << ", expected classical+bohmian+centre = " << expected;
    return {"invariant-svg-polyline-count", count == expected, d.str()};
}

CheckResult invariant_rigid_negative_control(CheckContext& ctx) {
    const auto& r1 = ctx.run("fig1");
    Mat2 G = r1.model.kinetic();
    G(0, 1) += 1e-3;
    G(1, 0) += 1e-3;
    const QuadraticModel perturbed(G, r1.model.curvature(), r1.model.hbar(), "fig1-perturbed-G");
    const PacketSeries packet =
        evolve_packet(r1.scenario.initial_packet(), perturbed, r1.scenario.grid);
    double sup_lambda = 0.0;
    for (std::size_t i = 0; i < packet.size(); ++i) {
        sup_lambda = std::max(sup_lambda, inf_norm(curvature_mismatch(packet.state(i).A,
                                                                      perturbed)));
    }
    const double eps = r1.scenario.thresholds.lambda_rigid_rel * inf_norm(perturbed.curvature());
    const bool pass = sup_lambda > eps;  // the rigid-transport condition must fail
    std::ostringstream d;
    d << "perturbed G12 += 1e-3: sup|Lambda| = " << fmt(sup_lambda) << " > eps_Lambda = "
      << fmt(eps) << " (rigid check correctly fails)";
    return {"invariant-rigid-negative-control", pass, d.str()};
}

CheckResult invariant_hbar_independence(CheckContext& ctx) {
    Scenario s = ctx.scenario("fig1");
    auto mc = std::get<ModelConfig>(s.system);
    mc.hbar = 2.0;
    s.system = mc;
    const QuadraticModel model = build_ghost_model(mc.nu, mc.omega, mc.g, mc.hbar);
    const PacketSeries packet = evolve_packet(s.initial_packet(), model, s.grid);
    const RegimeLabel lab = classify_regime(model, packet, EnsembleDiagnostics{}, s.thresholds);
    const bool pass = lab.kind == RegimeKind::RigidTransport;
    return {"invariant-hbar-independence", pass,
            std::string("fig1 at hbar=2 classifies ") + to_string(lab.kind)};
}

CheckResult invariant_symmetry_preservation(CheckContext& ctx) {
    double worst = 0.0;
    for (const char* name : {"fig3", "fig4"}) {
        const PacketSeries& packet = ctx.run(name).bundle.packet;
        for (std::size_t i = 0; i < packet.size(); ++i) {
            const PacketState& s = packet.state(i);
            worst = std::max(worst, std::abs(s.A(0, 1) - s.A(1, 0)));
            worst = std::max(worst, std::abs(s.B(0, 1) - s.B(1, 0)));
        }
    }
    std::ostringstream d;
    d << "max A/B asymmetry along series = " << fmt(worst) << " (<1e-12)";
    return {"invariant-symmetry-preservation", worst < 1e-12, d.str()};
}

CheckResult invariant_det_lambda_symmetric(CheckContext& ctx) {
    const auto& r = ctx.run("fig3");
    RngStream rng(23, 0);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        Mat2 A;
        const double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1), c = rng.uniform(-1, 1);
        A << a, c, c, b;
        const Mat2 lam = curvature_mismatch(A, r.model);
        worst = std::max(worst, std::abs(lam(0, 1) - lam(1, 0)));
        const double d1 = lam.determinant();
        const double d2 = symmetrized(lam).determinant();
        worst = std::max(worst, std::abs(d1 - d2));
    }
    std::ostringstream d;
    d << "Lambda symmetrisation invariance, worst deviation = " << fmt(worst);
    return {"invariant-det-lambda-symmetric", worst == 0.0, d.str()};
}

CheckResult invariant_qb_centre_constant(CheckContext& ctx) {
    // Exactly rigid model: Lambda(0) = 0 in double arithmetic.
    const Mat2 A0 = fig1_A();
    const QuadraticModel model = exact_rigid_model(A0, 1.0);
    PacketState p0;
    p0.q_c = Vec2(-3.0, 2.0);
    p0.p_c = Vec2(1.0, -0.75);
    p0.A = A0;
    const TimeGrid grid{0.0, 115.0, 1e-2};
    const PacketSeries packet = evolve_packet(p0, model, grid);
    const double expected = 0.5 * model.hbar() * (model.kinetic() * A0).trace();
    double worst = 0.0;
    for (std::size_t i = 0; i < packet.size(); ++i) {
        const PacketState& s = packet.state(i);
        worst = std::max(worst, std::abs(quantum_potential(s.q_c, s, model) - expected));
    }
    // Caption-rounded fig1 drifts by the Lambda(0) ~ 1e-7 oscillation; reported only.
    const auto& r1 = ctx.run("fig1");
    double fig1_drift = 0.0;
    const PacketState& f0 = r1.bundle.packet.state(0);
    const double fig1_q0 = quantum_potential(f0.q_c, f0, r1.model);
    for (std::size_t i = 0; i < r1.bundle.packet.size(); ++i) {
        const PacketState& s = r1.bundle.packet.state(i);
        fig1_drift = std::max(fig1_drift,
                              std::abs(quantum_potential(s.q_c, s, r1.model) - fig1_q0));
    }
    std::ostringstream d;
    d << "rigid centre Q_B drift = " << fmt(worst)
      << " (<1e-8, exact-rigid model); caption-rounded fig1 drift = " << fmt(fig1_drift);
    return {"invariant-qb-centre-constant", worst < 1e-8, d.str()};
}

}  // namespace

const std::vector<Check>& validation_registry() {
    static const std::vector<Check> registry = {
        {"criterion-01-rigid-fixed-point", criterion_rigid_fixed_point},
        {"criterion-02-riccati-oracle", criterion_riccati_oracle},
        {"criterion-03-centre-ehrenfest", criterion_centre_ehrenfest},
        {"criterion-04-equivariance", criterion_equivariance},
        {"criterion-05-quantum-potential-oracle", criterion_quantum_potential_oracle},
        {"criterion-06-trajectory-identities", criterion_trajectory_identities},
        {"criterion-07-critical-point", criterion_critical_point},
        {"criterion-08-regime-labels", criterion_regime_labels},
        {"criterion-09-biham-classical-equivalence", criterion_biham_classical},
        {"criterion-10-bohmian-inequivalence", criterion_bohmian_inequivalence},
        {"criterion-11-determinism", criterion_determinism},
        {"invariant-model-symmetry", invariant_model_symmetry},
        {"invariant-flow-spectrum-symmetry", invariant_flow_spectrum_symmetry},
        {"invariant-equivalence-residual-random", invariant_equivalence_residual_random},
        {"invariant-biham-flow-matrix-agreement", invariant_biham_flow_agreement},
        {"invariant-linear-flow-consistency", invariant_linear_flow_consistency},
        {"invariant-rigid-obstruction", invariant_rigid_obstruction},
        {"invariant-sample-mean", invariant_sample_mean},
        {"invariant-preset-roundtrip", invariant_preset_roundtrip},
        {"invariant-export-roundtrip", invariant_export_roundtrip},
        {"invariant-csv-row-count", invariant_csv_row_count},
        {"invariant-svg-polyline-count", invariant_svg_polyline_count},
        {"invariant-rigid-negative-control", invariant_rigid_negative_control},
        {"invariant-hbar-independence", invariant_hbar_independence},
        {"invariant-symmetry-preservation", invariant_symmetry_preservation},
        {"invariant-det-lambda-symmetric", invariant_det_lambda_symmetric},
        {"invariant-qb-centre-constant", invariant_qb_centre_constant},
    };
    return registry;
}

ValidationReport run_validation(std::ostream& progress, const std::string& summary_path) {
    ValidationReport report;
    CheckContext ctx;
    for (const Check& check : validation_registry()) {
        CheckResult result;
        try {
            result = check.fn(ctx);
        } catch (const std::exception& e) {
            result = {check.name, false, std::string("exception: ") + e.what()};
        }
        report.results.push_back(result);
        report.all_pass = report.all_pass && result.pass;
        progress << (result.pass ? "[ ok ] " : "[FAIL] ") << result.name << " - "
                 << result.detail << "\n";
    }
    progress.flush();
    if (!summary_path.empty()) {
        nlohmann::json checks = nlohmann::json::array();
        for (const auto& r : report.results) {
            checks.push_back({{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
        }
        write_text_file(summary_path,
                        nlohmann::json{{"all_pass", report.all_pass}, {"checks", checks}}.dump(1) +
                            "\n");
    }
    return report;
}

}  // namespace ghostflow
