#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ghostflow/diagnostics.hpp"
#include "ghostflow/errors.hpp"
#include "ghostflow/scenario.hpp"

#include <cmath>

using namespace ghostflow;

namespace {

constexpr double kNu = 0.200703;
constexpr double kOmega = -0.105;
constexpr double kG = -0.0305556;

Mat2 fig1_A() {
    Mat2 A;
    A << 1.0 / 2.88, 0.2, 0.2, 0.5;
    return A;
}

PacketState fig1_packet() {
    PacketState s;
    s.q_c = Vec2(-3.0, 2.0);
    s.p_c = Vec2(1.0, -0.75);
    s.A = fig1_A();
    return s;
}

}  // namespace

TEST_CASE("curvature mismatch") {
    const QuadraticModel model = build_ghost_model(kNu, kOmega, kG, 1.0);
    SUBCASE("fig1 A cancels the classical curvature up to caption rounding") {
        CHECK(inf_norm(curvature_mismatch(fig1_A(), model)) < 1e-4);
    }
    SUBCASE("A = 0 leaves the classical curvature") {
        CHECK(inf_norm(Mat2(curvature_mismatch(Mat2::Zero(), model) - model.curvature())) == 0.0);
    }
    SUBCASE("negated diagonal with flipped g reproduces the cancellation") {
        const QuadraticModel flipped = build_ghost_model(kNu, kOmega, -kG, 1.0);
        Mat2 A6 = -fig1_A();
        A6(0, 1) = 0.2;
        A6(1, 0) = 0.2;
        CHECK(inf_norm(curvature_mismatch(A6, flipped)) < 1e-4);
    }
    SUBCASE("obstruction: a vanishing mismatch needs det C < 0") {
        const RigidObstruction ob = check_rigid_obstruction(fig1_A(), model, 1e-3);
        CHECK(ob.lambda_vanishes);
        CHECK(ob.det_c < 0.0);
        CHECK(ob.consistent);
    }
}

TEST_CASE("quantum potential, analytic and finite differences") {
    const QuadraticModel model = build_ghost_model(kNu, kOmega, kG, 1.0);
    const PacketState s = fig1_packet();

    SUBCASE("centre value is the trace term") {
        const double q = quantum_potential(s.q_c, s, model);
        CHECK(q == doctest::Approx(-0.0763889).epsilon(2e-6));
        CHECK(std::abs(q - 0.5 * (model.kinetic() * s.A).trace()) < 1e-15);
        CHECK(std::abs(quantum_potential_fd(s.q_c, s, model, 1e-3) - q) < 1e-6);
    }
    SUBCASE("plane-wave limit vanishes") {
        PacketState flat;
        CHECK(quantum_potential(Vec2(3.0, -1.0), flat, model) == 0.0);
        CHECK(quantum_potential_fd(Vec2(3.0, -1.0), flat, model, 1e-3) == 0.0);
    }
    SUBCASE("off-centre spot value") {
        const Vec2 q = s.q_c + Vec2(1.0, 0.0);
        const double qa = quantum_potential(q, s, model);
        CHECK(qa == doctest::Approx(-0.1166706).epsilon(2e-5));
        CHECK(std::abs(quantum_potential_fd(q, s, model, 1e-3) - qa) < 1e-4);
    }
    SUBCASE("underflow guard fires far out") {
        PacketState tight = s;
        tight.A = 50.0 * Mat2::Identity();
        CHECK_THROWS_AS(quantum_potential_fd(s.q_c + Vec2(60.0, 0.0), tight, model, 1e-3),
                        AmplitudeUnderflowError);
    }
    SUBCASE("growing direction of a non-normalisable packet is caught too") {
        PacketState open = s;
        open.A = -50.0 * Mat2::Identity();
        CHECK_THROWS_AS(quantum_potential_fd(s.q_c + Vec2(60.0, 0.0), open, model, 1e-3),
                        AmplitudeUnderflowError);
    }
}

TEST_CASE("diagnostics series on the rigid preset") {
    const Scenario s = preset("fig1");
    const QuadraticModel model = build_ghost_model(kNu, kOmega, kG, 1.0);
    const SeriesBundle bundle = run_single_model(s, model);

    SUBCASE("mean |u| is flat and mean |Delta| stays bounded") {
        const auto& mu = bundle.diag.mean_u_norm;
        double lo = mu.front(), hi = mu.front();
        for (double v : mu) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CHECK((hi - lo) / mu.front() < 1e-4);
        double dmax = 0.0;
        for (double v : bundle.diag.mean_delta_norm) dmax = std::max(dmax, v);
        CHECK(dmax < 10.0 * mu.front());
    }

    SUBCASE("centre member has u = Delta = 0 within integrator tolerance") {
        Scenario sc = s;
        sc.ensemble.size = 1;
        sc.ensemble.sampling = SamplingMode::FixedOffsets;
        sc.ensemble.offsets = {Vec2::Zero()};
        const SeriesBundle b1 = run_single_model(sc, model);
        for (const auto& d : b1.diag.members[0]) {
            CHECK(inf_norm(d.u) < 1e-8);
            CHECK(inf_norm(d.delta) < 1e-8);
        }
    }

    SUBCASE("sm eigenvalues are sorted and lambda symmetric") {
        for (const auto& d : bundle.diag.members[0]) {
            CHECK(d.s_m_eigs[0] <= d.s_m_eigs[1]);
            CHECK(d.lambda(0, 1) == d.lambda(1, 0));
        }
    }
}

TEST_CASE("det Lambda fluctuates about zero in the quasi-semiclassical regime") {
    const Scenario s = preset("fig3");
    const auto& mc = std::get<ModelConfig>(s.system);
    const QuadraticModel model = build_ghost_model(mc.nu, mc.omega, mc.g, mc.hbar);
    const PacketSeries packet = evolve_packet(s.initial_packet(), model, s.grid);
    int sign_changes = 0;
    double prev = curvature_mismatch(packet.state(0).A, model).determinant();
    for (std::size_t i = 1; i < packet.size(); ++i) {
        const double cur = curvature_mismatch(packet.state(i).A, model).determinant();
        if ((prev < 0 && cur > 0) || (prev > 0 && cur < 0)) ++sign_changes;
        prev = cur;
    }
    CHECK(sign_changes >= 2);
}

TEST_CASE("spiral preset grows both deviation and separation") {
    const Scenario s = preset("fig4");
    const auto& mc = std::get<ModelConfig>(s.system);
    const QuadraticModel model = build_ghost_model(mc.nu, mc.omega, mc.g, mc.hbar);
    const SeriesBundle bundle = run_single_model(s, model);
    const auto& mu = bundle.diag.mean_u_norm;
    const auto& md = bundle.diag.mean_delta_norm;
    CHECK(mu.back() > 3.0 * mu.front());
    double md_early = 0.0;
    for (std::size_t i = 0; i < md.size() / 2; ++i) md_early = std::max(md_early, md[i]);
    CHECK(md.back() > 2.0 * md_early);
}

TEST_CASE("regime classification over the presets") {
    auto classify_preset = [](const std::string& name) {
        const Scenario s = preset(name);
        const auto& mc = std::get<ModelConfig>(s.system);
        const QuadraticModel model = build_ghost_model(mc.nu, mc.omega, mc.g, mc.hbar);
        const SeriesBundle bundle = run_single_model(s, model);
        return classify_regime(model, bundle.packet, bundle.diag, s.thresholds).kind;
    };
    CHECK(classify_preset("fig1") == RegimeKind::RigidTransport);
    CHECK(classify_preset("fig3") == RegimeKind::QuasiSemiclassical);
    CHECK(classify_preset("fig4") == RegimeKind::SpiralInstability);
    CHECK(classify_preset("fig5") == RegimeKind::CriticalRunaway);
    CHECK(classify_preset("fig6") == RegimeKind::NonNormalisableSector);
}

TEST_CASE("bi-Hamiltonian comparison") {
    const Scenario s = preset("fig7");
    const auto& bc = std::get<BihamConfig>(s.system);
    const BiHamiltonianPair pair = build_biham_pair(bc.nu, bc.omega, bc.hbar);
    const BihamComparison cmp =
        biham_compare(pair, s.initial_packet(), s.ensemble.offsets, s.grid, bc.convention);

    SUBCASE("classical ensembles coincide while Bohmian ensembles split") {
        CHECK(cmp.max_gap > 1e-2);
        // per-member classical reference is shared by construction; the
        // rep-independence of the flow matrix is checked in test_model.
        CHECK(cmp.mean_final_delta_2 >= cmp.mean_final_delta_g);
        CHECK(cmp.var_qb_2 > cmp.var_qb_g);
    }

    SUBCASE("paper-literal convention halves the guidance velocities") {
        std::vector<Vec2> offsets(s.ensemble.offsets.begin(), s.ensemble.offsets.begin() + 4);
        const TimeGrid grid{0.0, 40.0, 1e-2};
        const BihamComparison lit = biham_compare(pair, s.initial_packet(), offsets, grid,
                                                  GuidanceConvention::PaperLiteral);
        const BihamComparison can =
            biham_compare(pair, s.initial_packet(), offsets, grid, bc.convention);
        CHECK(lit.max_gap > 1e-3);
        CHECK(lit.max_gap != can.max_gap);
        // The classical reference is convention-independent.
        for (std::size_t i = 0; i < lit.classical[0].valid_count(); ++i) {
            CHECK(lit.classical[0].positions[i] == can.classical[0].positions[i]);
        }
    }

    SUBCASE("degenerate sanity case: identical representations give zero gap") {
        Mat2 G;
        G << 1.0, 0.0, 0.0, -1.0;
        const Mat2 A0 = fig1_A();
        const QuadraticModel rigid(G, symmetrized(A0 * G * A0), 1.0, "exact-rigid");
        Mat4 Jg = Mat4::Zero();
        Jg.block<2, 2>(0, 2) = Mat2::Identity();
        Jg.block<2, 2>(2, 0) = -Mat2::Identity();
        const BiHamiltonianPair same(rigid, rigid, Jg, Jg, 0.1, -0.1);
        PacketState p0 = fig1_packet();
        const BihamComparison c2 = biham_compare(same, p0, {Vec2(0.3, -0.2), Vec2(-0.1, 0.4)},
                                                 TimeGrid{0.0, 30.0, 1e-2});
        CHECK(c2.max_gap < 1e-10);
    }
}

TEST_CASE("inconclusive classification is an error, not a guess") {
    // Hyperbolic non-spiral runaway: positive det C branch with real
    // exponential directions and secular ensemble growth.
    const QuadraticModel model = build_ghost_model(0.3, 0.4, 0.0, 1.0);
    // eigen(-GC): diag model: -GC = diag(-2 nu^2, 2 Omega)... one positive
    // => hyperbolic-unstable spectrum.
    CHECK(flow_spectrum(model).stability_class == StabilityClass::HyperbolicUnstable);
    Scenario s = preset("fig1");
    // Short horizon: long enough for clear secular growth of the ensemble,
    // short enough that A(t) has not collapsed below eigenvalue roundoff.
    s.grid.t_end = 15.0;
    const SeriesBundle bundle = run_single_model(s, model);
    CHECK_THROWS_AS(classify_regime(model, bundle.packet, bundle.diag, s.thresholds),
                    InconclusiveRegimeError);
}
