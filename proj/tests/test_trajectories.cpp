#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ghostflow/errors.hpp"
#include "ghostflow/trajectories.hpp"

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

QuadraticModel exact_rigid_model() {
    Mat2 G;
    G << 1.0, 0.0, 0.0, -1.0;
    const Mat2 A0 = fig1_A();
    return QuadraticModel(G, symmetrized(A0 * G * A0), 1.0, "exact-rigid");
}

}  // namespace

TEST_CASE("ensemble sampling") {
    SUBCASE("density draws centre on the packet mean") {
        EnsembleSpec spec;
        spec.size = 1000;
        spec.seed = 7;
        const auto pts = sample_ensemble(fig1_packet(), spec, 1.0);
        REQUIRE(pts.size() == 1000);
        Vec2 mean = Vec2::Zero();
        for (const auto& q : pts) mean += q;
        mean /= 1000.0;
        const Mat2 cov = 0.5 * inverse_2x2(fig1_A());
        CHECK(std::abs(mean.x() + 3.0) < 4.0 * std::sqrt(cov(0, 0) / 1000.0));
        CHECK(std::abs(mean.y() - 2.0) < 4.0 * std::sqrt(cov(1, 1) / 1000.0));
    }
    SUBCASE("fixed zero offset hits the centre exactly") {
        EnsembleSpec spec;
        spec.size = 1;
        spec.sampling = SamplingMode::FixedOffsets;
        spec.offsets = {Vec2::Zero()};
        const auto pts = sample_ensemble(fig1_packet(), spec, 1.0);
        CHECK(pts[0] == fig1_packet().q_c);
    }
    SUBCASE("density mode rejects an indefinite amplitude matrix") {
        PacketState s = fig1_packet();
        s.A = -fig1_A();
        EnsembleSpec spec;
        CHECK_THROWS_AS(sample_ensemble(s, spec, 1.0), NonNormalisableDensityError);
    }
    SUBCASE("sampling is independent of evaluation order") {
        EnsembleSpec a;
        a.size = 8;
        a.seed = 4;
        EnsembleSpec b = a;
        b.size = 3;  // prefix of the same streams
        const auto pa = sample_ensemble(fig1_packet(), a, 1.0);
        const auto pb = sample_ensemble(fig1_packet(), b, 1.0);
        for (int k = 0; k < 3; ++k) CHECK(pa[k] == pb[k]);
    }
}

TEST_CASE("free ghost motion is exact under RK4") {
    const QuadraticModel model = build_ghost_model(0.0, 0.0, 0.0, 1.0);
    const TrajectorySeries t =
        evolve_classical(Vec2::Zero(), Vec2(1.0, 1.0), model, TimeGrid{0.0, 5.0, 1e-2});
    for (std::size_t i = 0; i < t.valid_count(); ++i) {
        const double ti = t.grid.time(i);
        CHECK(std::abs(t.positions[i].x() - ti) < 1e-12);
        CHECK(std::abs(t.positions[i].y() + ti) < 1e-12);
    }
}

TEST_CASE("classical trajectory from centre data reproduces the packet centre bitwise") {
    const QuadraticModel model = build_ghost_model(kNu, kOmega, kG, 1.0);
    const TimeGrid grid{0.0, 115.0, 1e-2};
    const PacketSeries packet = evolve_packet(fig1_packet(), model, grid);
    const TrajectorySeries cl =
        evolve_classical(fig1_packet().q_c, fig1_packet().p_c, model, grid);
    REQUIRE(cl.valid_count() == packet.size());
    for (std::size_t i = 0; i < cl.valid_count(); ++i) {
        CHECK(cl.positions[i] == packet.state(i).q_c);
        CHECK(cl.momenta[i] == packet.state(i).p_c);
    }
}

TEST_CASE("spiral model spirals outward") {
    const QuadraticModel model = build_ghost_model(kNu + 0.1, kOmega, kG, 1.0);
    const TrajectorySeries t =
        evolve_classical(Vec2(-3.0, 2.0), Vec2(1.0, -0.75), model, TimeGrid{0.0, 115.0, 1e-2});
    REQUIRE(!t.truncated);
    CHECK(t.positions.back().norm() > 3.0 * t.positions.front().norm());
}

TEST_CASE("bohmian velocity formula") {
    const QuadraticModel model = build_ghost_model(kNu, kOmega, kG, 1.0);
    PacketState s = fig1_packet();
    SUBCASE("at the centre the deviation term vanishes") {
        s.B = Mat2::Identity();
        CHECK(bohmian_velocity(s.q_c, s, model) == model.kinetic() * s.p_c);
    }
    SUBCASE("fig1 at t=0 gives G p_c everywhere") {
        CHECK(bohmian_velocity(Vec2(4.0, -7.0), s, model) == Vec2(1.0, 0.75));
    }
    SUBCASE("hand-computed deviation case") {
        PacketState st;
        st.B = Mat2::Identity();
        const Vec2 v = bohmian_velocity(Vec2(1.0, 2.0), st, model);
        CHECK(v == Vec2(-1.0, 2.0));
    }
}

TEST_CASE("rigid transport freezes the internal deviation") {
    const QuadraticModel model = exact_rigid_model();
    const TimeGrid grid{0.0, 115.0, 1e-2};
    const PacketSeries packet = evolve_packet(fig1_packet(), model, grid);
    const Vec2 q0 = fig1_packet().q_c + Vec2(0.4, -0.3);
    const BohmianTrajectory b = evolve_bohmian(q0, packet);
    REQUIRE(!b.series.truncated);
    const Vec2 u0 = q0 - packet.state(0).q_c;
    for (std::size_t i = 0; i < b.series.valid_count(); ++i) {
        const Vec2 u = b.series.positions[i] - packet.state(i).q_c;
        CHECK(inf_norm(Vec2(u - u0)) < 1e-9);
    }
}

TEST_CASE("the centre is itself a Bohmian trajectory") {
    const QuadraticModel model = build_ghost_model(kNu, kOmega, kG, 1.0);
    const PacketSeries packet = evolve_packet(fig1_packet(), model, TimeGrid{0.0, 115.0, 1e-2});
    const BohmianTrajectory b = evolve_bohmian(fig1_packet().q_c, packet);
    for (std::size_t i = 0; i < b.series.valid_count(); ++i) {
        CHECK(inf_norm(Vec2(b.series.positions[i] - packet.state(i).q_c)) < 1e-8);
    }
}

TEST_CASE("spiral preset grows both u and the reconstruction stays consistent") {
    const QuadraticModel model = build_ghost_model(kNu + 0.1, kOmega, kG, 1.0);
    const TimeGrid grid{0.0, 115.0, 1e-2};
    const PacketSeries packet = evolve_packet(fig1_packet(), model, grid);
    const Vec2 q0 = fig1_packet().q_c + Vec2(0.5, 0.2);
    const BohmianTrajectory b = evolve_bohmian(q0, packet);
    REQUIRE(!b.series.truncated);

    const Vec2 u0 = q0 - packet.state(0).q_c;
    const Vec2 u_end = b.series.positions.back() - packet.state(packet.size() - 1).q_c;
    CHECK(u_end.norm() > 3.0 * u0.norm());

    double worst = 0.0;
    for (std::size_t i = 0; i < b.series.valid_count(); ++i) {
        const Vec2 rec = packet.state(i).q_c + b.deviation_flow[i] * u0;
        const Vec2 u = b.series.positions[i] - packet.state(i).q_c;
        worst = std::max(worst,
                         inf_norm(Vec2(b.series.positions[i] - rec)) / std::max(1.0, u.norm()));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("grid mismatch is detected, prefix grids are served") {
    const QuadraticModel model = build_ghost_model(kNu, kOmega, kG, 1.0);
    const PacketSeries packet = evolve_packet(fig1_packet(), model, TimeGrid{0.0, 10.0, 1e-2});
    CHECK_THROWS_AS(evolve_bohmian(Vec2::Zero(), packet, TimeGrid{0.0, 20.0, 1e-2}), GridError);
    CHECK_THROWS_AS(evolve_bohmian(Vec2::Zero(), packet, TimeGrid{0.0, 10.0, 2e-2}), GridError);
    CHECK_NOTHROW(evolve_bohmian(Vec2::Zero(), packet, TimeGrid{0.0, 10.0, 1e-2}));
    const BohmianTrajectory prefix =
        evolve_bohmian(Vec2::Zero(), packet, TimeGrid{0.0, 5.0, 1e-2});
    CHECK(prefix.series.valid_count() == 501);
}

TEST_CASE("equivariance: the pushforward of A0 under U matches A(t)") {
    for (double domega : {0.0, -0.4}) {
        const QuadraticModel model = build_ghost_model(kNu, kOmega + domega, kG, 1.0);
        const PacketSeries packet =
            evolve_packet(fig1_packet(), model, TimeGrid{0.0, 60.0, 1e-2});
        const auto U = deviation_propagator(packet, model.kinetic());
        REQUIRE(U.size() == packet.size());
        const Mat2 A0 = packet.state(0).A;
        double worst = 0.0;
        for (std::size_t i = 0; i < packet.size(); ++i) {
            const Mat2 Uinv = inverse_2x2(U[i]);
            worst = std::max(worst,
                             inf_norm(Mat2(packet.state(i).A - Uinv.transpose() * A0 * Uinv)));
        }
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("equivariance needs the full kinetic tensor in the deviation flow") {
    // Negative control for the convention switch: a halved guidance tensor
    // transports the density with the wrong rate, so the pushforward check
    // must fail by a visible margin.
    const QuadraticModel model = build_ghost_model(kNu, kOmega - 0.4, kG, 1.0);
    const PacketSeries packet = evolve_packet(fig1_packet(), model, TimeGrid{0.0, 60.0, 1e-2});
    const auto U = deviation_propagator(packet, Mat2(0.5 * model.kinetic()));
    const Mat2 A0 = packet.state(0).A;
    double worst = 0.0;
    for (std::size_t i = 0; i < packet.size() && i < U.size(); ++i) {
        const Mat2 Uinv = inverse_2x2(U[i]);
        worst = std::max(worst,
                         inf_norm(Mat2(packet.state(i).A - Uinv.transpose() * A0 * Uinv)));
    }
    CHECK(worst > 1e-2);
}
