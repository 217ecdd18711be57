#include "ghostflow/trajectories.hpp"

#include "ghostflow/errors.hpp"
#include "ghostflow/rng.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace ghostflow {

const char* to_string(TrajectoryKind k) {
    switch (k) {
        case TrajectoryKind::Classical: return "classical";
        case TrajectoryKind::Bohmian: return "bohmian";
        case TrajectoryKind::Centre: return "centre";
    }
    return "unknown";
}

std::vector<Vec2> sample_ensemble(const PacketState& packet0, const EnsembleSpec& spec,
                                  double hbar) {
    if (spec.size < 1) throw ModelError("sample_ensemble: ensemble size must be >= 1");
    std::vector<Vec2> out(spec.size);

    if (spec.sampling == SamplingMode::FixedOffsets) {
        if (spec.offsets.size() != spec.size) {
            throw ModelError("sample_ensemble: fixed-offsets list length must equal size");
        }
        for (std::size_t k = 0; k < spec.size; ++k) out[k] = packet0.q_c + spec.offsets[k];
        return out;
    }

    if (!(normalisability_margin(packet0) > 0.0)) {
        throw NonNormalisableDensityError(
            "sample_ensemble: density sampling needs A(0) > 0; use fixed-offsets");
    }
    // |psi|^2 ~ exp(-(1/hbar) w^T A w): covariance (hbar/2) A^{-1}.
    const Mat2 cov = 0.5 * hbar * inverse_2x2(packet0.A);
    Eigen::LLT<Mat2> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw NonNormalisableDensityError("sample_ensemble: covariance factorisation failed");
    }
    const Mat2 L = llt.matrixL();
    for (std::size_t k = 0; k < spec.size; ++k) {
        RngStream rng(spec.seed, k);
        out[k] = packet0.q_c + L * rng.normal2();
    }
    return out;
}

namespace {

// One RK4 substep for the classical block. Mirrors the (q_c, p_c) update in
// evolve_packet expression for expression, so matched initial data reproduces
// the packet centre bitwise.
void advance_rk4_classical(Vec2& q, Vec2& p, const QuadraticModel& model, double h) {
    const Vec2 k1q = model.velocity(p);
    const Vec2 k1p = model.force(q);
    const Vec2 q2 = q + 0.5 * h * k1q;
    const Vec2 p2 = p + 0.5 * h * k1p;
    const Vec2 k2q = model.velocity(p2);
    const Vec2 k2p = model.force(q2);
    const Vec2 q3 = q + 0.5 * h * k2q;
    const Vec2 p3 = p + 0.5 * h * k2p;
    const Vec2 k3q = model.velocity(p3);
    const Vec2 k3p = model.force(q3);
    const Vec2 q4 = q + h * k3q;
    const Vec2 p4 = p + h * k3p;
    const Vec2 k4q = model.velocity(p4);
    const Vec2 k4p = model.force(q4);
    q = q + (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
    p = p + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
}

bool guard_ok(const Vec2& q, const Vec2& p, double guard) {
    return all_finite(q) && all_finite(p) && inf_norm(q) <= guard && inf_norm(p) <= guard;
}

}  // namespace

TrajectorySeries evolve_classical(const Vec2& q0, const Vec2& p0, const QuadraticModel& model,
                                  const TimeGrid& grid, const IntegratorConfig& config) {
    if (!(grid.step > 0.0)) throw GridError("evolve_classical: grid step must be positive");
    const std::size_t n = grid.intervals();
    TrajectorySeries out;
    out.kind = TrajectoryKind::Classical;
    out.grid = grid;
    out.positions.reserve(n + 1);
    out.momenta.reserve(n + 1);
    Vec2 q = q0, p = p0;
    out.positions.push_back(q);
    out.momenta.push_back(p);
    const double h = 0.5 * grid.step;
    for (std::size_t i = 0; i < n; ++i) {
        advance_rk4_classical(q, p, model, h);
        advance_rk4_classical(q, p, model, h);
        if (!guard_ok(q, p, config.blowup_guard)) {
            out.truncated = true;
            break;
        }
        out.positions.push_back(q);
        out.momenta.push_back(p);
    }
    return out;
}

TrajectorySeries evolve_linear_flow(const Vec4& z0, const Mat4& F, const TimeGrid& grid,
                                    const IntegratorConfig& config) {
    if (!(grid.step > 0.0)) throw GridError("evolve_linear_flow: grid step must be positive");
    const std::size_t n = grid.intervals();
    TrajectorySeries out;
    out.kind = TrajectoryKind::Classical;
    out.grid = grid;
    Vec4 z = z0;
    out.positions.emplace_back(z.head<2>());
    out.momenta.emplace_back(z.tail<2>());
    const double h = 0.5 * grid.step;
    auto step_once = [&](Vec4& s) {
        const Vec4 k1 = F * s;
        const Vec4 k2 = F * (s + 0.5 * h * k1);
        const Vec4 k3 = F * (s + 0.5 * h * k2);
        const Vec4 k4 = F * (s + h * k3);
        s = s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    };
    for (std::size_t i = 0; i < n; ++i) {
        step_once(z);
        step_once(z);
        if (!z.allFinite() || inf_norm(z) > config.blowup_guard) {
            out.truncated = true;
            break;
        }
        out.positions.emplace_back(z.head<2>());
        out.momenta.emplace_back(z.tail<2>());
    }
    return out;
}

Vec2 bohmian_velocity(const Vec2& q, const PacketState& state, const QuadraticModel& model) {
    return model.kinetic() * (state.p_c - state.B * (q - state.q_c));
}

namespace {

Vec2 guidance(const Vec2& q, const PacketState& s, const Mat2& Gt) {
    return Gt * (s.p_c - s.B * (q - s.q_c));
}

BohmianTrajectory evolve_bohmian_impl(const Vec2& q0, const PacketSeries& packet, const Mat2& Gt,
                                      const IntegratorConfig& config) {
    const TimeGrid& grid = packet.grid();
    const double h = grid.step;
    const std::size_t n = packet.size();

    BohmianTrajectory out;
    out.series.kind = TrajectoryKind::Bohmian;
    out.series.grid = grid;
    out.series.truncated = packet.truncated();

    Vec2 q = q0;
    Mat2 U = Mat2::Identity();
    out.series.positions.push_back(q);
    out.deviation_flow.push_back(U);

    for (std::size_t i = 0; i + 1 < n; ++i) {
        const PacketState& s0 = packet.state(i);
        const PacketState& sh = packet.half_state(i);
        const PacketState& s1 = packet.state(i + 1);

        const Vec2 k1 = guidance(q, s0, Gt);
        const Vec2 k2 = guidance(q + 0.5 * h * k1, sh, Gt);
        const Vec2 k3 = guidance(q + 0.5 * h * k2, sh, Gt);
        const Vec2 k4 = guidance(q + h * k3, s1, Gt);
        q = q + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        const Mat2 K1 = -Gt * s0.B * U;
        const Mat2 K2 = -Gt * sh.B * (U + 0.5 * h * K1);
        const Mat2 K3 = -Gt * sh.B * (U + 0.5 * h * K2);
        const Mat2 K4 = -Gt * s1.B * (U + h * K3);
        U = U + (h / 6.0) * (K1 + 2.0 * K2 + 2.0 * K3 + K4);

        if (!all_finite(q) || !all_finite(U) || inf_norm(q) > config.blowup_guard ||
            inf_norm(U) > config.blowup_guard) {
            out.series.truncated = true;
            break;
        }
        out.series.positions.push_back(q);
        out.deviation_flow.push_back(U);
    }
    return out;
}

}  // namespace

BohmianTrajectory evolve_bohmian(const Vec2& q0, const PacketSeries& packet,
                                 const IntegratorConfig& config) {
    return evolve_bohmian_impl(q0, packet, packet.model().kinetic(), config);
}

BohmianTrajectory evolve_bohmian(const Vec2& q0, const PacketSeries& packet,
                                 const Mat2& guidance_tensor, const IntegratorConfig& config) {
    return evolve_bohmian_impl(q0, packet, guidance_tensor, config);
}

BohmianTrajectory evolve_bohmian(const Vec2& q0, const PacketSeries& packet, const TimeGrid& grid,
                                 const IntegratorConfig& config) {
    const TimeGrid& pg = packet.grid();
    if (grid.t_start != pg.t_start || grid.step != pg.step ||
        grid.intervals() > pg.intervals()) {
        throw GridError("evolve_bohmian: packet series does not span the requested grid");
    }
    BohmianTrajectory out = evolve_bohmian_impl(q0, packet, packet.model().kinetic(), config);
    const std::size_t want = grid.count();
    if (out.series.positions.size() > want) {
        out.series.positions.resize(want);
        out.deviation_flow.resize(want);
    }
    out.series.grid = grid;
    return out;
}

std::vector<Mat2> deviation_propagator(const PacketSeries& packet, const Mat2& guidance_tensor,
                                       const IntegratorConfig& config) {
    // Mirror of the U block above, kept callable on its own.
    return evolve_bohmian_impl(packet.state(0).q_c, packet, guidance_tensor, config)
        .deviation_flow;
}

TrajectorySeries centre_series(const PacketSeries& packet) {
    TrajectorySeries out;
    out.member_id = -1;
    out.kind = TrajectoryKind::Centre;
    out.grid = packet.grid();
    out.truncated = packet.truncated();
    const std::size_t n = packet.size();
    out.positions.reserve(n);
    out.momenta.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.positions.push_back(packet.state(i).q_c);
        out.momenta.push_back(packet.state(i).p_c);
    }
    return out;
}

}  // namespace ghostflow
