#pragma once

#include "ghostflow/evolve.hpp"
#include "ghostflow/linalg.hpp"
#include "ghostflow/model.hpp"

#include <cstdint>
#include <vector>

namespace ghostflow {

enum class TrajectoryKind { Classical, Bohmian, Centre };

const char* to_string(TrajectoryKind k);

enum class SamplingMode { Density, FixedOffsets };

struct EnsembleSpec {
    std::size_t size = 20;
    std::uint64_t seed = 1;
    SamplingMode sampling = SamplingMode::Density;
    std::vector<Vec2> offsets;  // FixedOffsets mode: one entry per member
};

// Initial positions for an ensemble. Density mode draws from the Gaussian with
// mean q_c(0) and covariance (hbar/2) A(0)^{-1}; fixed-offsets mode returns
// q_c(0) + u_k. One counter-based stream per member, so the draw is
// deterministic and independent of evaluation order.
std::vector<Vec2> sample_ensemble(const PacketState& packet0, const EnsembleSpec& spec,
                                  double hbar);

struct TrajectorySeries {
    int member_id = 0;
    TrajectoryKind kind = TrajectoryKind::Classical;
    TimeGrid grid;
    std::vector<Vec2> positions;
    std::vector<Vec2> momenta;  // classical and centre kinds only
    bool truncated = false;

    std::size_t valid_count() const { return positions.size(); }
};

// RK4 on q' = Gp, p' = -Cq. Substeps match evolve_packet exactly, so a
// classical trajectory started from the packet centre reproduces the centre
// samples bit for bit.
TrajectorySeries evolve_classical(const Vec2& q0, const Vec2& p0, const QuadraticModel& model,
                                  const TimeGrid& grid, const IntegratorConfig& config = {});

// RK4 on z' = F z for an arbitrary constant phase-space flow matrix.
TrajectorySeries evolve_linear_flow(const Vec4& z0, const Mat4& F, const TimeGrid& grid,
                                    const IntegratorConfig& config = {});

// Guidance field G (p_c - B (q - q_c)).
Vec2 bohmian_velocity(const Vec2& q, const PacketState& state, const QuadraticModel& model);

struct BohmianTrajectory {
    TrajectorySeries series;
    std::vector<Mat2> deviation_flow;  // U(t) at grid times, U' = -GBU, U(0) = I
};

// Integrates the guidance ODE along the packet series (RK4; the packet states
// at half steps come from the series' own fine grid). The deviation
// propagator U(t) is integrated alongside and returned with the trajectory.
BohmianTrajectory evolve_bohmian(const Vec2& q0, const PacketSeries& packet,
                                 const IntegratorConfig& config = {});

// Same, with an explicit guidance tensor (bi-Hamiltonian literal convention
// uses half the canonical kinetic tensor).
BohmianTrajectory evolve_bohmian(const Vec2& q0, const PacketSeries& packet,
                                 const Mat2& guidance_tensor, const IntegratorConfig& config = {});

// Grid-checked variant: throws GridError when the packet series does not span
// the requested grid.
BohmianTrajectory evolve_bohmian(const Vec2& q0, const PacketSeries& packet, const TimeGrid& grid,
                                 const IntegratorConfig& config = {});

// U(t) alone (it does not depend on the member).
std::vector<Mat2> deviation_propagator(const PacketSeries& packet, const Mat2& guidance_tensor,
                                       const IntegratorConfig& config = {});

// Extracts the centre as a TrajectorySeries (kind Centre).
TrajectorySeries centre_series(const PacketSeries& packet);

}  // namespace ghostflow
