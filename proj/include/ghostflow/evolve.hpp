#pragma once

#include "ghostflow/linalg.hpp"
#include "ghostflow/model.hpp"

#include <cstddef>
#include <vector>

namespace ghostflow {

// Gaussian packet at time t: centre (q_c, p_c) and complex width K = A + iB,
// stored as the real symmetric pair (A, B). A is the inverse-covariance scale
// (normalisable iff A > 0), B the phase curvature.
struct PacketState {
    double t = 0.0;
    Vec2 q_c = Vec2::Zero();
    Vec2 p_c = Vec2::Zero();
    Mat2 A = Mat2::Zero();
    Mat2 B = Mat2::Zero();

    bool normalisable() const;
};

// Minimum eigenvalue of A; the packet is a physical L^2 state iff positive.
double normalisability_margin(const PacketState& state);

struct PacketDerivative {
    Vec2 dq_c;
    Vec2 dp_c;
    Mat2 dA;
    Mat2 dB;
};

// Centre equations plus the real/imaginary split of K' = -i(KGK - C):
//   dq_c = G p_c,  dp_c = -C q_c,
//   dA = AGB + BGA,  dB = C + BGB - AGA  (= Lambda + BGB).
PacketDerivative riccati_rhs(const PacketState& state, const QuadraticModel& model);

// Uniform grid t_0 ... t_N with N = round((t_end - t_start)/step) intervals.
struct TimeGrid {
    double t_start = 0.0;
    double t_end = 115.0;
    double step = 1e-2;

    std::size_t intervals() const;
    std::size_t count() const { return intervals() + 1; }  // grid points
    double time(std::size_t i) const { return t_start + static_cast<double>(i) * step; }

    bool same_as(const TimeGrid& other) const;
};

struct IntegratorConfig {
    double blowup_guard = 1e12;
};

// Packet evolution sampled on the grid. The integrator advances at step/2, and
// the intermediate states are kept so that downstream integrations can consume
// exact midpoint packet values.
class PacketSeries {
public:
    PacketSeries(QuadraticModel model, TimeGrid grid, std::vector<PacketState> fine_states,
                 bool truncated);

    const QuadraticModel& model() const { return model_; }
    const TimeGrid& grid() const { return grid_; }

    // Grid points with valid data (== grid().count() unless truncated).
    std::size_t size() const { return (fine_.size() + 1) / 2; }
    const PacketState& state(std::size_t i) const { return fine_[2 * i]; }
    const PacketState& half_state(std::size_t i) const { return fine_[2 * i + 1]; }

    bool truncated() const { return truncated_; }
    double truncation_time() const;

    // Linear interpolation between grid states; off-grid queries only.
    PacketState interpolate(double t) const;

private:
    QuadraticModel model_;
    TimeGrid grid_;
    std::vector<PacketState> fine_;  // resolution step/2, size 2k+1
    bool truncated_;
};

// Fixed-step RK4 on (q_c, p_c, A, B) jointly; A and B are re-symmetrised
// exactly after every substep. A component exceeding the overflow guard stops
// the integration and marks the series truncated.
PacketSeries evolve_packet(const PacketState& initial, const QuadraticModel& model,
                           const TimeGrid& grid, const IntegratorConfig& config = {});

// Independent oracle for the Riccati flow: solves the linear system
// X' = iGY, Y' = iCX by matrix exponential of i[[0,G],[C,0]] and returns
// K(t) = Y X^{-1}. Throws OracleSingularityError at focal points of X.
CMat2 riccati_linear_oracle(const CMat2& K0, const QuadraticModel& model, double t);

}  // namespace ghostflow
