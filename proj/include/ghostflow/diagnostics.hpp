#pragma once

#include "ghostflow/evolve.hpp"
#include "ghostflow/model.hpp"
#include "ghostflow/trajectories.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ghostflow {

// Lambda = C - AGA, the mismatch between classical and quantum curvature.
Mat2 curvature_mismatch(const Mat2& A, const QuadraticModel& model);

// Companion obstruction check: Lambda = 0 forces det(AGA) = det(G) det(A)^2 < 0,
// so a vanishing mismatch is only consistent with det C < 0.
struct RigidObstruction {
    double lambda_inf = 0.0;
    double det_c = 0.0;
    bool lambda_vanishes = false;
    bool consistent = true;  // lambda_inf >= tol or det_c < 0
};

RigidObstruction check_rigid_obstruction(const Mat2& A, const QuadraticModel& model,
                                         double tol = 1e-8);

// Q(q, t) = -1/2 (q-q_c)^T AGA (q-q_c) + (hbar/2) Tr(GA).
double quantum_potential(const Vec2& q, const PacketState& state, const QuadraticModel& model);

// Same with an explicit kinetic tensor (bi-Hamiltonian literal convention).
double quantum_potential(const Vec2& q, const PacketState& state, const Mat2& kinetic,
                         double hbar);

// Finite-difference oracle: Q = -(hbar^2/2) (1/R) d_i(G^{ij} d_j R) with the
// Hessian of R = exp(-(1/2 hbar) w^T A w) taken by centered second differences.
double quantum_potential_fd(const Vec2& q, const PacketState& state, const QuadraticModel& model,
                            double h);

struct DiagnosticsSample {
    double t = 0.0;
    Vec2 u = Vec2::Zero();      // q_B - q_c
    Vec2 delta = Vec2::Zero();  // q_B - q_cl
    Mat2 lambda = Mat2::Zero();
    double det_lambda = 0.0;
    std::array<double, 2> s_m_eigs{0.0, 0.0};  // spectrum of sym(-GB), ascending
    double q_b = 0.0;
};

// Per-sample diagnostics for one Bohmian/classical pair along a packet series.
// All three series must share the packet's grid.
std::vector<DiagnosticsSample> diagnostics_series(const TrajectorySeries& bohmian,
                                                  const TrajectorySeries& classical,
                                                  const PacketSeries& packet);

struct EnsembleDiagnostics {
    std::vector<std::vector<DiagnosticsSample>> members;
    // Ensemble means over the common valid range (pairwise sums in member order).
    std::vector<double> mean_u_norm;
    std::vector<double> mean_delta_norm;
    std::size_t common_valid = 0;
    bool any_truncated = false;
};

EnsembleDiagnostics aggregate_diagnostics(std::vector<std::vector<DiagnosticsSample>> members);

enum class RegimeKind {
    RigidTransport,
    QuasiSemiclassical,
    SpiralInstability,
    CriticalRunaway,
    NonNormalisableSector,
};

const char* to_string(RegimeKind k);

struct RegimeLabel {
    RegimeKind kind;
    std::map<std::string, double> evidence;
};

struct RegimeThresholds {
    double lambda_rigid_rel = 1e-3;  // eps_Lambda = lambda_rigid_rel * ||C||_inf
    double spiral_growth_min = 3.0;
    double det_c_tol = 1e-9;
    double bounded_ratio = 2.0;  // late-half vs early-half growth allowed for "bounded"
    SpectralTolerances spectral;
};

// Decision order: non-normalisable sector, critical runaway, spiral
// instability, rigid transport, quasi-semiclassical. Throws
// InconclusiveRegimeError (with the evidence) when no branch fires.
RegimeLabel classify_regime(const QuadraticModel& model, const PacketSeries& packet,
                            const EnsembleDiagnostics& diag, const RegimeThresholds& th = {});

enum class GuidanceConvention { Canonical, PaperLiteral };

const char* to_string(GuidanceConvention c);

struct BihamMemberSeries {
    TrajectorySeries bohmian;
    std::vector<Vec2> delta;     // q_B,alpha - q_cl per grid index
    std::vector<double> q_b;     // quantum potential along the trajectory
};

struct BihamComparison {
    PacketSeries packet_g;
    PacketSeries packet_2;
    std::vector<TrajectorySeries> classical;  // shared reference, one per member
    std::vector<BihamMemberSeries> rep_g;
    std::vector<BihamMemberSeries> rep_2;
    std::vector<std::vector<double>> gap;  // ||q_B,g - q_B,2|| per member, per grid index

    std::size_t common_valid = 0;
    double max_gap = 0.0;
    double mean_final_delta_g = 0.0;
    double mean_final_delta_2 = 0.0;
    double var_qb_g = 0.0;  // sample variance pooled over members and times
    double var_qb_2 = 0.0;
};

// Evolves packet and Bohmian ensemble separately under both representations
// (each with its own kinetic tensor in the Riccati flow and the guidance law),
// against the shared classical reference flow J_g grad(H_g) = J_2 grad(H_2).
BihamComparison biham_compare(const BiHamiltonianPair& pair, const PacketState& packet0,
                              const std::vector<Vec2>& offsets, const TimeGrid& grid,
                              GuidanceConvention convention = GuidanceConvention::Canonical,
                              const IntegratorConfig& config = {}, int workers = 0);

}  // namespace ghostflow
