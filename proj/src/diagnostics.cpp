#include "ghostflow/diagnostics.hpp"

#include "ghostflow/errors.hpp"
#include "ghostflow/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace ghostflow {

Mat2 curvature_mismatch(const Mat2& A, const QuadraticModel& model) {
    return symmetrized(model.curvature() - A * model.kinetic() * A);
}

RigidObstruction check_rigid_obstruction(const Mat2& A, const QuadraticModel& model, double tol) {
    RigidObstruction out;
    out.lambda_inf = inf_norm(curvature_mismatch(A, model));
    out.det_c = model.det_curvature();
    out.lambda_vanishes = out.lambda_inf < tol;
    out.consistent = !out.lambda_vanishes || out.det_c < 0.0;
    return out;
}

double quantum_potential(const Vec2& q, const PacketState& state, const QuadraticModel& model) {
    return quantum_potential(q, state, model.kinetic(), model.hbar());
}

double quantum_potential(const Vec2& q, const PacketState& state, const Mat2& kinetic,
                         double hbar) {
    const Vec2 aw = state.A * (q - state.q_c);
    return -0.5 * aw.dot(kinetic * aw) + 0.5 * hbar * (kinetic * state.A).trace();
}

double quantum_potential_fd(const Vec2& q, const PacketState& state, const QuadraticModel& model,
                            double h) {
    if (!(h > 0.0)) throw GridError("quantum_potential_fd: step must be positive");
    const double hbar = model.hbar();
    auto amplitude = [&](const Vec2& x) {
        const Vec2 w = x - state.q_c;
        const double r = std::exp(-0.5 / hbar * w.dot(state.A * w));
        if (!std::isfinite(r)) {
            throw AmplitudeUnderflowError("quantum_potential_fd: amplitude overflow at stencil");
        }
        return r;
    };
    const double r0 = amplitude(q);
    if (r0 <= 1e-300) {
        throw AmplitudeUnderflowError("quantum_potential_fd: amplitude below 1e-300");
    }
    const Vec2 ex(h, 0.0), ey(0.0, h);
    const double rxx = (amplitude(q + ex) - 2.0 * r0 + amplitude(q - ex)) / (h * h);
    const double ryy = (amplitude(q + ey) - 2.0 * r0 + amplitude(q - ey)) / (h * h);
    const double rxy = (amplitude(q + ex + ey) - amplitude(q + ex - ey) -
                        amplitude(q - ex + ey) + amplitude(q - ex - ey)) /
                       (4.0 * h * h);
    const Mat2& G = model.kinetic();
    const double contraction = G(0, 0) * rxx + 2.0 * G(0, 1) * rxy + G(1, 1) * ryy;
    return -0.5 * hbar * hbar * contraction / r0;
}

std::vector<DiagnosticsSample> diagnostics_series(const TrajectorySeries& bohmian,
                                                  const TrajectorySeries& classical,
                                                  const PacketSeries& packet) {
    if (!bohmian.grid.same_as(packet.grid()) || !classical.grid.same_as(packet.grid())) {
        throw GridError("diagnostics_series: series do not share the packet grid");
    }
    const std::size_t n = std::min({bohmian.valid_count(), classical.valid_count(),
                                    packet.size()});
    std::vector<DiagnosticsSample> out(n);
    const Mat2& G = packet.model().kinetic();
    for (std::size_t i = 0; i < n; ++i) {
        const PacketState& s = packet.state(i);
        DiagnosticsSample& d = out[i];
        d.t = s.t;
        d.u = bohmian.positions[i] - s.q_c;
        d.delta = bohmian.positions[i] - classical.positions[i];
        d.lambda = curvature_mismatch(s.A, packet.model());
        d.det_lambda = d.lambda.determinant();
        d.s_m_eigs = sym_eigenvalues(symmetrized(-(G * s.B)));
        d.q_b = quantum_potential(bohmian.positions[i], s, packet.model());
    }
    return out;
}

namespace {

// Pairwise sum in fixed order: order-independent of scheduling and bit-stable.
double pairwise_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
    if (hi - lo <= 4) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += v[i];
        return s;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

double pairwise_mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return pairwise_sum(v, 0, v.size()) / static_cast<double>(v.size());
}

}  // namespace

EnsembleDiagnostics aggregate_diagnostics(std::vector<std::vector<DiagnosticsSample>> members) {
    EnsembleDiagnostics out;
    out.members = std::move(members);
    if (out.members.empty()) return out;
    out.common_valid = out.members.front().size();
    for (const auto& m : out.members) out.common_valid = std::min(out.common_valid, m.size());

    out.mean_u_norm.resize(out.common_valid);
    out.mean_delta_norm.resize(out.common_valid);
    std::vector<double> us(out.members.size()), ds(out.members.size());
    for (std::size_t i = 0; i < out.common_valid; ++i) {
        for (std::size_t k = 0; k < out.members.size(); ++k) {
            us[k] = out.members[k][i].u.norm();
            ds[k] = out.members[k][i].delta.norm();
        }
        out.mean_u_norm[i] = pairwise_mean(us);
        out.mean_delta_norm[i] = pairwise_mean(ds);
    }
    return out;
}

const char* to_string(RegimeKind k) {
    switch (k) {
        case RegimeKind::RigidTransport: return "rigid-transport";
        case RegimeKind::QuasiSemiclassical: return "quasi-semiclassical";
        case RegimeKind::SpiralInstability: return "spiral-instability";
        case RegimeKind::CriticalRunaway: return "critical-runaway";
        case RegimeKind::NonNormalisableSector: return "non-normalisable-sector";
    }
    return "unknown";
}

const char* to_string(GuidanceConvention c) {
    return c == GuidanceConvention::Canonical ? "canonical" : "paper-literal";
}

namespace {

// Max over the late half vs the early half of the series.
bool stays_bounded(const std::vector<double>& series, double ratio) {
    if (series.size() < 4) return true;
    const std::size_t half = series.size() / 2;
    double early = 0.0, late = 0.0;
    for (std::size_t i = 0; i < half; ++i) early = std::max(early, series[i]);
    for (std::size_t i = half; i < series.size(); ++i) late = std::max(late, series[i]);
    return late <= ratio * std::max(early, 1e-30);
}

}  // namespace

RegimeLabel classify_regime(const QuadraticModel& model, const PacketSeries& packet,
                            const EnsembleDiagnostics& diag, const RegimeThresholds& th) {
    std::map<std::string, double> ev;

    double min_margin = std::numeric_limits<double>::infinity();
    double lambda_sup = 0.0;
    for (std::size_t i = 0; i < packet.size(); ++i) {
        const PacketState& s = packet.state(i);
        min_margin = std::min(min_margin, min_eigenvalue_sym(s.A));
        lambda_sup = std::max(lambda_sup, inf_norm(curvature_mismatch(s.A, model)));
    }
    const double eps_lambda = th.lambda_rigid_rel * inf_norm(model.curvature());
    const double det_c = model.det_curvature();
    const FlowSpectrum spec = flow_spectrum(model, th.spectral);

    double u_growth = 0.0;
    bool u_bounded = true, delta_bounded = true;
    if (!diag.mean_u_norm.empty()) {
        const double u0 = diag.mean_u_norm.front();
        const double u1 = diag.mean_u_norm.back();
        u_growth = u0 > 0.0 ? u1 / u0 : (u1 > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
        u_bounded = stays_bounded(diag.mean_u_norm, th.bounded_ratio);
        delta_bounded = stays_bounded(diag.mean_delta_norm, th.bounded_ratio);
    }

    ev["min_margin"] = min_margin;
    ev["sup_lambda_inf"] = lambda_sup;
    ev["lambda_threshold"] = eps_lambda;
    ev["det_c"] = det_c;
    ev["det_c_tol"] = th.det_c_tol;
    ev["spectral_class"] = static_cast<double>(spec.stability_class);
    ev["u_growth_factor"] = u_growth;
    ev["u_bounded"] = u_bounded ? 1.0 : 0.0;
    ev["delta_bounded"] = delta_bounded ? 1.0 : 0.0;
    ev["packet_truncated"] = packet.truncated() ? 1.0 : 0.0;
    ev["ensemble_truncated"] = diag.any_truncated ? 1.0 : 0.0;

    if (min_margin <= 0.0) return {RegimeKind::NonNormalisableSector, ev};
    if (std::abs(det_c) <= th.det_c_tol && lambda_sup > eps_lambda) {
        return {RegimeKind::CriticalRunaway, ev};
    }
    if (spec.stability_class == StabilityClass::SpiralUnstable &&
        u_growth > th.spiral_growth_min) {
        return {RegimeKind::SpiralInstability, ev};
    }
    if (lambda_sup < eps_lambda) return {RegimeKind::RigidTransport, ev};
    if (u_bounded && delta_bounded) return {RegimeKind::QuasiSemiclassical, ev};
    throw InconclusiveRegimeError(ev);
}

BihamComparison biham_compare(const BiHamiltonianPair& pair, const PacketState& packet0,
                              const std::vector<Vec2>& offsets, const TimeGrid& grid,
                              GuidanceConvention convention, const IntegratorConfig& config,
                              int workers) {
    const QuadraticModel& mg = pair.model_g();
    const QuadraticModel& m2 = pair.model_2();
    const Mat2 guide_g =
        convention == GuidanceConvention::Canonical ? mg.kinetic() : Mat2(0.5 * mg.kinetic());
    const Mat2 guide_2 =
        convention == GuidanceConvention::Canonical ? m2.kinetic() : Mat2(0.5 * m2.kinetic());

    BihamComparison out{evolve_packet(packet0, mg, grid, config),
                        evolve_packet(packet0, m2, grid, config),
                        {}, {}, {}, {}};

    const std::size_t m = offsets.size();
    out.classical.resize(m);
    out.rep_g.resize(m);
    out.rep_2.resize(m);
    out.gap.resize(m);

    parallel_for(m, workers, [&](std::size_t k) {
        const Vec2 q0 = packet0.q_c + offsets[k];
        const Vec2 p0 = packet0.p_c - packet0.B * (q0 - packet0.q_c);

        TrajectorySeries cl = evolve_classical(q0, p0, mg, grid, config);
        cl.member_id = static_cast<int>(k);

        BohmianTrajectory bg = evolve_bohmian(q0, out.packet_g, guide_g, config);
        BohmianTrajectory b2 = evolve_bohmian(q0, out.packet_2, guide_2, config);
        bg.series.member_id = static_cast<int>(k);
        b2.series.member_id = static_cast<int>(k);

        BihamMemberSeries sg, s2;
        const std::size_t ng =
            std::min({bg.series.valid_count(), cl.valid_count(), out.packet_g.size()});
        const std::size_t n2 =
            std::min({b2.series.valid_count(), cl.valid_count(), out.packet_2.size()});
        sg.delta.reserve(ng);
        sg.q_b.reserve(ng);
        for (std::size_t i = 0; i < ng; ++i) {
            sg.delta.push_back(bg.series.positions[i] - cl.positions[i]);
            sg.q_b.push_back(quantum_potential(bg.series.positions[i], out.packet_g.state(i),
                                               guide_g, mg.hbar()));
        }
        s2.delta.reserve(n2);
        s2.q_b.reserve(n2);
        for (std::size_t i = 0; i < n2; ++i) {
            s2.delta.push_back(b2.series.positions[i] - cl.positions[i]);
            s2.q_b.push_back(quantum_potential(b2.series.positions[i], out.packet_2.state(i),
                                               guide_2, m2.hbar()));
        }

        std::vector<double> gap_k(std::min(ng, n2));
        for (std::size_t i = 0; i < gap_k.size(); ++i) {
            gap_k[i] = (bg.series.positions[i] - b2.series.positions[i]).norm();
        }

        sg.bohmian = std::move(bg.series);
        s2.bohmian = std::move(b2.series);
        out.classical[k] = std::move(cl);
        out.rep_g[k] = std::move(sg);
        out.rep_2[k] = std::move(s2);
        out.gap[k] = std::move(gap_k);
    });

    // Summaries over the common valid range, in fixed member order.
    out.common_valid = grid.count();
    for (std::size_t k = 0; k < m; ++k) {
        out.common_valid = std::min({out.common_valid, out.rep_g[k].delta.size(),
                                     out.rep_2[k].delta.size(), out.gap[k].size()});
    }
    for (std::size_t k = 0; k < m; ++k) {
        for (std::size_t i = 0; i < out.common_valid; ++i) {
            out.max_gap = std::max(out.max_gap, out.gap[k][i]);
        }
    }
    if (out.common_valid > 0 && m > 0) {
        std::vector<double> fg(m), f2(m);
        for (std::size_t k = 0; k < m; ++k) {
            fg[k] = out.rep_g[k].delta[out.common_valid - 1].norm();
            f2[k] = out.rep_2[k].delta[out.common_valid - 1].norm();
        }
        out.mean_final_delta_g = pairwise_mean(fg);
        out.mean_final_delta_2 = pairwise_mean(f2);

        auto pooled_variance = [&](const std::vector<BihamMemberSeries>& reps) {
            std::vector<double> all;
            all.reserve(m * out.common_valid);
            for (std::size_t k = 0; k < m; ++k) {
                for (std::size_t i = 0; i < out.common_valid; ++i) {
                    all.push_back(reps[k].q_b[i]);
                }
            }
            const double mean = pairwise_mean(all);
            std::vector<double> sq(all.size());
            for (std::size_t i = 0; i < all.size(); ++i) sq[i] = (all[i] - mean) * (all[i] - mean);
            return pairwise_mean(sq);
        };
        out.var_qb_g = pooled_variance(out.rep_g);
        out.var_qb_2 = pooled_variance(out.rep_2);
    }
    return out;
}

}  // namespace ghostflow
