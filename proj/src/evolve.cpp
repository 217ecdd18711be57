#include "ghostflow/evolve.hpp"

#include "ghostflow/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <utility>

namespace ghostflow {

bool PacketState::normalisable() const { return min_eigenvalue_sym(A) > 0.0; }

double normalisability_margin(const PacketState& state) { return min_eigenvalue_sym(state.A); }

PacketDerivative riccati_rhs(const PacketState& state, const QuadraticModel& model) {
    const Mat2& G = model.kinetic();
    const Mat2& C = model.curvature();
    PacketDerivative d;
    d.dq_c = model.velocity(state.p_c);
    d.dp_c = model.force(state.q_c);
    d.dA = state.A * G * state.B + state.B * G * state.A;
    d.dB = C + state.B * G * state.B - state.A * G * state.A;
    return d;
}

std::size_t TimeGrid::intervals() const {
    if (!(step > 0.0)) throw GridError("TimeGrid: step must be positive");
    if (!(t_end >= t_start)) throw GridError("TimeGrid: t_end must not precede t_start");
    return static_cast<std::size_t>(std::llround((t_end - t_start) / step));
}

bool TimeGrid::same_as(const TimeGrid& other) const {
    return t_start == other.t_start && step == other.step && intervals() == other.intervals();
}

PacketSeries::PacketSeries(QuadraticModel model, TimeGrid grid, std::vector<PacketState> fine,
                           bool truncated)
    : model_(std::move(model)), grid_(grid), fine_(std::move(fine)), truncated_(truncated) {}

double PacketSeries::truncation_time() const {
    return truncated_ ? state(size() - 1).t : grid_.t_end;
}

PacketState PacketSeries::interpolate(double t) const {
    const std::size_t n = size();
    if (n == 1 || t <= state(0).t) return state(0);
    if (t >= state(n - 1).t) return state(n - 1);
    const double x = (t - grid_.t_start) / grid_.step;
    std::size_t i = static_cast<std::size_t>(x);
    if (i >= n - 1) i = n - 2;
    const double w = x - static_cast<double>(i);
    const PacketState& a = state(i);
    const PacketState& b = state(i + 1);
    PacketState out;
    out.t = t;
    out.q_c = (1.0 - w) * a.q_c + w * b.q_c;
    out.p_c = (1.0 - w) * a.p_c + w * b.p_c;
    out.A = (1.0 - w) * a.A + w * b.A;
    out.B = (1.0 - w) * a.B + w * b.B;
    return out;
}

namespace {

bool within_guard(const PacketState& s, double guard) {
    return all_finite(s.q_c) && all_finite(s.p_c) && all_finite(s.A) && all_finite(s.B) &&
           inf_norm(s.q_c) <= guard && inf_norm(s.p_c) <= guard && inf_norm(s.A) <= guard &&
           inf_norm(s.B) <= guard;
}

PacketState advance_rk4(const PacketState& s, const QuadraticModel& model, double h) {
    const PacketDerivative k1 = riccati_rhs(s, model);
    PacketState s2{s.t + 0.5 * h, s.q_c + 0.5 * h * k1.dq_c, s.p_c + 0.5 * h * k1.dp_c,
                   s.A + 0.5 * h * k1.dA, s.B + 0.5 * h * k1.dB};
    const PacketDerivative k2 = riccati_rhs(s2, model);
    PacketState s3{s.t + 0.5 * h, s.q_c + 0.5 * h * k2.dq_c, s.p_c + 0.5 * h * k2.dp_c,
                   s.A + 0.5 * h * k2.dA, s.B + 0.5 * h * k2.dB};
    const PacketDerivative k3 = riccati_rhs(s3, model);
    PacketState s4{s.t + h, s.q_c + h * k3.dq_c, s.p_c + h * k3.dp_c, s.A + h * k3.dA,
                   s.B + h * k3.dB};
    const PacketDerivative k4 = riccati_rhs(s4, model);

    PacketState out;
    out.t = s.t + h;
    out.q_c = s.q_c + (h / 6.0) * (k1.dq_c + 2.0 * k2.dq_c + 2.0 * k3.dq_c + k4.dq_c);
    out.p_c = s.p_c + (h / 6.0) * (k1.dp_c + 2.0 * k2.dp_c + 2.0 * k3.dp_c + k4.dp_c);
    out.A = symmetrized(s.A + (h / 6.0) * (k1.dA + 2.0 * k2.dA + 2.0 * k3.dA + k4.dA));
    out.B = symmetrized(s.B + (h / 6.0) * (k1.dB + 2.0 * k2.dB + 2.0 * k3.dB + k4.dB));
    return out;
}

}  // namespace

PacketSeries evolve_packet(const PacketState& initial, const QuadraticModel& model,
                           const TimeGrid& grid, const IntegratorConfig& config) {
    if (!(grid.step > 0.0)) throw GridError("evolve_packet: grid step must be positive");
    const std::size_t n_intervals = grid.intervals();

    PacketState s = initial;
    s.t = grid.t_start;
    s.A = symmetrized(initial.A);
    s.B = symmetrized(initial.B);
    if (!within_guard(s, config.blowup_guard)) {
        throw ModelError("evolve_packet: initial state is not finite");
    }

    std::vector<PacketState> fine;
    fine.reserve(2 * n_intervals + 1);
    fine.push_back(s);

    const double h = 0.5 * grid.step;
    bool truncated = false;
    for (std::size_t i = 0; i < n_intervals; ++i) {
        const PacketState half = advance_rk4(fine.back(), model, h);
        if (!within_guard(half, config.blowup_guard)) {
            truncated = true;
            break;
        }
        PacketState full = advance_rk4(half, model, h);
        if (!within_guard(full, config.blowup_guard)) {
            truncated = true;
            break;
        }
        full.t = grid.time(i + 1);  // keep grid times exact
        fine.push_back(half);
        fine.push_back(full);
    }
    return PacketSeries(model, grid, std::move(fine), truncated);
}

CMat2 riccati_linear_oracle(const CMat2& K0, const QuadraticModel& model, double t) {
    if (!std::isfinite(t)) throw GridError("riccati_linear_oracle: t must be finite");
    const Complex iu(0.0, 1.0);
    CMat4 L = CMat4::Zero();
    L.block<2, 2>(0, 2) = iu * model.kinetic();
    L.block<2, 2>(2, 0) = iu * model.curvature();
    const CMat4 W = (L * t).exp();

    Eigen::Matrix<Complex, 4, 2> M0;
    M0.block<2, 2>(0, 0) = CMat2::Identity();
    M0.block<2, 2>(2, 0) = K0;
    const Eigen::Matrix<Complex, 4, 2> XY = W * M0;
    const CMat2 X = XY.block<2, 2>(0, 0);
    const CMat2 Y = XY.block<2, 2>(2, 0);

    if (std::abs(X.determinant()) < 1e-12) {
        throw OracleSingularityError("riccati_linear_oracle: det X(t) below 1e-12 (focal point)");
    }
    const CMat2 K = Y * X.inverse();
    return 0.5 * (K + K.transpose());
}

}  // namespace ghostflow
