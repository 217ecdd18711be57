#include "ghostflow/model.hpp"

#include "ghostflow/errors.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace ghostflow {

QuadraticModel::QuadraticModel(const Mat2& kinetic, const Mat2& curvature, double hbar,
                               std::string label)
    : G_(symmetrized(kinetic)), C_(symmetrized(curvature)), hbar_(hbar), label_(std::move(label)) {
    if (!all_finite(G_) || !all_finite(C_) || !std::isfinite(hbar_)) {
        throw ModelError("QuadraticModel: non-finite input for '" + label_ + "'");
    }
    if (!(hbar_ > 0.0)) {
        throw ModelError("QuadraticModel: hbar must be positive for '" + label_ + "'");
    }
    if (std::abs(G_.determinant()) <= 1e-12) {
        throw ModelError("QuadraticModel: kinetic tensor is singular for '" + label_ + "'");
    }
}

Mat4 QuadraticModel::flow_matrix() const {
    Mat4 F = Mat4::Zero();
    F.block<2, 2>(0, 2) = G_;
    F.block<2, 2>(2, 0) = -C_;
    return F;
}

QuadraticModel build_ghost_model(double nu, double Omega, double g, double hbar) {
    if (!std::isfinite(nu) || !std::isfinite(Omega) || !std::isfinite(g)) {
        throw ModelError("build_ghost_model: non-finite parameter");
    }
    Mat2 G;
    G << 1.0, 0.0, 0.0, -1.0;
    Mat2 C;
    C << 2.0 * nu * nu, g, g, 2.0 * Omega;
    std::ostringstream label;
    label << "ghost(nu=" << nu << ", Omega=" << Omega << ", g=" << g << ")";
    return QuadraticModel(G, C, hbar, label.str());
}

const char* to_string(StabilityClass c) {
    switch (c) {
        case StabilityClass::BoundedOscillatory: return "bounded-oscillatory";
        case StabilityClass::SpiralUnstable: return "spiral-unstable";
        case StabilityClass::Critical: return "critical";
        case StabilityClass::HyperbolicUnstable: return "hyperbolic-unstable";
    }
    return "unknown";
}

FlowSpectrum flow_spectrum(const QuadraticModel& model, const SpectralTolerances& tol) {
    FlowSpectrum out;
    out.F = model.flow_matrix();

    // lambda^2 runs over the spectrum of -GC (F^2 = blkdiag(-GC, -CG)).
    const Mat2 minus_gc = -(model.kinetic() * model.curvature());
    const auto squares = eigenvalues_2x2(minus_gc);
    const Complex r0 = std::sqrt(squares[0]);
    const Complex r1 = std::sqrt(squares[1]);
    out.eigenvalues = {r0, -r0, r1, -r1};

    double max_abs = 0.0;
    for (const auto& ev : out.eigenvalues) max_abs = std::max(max_abs, std::abs(ev));
    const double eps = tol.spectral_rel * max_abs;

    bool spiral = false;
    bool all_imaginary = true;
    for (const auto& ev : out.eigenvalues) {
        if (ev.real() > eps && std::abs(ev.imag()) > eps) spiral = true;
        if (std::abs(ev.real()) > eps) all_imaginary = false;
    }

    if (spiral) {
        out.stability_class = StabilityClass::SpiralUnstable;
    } else if (std::abs(model.det_curvature()) <= tol.det_c_abs) {
        out.stability_class = StabilityClass::Critical;
    } else if (all_imaginary) {
        out.stability_class = StabilityClass::BoundedOscillatory;
    } else {
        out.stability_class = StabilityClass::HyperbolicUnstable;
    }
    return out;
}

BiHamiltonianPair::BiHamiltonianPair(QuadraticModel model_g, QuadraticModel model_2,
                                     const Mat4& J_g, const Mat4& J_2, double nu, double Omega)
    : model_g_(std::move(model_g)),
      model_2_(std::move(model_2)),
      J_g_(J_g),
      J_2_(J_2),
      nu_(nu),
      Omega_(Omega) {
    if ((J_g_ + J_g_.transpose()).cwiseAbs().maxCoeff() > 1e-14 ||
        (J_2_ + J_2_.transpose()).cwiseAbs().maxCoeff() > 1e-14) {
        throw ModelError("BiHamiltonianPair: Poisson tensors must be antisymmetric");
    }
}

Mat4 BiHamiltonianPair::hessian_g() const {
    Mat4 H = Mat4::Zero();
    H.block<2, 2>(0, 0) = model_g_.curvature();
    H.block<2, 2>(2, 2) = model_g_.kinetic();
    return H;
}

Mat4 BiHamiltonianPair::hessian_2() const {
    Mat4 H = Mat4::Zero();
    H.block<2, 2>(0, 0) = model_2_.curvature();
    H.block<2, 2>(2, 2) = model_2_.kinetic();
    return H;
}

BiHamiltonianPair build_biham_pair(double nu, double Omega, double hbar) {
    if (!std::isfinite(nu) || !std::isfinite(Omega)) {
        throw ModelError("build_biham_pair: non-finite parameter");
    }
    const double nu2 = nu * nu;
    const double d = nu2 - Omega;
    if (std::abs(d) <= 1e-10) {
        throw DegeneracyError("build_biham_pair: nu^2 - Omega vanishes");
    }
    const double s = nu2 + Omega;
    const double sqrt2 = std::sqrt(2.0);

    // Ghost representation, canonical normalisation (kinetic doubled because
    // the pair drops the overall 1/2): G_g = diag(2,-2), cross coupling -(nu^2+Omega).
    Mat2 Gg;
    Gg << 2.0, 0.0, 0.0, -2.0;
    Mat2 Cg;
    Cg << 2.0 * nu2, -s, -s, 2.0 * Omega;
    QuadraticModel model_g(Gg, Cg, hbar, "biham-ghost");

    // Second representation: G_2 and the potential read off H_2, canonicalised
    // the same way (both are twice the literal tensors).
    Mat2 G2;
    G2 << (nu2 - 3.0 * Omega), -s, -s, (Omega - 3.0 * nu2);
    G2 /= sqrt2 * d;
    Mat2 C2;
    C2 << (3.0 * nu2 - Omega), -s, -s, (3.0 * Omega - nu2);
    C2 /= 2.0 * sqrt2;
    QuadraticModel model_2(G2, C2, hbar, "biham-second");

    Mat4 Jg = Mat4::Zero();
    Jg.block<2, 2>(0, 2) = Mat2::Identity();
    Jg.block<2, 2>(2, 0) = -Mat2::Identity();

    Mat4 J2 = Mat4::Zero();
    Mat2 T;
    T << (3.0 * nu2 - Omega), -s, s, (nu2 - 3.0 * Omega);
    T /= sqrt2 * d;
    J2.block<2, 2>(0, 2) = T;
    J2.block<2, 2>(2, 0) = -T.transpose();

    return BiHamiltonianPair(std::move(model_g), std::move(model_2), Jg, J2, nu, Omega);
}

double classical_equivalence_residual(const BiHamiltonianPair& pair, const Vec4& z) {
    const Vec4 vg = pair.J_g() * (pair.hessian_g() * z);
    const Vec4 v2 = pair.J_2() * (pair.hessian_2() * z);
    return inf_norm(Vec4(vg - v2));
}

}  // namespace ghostflow
