#pragma once

#include "ghostflow/linalg.hpp"

#include <array>
#include <string>

namespace ghostflow {

// Quadratic Hamiltonian H = 1/2 p^T G p + 1/2 q^T C q on a 2d configuration
// space. G is the (possibly indefinite) kinetic tensor, C the potential
// curvature. Both are stored exactly symmetric; values are immutable.
class QuadraticModel {
public:
    QuadraticModel(const Mat2& kinetic, const Mat2& curvature, double hbar, std::string label);

    const Mat2& kinetic() const { return G_; }
    const Mat2& curvature() const { return C_; }
    double hbar() const { return hbar_; }
    const std::string& label() const { return label_; }

    double det_kinetic() const { return G_.determinant(); }
    double det_curvature() const { return C_.determinant(); }

    Vec2 velocity(const Vec2& p) const { return G_ * p; }
    Vec2 force(const Vec2& q) const { return -(C_ * q); }

    // [[0, G], [-C, 0]] acting on z = (q, p).
    Mat4 flow_matrix() const;

private:
    Mat2 G_;
    Mat2 C_;
    double hbar_;
    std::string label_;
};

// H = 1/2 (p_x^2 - p_y^2) + nu^2 x^2 + Omega y^2 + g x y, i.e.
// G = diag(1, -1) and C = [[2 nu^2, g], [g, 2 Omega]].
QuadraticModel build_ghost_model(double nu, double Omega, double g, double hbar);

enum class StabilityClass {
    BoundedOscillatory,
    SpiralUnstable,
    Critical,
    HyperbolicUnstable,
};

const char* to_string(StabilityClass c);

struct SpectralTolerances {
    double spectral_rel = 1e-8;  // relative to the largest |eigenvalue|
    double det_c_abs = 1e-9;
};

// Spectrum of the linear flow q' = Gp, p' = -Cq. The eigenvalues are built as
// +/- sqrt of the 2x2 spectrum of -GC, so the Hamiltonian quadruple symmetry
// {l, -l, conj(l), -conj(l)} holds exactly, including at defective points.
struct FlowSpectrum {
    Mat4 F;
    std::array<Complex, 4> eigenvalues;
    StabilityClass stability_class;
};

FlowSpectrum flow_spectrum(const QuadraticModel& model, const SpectralTolerances& tol = {});

// The degenerate pair: the ghost representation (H_g, J_g) with canonical
// Poisson tensor, and the second representation (H_2, J_2). Both models are
// stored in the canonical normalisation H = 1/2 p^T G p + 1/2 q^T C q, so the
// single guidance law q' = G grad(S) reproduces the classical flow for both.
// The literal tensors of the halved-normalisation convention are G/2.
class BiHamiltonianPair {
public:
    BiHamiltonianPair(QuadraticModel model_g, QuadraticModel model_2, const Mat4& J_g,
                      const Mat4& J_2, double nu, double Omega);

    const QuadraticModel& model_g() const { return model_g_; }
    const QuadraticModel& model_2() const { return model_2_; }
    const Mat4& J_g() const { return J_g_; }
    const Mat4& J_2() const { return J_2_; }
    double nu() const { return nu_; }
    double Omega() const { return Omega_; }

    // Hessian of H_alpha in z = (q, p) ordering: blkdiag(C, G).
    Mat4 hessian_g() const;
    Mat4 hessian_2() const;

    // J_alpha * hessian_alpha; the two agree entrywise up to roundoff.
    Mat4 flow_matrix_g() const { return J_g_ * hessian_g(); }
    Mat4 flow_matrix_2() const { return J_2_ * hessian_2(); }

private:
    QuadraticModel model_g_;
    QuadraticModel model_2_;
    Mat4 J_g_;
    Mat4 J_2_;
    double nu_;
    double Omega_;
};

// Builds the pair from (nu, Omega). Throws DegeneracyError when nu^2 == Omega
// within the degeneracy tolerance.
BiHamiltonianPair build_biham_pair(double nu, double Omega, double hbar);

// || J_g grad H_g(z) - J_2 grad H_2(z) ||_inf. Gradients are exact linear maps.
double classical_equivalence_residual(const BiHamiltonianPair& pair, const Vec4& z);

}  // namespace ghostflow
