#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ghostflow/errors.hpp"
#include "ghostflow/model.hpp"
#include "ghostflow/rng.hpp"

#include <cmath>
#include <limits>

using namespace ghostflow;

namespace {
constexpr double kNu = 0.200703;
constexpr double kOmega = -0.105;
constexpr double kG = -0.0305556;
}  // namespace

TEST_CASE("ghost model carries the Lorentzian kinetic tensor and caption curvature") {
    const QuadraticModel m = build_ghost_model(kNu, kOmega, kG, 1.0);
    CHECK(m.kinetic()(0, 0) == 1.0);
    CHECK(m.kinetic()(1, 1) == -1.0);
    CHECK(m.kinetic()(0, 1) == 0.0);
    CHECK(m.curvature()(0, 0) == doctest::Approx(0.0805634).epsilon(1e-5));
    CHECK(m.curvature()(0, 1) == kG);
    CHECK(m.curvature()(1, 1) == 2.0 * kOmega);
    // Lorentzian involution
    CHECK(inf_norm(Mat2(m.kinetic().transpose() * m.kinetic() - Mat2::Identity())) == 0.0);
}

TEST_CASE("zero potential gives a free ghost particle") {
    const QuadraticModel m = build_ghost_model(0.0, 0.0, 0.0, 1.0);
    CHECK(inf_norm(m.curvature()) == 0.0);
    CHECK(flow_spectrum(m).stability_class == StabilityClass::Critical);
    for (const auto& ev : flow_spectrum(m).eigenvalues) CHECK(std::abs(ev) == 0.0);
}

TEST_CASE("the critical root of det C lies at the caption Omega") {
    const double root = kG * kG / (4.0 * kNu * kNu);
    CHECK(std::abs(root - 0.00579446) < 1e-6);
    const QuadraticModel m = build_ghost_model(kNu, root, kG, 1.0);
    CHECK(std::abs(m.det_curvature()) < 1e-9);
    // The 6-digit caption rounding sits ~2e-9 off the exact root.
    const QuadraticModel rounded = build_ghost_model(kNu, 0.00579446, kG, 1.0);
    CHECK(std::abs(rounded.det_curvature()) < 1e-8);
}

TEST_CASE("non-finite input and bad parameters are rejected") {
    CHECK_THROWS_AS(build_ghost_model(std::numeric_limits<double>::quiet_NaN(), 0, 0, 1.0),
                    ModelError);
    CHECK_THROWS_AS(build_ghost_model(0.1, 0.1, 0.0, 0.0), ModelError);
    CHECK_THROWS_AS(build_ghost_model(0.1, 0.1, 0.0, -1.0), ModelError);
    Mat2 singular = Mat2::Zero();
    CHECK_THROWS_AS(QuadraticModel(singular, Mat2::Identity(), 1.0, "bad"), ModelError);
}

TEST_CASE("flow spectrum classifies the figure models") {
    SUBCASE("fig1 is bounded-oscillatory with purely imaginary quadruple") {
        const FlowSpectrum sp = flow_spectrum(build_ghost_model(kNu, kOmega, kG, 1.0));
        double max_abs = 0.0;
        for (const auto& ev : sp.eigenvalues) max_abs = std::max(max_abs, std::abs(ev));
        for (const auto& ev : sp.eigenvalues) CHECK(std::abs(ev.real()) < 1e-8 * max_abs);
        CHECK(sp.stability_class == StabilityClass::BoundedOscillatory);
    }
    SUBCASE("critical point Omega gives the critical class") {
        const double root = kG * kG / (4.0 * kNu * kNu);
        CHECK(flow_spectrum(build_ghost_model(kNu, root, kG, 1.0)).stability_class ==
              StabilityClass::Critical);
    }
    SUBCASE("inside the window |nu^2+Omega| < |g| the flow spirals") {
        const FlowSpectrum sp = flow_spectrum(build_ghost_model(kNu + 0.1, kOmega, kG, 1.0));
        CHECK(sp.stability_class == StabilityClass::SpiralUnstable);
        bool has_growing = false;
        for (const auto& ev : sp.eigenvalues) {
            if (ev.real() > 1e-6 && std::abs(ev.imag()) > 1e-6) has_growing = true;
        }
        CHECK(has_growing);
    }
    SUBCASE("eigenvalues come in +/- conjugate quadruples") {
        RngStream rng(3, 0);
        for (int i = 0; i < 25; ++i) {
            const FlowSpectrum sp = flow_spectrum(build_ghost_model(
                rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8), rng.uniform(-0.5, 0.5), 1.0));
            for (const auto& e : sp.eigenvalues) {
                double best_neg = 1e300, best_conj = 1e300;
                for (const auto& f : sp.eigenvalues) {
                    best_neg = std::min(best_neg, std::abs(e + f));
                    best_conj = std::min(best_conj, std::abs(std::conj(e) - f));
                }
                CHECK(best_neg < 1e-10);
                CHECK(best_conj < 1e-10);
            }
        }
    }
}

TEST_CASE("bi-Hamiltonian pair construction") {
    const BiHamiltonianPair pair = build_biham_pair(kNu, kOmega, 1.0);

    SUBCASE("second kinetic tensor matches direct substitution (before canonical rescaling)") {
        const Mat2 G2_paper = 0.5 * pair.model_2().kinetic();
        CHECK(G2_paper(0, 0) == doctest::Approx(0.864603).epsilon(1e-5));
        CHECK(G2_paper(0, 1) == doctest::Approx(0.157496).epsilon(1e-5));
        CHECK(G2_paper(1, 1) == doctest::Approx(-0.549610).epsilon(1e-5));
        CHECK(G2_paper.determinant() < 0.0);  // indefinite, like G_g
    }

    SUBCASE("ghost representation carries g = -(nu^2 + Omega)") {
        const double s = kNu * kNu + kOmega;
        CHECK(pair.model_g().kinetic()(0, 0) == 2.0);
        CHECK(pair.model_g().kinetic()(1, 1) == -2.0);
        CHECK(pair.model_g().curvature()(0, 1) == doctest::Approx(-s).epsilon(1e-12));
    }

    SUBCASE("degenerate parameters are rejected") {
        CHECK_THROWS_AS(build_biham_pair(0.3, 0.09, 1.0), DegeneracyError);
    }

    SUBCASE("Poisson tensors are antisymmetric") {
        CHECK((pair.J_g() + pair.J_g().transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK((pair.J_2() + pair.J_2().transpose()).cwiseAbs().maxCoeff() < 1e-15);
    }
}

TEST_CASE("second-representation centre flow is isotropic at the degenerate point") {
    // G_2 C_2 = (nu^2 - Omega) I: the canonical flow of H_2 is an isotropic
    // oscillator even though the shared Poisson flow is defective.
    const BiHamiltonianPair pair = build_biham_pair(kNu, kOmega, 1.0);
    const Mat2 prod = pair.model_2().kinetic() * pair.model_2().curvature();
    const double d = kNu * kNu - kOmega;
    CHECK(inf_norm(Mat2(prod - d * Mat2::Identity())) < 1e-15);
    // The ghost representation's own canonical flow has the degenerate
    // double frequency sqrt(2(nu^2 - Omega)); the double root splits like
    // sqrt(roundoff) under the quadratic formula.
    const Mat2 prod_g = pair.model_g().kinetic() * pair.model_g().curvature();
    const auto sq = eigenvalues_2x2(Mat2(-prod_g));
    CHECK(std::abs(sq[0] - sq[1]) < 1e-7);
    CHECK(std::abs(sq[0].real() - (-2.0 * d)) < 1e-7);
}

TEST_CASE("classical equivalence residual") {
    const BiHamiltonianPair pair = build_biham_pair(kNu, kOmega, 1.0);

    SUBCASE("hand value at z = (1,0,0,0)") {
        Vec4 z;
        z << 1.0, 0.0, 0.0, 0.0;
        const Vec4 v = pair.J_g() * (pair.hessian_g() * z);
        CHECK(v[0] == 0.0);
        CHECK(v[1] == 0.0);
        CHECK(v[2] == doctest::Approx(-0.0805634).epsilon(1e-5));
        CHECK(v[3] == doctest::Approx(-0.0647183).epsilon(1e-5));
        CHECK(classical_equivalence_residual(pair, z) < 1e-12);
    }

    SUBCASE("vanishes at the origin") {
        CHECK(classical_equivalence_residual(pair, Vec4::Zero()) == 0.0);
    }

    SUBCASE("stays below 1e-12 on a uniform sweep") {
        RngStream rng(42, 0);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            Vec4 z;
            for (int j = 0; j < 4; ++j) z[j] = rng.uniform(-5.0, 5.0);
            worst = std::max(worst, classical_equivalence_residual(pair, z));
        }
        CHECK(worst < 1e-12);
    }

    SUBCASE("flow matrices of both representations agree") {
        CHECK((pair.flow_matrix_g() - pair.flow_matrix_2()).cwiseAbs().maxCoeff() < 1e-12);
    }
}
