#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>

namespace ghostflow {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;
using CMat2 = Eigen::Matrix2cd;
using CMat4 = Eigen::Matrix4cd;
using Complex = std::complex<double>;

inline Mat2 symmetrized(const Mat2& m) { return 0.5 * (m + m.transpose()); }

inline double inf_norm(const Mat2& m) { return m.cwiseAbs().maxCoeff(); }
inline double inf_norm(const Vec2& v) { return v.cwiseAbs().maxCoeff(); }
inline double inf_norm(const Vec4& v) { return v.cwiseAbs().maxCoeff(); }
inline double inf_norm(const CMat2& m) { return m.cwiseAbs().maxCoeff(); }

template <typename M>
bool all_finite(const M& m) {
    return m.allFinite();
}

// Eigenvalues of a symmetric 2x2 [[a,c],[c,b]], ascending.
inline std::array<double, 2> sym_eigenvalues(const Mat2& s) {
    const double mean = 0.5 * (s(0, 0) + s(1, 1));
    const double rad = std::hypot(0.5 * (s(0, 0) - s(1, 1)), s(0, 1));
    return {mean - rad, mean + rad};
}

inline double min_eigenvalue_sym(const Mat2& s) { return sym_eigenvalues(s)[0]; }

// Eigenvalues of a general real 2x2 via the characteristic polynomial.
inline std::array<Complex, 2> eigenvalues_2x2(const Mat2& m) {
    const Complex half_tr(0.5 * m.trace(), 0.0);
    const Complex disc = half_tr * half_tr - Complex(m.determinant(), 0.0);
    const Complex root = std::sqrt(disc);
    return {half_tr - root, half_tr + root};
}

// Q|D|Q^T for a symmetric matrix (eigenvalue magnitudes, eigenvectors kept).
inline Mat2 abs_sym(const Mat2& s) {
    Eigen::SelfAdjointEigenSolver<Mat2> es(s);
    return es.eigenvectors() * es.eigenvalues().cwiseAbs().asDiagonal() *
           es.eigenvectors().transpose();
}

inline Mat2 inverse_2x2(const Mat2& m) {
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    Mat2 inv;
    inv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
    return inv / det;
}

}  // namespace ghostflow
