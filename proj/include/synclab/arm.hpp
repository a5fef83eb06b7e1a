#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "synclab/errors.hpp"

namespace synclab {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat2x5 = Eigen::Matrix<double, 2, 5>;

/**
 * Two-link planar elbow arm  M(q) q̈ + C(q, q̇) q̇ + G(q) = τ  with lumped
 * parameters θ = (θ₁..θ₅):
 *
 *   M = [ θ₁+θ₂+2θ₃ cos q₂   θ₂+θ₃ cos q₂ ]      C = [ −θ₃ q̇₂ s₂   −θ₃(q̇₁+q̇₂) s₂ ]
 *       [ θ₂+θ₃ cos q₂       θ₂           ],         [  θ₃ q̇₁ s₂    0            ],
 *
 *   G = ( θ₄ g cos q₁ + θ₅ g cos(q₁+q₂),  θ₅ g cos(q₁+q₂) ).
 */
struct TwoLinkArmParams {
    Vec5 theta = Vec5::Zero();
    double gravity = 9.8;
};

struct ArmState {
    Vec2 q = Vec2::Zero();
    Vec2 qd = Vec2::Zero();
};

inline Mat2 mass_matrix(const TwoLinkArmParams& p, const Vec2& q) {
    const double c2 = std::cos(q(1));
    Mat2 m;
    m << p.theta(0) + p.theta(1) + 2.0 * p.theta(2) * c2, p.theta(1) + p.theta(2) * c2,
         p.theta(1) + p.theta(2) * c2, p.theta(1);
    return m;
}

inline Mat2 coriolis_matrix(const TwoLinkArmParams& p, const Vec2& q, const Vec2& qd) {
    const double s2 = std::sin(q(1));
    Mat2 c;
    c << -p.theta(2) * qd(1) * s2, -p.theta(2) * (qd(0) + qd(1)) * s2,
          p.theta(2) * qd(0) * s2, 0.0;
    return c;
}

inline Vec2 gravity_vector(const TwoLinkArmParams& p, const Vec2& q) {
    const double c1 = std::cos(q(0));
    const double c12 = std::cos(q(0) + q(1));
    return Vec2(p.theta(3) * p.gravity * c1 + p.theta(4) * p.gravity * c12,
                p.theta(4) * p.gravity * c12);
}

/// Analytic Ṁ (M depends on q₂ only); Ṁ − 2C is skew symmetric.
inline Mat2 mass_matrix_rate(const TwoLinkArmParams& p, const Vec2& q, const Vec2& qd) {
    const double d = -2.0 * p.theta(2) * std::sin(q(1)) * qd(1);
    Mat2 m;
    m << d, 0.5 * d,
         0.5 * d, 0.0;
    return m;
}

/**
 * Regressor Y(q, q̇, a, ȧ) with  Y θ = M(q;θ) a + C(q, q̇;θ) ȧ + G(q;θ)
 * identically in θ. Gravity is public knowledge and enters the last two
 * columns; θ stays unknown to the controller.
 */
inline Mat2x5 regressor(const Vec2& q, const Vec2& qd, const Vec2& a, const Vec2& ad,
                        double gravity) {
    const double c2 = std::cos(q(1));
    const double s2 = std::sin(q(1));
    const double c1 = std::cos(q(0));
    const double c12 = std::cos(q(0) + q(1));
    Mat2x5 y;
    y << a(0), a(0) + a(1),
         c2 * (2.0 * a(0) + a(1)) - s2 * (qd(1) * ad(0) + (qd(0) + qd(1)) * ad(1)),
         gravity * c1, gravity * c12,
         0.0, a(0) + a(1),
         c2 * a(0) + s2 * qd(0) * ad(0),
         0.0, gravity * c12;
    return y;
}

// Determinant floor for the closed-form 2x2 inversion.
inline constexpr double kInertiaDetTolerance = 1e-10;

/// q̈ = M⁻¹ (τ − C q̇ − G), closed-form 2x2 inverse.
inline Vec2 forward_dynamics(const TwoLinkArmParams& p, const ArmState& state,
                             const Vec2& tau) {
    const Mat2 m = mass_matrix(p, state.q);
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    if (!(det > kInertiaDetTolerance) || !(m(0, 0) > 0.0))
        throw SingularInertia("inertia matrix is singular or indefinite at q2 = " +
                              std::to_string(state.q(1)));
    const Vec2 rhs = tau - coriolis_matrix(p, state.q, state.qd) * state.qd -
                     gravity_vector(p, state.q);
    Mat2 inv;
    inv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
    return (inv / det) * rhs;
}

/// Check M(q;θ) > 0 on a q₂ grid over [0, 2π]; throws SingularInertia for
/// non-physical θ. Returns the empirical eigenvalue range (α, β) with
/// α I ≤ M ≤ β I on the grid.
inline std::pair<double, double> validate_inertia(const TwoLinkArmParams& p,
                                                  int grid_points = 361) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (int k = 0; k < grid_points; ++k) {
        const double q2 = 2.0 * M_PI * k / (grid_points - 1);
        const Mat2 m = mass_matrix(p, Vec2(0.0, q2));
        Eigen::SelfAdjointEigenSolver<Mat2> eig(m);
        lo = std::min(lo, eig.eigenvalues().minCoeff());
        hi = std::max(hi, eig.eigenvalues().maxCoeff());
    }
    if (!(lo > 0.0))
        throw SingularInertia(
            "inertia matrix is not uniformly positive definite over the q2 grid "
            "(min eigenvalue " + std::to_string(lo) + ")");
    return {lo, hi};
}

}  // namespace synclab
