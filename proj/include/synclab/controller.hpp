#pragma once

#include <Eigen/Dense>

#include "synclab/arm.hpp"
#include "synclab/errors.hpp"
#include "synclab/leader.hpp"

namespace synclab {

/// Gains of the adaptive synchronization law: τᵢ = −K sᵢ + Yᵢ θ̂ᵢ,
/// θ̂̇ᵢ = −Γ Yᵢᵀ sᵢ, with reference shift α.
struct ControllerGains {
    Mat2 K = Mat2::Identity();
    Eigen::Matrix<double, 5, 5> Gamma = Eigen::Matrix<double, 5, 5>::Identity();
    double alpha = 1.0;

    void validate() const {
        if (!K.isApprox(K.transpose(), 1e-12))
            throw InvalidGain("K must be symmetric");
        Eigen::SelfAdjointEigenSolver<Mat2> eig(K);
        if (eig.eigenvalues().minCoeff() <= 0.0)
            throw InvalidGain("K must be positive definite");
        for (int r = 0; r < 5; ++r)
            for (int c = 0; c < 5; ++c) {
                if (r == c && Gamma(r, c) <= 0.0)
                    throw InvalidGain("Gamma diagonal entries must be positive");
                if (r != c && Gamma(r, c) != 0.0)
                    throw InvalidGain("Gamma must be diagonal");
            }
        if (alpha <= 0.0) throw InvalidGain("alpha must be positive");
    }
};

/// Adaptation state of one follower's controller.
struct ControllerState {
    Vec5 theta_hat = Vec5::Zero();
};

/// Estimated leader-output derivative, shifted by the local tracking error:
/// q̂̇ᵢ = E φ(v̂ᵢ) ω̂ᵢ − α (qᵢ − E v̂ᵢ).
inline Vec2 ref_velocity(const LeaderModel& model, const Eigen::VectorXd& v_hat,
                         const Eigen::VectorXd& omega_hat, const Vec2& q, double alpha) {
    if (model.output_dim != 2)
        throw DimensionMismatch("arm controller requires a 2-dimensional leader output");
    return model.output_matrix * eval_phi(model, v_hat) * omega_hat -
           alpha * (q - model.output_matrix * v_hat);
}

/// Time derivative of ref_velocity, using the observer's own rates:
/// q̂̈ᵢ = E φ(v̂ᵢ) ω̂̇ᵢ + E (d/dt φ(v̂ᵢ)) ω̂ᵢ − α (q̇ᵢ − E v̂̇ᵢ).
inline Vec2 ref_acceleration(const LeaderModel& model, const Eigen::VectorXd& v_hat,
                             const Eigen::VectorXd& omega_hat,
                             const Eigen::VectorXd& omega_hat_dot,
                             const Eigen::VectorXd& v_hat_dot, const Vec2& qd,
                             double alpha) {
    if (model.output_dim != 2)
        throw DimensionMismatch("arm controller requires a 2-dimensional leader output");
    return model.output_matrix * eval_phi(model, v_hat) * omega_hat_dot +
           model.output_matrix * model.regressor_rate(v_hat, v_hat_dot) * omega_hat -
           alpha * (qd - model.output_matrix * v_hat_dot);
}

/// Leader-output-derivative error sᵢ = q̇ᵢ − q̂̇ᵢ.
inline Vec2 sliding_error(const Vec2& qd, const Vec2& q_hat_dot) {
    return qd - q_hat_dot;
}

/// τᵢ = −K sᵢ + Y θ̂ᵢ. Y must be built with (qᵢ, q̇ᵢ, q̂̈ᵢ, q̂̇ᵢ).
inline Vec2 control_torque(const ControllerGains& gains, const Mat2x5& Y, const Vec2& s,
                           const Vec5& theta_hat) {
    return -gains.K * s + Y * theta_hat;
}

/// θ̂̇ᵢ = −Γ Yᵀ sᵢ (same Y as the torque).
inline Vec5 theta_hat_derivative(const ControllerGains& gains, const Mat2x5& Y,
                                 const Vec2& s) {
    return -gains.Gamma * Y.transpose() * s;
}

}  // namespace synclab
