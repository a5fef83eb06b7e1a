#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "synclab/errors.hpp"
#include "synclab/graph.hpp"
#include "synclab/leader.hpp"

namespace synclab {

/**
 * Gain function ρ(z) = offset + Σ_k c_k ‖z‖^k, with ρ ≥ 1 everywhere
 * (requires offset + c₀ ≥ 1). For a polynomial leader of degree m₀, the
 * recipe c_k = a (k = 0..2m₀−2), offset = b works for any positive a, b.
 */
class RhoSpec {
public:
    RhoSpec(Eigen::VectorXd coefficients, double offset)
        : coefficients_(std::move(coefficients)), offset_(offset) {
        if (coefficients_.size() == 0)
            throw InvalidGain("rho needs at least one coefficient");
        if (offset_ < 0.0 || coefficients_.minCoeff() < 0.0)
            throw InvalidGain("rho coefficients and offset must be nonnegative");
        if (coefficients_.maxCoeff() <= 0.0)
            throw InvalidGain("rho needs at least one strictly positive coefficient");
        if (offset_ + coefficients_(0) < 1.0)
            throw InvalidGain("rho must satisfy rho(z) >= 1: offset + c0 >= 1 required");
    }

    const Eigen::VectorXd& coefficients() const { return coefficients_; }
    double offset() const { return offset_; }

private:
    Eigen::VectorXd coefficients_;  // c_0 .. c_K
    double offset_;
};

inline double rho_eval(const RhoSpec& spec, const Eigen::VectorXd& z) {
    const double zn = z.norm();
    double value = spec.offset();
    double zpow = 1.0;
    for (Eigen::Index k = 0; k < spec.coefficients().size(); ++k) {
        value += spec.coefficients()(k) * zpow;
        zpow *= zn;
    }
    return value;
}

/// ρ recipe for a polynomial leader of degree m0: c_k = a for k = 0..2m0−2,
/// offset = b.
inline RhoSpec default_rho_for_polynomial_leader(int m0, double a, double b) {
    if (a <= 0.0 || b <= 0.0)
        throw InvalidGain("rho recipe requires positive a and b");
    if (m0 < 1) throw InvalidGain("polynomial degree m0 must be >= 1");
    return RhoSpec(Eigen::VectorXd::Constant(2 * m0 - 1, a), b);
}

/// Per-follower observer state: leader-state estimate, parameter estimate,
/// and the adaptive coupling gain (nondecreasing along trajectories).
struct ObserverNodeState {
    Eigen::VectorXd v_hat;
    Eigen::VectorXd omega_hat;
    double kappa_hat = 1.0;
};

/**
 * The learning-based fully distributed observer, one node per follower:
 *
 *   v̂̇ᵢ = φ(v̂ᵢ) ω̂ᵢ + κ̂ᵢ ρᵢ(zᵢ) zᵢ,
 *   ω̂̇ᵢ = μ φᵀ(v̂ᵢ) zᵢ,
 *   κ̂̇ᵢ = ρᵢ(zᵢ) zᵢᵀ zᵢ,
 *   zᵢ  = Σ_{j ∈ N̄ᵢ} (v̂ⱼ − v̂ᵢ),   with v̂_{N+1} = v.
 *
 * No global graph information enters: κ̂ᵢ adapts away the unknown bound the
 * analysis would otherwise require.
 */
struct ObserverBank {
    std::vector<ObserverNodeState> nodes;
    double mu = 1.0;
    std::vector<RhoSpec> rho;  // one spec per node

    void validate(const LeaderModel& model) const {
        if (mu <= 0.0) throw InvalidGain("mu must be positive");
        if (rho.size() != nodes.size())
            throw DimensionMismatch("observer bank needs one rho spec per node");
        for (const auto& node : nodes) {
            if (node.v_hat.size() != model.state_dim ||
                node.omega_hat.size() != model.param_dim)
                throw DimensionMismatch("observer node state dimensions mismatch model");
        }
    }
};

/// zᵢ for follower i (1-based), treating the leader estimate as v itself.
inline Eigen::VectorXd neighborhood_error(const ObserverBank& bank,
                                          const CommGraph& graph,
                                          const Eigen::VectorXd& leader_v, int i) {
    if (i < 1 || i > graph.num_followers())
        throw IndexOutOfRange("follower index " + std::to_string(i) + " outside 1.." +
                              std::to_string(graph.num_followers()));
    const Eigen::VectorXd& vi = bank.nodes[static_cast<std::size_t>(i - 1)].v_hat;
    Eigen::VectorXd z = Eigen::VectorXd::Zero(vi.size());
    for (int j : graph.in_neighbors(i)) {
        const Eigen::VectorXd& vj =
            (j == graph.leader()) ? leader_v : bank.nodes[static_cast<std::size_t>(j - 1)].v_hat;
        z += vj - vi;
    }
    return z;
}

/// Time derivatives of the whole bank at the current leader state. The
/// neighborhood errors are returned as well since callers (controller,
/// logging) need them at the same instant.
struct ObserverDerivatives {
    std::vector<Eigen::VectorXd> v_hat_dot;
    std::vector<Eigen::VectorXd> omega_hat_dot;
    Eigen::VectorXd kappa_hat_dot;
    std::vector<Eigen::VectorXd> z;
};

inline ObserverDerivatives observer_derivatives(const ObserverBank& bank,
                                                const CommGraph& graph,
                                                const LeaderModel& model,
                                                const Eigen::VectorXd& leader_v) {
    const int n = graph.num_followers();
    if (static_cast<int>(bank.nodes.size()) != n)
        throw DimensionMismatch("observer bank size mismatches graph");
    ObserverDerivatives d;
    d.v_hat_dot.resize(static_cast<std::size_t>(n));
    d.omega_hat_dot.resize(static_cast<std::size_t>(n));
    d.kappa_hat_dot.resize(n);
    d.z.resize(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) {
        const auto idx = static_cast<std::size_t>(i - 1);
        const ObserverNodeState& node = bank.nodes[idx];
        Eigen::VectorXd z = neighborhood_error(bank, graph, leader_v, i);
        const double rho = rho_eval(bank.rho[idx], z);
        const Eigen::MatrixXd phi = eval_phi(model, node.v_hat);
        d.v_hat_dot[idx] = phi * node.omega_hat + node.kappa_hat * rho * z;
        d.omega_hat_dot[idx] = bank.mu * phi.transpose() * z;
        d.kappa_hat_dot(i - 1) = rho * z.squaredNorm();
        d.z[idx] = std::move(z);
    }
    return d;
}

}  // namespace synclab
