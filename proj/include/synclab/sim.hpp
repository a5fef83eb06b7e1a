#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "synclab/arm.hpp"
#include "synclab/controller.hpp"
#include "synclab/errors.hpp"
#include "synclab/graph.hpp"
#include "synclab/leader.hpp"
#include "synclab/observer.hpp"

namespace synclab {

/// Integration settings. The stacked ODE is integrated with fixed-step
/// classical RK4 from t = 0 to t_end; every log_stride-th step is logged.
struct SimSettings {
    double dt = 1e-3;
    double t_end = 50.0;
    int log_stride = 10;
    long seed = 0;  // consumed by randomized test harnesses only
};

/// Offsets into the stacked state vector
/// [ v | per follower: v̂ᵢ, ω̂ᵢ, κ̂ᵢ (, qᵢ, q̇ᵢ, θ̂ᵢ) ].
struct StateLayout {
    int m = 0;
    int l = 0;
    int n_followers = 0;
    bool arms = false;

    int node_span() const { return m + l + 1 + (arms ? 9 : 0); }
    int size() const { return m + n_followers * node_span(); }
    int v() const { return 0; }
    int v_hat(int i) const { return m + i * node_span(); }
    int omega_hat(int i) const { return v_hat(i) + m; }
    int kappa(int i) const { return omega_hat(i) + l; }
    int q(int i) const { return kappa(i) + 1; }
    int qd(int i) const { return q(i) + 2; }
    int theta_hat(int i) const { return qd(i) + 2; }

    /// Human-readable name of a state component (for diagnostics).
    std::string component_name(int idx) const {
        if (idx < m) return "v[" + std::to_string(idx) + "]";
        const int i = (idx - m) / node_span();
        int off = idx - v_hat(i);
        const std::string node = std::to_string(i + 1);
        if (off < m) return "vhat" + node + "[" + std::to_string(off) + "]";
        off -= m;
        if (off < l) return "omegahat" + node + "[" + std::to_string(off) + "]";
        off -= l;
        if (off < 1) return "kappa" + node;
        off -= 1;
        if (off < 2) return "q" + node + "[" + std::to_string(off) + "]";
        off -= 2;
        if (off < 2) return "qd" + node + "[" + std::to_string(off) + "]";
        off -= 2;
        return "thetahat" + node + "[" + std::to_string(off) + "]";
    }
};

/// A full simulation scenario: topology, leader, observer bank initial
/// condition, and (unless observer-only) the arm fleet and its controller.
struct SimConfig {
    CommGraph graph;
    LeaderModel leader;
    Eigen::VectorXd v0;
    ObserverBank observer;

    std::vector<TwoLinkArmParams> arm_params;
    std::vector<ArmState> arm_state0;
    std::vector<ControllerState> controller0;
    ControllerGains gains;

    bool observer_only = false;
    SimSettings sim;

    bool has_arms() const { return !observer_only && !arm_params.empty(); }

    StateLayout layout() const {
        return StateLayout{leader.state_dim, leader.param_dim, graph.num_followers(),
                           has_arms()};
    }

    void validate() const {
        const int n = graph.num_followers();
        if (n < 1) throw SchemaError("scenario needs a nonempty graph");
        if (v0.size() != leader.state_dim)
            throw DimensionMismatch("v0 must have the leader state dimension");
        if (static_cast<int>(observer.nodes.size()) != n)
            throw DimensionMismatch("observer bank must have one node per follower");
        observer.validate(leader);
        if (sim.dt <= 0.0) throw SchemaError("dt must be positive");
        if (sim.t_end <= 0.0) throw SchemaError("t_end must be positive");
        if (sim.log_stride < 1) throw SchemaError("log_stride must be >= 1");
        const double steps = sim.t_end / sim.dt;
        if (std::abs(steps - std::round(steps)) > 1e-6 * std::max(steps, 1.0))
            throw SchemaError("t_end/dt must be an integer number of steps");
        if (has_arms()) {
            if (static_cast<int>(arm_params.size()) != n ||
                static_cast<int>(arm_state0.size()) != n ||
                static_cast<int>(controller0.size()) != n)
                throw DimensionMismatch("need arm params, state and controller per follower");
            if (leader.output_dim != 2)
                throw DimensionMismatch("arm scenarios require a 2-dimensional leader output");
            gains.validate();
            for (const auto& p : arm_params) validate_inertia(p);
        }
    }
};

/// Dense time series of one run. Raw states live in `state` (one row per
/// sample, columns per StateLayout); derived signals are recomputed at log
/// points. Arm-only blocks are empty in observer-only mode.
struct SimLog {
    StateLayout layout;
    std::vector<double> t;
    Eigen::MatrixXd state;        // samples x layout.size()
    Eigen::MatrixXd z;            // samples x m*N
    Eigen::MatrixXd tau;          // samples x 2N
    Eigen::MatrixXd s;            // samples x 2N
    Eigen::MatrixXd e;            // samples x 2N      eᵢ = qᵢ − E v
    Eigen::MatrixXd edot;         // samples x 2N      ėᵢ = q̇ᵢ − E v̇
    Eigen::MatrixXd v_err;        // samples x N       ‖v̂ᵢ − v‖
    Eigen::MatrixXd omega_err;    // samples x N       ‖ω̂ᵢ − ω‖
    Eigen::MatrixXd theta_err;    // samples x N       ‖θ̂ᵢ − θᵢ‖

    int samples() const { return static_cast<int>(t.size()); }

    Eigen::VectorXd v_at(int k) const {
        return state.row(k).segment(layout.v(), layout.m).transpose();
    }
    Eigen::VectorXd v_hat_at(int k, int i) const {
        return state.row(k).segment(layout.v_hat(i), layout.m).transpose();
    }
    Eigen::VectorXd omega_hat_at(int k, int i) const {
        return state.row(k).segment(layout.omega_hat(i), layout.l).transpose();
    }
    double kappa_at(int k, int i) const { return state(k, layout.kappa(i)); }
    Vec2 q_at(int k, int i) const {
        return state.row(k).segment<2>(layout.q(i)).transpose();
    }
    Vec2 qd_at(int k, int i) const {
        return state.row(k).segment<2>(layout.qd(i)).transpose();
    }
    Vec5 theta_hat_at(int k, int i) const {
        return state.row(k).segment<5>(layout.theta_hat(i)).transpose();
    }
    Eigen::VectorXd z_at(int k, int i) const {
        return z.row(k).segment(i * layout.m, layout.m).transpose();
    }
};

/// One classical 4th-order Runge-Kutta step of x' = f(x, t).
template <typename F>
Eigen::VectorXd rk4_step(F&& f, const Eigen::VectorXd& x, double t, double dt) {
    const auto check = [&](const Eigen::VectorXd& k, const char* stage) {
        if (!k.allFinite())
            throw NonFiniteDerivative(std::string("non-finite derivative at RK4 stage ") +
                                      stage + ", t = " + std::to_string(t));
    };
    const Eigen::VectorXd k1 = f(x, t);
    check(k1, "1");
    const Eigen::VectorXd k2 = f(x + (0.5 * dt) * k1, t + 0.5 * dt);
    check(k2, "2");
    const Eigen::VectorXd k3 = f(x + (0.5 * dt) * k2, t + 0.5 * dt);
    check(k3, "3");
    const Eigen::VectorXd k4 = f(x + dt * k3, t + dt);
    check(k4, "4");
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace detail {

/// Signals shared between the RHS and the logger.
struct StageSignals {
    std::vector<Eigen::VectorXd> z;
    std::vector<Vec2> tau;
    std::vector<Vec2> s;
};

/// Right-hand side of the stacked ODE. Unpacks the state, runs the observer
/// bank and (if present) the arm fleet under the adaptive control law.
class StackedDynamics {
public:
    explicit StackedDynamics(const SimConfig& cfg)
        : cfg_(cfg), layout_(cfg.layout()) {}

    Eigen::VectorXd operator()(const Eigen::VectorXd& x, double /*t*/) const {
        return eval(x, nullptr);
    }

    Eigen::VectorXd eval(const Eigen::VectorXd& x, StageSignals* signals) const {
        const StateLayout& lay = layout_;
        const int n = lay.n_followers;
        Eigen::VectorXd dx(lay.size());

        const Eigen::VectorXd v = x.segment(lay.v(), lay.m);
        dx.segment(lay.v(), lay.m) = eval_p(cfg_.leader, v, cfg_.leader.true_params);

        ObserverBank bank = cfg_.observer;
        for (int i = 0; i < n; ++i) {
            bank.nodes[static_cast<std::size_t>(i)].v_hat = x.segment(lay.v_hat(i), lay.m);
            bank.nodes[static_cast<std::size_t>(i)].omega_hat =
                x.segment(lay.omega_hat(i), lay.l);
            bank.nodes[static_cast<std::size_t>(i)].kappa_hat = x(lay.kappa(i));
        }
        ObserverDerivatives od = observer_derivatives(bank, cfg_.graph, cfg_.leader, v);
        for (int i = 0; i < n; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            dx.segment(lay.v_hat(i), lay.m) = od.v_hat_dot[idx];
            dx.segment(lay.omega_hat(i), lay.l) = od.omega_hat_dot[idx];
            dx(lay.kappa(i)) = od.kappa_hat_dot(i);
        }
        if (signals) signals->z = od.z;

        if (lay.arms) {
            for (int i = 0; i < n; ++i) {
                const auto idx = static_cast<std::size_t>(i);
                const Vec2 q = x.segment<2>(lay.q(i));
                const Vec2 qd = x.segment<2>(lay.qd(i));
                const Vec5 theta_hat = x.segment<5>(lay.theta_hat(i));
                const Eigen::VectorXd& v_hat = bank.nodes[idx].v_hat;
                const Eigen::VectorXd& omega_hat = bank.nodes[idx].omega_hat;

                const Vec2 qh_dot =
                    ref_velocity(cfg_.leader, v_hat, omega_hat, q, cfg_.gains.alpha);
                const Vec2 qh_ddot =
                    ref_acceleration(cfg_.leader, v_hat, omega_hat, od.omega_hat_dot[idx],
                                     od.v_hat_dot[idx], qd, cfg_.gains.alpha);
                const Vec2 s = sliding_error(qd, qh_dot);
                const Mat2x5 Y =
                    regressor(q, qd, qh_ddot, qh_dot, cfg_.arm_params[idx].gravity);
                const Vec2 tau = control_torque(cfg_.gains, Y, s, theta_hat);

                ArmState st{q, qd};
                dx.segment<2>(lay.q(i)) = qd;
                dx.segment<2>(lay.qd(i)) = forward_dynamics(cfg_.arm_params[idx], st, tau);
                dx.segment<5>(lay.theta_hat(i)) = theta_hat_derivative(cfg_.gains, Y, s);

                if (signals) {
                    signals->tau[idx] = tau;
                    signals->s[idx] = s;
                }
            }
        }
        return dx;
    }

private:
    const SimConfig& cfg_;
    StateLayout layout_;
};

}  // namespace detail

/// Integrate a scenario and return the dense log. Throws NonFiniteState with
/// the first offending time and component if the state leaves the reals.
inline SimLog run(const SimConfig& cfg) {
    cfg.validate();
    const StateLayout lay = cfg.layout();
    const int n = lay.n_followers;
    const long steps = static_cast<long>(std::llround(cfg.sim.t_end / cfg.sim.dt));
    const long n_samples = steps / cfg.sim.log_stride + 1;

    Eigen::VectorXd x(lay.size());
    x.segment(lay.v(), lay.m) = cfg.v0;
    for (int i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        x.segment(lay.v_hat(i), lay.m) = cfg.observer.nodes[idx].v_hat;
        x.segment(lay.omega_hat(i), lay.l) = cfg.observer.nodes[idx].omega_hat;
        x(lay.kappa(i)) = cfg.observer.nodes[idx].kappa_hat;
        if (lay.arms) {
            x.segment<2>(lay.q(i)) = cfg.arm_state0[idx].q;
            x.segment<2>(lay.qd(i)) = cfg.arm_state0[idx].qd;
            x.segment<5>(lay.theta_hat(i)) = cfg.controller0[idx].theta_hat;
        }
    }

    SimLog log;
    log.layout = lay;
    log.t.reserve(static_cast<std::size_t>(n_samples));
    log.state.resize(n_samples, lay.size());
    log.z.resize(n_samples, n * lay.m);
    log.v_err.resize(n_samples, n);
    log.omega_err.resize(n_samples, n);
    if (lay.arms) {
        log.tau.resize(n_samples, 2 * n);
        log.s.resize(n_samples, 2 * n);
        log.e.resize(n_samples, 2 * n);
        log.edot.resize(n_samples, 2 * n);
        log.theta_err.resize(n_samples, n);
    }

    detail::StackedDynamics dynamics(cfg);
    detail::StageSignals signals;
    signals.z.resize(static_cast<std::size_t>(n));
    signals.tau.resize(static_cast<std::size_t>(n));
    signals.s.resize(static_cast<std::size_t>(n));

    const auto log_row = [&](int row, double t, const Eigen::VectorXd& xs) {
        dynamics.eval(xs, &signals);  // recompute derived signals at the sample
        log.t.push_back(t);
        log.state.row(row) = xs.transpose();
        const Eigen::VectorXd v = xs.segment(lay.v(), lay.m);
        const Eigen::VectorXd v_dot = eval_p(cfg.leader, v, cfg.leader.true_params);
        for (int i = 0; i < n; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            log.z.row(row).segment(i * lay.m, lay.m) = signals.z[idx].transpose();
            log.v_err(row, i) = (xs.segment(lay.v_hat(i), lay.m) - v).norm();
            log.omega_err(row, i) =
                (xs.segment(lay.omega_hat(i), lay.l) - cfg.leader.true_params).norm();
            if (lay.arms) {
                const Vec2 q = xs.segment<2>(lay.q(i));
                const Vec2 qd = xs.segment<2>(lay.qd(i));
                log.tau.row(row).segment<2>(2 * i) = signals.tau[idx].transpose();
                log.s.row(row).segment<2>(2 * i) = signals.s[idx].transpose();
                log.e.row(row).segment<2>(2 * i) =
                    (q - cfg.leader.output_matrix * v).transpose();
                log.edot.row(row).segment<2>(2 * i) =
                    (qd - cfg.leader.output_matrix * v_dot).transpose();
                log.theta_err(row, i) =
                    (xs.segment<5>(lay.theta_hat(i)) - cfg.arm_params[idx].theta).norm();
            }
        }
    };

    log_row(0, 0.0, x);
    int row = 1;
    for (long step = 0; step < steps; ++step) {
        const double t = static_cast<double>(step) * cfg.sim.dt;
        x = rk4_step(dynamics, x, t, cfg.sim.dt);
        if (!x.allFinite()) {
            int bad = 0;
            for (int k = 0; k < x.size(); ++k)
                if (!std::isfinite(x(k))) { bad = k; break; }
            throw NonFiniteState("state component " + lay.component_name(bad) +
                                 " became non-finite at t = " +
                                 std::to_string(t + cfg.sim.dt));
        }
        if ((step + 1) % cfg.sim.log_stride == 0) {
            log_row(row, static_cast<double>(step + 1) * cfg.sim.dt, x);
            ++row;
        }
    }
    return log;
}

}  // namespace synclab
