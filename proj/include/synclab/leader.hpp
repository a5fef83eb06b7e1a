#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "synclab/errors.hpp"

namespace synclab {

/**
 * Uncertain nonlinear leader
 *
 *   v̇ = p(v, ω) = φ(v) ω,   q = E v,
 *
 * with state v ∈ R^m, unknown constant parameters ω ∈ R^l, known regressor
 * φ : R^m → R^{m×l} vanishing at the origin, and known output matrix
 * E ∈ R^{n×m}. regressor_rate(v, v̇) is the analytic time derivative of φ
 * along v̇, needed by the follower controller's reference acceleration.
 */
struct LeaderModel {
    int state_dim = 0;   // m
    int param_dim = 0;   // l
    int output_dim = 0;  // n
    Eigen::MatrixXd output_matrix;  // E, n x m
    Eigen::VectorXd true_params;    // omega
    int poly_degree = 1;            // largest polynomial degree of p

    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> regressor;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>
        regressor_rate;
};

/// φ(v) with dimension checking.
inline Eigen::MatrixXd eval_phi(const LeaderModel& model, const Eigen::VectorXd& v) {
    if (v.size() != model.state_dim)
        throw DimensionMismatch("eval_phi: state has size " + std::to_string(v.size()) +
                                ", model expects " + std::to_string(model.state_dim));
    return model.regressor(v);
}

/// p(v, w) = φ(v) w.
inline Eigen::VectorXd eval_p(const LeaderModel& model, const Eigen::VectorXd& v,
                              const Eigen::VectorXd& w) {
    if (w.size() != model.param_dim)
        throw DimensionMismatch("eval_p: parameter vector has size " +
                                std::to_string(w.size()) + ", model expects " +
                                std::to_string(model.param_dim));
    return eval_phi(model, v) * w;
}

/// Leader output E v.
inline Eigen::VectorXd leader_output(const LeaderModel& model, const Eigen::VectorXd& v) {
    if (v.size() != model.state_dim)
        throw DimensionMismatch("leader_output: state size mismatch");
    return model.output_matrix * v;
}

namespace detail {

inline void validate_model(const LeaderModel& model) {
    if (model.state_dim < 1 || model.param_dim < 1 || model.output_dim < 1)
        throw InvalidModel("leader dimensions must be positive");
    if (model.output_matrix.rows() != model.output_dim ||
        model.output_matrix.cols() != model.state_dim)
        throw DimensionMismatch("output matrix E must be n x m");
    if (model.true_params.size() != model.param_dim)
        throw DimensionMismatch("omega must have length l");
    if (model.poly_degree < 1)
        throw InvalidModel("poly_degree must be >= 1");
    const Eigen::MatrixXd phi0 =
        model.regressor(Eigen::VectorXd::Zero(model.state_dim));
    if (phi0.norm() != 0.0)
        throw InvalidModel("regressor must vanish at the origin");
}

inline double ipow(double base, int exp) {
    double r = 1.0;
    for (int k = 0; k < exp; ++k) r *= base;
    return r;
}

}  // namespace detail

/**
 * Van der Pol leader (m = 2, l = 3, ω = (a, b, c)):
 *
 *   p(v, ω) = ( a v₂,  −b v₁ + c (1 − v₁²) v₂ ),
 *   φ(v)    = [ v₂   0     0
 *               0   −v₁   (1 − v₁²) v₂ ].
 *
 * Polynomial of degree 3; has a stable limit cycle for positive a, b, c.
 */
inline LeaderModel van_der_pol_leader(const Eigen::Vector3d& omega,
                                      Eigen::MatrixXd E = Eigen::MatrixXd::Identity(2, 2)) {
    LeaderModel model;
    model.state_dim = 2;
    model.param_dim = 3;
    model.output_dim = static_cast<int>(E.rows());
    model.output_matrix = std::move(E);
    model.true_params = omega;
    model.poly_degree = 3;
    model.regressor = [](const Eigen::VectorXd& v) {
        Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(2, 3);
        phi(0, 0) = v(1);
        phi(1, 1) = -v(0);
        phi(1, 2) = (1.0 - v(0) * v(0)) * v(1);
        return phi;
    };
    model.regressor_rate = [](const Eigen::VectorXd& v, const Eigen::VectorXd& vd) {
        Eigen::MatrixXd rate = Eigen::MatrixXd::Zero(2, 3);
        rate(0, 0) = vd(1);
        rate(1, 1) = -vd(0);
        rate(1, 2) = -2.0 * v(0) * vd(0) * v(1) + (1.0 - v(0) * v(0)) * vd(1);
        return rate;
    };
    detail::validate_model(model);
    return model;
}

/// One monomial term  coeff · ∏_k v_k^{exponents[k]}  of a regressor entry.
struct Monomial {
    double coeff = 0.0;
    std::vector<int> exponents;

    int total_degree() const {
        int d = 0;
        for (int e : exponents) d += e;
        return d;
    }
};

/// Terms of one φ entry; an empty list is the zero entry.
using RegressorEntry = std::vector<Monomial>;

/**
 * Generic polynomial leader: φ entries are given per (row, col) as monomial
 * sums in v. Every monomial must have degree ≥ 1 so that φ(0) = 0. The
 * polynomial degree m₀ (which drives the ρ gain recipe) is derived from the
 * entries.
 */
inline LeaderModel polynomial_leader(int state_dim, int param_dim,
                                     std::vector<std::vector<RegressorEntry>> entries,
                                     Eigen::VectorXd omega, Eigen::MatrixXd E) {
    if (static_cast<int>(entries.size()) != state_dim)
        throw DimensionMismatch("polynomial_leader: entries must have m rows");
    int max_degree = 1;
    for (const auto& row : entries) {
        if (static_cast<int>(row.size()) != param_dim)
            throw DimensionMismatch("polynomial_leader: entries must have l columns");
        for (const auto& entry : row) {
            for (const auto& term : entry) {
                if (static_cast<int>(term.exponents.size()) != state_dim)
                    throw DimensionMismatch(
                        "polynomial_leader: monomial exponent list must have length m");
                for (int e : term.exponents)
                    if (e < 0) throw InvalidModel("monomial exponents must be >= 0");
                if (term.total_degree() < 1)
                    throw InvalidModel(
                        "constant regressor term would violate phi(0) = 0");
                max_degree = std::max(max_degree, term.total_degree());
            }
        }
    }

    LeaderModel model;
    model.state_dim = state_dim;
    model.param_dim = param_dim;
    model.output_dim = static_cast<int>(E.rows());
    model.output_matrix = std::move(E);
    model.true_params = std::move(omega);
    model.poly_degree = max_degree;

    auto shared = std::make_shared<std::vector<std::vector<RegressorEntry>>>(std::move(entries));
    model.regressor = [shared, state_dim, param_dim](const Eigen::VectorXd& v) {
        Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(state_dim, param_dim);
        for (int r = 0; r < state_dim; ++r)
            for (int c = 0; c < param_dim; ++c)
                for (const auto& term : (*shared)[r][c]) {
                    double value = term.coeff;
                    for (int k = 0; k < state_dim; ++k)
                        value *= detail::ipow(v(k), term.exponents[k]);
                    phi(r, c) += value;
                }
        return phi;
    };
    model.regressor_rate = [shared, state_dim, param_dim](const Eigen::VectorXd& v,
                                                          const Eigen::VectorXd& vd) {
        Eigen::MatrixXd rate = Eigen::MatrixXd::Zero(state_dim, param_dim);
        for (int r = 0; r < state_dim; ++r)
            for (int c = 0; c < param_dim; ++c)
                for (const auto& term : (*shared)[r][c]) {
                    // d/dt of the monomial along vd, one factor at a time
                    for (int j = 0; j < state_dim; ++j) {
                        const int ej = term.exponents[j];
                        if (ej == 0) continue;
                        double value = term.coeff * ej * vd(j) * detail::ipow(v(j), ej - 1);
                        for (int k = 0; k < state_dim; ++k)
                            if (k != j) value *= detail::ipow(v(k), term.exponents[k]);
                        rate(r, c) += value;
                    }
                }
        return rate;
    };
    detail::validate_model(model);
    return model;
}

}  // namespace synclab
