#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "synclab/errors.hpp"
#include "synclab/sim.hpp"

namespace synclab {

/**
 * Persistent-excitation measurement of a sampled matrix signal f(t):
 * for each window [t, t+T0] on the sample grid, the Gram matrix
 * (1/T0) ∫ f fᵀ ds is integrated by the trapezoid rule and its minimum
 * eigenvalue recorded. min_gram_eigenvalue is the infimum over windows —
 * the empirical PE level ε.
 */
struct PEReport {
    double window = 0.0;           // T0
    double start = 0.0;            // t0
    double min_gram_eigenvalue = 0.0;
    std::vector<double> window_starts;
    std::vector<double> min_eigenvalues;
};

inline PEReport pe_measure(const std::vector<double>& times,
                           const std::vector<Eigen::MatrixXd>& f, double T0, double t0) {
    if (times.size() != f.size())
        throw DimensionMismatch("pe_measure: one sample per time point required");
    if (times.size() < 2) throw InsufficientSamples("pe_measure: need at least 2 samples");
    if (T0 <= 0.0) throw InsufficientSamples("pe_measure: window must be positive");
    if (t0 + T0 > times.back() + 1e-12)
        throw InsufficientSamples("pe_measure: window does not fit in [t0, t_end]");

    const auto rows = f.front().rows();
    for (const auto& fk : f)
        if (fk.rows() != rows || fk.cols() != f.front().cols())
            throw DimensionMismatch("pe_measure: inconsistent sample dimensions");

    // prefix trapezoid integrals of f f^T
    std::vector<Eigen::MatrixXd> prefix(times.size());
    prefix[0] = Eigen::MatrixXd::Zero(rows, rows);
    for (std::size_t k = 1; k < times.size(); ++k) {
        const double dt = times[k] - times[k - 1];
        prefix[k] = prefix[k - 1] +
                    0.5 * dt *
                        (f[k - 1] * f[k - 1].transpose() + f[k] * f[k].transpose());
    }

    PEReport report;
    report.window = T0;
    report.start = t0;
    report.min_gram_eigenvalue = std::numeric_limits<double>::infinity();

    std::size_t b = 0;
    for (std::size_t a = 0; a < times.size(); ++a) {
        if (times[a] + 1e-12 < t0) continue;
        if (b < a) b = a;
        while (b < times.size() && times[b] < times[a] + T0 - 1e-12) ++b;
        if (b >= times.size()) break;
        const double span = times[b] - times[a];
        if (span <= 0.0) continue;
        const Eigen::MatrixXd gram = (prefix[b] - prefix[a]) / span;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
        const double min_eig = eig.eigenvalues().minCoeff();
        report.window_starts.push_back(times[a]);
        report.min_eigenvalues.push_back(min_eig);
        report.min_gram_eigenvalue = std::min(report.min_gram_eigenvalue, min_eig);
    }
    if (report.window_starts.empty())
        throw InsufficientSamples("pe_measure: no complete window after t0");
    return report;
}

/// Period estimate from mean spacing of upward zero crossings of a scalar
/// series (linear interpolation), considering crossings at t >= t_min.
inline double estimate_period(const std::vector<double>& times,
                              const std::vector<double>& values, double t_min) {
    if (times.size() != values.size() || times.size() < 3)
        throw InsufficientSamples("estimate_period: series too short");
    std::vector<double> crossings;
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        if (times[k] < t_min) continue;
        if (values[k] < 0.0 && values[k + 1] >= 0.0) {
            const double frac = -values[k] / (values[k + 1] - values[k]);
            crossings.push_back(times[k] + frac * (times[k + 1] - times[k]));
        }
    }
    if (crossings.size() < 2)
        throw InsufficientSamples("estimate_period: fewer than two upward zero crossings");
    return (crossings.back() - crossings.front()) /
           static_cast<double>(crossings.size() - 1);
}

/**
 * Observer Lyapunov diagnostic along a log:
 *   V(t) = ½ [ ṽᵀ (H ⊗ I_m) ṽ + μ⁻¹ ω̃ᵀ ω̃ + Σᵢ (κ̂ᵢ − κ̄ᵢ)² ].
 * κ̄ᵢ is not computable at runtime; callers pass a proxy (typically
 * κ̂ᵢ(t_end)), which makes V a diagnostic rather than a certificate.
 */
inline std::vector<double> observer_lyapunov(const SimLog& log, const Eigen::MatrixXd& H,
                                             double mu,
                                             const Eigen::VectorXd& kappa_bar) {
    const int n = log.layout.n_followers;
    const int m = log.layout.m;
    if (H.rows() != n || H.cols() != n)
        throw DimensionMismatch("observer_lyapunov: H must be N x N");
    if (kappa_bar.size() != n)
        throw DimensionMismatch("observer_lyapunov: kappa_bar must have one entry per node");
    if (mu <= 0.0) throw InvalidGain("observer_lyapunov: mu must be positive");

    Eigen::MatrixXd h_kron = Eigen::MatrixXd::Zero(n * m, n * m);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            h_kron.block(r * m, c * m, m, m) = H(r, c) * Eigen::MatrixXd::Identity(m, m);

    std::vector<double> v_series(static_cast<std::size_t>(log.samples()));
    Eigen::VectorXd vtil(n * m);
    for (int k = 0; k < log.samples(); ++k) {
        const Eigen::VectorXd v = log.v_at(k);
        double omega_sq = 0.0;
        double kappa_sq = 0.0;
        for (int i = 0; i < n; ++i) {
            vtil.segment(i * m, m) = log.v_hat_at(k, i) - v;
            omega_sq += log.omega_err(k, i) * log.omega_err(k, i);
            const double ktil = log.kappa_at(k, i) - kappa_bar(i);
            kappa_sq += ktil * ktil;
        }
        v_series[static_cast<std::size_t>(k)] =
            0.5 * (vtil.dot(h_kron * vtil) + omega_sq / mu + kappa_sq);
    }
    return v_series;
}

/// Trailing-window maxima of the error signals plus the κ̂ total variation.
/// window_fraction = 0.1 means the last 10% of the run; 1 means the full run.
struct ConvergenceMetrics {
    double window_start = 0.0;
    Eigen::VectorXd max_v_err;      // per node, ‖v̂ᵢ − v‖
    Eigen::VectorXd max_omega_err;  // per node, ‖ω̂ᵢ − ω‖
    Eigen::VectorXd max_e;          // per node, ‖qᵢ − Ev‖ (arms)
    Eigen::VectorXd max_edot;       // per node, ‖q̇ᵢ − Ev̇‖ (arms)
    Eigen::VectorXd max_s;          // per node, ‖sᵢ‖ (arms)
    Eigen::VectorXd kappa_tv;       // per node, Σ |Δκ̂ᵢ| over the window
};

inline ConvergenceMetrics convergence_metrics(const SimLog& log, double window_fraction) {
    if (!(window_fraction > 0.0) || window_fraction > 1.0)
        throw InsufficientSamples("window_fraction must be in (0, 1]");
    const int n = log.layout.n_followers;
    const double t_end = log.t.back();
    const double t_from = t_end - window_fraction * t_end;

    ConvergenceMetrics mx;
    mx.window_start = t_from;
    mx.max_v_err = Eigen::VectorXd::Zero(n);
    mx.max_omega_err = Eigen::VectorXd::Zero(n);
    mx.kappa_tv = Eigen::VectorXd::Zero(n);
    if (log.layout.arms) {
        mx.max_e = Eigen::VectorXd::Zero(n);
        mx.max_edot = Eigen::VectorXd::Zero(n);
        mx.max_s = Eigen::VectorXd::Zero(n);
    }

    int prev = -1;
    for (int k = 0; k < log.samples(); ++k) {
        if (log.t[static_cast<std::size_t>(k)] + 1e-12 < t_from) continue;
        for (int i = 0; i < n; ++i) {
            mx.max_v_err(i) = std::max(mx.max_v_err(i), log.v_err(k, i));
            mx.max_omega_err(i) = std::max(mx.max_omega_err(i), log.omega_err(k, i));
            if (prev >= 0)
                mx.kappa_tv(i) += std::abs(log.kappa_at(k, i) - log.kappa_at(prev, i));
            if (log.layout.arms) {
                mx.max_e(i) = std::max(mx.max_e(i), log.e.row(k).segment<2>(2 * i).norm());
                mx.max_edot(i) =
                    std::max(mx.max_edot(i), log.edot.row(k).segment<2>(2 * i).norm());
                mx.max_s(i) = std::max(mx.max_s(i), log.s.row(k).segment<2>(2 * i).norm());
            }
        }
        prev = k;
    }
    return mx;
}

/// Σ |Δκ̂ᵢ| over samples with t >= t_from (per node).
inline Eigen::VectorXd kappa_total_variation(const SimLog& log, double t_from) {
    const int n = log.layout.n_followers;
    Eigen::VectorXd tv = Eigen::VectorXd::Zero(n);
    int prev = -1;
    for (int k = 0; k < log.samples(); ++k) {
        if (log.t[static_cast<std::size_t>(k)] + 1e-12 < t_from) continue;
        if (prev >= 0)
            for (int i = 0; i < n; ++i)
                tv(i) += std::abs(log.kappa_at(k, i) - log.kappa_at(prev, i));
        prev = k;
    }
    return tv;
}

/// True when every κ̂ᵢ series is nondecreasing sample to sample.
inline bool kappa_nondecreasing(const SimLog& log) {
    for (int k = 1; k < log.samples(); ++k)
        for (int i = 0; i < log.layout.n_followers; ++i)
            if (log.kappa_at(k, i) < log.kappa_at(k - 1, i)) return false;
    return true;
}

}  // namespace synclab
