#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "helpers.hpp"
#include "synclab/synclab.hpp"

using namespace synclab;
using namespace synclab::testing;

namespace {

// uniform grid [0, t_end] with n+1 samples
std::vector<double> grid(double t_end, int n) {
    std::vector<double> t(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) t[static_cast<std::size_t>(k)] = t_end * k / n;
    return t;
}

}  // namespace

TEST_CASE("PE of a constant scalar signal", "[analysis]") {
    const auto t = grid(10.0, 1000);
    const std::vector<Eigen::MatrixXd> f(t.size(), Eigen::MatrixXd::Ones(1, 1));
    const PEReport report = pe_measure(t, f, 2.0, 0.0);
    CHECK(report.min_gram_eigenvalue == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("PE of the rotating unit vector equals one half", "[analysis]") {
    const double two_pi = 2.0 * M_PI;
    const auto t = grid(2.0 * two_pi, 2000);
    std::vector<Eigen::MatrixXd> f;
    f.reserve(t.size());
    for (double tk : t) {
        Eigen::MatrixXd fk(2, 1);
        fk << std::cos(tk), std::sin(tk);
        f.push_back(fk);
    }
    const PEReport report = pe_measure(t, f, two_pi, 0.0);
    CHECK(report.min_gram_eigenvalue == Catch::Approx(0.5).margin(1e-6));
    for (double eig : report.min_eigenvalues)
        CHECK(eig == Catch::Approx(0.5).margin(1e-6));
}

TEST_CASE("windowed Grams are symmetric positive semidefinite", "[analysis]") {
    // independent quadrature oracle for a handful of windows
    const auto t = grid(20.0, 2000);
    std::vector<Eigen::MatrixXd> f;
    f.reserve(t.size());
    for (double tk : t) {
        Eigen::MatrixXd fk(3, 2);
        fk << std::sin(tk), 0.3, std::cos(2.0 * tk), std::sin(0.5 * tk), 0.1 * tk,
            std::cos(tk);
        f.push_back(fk);
    }
    const double T0 = 4.0;
    const PEReport report = pe_measure(t, f, T0, 0.0);
    for (double eig : report.min_eigenvalues) CHECK(eig >= -1e-12);

    const double dt = t[1] - t[0];
    const int w = static_cast<int>(std::llround(T0 / dt));
    for (int start : {0, 250, 700}) {
        Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(3, 3);
        for (int k = start; k < start + w; ++k) {
            const auto a = static_cast<std::size_t>(k);
            gram += 0.5 * dt *
                    (f[a] * f[a].transpose() + f[a + 1] * f[a + 1].transpose());
        }
        gram /= T0;
        CHECK((gram - gram.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
        CHECK(eig.eigenvalues()(0) ==
              Catch::Approx(report.min_eigenvalues[static_cast<std::size_t>(start)])
                  .margin(1e-9));
    }
}

TEST_CASE("PE report is invariant under a period shift", "[analysis]") {
    const double two_pi = 2.0 * M_PI;
    const int per_period = 500;
    const auto t = grid(3.0 * two_pi, 3 * per_period);
    std::vector<Eigen::MatrixXd> f;
    f.reserve(t.size());
    for (double tk : t) {
        Eigen::MatrixXd fk(2, 1);
        fk << std::cos(tk) + 0.5 * std::cos(2.0 * tk), std::sin(tk);
        f.push_back(fk);
    }
    const PEReport report = pe_measure(t, f, two_pi, 0.0);
    REQUIRE(report.min_eigenvalues.size() > static_cast<std::size_t>(per_period));
    for (std::size_t k = 0; k + per_period < report.min_eigenvalues.size(); k += 37)
        CHECK(report.min_eigenvalues[k] ==
              Catch::Approx(report.min_eigenvalues[k + per_period]).margin(1e-6));
}

TEST_CASE("PE measurement rejects impossible windows", "[analysis]") {
    const auto t = grid(1.0, 100);
    const std::vector<Eigen::MatrixXd> f(t.size(), Eigen::MatrixXd::Ones(1, 1));
    CHECK_THROWS_AS(pe_measure(t, f, 2.0, 0.0), InsufficientSamples);
    CHECK_THROWS_AS(pe_measure(t, f, 0.5, 0.8), InsufficientSamples);
    CHECK_THROWS_AS(pe_measure({0.0}, {Eigen::MatrixXd::Ones(1, 1)}, 0.5, 0.0),
                    InsufficientSamples);
}

TEST_CASE("period estimation from zero crossings", "[analysis]") {
    const auto t = grid(50.0, 5000);
    std::vector<double> x(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) x[k] = std::sin(0.7 * t[k]);
    const double period = estimate_period(t, x, 5.0);
    CHECK(period == Catch::Approx(2.0 * M_PI / 0.7).epsilon(1e-6));

    std::vector<double> flat(t.size(), 1.0);
    CHECK_THROWS_AS(estimate_period(t, flat, 0.0), InsufficientSamples);
}

TEST_CASE("observer Lyapunov diagnostic on the exact-initialization run",
          "[analysis]") {
    SimConfig cfg = reference_with({{"sim.t_end", "5"},
                                    {"sim.observer_only", "true"},
                                    {"observer.omega_hat0", "[[1.0, 1.0, 1.0]]"}});
    const SimLog log = run(cfg);
    const Eigen::MatrixXd h = h_matrix(cfg.graph);

    // kappa_bar = kappa_hat(t_end): kappa never moves, so V is identically 0
    Eigen::VectorXd kappa_end(6);
    for (int i = 0; i < 6; ++i) kappa_end(i) = log.kappa_at(log.samples() - 1, i);
    auto v = observer_lyapunov(log, h, cfg.observer.mu, kappa_end);
    for (double vk : v) CHECK(std::abs(vk) <= 1e-16);

    // arbitrary kappa_bar: V stays constant at (1/2) sum kappa_tilde^2
    const Eigen::VectorXd zero_bar = Eigen::VectorXd::Zero(6);
    v = observer_lyapunov(log, h, cfg.observer.mu, zero_bar);
    double expected = 0.0;
    for (int i = 0; i < 6; ++i) expected += 0.5 * log.kappa_at(0, i) * log.kappa_at(0, i);
    for (double vk : v) CHECK(vk == Catch::Approx(expected).epsilon(1e-12));
}

TEST_CASE("observer Lyapunov diagnostic decreases after the transient", "[analysis]") {
    SimConfig cfg = reference_with({{"sim.t_end", "30"}, {"sim.observer_only", "true"}});
    const SimLog log = run(cfg);
    Eigen::VectorXd kappa_end(6);
    for (int i = 0; i < 6; ++i) kappa_end(i) = log.kappa_at(log.samples() - 1, i);
    const auto v = observer_lyapunov(log, h_matrix(cfg.graph), cfg.observer.mu, kappa_end);
    // transient spans roughly one limit-cycle period (~6.7 s)
    for (std::size_t k = 1; k < v.size(); ++k)
        if (log.t[k] >= 10.0) CHECK(v[k] - v[k - 1] <= 1e-6);
}

TEST_CASE("convergence metrics on the exact-initialization run", "[analysis]") {
    SimConfig cfg = reference_with({{"sim.t_end", "10"},
                                    {"sim.observer_only", "true"},
                                    {"observer.omega_hat0", "[[1.0, 1.0, 1.0]]"}});
    const SimLog log = run(cfg);
    const ConvergenceMetrics mx = convergence_metrics(log, 0.1);
    CHECK(mx.window_start == Catch::Approx(9.0));
    CHECK(mx.max_v_err.maxCoeff() <= 1e-8);
    CHECK(mx.max_omega_err.maxCoeff() <= 1e-8);
    CHECK(mx.kappa_tv.maxCoeff() <= 1e-12);
}

TEST_CASE("full-window metrics dominate trailing-window metrics", "[analysis]") {
    SimConfig cfg = reference_with({{"sim.t_end", "5"}});
    const SimLog log = run(cfg);
    const ConvergenceMetrics tail = convergence_metrics(log, 0.1);
    const ConvergenceMetrics full = convergence_metrics(log, 1.0);
    CHECK(full.window_start == 0.0);
    for (int i = 0; i < 6; ++i) {
        CHECK(full.max_v_err(i) >= tail.max_v_err(i));
        CHECK(full.max_omega_err(i) >= tail.max_omega_err(i));
        CHECK(full.max_e(i) >= tail.max_e(i));
    }
    CHECK_THROWS_AS(convergence_metrics(log, 0.0), InsufficientSamples);
    CHECK_THROWS_AS(convergence_metrics(log, 1.5), InsufficientSamples);
}
