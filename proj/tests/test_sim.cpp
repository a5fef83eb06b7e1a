#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "synclab/synclab.hpp"

using namespace synclab;
using namespace synclab::testing;

TEST_CASE("rk4 step against the exponential decay oracle", "[sim]") {
    const auto f = [](const Eigen::VectorXd& x, double) { return Eigen::VectorXd(-x); };
    Eigen::VectorXd x = Eigen::VectorXd::Ones(1);
    x = rk4_step(f, x, 0.0, 0.1);
    CHECK(x(0) == Catch::Approx(0.9048375).epsilon(1e-12));
    CHECK(std::abs(x(0) - std::exp(-0.1)) <= 1e-7);
}

TEST_CASE("rk4 step is exact on constants and linear growth", "[sim]") {
    const auto zero = [](const Eigen::VectorXd& x, double) {
        return Eigen::VectorXd(Eigen::VectorXd::Zero(x.size()));
    };
    const auto one = [](const Eigen::VectorXd& x, double) {
        return Eigen::VectorXd(Eigen::VectorXd::Ones(x.size()));
    };
    Eigen::VectorXd x = Eigen::VectorXd::Constant(3, 0.7);
    CHECK((rk4_step(zero, x, 0.0, 0.25) - x).norm() == 0.0);
    CHECK((rk4_step(one, x, 0.0, 0.25) - (x.array() + 0.25).matrix()).norm() == 0.0);
}

TEST_CASE("rk4 step rejects non-finite derivatives", "[sim]") {
    const auto bad = [](const Eigen::VectorXd& x, double) {
        return Eigen::VectorXd(Eigen::VectorXd::Constant(
            x.size(), std::numeric_limits<double>::quiet_NaN()));
    };
    CHECK_THROWS_AS(rk4_step(bad, Eigen::VectorXd::Ones(2), 0.0, 0.1),
                    NonFiniteDerivative);
}

TEST_CASE("reference scenario stacks a 92-dimensional state", "[sim]") {
    const SimConfig cfg = reference_scenario();
    CHECK(cfg.layout().size() == 92);
    SimConfig obs = cfg;
    obs.observer_only = true;
    CHECK(obs.layout().size() == 38);
}

TEST_CASE("identical configs give bit-identical logs", "[sim]") {
    const SimConfig cfg = reference_with({{"sim.t_end", "1"}});
    const SimLog a = run(cfg);
    const SimLog b = run(cfg);
    REQUIRE(a.samples() == b.samples());
    CHECK((a.state.array() == b.state.array()).all());
    CHECK((a.tau.array() == b.tau.array()).all());
    CHECK(a.t == b.t);
}

TEST_CASE("exact initialization stays on the invariant manifold", "[sim]") {
    SimConfig cfg = reference_with({{"sim.t_end", "10"},
                                    {"sim.observer_only", "true"},
                                    {"observer.omega_hat0", "[[1.0, 1.0, 1.0]]"}});
    const SimLog log = run(cfg);
    CHECK(log.v_err.maxCoeff() <= 1e-8);
    CHECK(log.omega_err.maxCoeff() <= 1e-8);
}

TEST_CASE("step halving shows fourth-order convergence", "[sim]") {
    const auto end_state = [](double dt) {
        std::ostringstream dts, strides;
        dts << dt;
        strides << static_cast<int>(std::llround(0.5 / dt));
        const SimConfig cfg = reference_with({{"sim.t_end", "0.5"},
                                              {"sim.dt", dts.str()},
                                              {"sim.log_stride", strides.str()}});
        const SimLog log = run(cfg);
        return Eigen::VectorXd(log.state.row(log.samples() - 1).transpose());
    };
    const Eigen::VectorXd x1 = end_state(1e-3);
    const Eigen::VectorXd x2 = end_state(5e-4);
    const Eigen::VectorXd x3 = end_state(2.5e-4);
    const double ratio = (x1 - x2).norm() / (x2 - x3).norm();
    CAPTURE(ratio);
    CHECK(ratio >= 8.0);
    CHECK(ratio <= 32.0);
}

TEST_CASE("kappa gains never decrease along a run", "[sim]") {
    const SimConfig cfg = reference_with({{"sim.t_end", "2"}});
    const SimLog log = run(cfg);
    CHECK(kappa_nondecreasing(log));
}

TEST_CASE("diverging configurations abort with time and component", "[sim]") {
    // v_hat(0) = 0 makes the quartic-gain transient stiffer than dt = 1e-3
    // can integrate; the run must stop with a diagnostic, not NaNs in the log
    SimConfig cfg = reference_with({{"sim.t_end", "1"},
                                    {"sim.observer_only", "true"},
                                    {"observer.v_hat0", "[[0.0, 0.0]]"}});
    try {
        run(cfg);
        FAIL("expected NonFiniteState or NonFiniteDerivative");
    } catch (const NonFiniteState& err) {
        CHECK(std::string(err.what()).find("t = ") != std::string::npos);
    } catch (const NonFiniteDerivative& err) {
        CHECK(std::string(err.what()).find("t = ") != std::string::npos);
    }
}

TEST_CASE("config validation rejects inconsistent settings", "[sim]") {
    CHECK_THROWS_AS(reference_with({{"sim.dt", "0.0"}}), SchemaError);
    CHECK_THROWS_AS(reference_with({{"sim.t_end", "-1"}}), SchemaError);
    CHECK_THROWS_AS(reference_with({{"sim.log_stride", "0"}}), SchemaError);
    CHECK_THROWS_AS(reference_with({{"sim.t_end", "50.0005"}}), SchemaError);
}

TEST_CASE("csv output: pinned column order and 17-digit round trip", "[sim]") {
    SimConfig cfg = reference_with({{"sim.t_end", "0.02"}, {"sim.log_stride", "1"}});
    const SimLog log = run(cfg);
    const std::string path = "synclab_test_run.csv";
    write_csv(log, path);

    std::ifstream in(path);
    REQUIRE(in);
    std::string header;
    std::getline(in, header);
    std::stringstream hs(header);
    std::vector<std::string> cols;
    std::string col;
    while (std::getline(hs, col, ',')) cols.push_back(col);

    REQUIRE(cols.size() == 1 + 2 + 6 * 21);
    CHECK(cols[0] == "t");
    CHECK(cols[1] == "v0");
    CHECK(cols[2] == "v1");
    CHECK(cols[3] == "vhat1_0");
    CHECK(cols[8] == "kappa1");
    CHECK(cols[9] == "q1_0");
    CHECK(cols[13] == "thetahat1_0");
    CHECK(cols[18] == "tau1_0");
    CHECK(cols[20] == "e1_0");
    CHECK(cols[22] == "s1_0");
    CHECK(cols[23] == "s1_1");
    CHECK(cols[24] == "vhat2_0");

    // first data row round-trips the kappa1 initial value exactly
    std::string row;
    std::getline(in, row);
    std::stringstream rs(row);
    std::vector<std::string> fields;
    while (std::getline(rs, col, ',')) fields.push_back(col);
    REQUIRE(fields.size() == cols.size());
    CHECK(std::stod(fields[8]) == 3.3689);
    in.close();
    std::remove(path.c_str());
}
