#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "synclab/observer.hpp"

using namespace synclab;
using namespace synclab::testing;

namespace {

ObserverBank make_bank(const CommGraph& g, const LeaderModel& model,
                       const RhoSpec& rho) {
    ObserverBank bank;
    bank.mu = 10.0;
    for (int i = 0; i < g.num_followers(); ++i) {
        ObserverNodeState node;
        node.v_hat = Eigen::VectorXd::Zero(model.state_dim);
        node.omega_hat = Eigen::VectorXd::Zero(model.param_dim);
        node.kappa_hat = 1.0;
        bank.nodes.push_back(node);
        bank.rho.push_back(rho);
    }
    return bank;
}

}  // namespace

TEST_CASE("neighborhood error sums estimate differences", "[observer]") {
    const CommGraph g = two_follower_graph();  // N1 = {2, leader}, N2 = {1}
    const LeaderModel model = unit_van_der_pol();
    ObserverBank bank = make_bank(g, model, section5_rho());

    bank.nodes[0].v_hat = Eigen::Vector2d(1.0, 0.0);
    bank.nodes[1].v_hat = Eigen::Vector2d(0.0, 0.0);
    const Eigen::VectorXd z1 =
        neighborhood_error(bank, g, Eigen::Vector2d(0.0, 0.0), 1);
    CHECK(z1.isApprox(Eigen::Vector2d(-2.0, 0.0)));

    bank.nodes[0].v_hat = Eigen::Vector2d(1.0, 1.0);
    const Eigen::VectorXd z2 =
        neighborhood_error(bank, g, Eigen::Vector2d(0.0, 0.0), 2);
    CHECK(z2.isApprox(Eigen::Vector2d(1.0, 1.0)));

    // consensus point: every estimate equals the leader state
    const Eigen::Vector2d v(0.3, -0.4);
    bank.nodes[0].v_hat = v;
    bank.nodes[1].v_hat = v;
    CHECK(neighborhood_error(bank, g, v, 1).norm() == 0.0);
    CHECK(neighborhood_error(bank, g, v, 2).norm() == 0.0);

    CHECK_THROWS_AS(neighborhood_error(bank, g, v, 3), IndexOutOfRange);
    CHECK_THROWS_AS(neighborhood_error(bank, g, v, 0), IndexOutOfRange);
}

TEST_CASE("section-5 rho values", "[observer]") {
    const RhoSpec rho = section5_rho();
    CHECK(rho_eval(rho, Eigen::Vector2d(1.0, 0.0)) == Catch::Approx(26.0));
    CHECK(rho_eval(rho, Eigen::Vector2d(0.0, 2.0)) == Catch::Approx(182.0));
    CHECK(rho_eval(rho, Eigen::Vector2d::Zero()) == Catch::Approx(2.0));
    // rho is even in sign flips of z
    CHECK(rho_eval(rho, Eigen::Vector2d(-1.0, 0.0)) ==
          rho_eval(rho, Eigen::Vector2d(1.0, 0.0)));
}

TEST_CASE("rho recipe for polynomial leaders", "[observer]") {
    const RhoSpec r3 = default_rho_for_polynomial_leader(3, 6.0, 2.0);
    CHECK(r3.coefficients().size() == 5);
    CHECK(r3.coefficients().minCoeff() == 6.0);
    CHECK(r3.coefficients().maxCoeff() == 6.0);
    CHECK(r3.offset() == 2.0);

    // degree-1 leader degenerates to a constant gain
    const RhoSpec r1 = default_rho_for_polynomial_leader(1, 1.0, 1.0);
    CHECK(rho_eval(r1, Eigen::Vector2d(0.7, -0.3)) == Catch::Approx(2.0));

    const RhoSpec r2 = default_rho_for_polynomial_leader(2, 1.0, 1.0);
    const double zn = Eigen::Vector2d(3.0, 4.0).norm();  // 5
    CHECK(rho_eval(r2, Eigen::Vector2d(3.0, 4.0)) ==
          Catch::Approx(1.0 + 1.0 + zn + zn * zn));

    CHECK_THROWS_AS(default_rho_for_polynomial_leader(3, 0.0, 2.0), InvalidGain);
    CHECK_THROWS_AS(default_rho_for_polynomial_leader(3, 6.0, -1.0), InvalidGain);
}

TEST_CASE("rho specs enforce rho >= 1 and nonnegative coefficients", "[observer]") {
    CHECK_THROWS_AS(RhoSpec(Eigen::VectorXd::Constant(1, 0.5), 0.2), InvalidGain);
    CHECK_THROWS_AS(RhoSpec(Eigen::VectorXd::Constant(2, -1.0), 2.0), InvalidGain);
    CHECK_THROWS_AS(RhoSpec(Eigen::VectorXd::Zero(3), 2.0), InvalidGain);
    CHECK_NOTHROW(RhoSpec(Eigen::VectorXd::Constant(1, 1.0), 0.0));
}

TEST_CASE("observer derivatives at exact initialization are a fixed point",
          "[observer]") {
    const CommGraph g = two_follower_graph();
    const LeaderModel model = unit_van_der_pol();
    ObserverBank bank = make_bank(g, model, section5_rho());
    const Eigen::Vector2d v(2.0, 2.0);
    for (auto& node : bank.nodes) {
        node.v_hat = v;
        node.omega_hat = model.true_params;
    }
    const ObserverDerivatives d = observer_derivatives(bank, g, model, v);
    const Eigen::VectorXd p = eval_p(model, v, model.true_params);
    for (std::size_t i = 0; i < bank.nodes.size(); ++i) {
        CHECK(d.z[i].norm() == 0.0);
        CHECK((d.v_hat_dot[i] - p).norm() == 0.0);
        CHECK(d.omega_hat_dot[i].norm() == 0.0);
        CHECK(d.kappa_hat_dot(static_cast<int>(i)) == 0.0);
    }
}

TEST_CASE("parameter adaptation follows mu phi^T z", "[observer]") {
    // isolate node 2 (single neighbor 1) to pin z2 = (0, 1)
    const CommGraph g = two_follower_graph();
    const LeaderModel model = unit_van_der_pol();
    ObserverBank bank = make_bank(g, model, section5_rho());
    bank.mu = 10.0;
    bank.nodes[1].v_hat = Eigen::Vector2d(2.0, 2.0);
    bank.nodes[1].omega_hat = Eigen::Vector3d(1.0, 1.0, 1.0);
    bank.nodes[0].v_hat = bank.nodes[1].v_hat + Eigen::Vector2d(0.0, 1.0);

    const ObserverDerivatives d =
        observer_derivatives(bank, g, model, Eigen::Vector2d::Zero());
    REQUIRE(d.z[1].isApprox(Eigen::Vector2d(0.0, 1.0)));
    CHECK(d.omega_hat_dot[1].isApprox(Eigen::Vector3d(0.0, -20.0, -60.0)));
}

TEST_CASE("kappa adaptation rate is rho |z|^2", "[observer]") {
    const CommGraph g = two_follower_graph();
    const LeaderModel model = unit_van_der_pol();
    ObserverBank bank = make_bank(g, model, section5_rho());
    // node 2 sees only node 1: z2 = (1, 0)
    bank.nodes[0].v_hat = Eigen::Vector2d(1.0, 0.0);
    const ObserverDerivatives d =
        observer_derivatives(bank, g, model, Eigen::Vector2d::Zero());
    REQUIRE(d.z[1].isApprox(Eigen::Vector2d(1.0, 0.0)));
    CHECK(d.kappa_hat_dot(1) == Catch::Approx(26.0));
    CHECK(d.kappa_hat_dot.minCoeff() >= 0.0);
}

TEST_CASE("stacked neighborhood errors equal -(H kron I) vtilde", "[observer]") {
    std::mt19937 rng(23);
    const LeaderModel model = unit_van_der_pol();
    for (int rep = 0; rep < 100; ++rep) {
        std::uniform_int_distribution<int> nd(1, 8);
        const CommGraph g = random_valid_graph(rng, nd(rng));
        const int n = g.num_followers();
        const int m = model.state_dim;
        ObserverBank bank = make_bank(g, model, section5_rho());
        const Eigen::VectorXd v = random_vector(rng, m, -3.0, 3.0);
        for (auto& node : bank.nodes) node.v_hat = random_vector(rng, m, -3.0, 3.0);

        const Eigen::MatrixXd h = h_matrix(g);
        Eigen::MatrixXd h_kron = Eigen::MatrixXd::Zero(n * m, n * m);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                h_kron.block(r * m, c * m, m, m) =
                    h(r, c) * Eigen::MatrixXd::Identity(m, m);

        Eigen::VectorXd z_stacked(n * m), vtil(n * m);
        for (int i = 0; i < n; ++i) {
            z_stacked.segment(i * m, m) = neighborhood_error(bank, g, v, i + 1);
            vtil.segment(i * m, m) = bank.nodes[static_cast<std::size_t>(i)].v_hat - v;
        }
        CHECK((z_stacked + h_kron * vtil).norm() <= 1e-12);
    }
}

TEST_CASE("observer bank validation", "[observer]") {
    const CommGraph g = two_follower_graph();
    const LeaderModel model = unit_van_der_pol();
    ObserverBank bank = make_bank(g, model, section5_rho());
    bank.mu = -1.0;
    CHECK_THROWS_AS(bank.validate(model), InvalidGain);
    bank.mu = 10.0;
    bank.nodes[0].v_hat = Eigen::Vector3d::Zero();
    CHECK_THROWS_AS(bank.validate(model), DimensionMismatch);
}
