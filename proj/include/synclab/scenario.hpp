#pragma once

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "synclab/errors.hpp"
#include "synclab/sim.hpp"

namespace synclab {

using nlohmann::json;

namespace detail {

inline void reject_unknown_keys(const json& obj, const std::string& section,
                                const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw SchemaError("unknown key '" + it.key() + "' in section '" + section + "'");
}

inline const json& require_key(const json& obj, const std::string& section,
                               const std::string& key) {
    if (!obj.contains(key))
        throw SchemaError("section '" + section + "' is missing required key '" + key + "'");
    return obj.at(key);
}

inline double as_number(const json& v, const std::string& what) {
    if (!v.is_number()) throw SchemaError(what + " must be a number");
    return v.get<double>();
}

inline Eigen::VectorXd as_vector(const json& v, const std::string& what) {
    if (!v.is_array()) throw SchemaError(what + " must be an array of numbers");
    Eigen::VectorXd out(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) out(static_cast<Eigen::Index>(k)) =
        as_number(v[k], what + "[" + std::to_string(k) + "]");
    return out;
}

inline Eigen::MatrixXd as_matrix(const json& v, const std::string& what) {
    if (!v.is_array() || v.empty()) throw SchemaError(what + " must be an array of rows");
    const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
    if (cols == 0) throw SchemaError(what + " rows must be nonempty arrays");
    Eigen::MatrixXd out(v.size(), cols);
    for (std::size_t r = 0; r < v.size(); ++r) {
        if (!v[r].is_array() || v[r].size() != cols)
            throw SchemaError(what + " rows must all have " + std::to_string(cols) +
                              " entries");
        for (std::size_t c = 0; c < cols; ++c)
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                as_number(v[r][c], what);
    }
    return out;
}

/// Per-node vectors given either as one row (broadcast) or as N rows.
inline std::vector<Eigen::VectorXd> per_node_vectors(const json& v, int n, int dim,
                                                     const std::string& what) {
    const Eigen::MatrixXd m = as_matrix(v, what);
    if (m.cols() != dim)
        throw SchemaError(what + " entries must have length " + std::to_string(dim));
    if (m.rows() != 1 && m.rows() != n)
        throw SchemaError(what + " must have 1 or " + std::to_string(n) + " rows");
    std::vector<Eigen::VectorXd> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        out.push_back(m.row(m.rows() == 1 ? 0 : i).transpose());
    return out;
}

}  // namespace detail

/// Parse a scenario document into a validated SimConfig. Unknown keys are
/// rejected; numeric constraints raise SchemaError; topology violations raise
/// InvalidTopology.
inline SimConfig scenario_from_json(const json& doc) {
    using detail::as_matrix;
    using detail::as_number;
    using detail::as_vector;
    using detail::per_node_vectors;
    using detail::reject_unknown_keys;
    using detail::require_key;

    if (!doc.is_object()) throw SchemaError("scenario document must be a JSON object");
    reject_unknown_keys(doc, "scenario",
                        {"graph", "leader", "observer", "agents", "controller", "sim"});

    SimConfig cfg;

    // graph
    {
        const json& g = require_key(doc, "scenario", "graph");
        reject_unknown_keys(g, "graph", {"followers", "edges"});
        const double nf = as_number(require_key(g, "graph", "followers"), "graph.followers");
        if (nf < 1 || nf != std::floor(nf))
            throw SchemaError("graph.followers must be a positive integer");
        const json& ej = require_key(g, "graph", "edges");
        if (!ej.is_array()) throw SchemaError("graph.edges must be an array of pairs");
        std::vector<std::pair<int, int>> edges;
        for (const auto& e : ej) {
            if (!e.is_array() || e.size() != 2)
                throw SchemaError("graph.edges entries must be [i, j] pairs");
            edges.emplace_back(e[0].get<int>(), e[1].get<int>());
        }
        cfg.graph = build_graph(static_cast<int>(nf), edges);
    }
    const int n = cfg.graph.num_followers();

    // leader
    {
        const json& lj = require_key(doc, "scenario", "leader");
        reject_unknown_keys(lj, "leader", {"type", "omega", "v0", "E"});
        const std::string type = require_key(lj, "leader", "type").get<std::string>();
        if (type != "van_der_pol")
            throw SchemaError("leader.type '" + type + "' is not supported (van_der_pol)");
        const Eigen::VectorXd omega = as_vector(require_key(lj, "leader", "omega"),
                                                "leader.omega");
        if (omega.size() != 3)
            throw SchemaError("leader.omega must have 3 entries (a, b, c) for van_der_pol");
        Eigen::MatrixXd E = Eigen::MatrixXd::Identity(2, 2);
        if (lj.contains("E")) {
            E = as_matrix(lj.at("E"), "leader.E");
            if (E.cols() != 2) throw SchemaError("leader.E must have 2 columns");
        }
        cfg.leader = van_der_pol_leader(Eigen::Vector3d(omega), std::move(E));
        cfg.v0 = as_vector(require_key(lj, "leader", "v0"), "leader.v0");
        if (cfg.v0.size() != cfg.leader.state_dim)
            throw SchemaError("leader.v0 must have the leader state dimension");
    }
    const int m = cfg.leader.state_dim;
    const int l = cfg.leader.param_dim;

    // observer
    {
        const json& oj = require_key(doc, "scenario", "observer");
        reject_unknown_keys(oj, "observer", {"mu", "rho", "kappa0", "v_hat0", "omega_hat0"});
        cfg.observer.mu = as_number(require_key(oj, "observer", "mu"), "observer.mu");
        if (cfg.observer.mu <= 0.0) throw SchemaError("mu must be positive");

        // default gain recipe: a = 6, b = 2 on the leader's polynomial degree
        const json rj = oj.contains("rho") ? oj.at("rho")
                                           : json{{"a", 6.0}, {"b", 2.0}};
        reject_unknown_keys(rj, "observer.rho", {"a", "b", "offset", "coefficients"});
        RhoSpec rho = [&]() {
            if (rj.contains("a") || rj.contains("b")) {
                const double a = as_number(require_key(rj, "observer.rho", "a"), "rho.a");
                const double b = as_number(require_key(rj, "observer.rho", "b"), "rho.b");
                if (a <= 0.0 || b <= 0.0)
                    throw SchemaError("rho.a and rho.b must be positive");
                return default_rho_for_polynomial_leader(cfg.leader.poly_degree, a, b);
            }
            const Eigen::VectorXd coeffs = as_vector(
                require_key(rj, "observer.rho", "coefficients"), "rho.coefficients");
            const double offset =
                as_number(require_key(rj, "observer.rho", "offset"), "rho.offset");
            try {
                return RhoSpec(coeffs, offset);
            } catch (const InvalidGain& err) {
                throw SchemaError(std::string("observer.rho: ") + err.what());
            }
        }();

        Eigen::VectorXd kappa0 = Eigen::VectorXd::Ones(n);
        if (oj.contains("kappa0")) {
            const json& kj = oj.at("kappa0");
            if (kj.is_number())
                kappa0.setConstant(kj.get<double>());
            else {
                kappa0 = as_vector(kj, "observer.kappa0");
                if (kappa0.size() != n)
                    throw SchemaError("observer.kappa0 must have one entry per follower");
            }
        }
        std::vector<Eigen::VectorXd> v_hat0(static_cast<std::size_t>(n),
                                            Eigen::VectorXd::Zero(m));
        if (oj.contains("v_hat0"))
            v_hat0 = per_node_vectors(oj.at("v_hat0"), n, m, "observer.v_hat0");
        std::vector<Eigen::VectorXd> omega_hat0(static_cast<std::size_t>(n),
                                                Eigen::VectorXd::Zero(l));
        if (oj.contains("omega_hat0"))
            omega_hat0 = per_node_vectors(oj.at("omega_hat0"), n, l, "observer.omega_hat0");

        for (int i = 0; i < n; ++i) {
            ObserverNodeState node;
            node.v_hat = v_hat0[static_cast<std::size_t>(i)];
            node.omega_hat = omega_hat0[static_cast<std::size_t>(i)];
            node.kappa_hat = kappa0(i);
            cfg.observer.nodes.push_back(std::move(node));
            cfg.observer.rho.push_back(rho);
        }
    }

    // agents + controller (optional pair)
    if (doc.contains("agents")) {
        const json& aj = doc.at("agents");
        reject_unknown_keys(aj, "agents", {"theta", "q0", "qd0", "g", "theta_hat0"});
        const double gravity =
            aj.contains("g") ? as_number(aj.at("g"), "agents.g") : 9.8;
        const Eigen::MatrixXd theta = as_matrix(require_key(aj, "agents", "theta"),
                                                "agents.theta");
        if (theta.rows() != n || theta.cols() != 5)
            throw SchemaError("agents.theta must be N rows of 5 parameters");
        const auto q0 = per_node_vectors(require_key(aj, "agents", "q0"), n, 2, "agents.q0");
        std::vector<Eigen::VectorXd> qd0(static_cast<std::size_t>(n),
                                         Eigen::VectorXd::Zero(2));
        if (aj.contains("qd0")) qd0 = per_node_vectors(aj.at("qd0"), n, 2, "agents.qd0");
        std::vector<Eigen::VectorXd> theta_hat0(static_cast<std::size_t>(n),
                                                Eigen::VectorXd::Zero(5));
        if (aj.contains("theta_hat0"))
            theta_hat0 = per_node_vectors(aj.at("theta_hat0"), n, 5, "agents.theta_hat0");

        for (int i = 0; i < n; ++i) {
            TwoLinkArmParams p;
            p.theta = theta.row(i).transpose();
            p.gravity = gravity;
            cfg.arm_params.push_back(p);
            ArmState st;
            st.q = q0[static_cast<std::size_t>(i)];
            st.qd = qd0[static_cast<std::size_t>(i)];
            cfg.arm_state0.push_back(st);
            ControllerState ctl;
            ctl.theta_hat = theta_hat0[static_cast<std::size_t>(i)];
            cfg.controller0.push_back(ctl);
        }

        const json& cj = require_key(doc, "scenario", "controller");
        reject_unknown_keys(cj, "controller", {"K", "Gamma", "alpha"});
        const json& kj = require_key(cj, "controller", "K");
        if (kj.is_number())
            cfg.gains.K = kj.get<double>() * Mat2::Identity();
        else {
            const Eigen::MatrixXd K = as_matrix(kj, "controller.K");
            if (K.rows() != 2 || K.cols() != 2)
                throw SchemaError("controller.K must be a scalar or a 2x2 matrix");
            cfg.gains.K = K;
        }
        const json& gj = require_key(cj, "controller", "Gamma");
        if (gj.is_number())
            cfg.gains.Gamma = gj.get<double>() * Eigen::Matrix<double, 5, 5>::Identity();
        else {
            const Eigen::VectorXd diag = as_vector(gj, "controller.Gamma");
            if (diag.size() != 5)
                throw SchemaError("controller.Gamma must be a scalar or a 5-entry diagonal");
            cfg.gains.Gamma = diag.asDiagonal();
        }
        cfg.gains.alpha = as_number(require_key(cj, "controller", "alpha"),
                                    "controller.alpha");
        try {
            cfg.gains.validate();
        } catch (const InvalidGain& err) {
            throw SchemaError(std::string("controller: ") + err.what());
        }
    } else if (doc.contains("controller")) {
        throw SchemaError("section 'controller' requires section 'agents'");
    }

    // sim
    if (doc.contains("sim")) {
        const json& sj = doc.at("sim");
        reject_unknown_keys(sj, "sim",
                            {"dt", "t_end", "log_stride", "seed", "observer_only"});
        if (sj.contains("dt")) cfg.sim.dt = as_number(sj.at("dt"), "sim.dt");
        if (sj.contains("t_end")) cfg.sim.t_end = as_number(sj.at("t_end"), "sim.t_end");
        if (sj.contains("log_stride")) {
            const double stride = as_number(sj.at("log_stride"), "sim.log_stride");
            if (stride < 1 || stride != std::floor(stride))
                throw SchemaError("sim.log_stride must be a positive integer");
            cfg.sim.log_stride = static_cast<int>(stride);
        }
        if (sj.contains("seed")) cfg.sim.seed = sj.at("seed").get<long>();
        if (sj.contains("observer_only"))
            cfg.observer_only = sj.at("observer_only").get<bool>();
    }

    cfg.validate();
    return cfg;
}

/// Read and parse a scenario file.
inline json parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOError("cannot open scenario file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& err) {
        throw SchemaError("invalid JSON in '" + path + "': " + err.what());
    }
}

inline SimConfig load_scenario(const std::string& path) {
    return scenario_from_json(parse_scenario_file(path));
}

/**
 * Built-in reference scenario: six two-link arms on the chain topology
 * 1–2–3–4–5–6 with the leader feeding nodes 1 and 4, a Van der Pol leader
 * with a = b = c = 1 started at v(0) = (2, 2), gains μ = 10, K = 20 I,
 * Γ = 10 I, α = 2, ρ(z) = 2 + 6(‖z‖ + ‖z‖² + ‖z‖³ + ‖z‖⁴).
 *
 * Observer estimates start at v̂ᵢ(0) = v(0): the quartic ρ makes large
 * initial neighborhood errors stiffer than dt = 1e-3 can resolve.
 */
inline const char* reference_scenario_json() {
    return R"json({
  "graph": {
    "followers": 6,
    "edges": [[7,1],[7,4],[1,2],[2,1],[2,3],[3,2],[3,4],[4,3],[4,5],[5,4],[5,6],[6,5]]
  },
  "leader": {"type": "van_der_pol", "omega": [1.0, 1.0, 1.0], "v0": [2.0, 2.0]},
  "observer": {
    "mu": 10.0,
    "rho": {"offset": 2.0, "coefficients": [0.0, 6.0, 6.0, 6.0, 6.0]},
    "kappa0": [3.3689, 3.4607, 3.9816, 3.1564, 3.8555, 3.6448],
    "v_hat0": [[2.0, 2.0]],
    "omega_hat0": [[0.0, 0.0, 0.0]]
  },
  "agents": {
    "theta": [[0.64, 1.10, 0.08, 0.64, 0.32],
              [0.76, 1.17, 0.14, 0.93, 0.44],
              [0.91, 1.26, 0.22, 1.27, 0.58],
              [1.10, 1.36, 0.32, 1.67, 0.73],
              [1.21, 1.16, 0.12, 1.45, 1.03],
              [1.31, 1.56, 0.22, 1.65, 1.33]],
    "q0": [[-1.0, 2.0], [-2.0, -1.0], [1.0, -1.0], [2.0, -1.0], [-3.0, 2.0], [-1.0, 1.0]],
    "qd0": [[0.0, 0.0]],
    "g": 9.8
  },
  "controller": {"K": 20.0, "Gamma": 10.0, "alpha": 2.0},
  "sim": {"dt": 0.001, "t_end": 50.0, "log_stride": 10}
})json";
}

inline SimConfig reference_scenario() {
    return scenario_from_json(json::parse(reference_scenario_json()));
}

/// Apply a `--set key=value` override to a parsed document. The key is a
/// dotted path; the value is parsed as JSON when possible, else kept as a
/// string.
inline void apply_override(json& doc, const std::string& dotted_key,
                           const std::string& value) {
    json* node = &doc;
    std::stringstream path(dotted_key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(path, part, '.')) parts.push_back(part);
    if (parts.empty()) throw SchemaError("empty override key");
    for (std::size_t k = 0; k + 1 < parts.size(); ++k) node = &((*node)[parts[k]]);
    try {
        (*node)[parts.back()] = json::parse(value);
    } catch (const json::parse_error&) {
        (*node)[parts.back()] = value;
    }
}

}  // namespace synclab
