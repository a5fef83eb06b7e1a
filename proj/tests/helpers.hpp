#pragma once

#include <random>
#include <vector>

#include "synclab/synclab.hpp"

namespace synclab::testing {

/// Two followers, leader node 3: edges leader->1 plus the undirected pair 1-2.
inline CommGraph two_follower_graph() {
    return build_graph(2, {{3, 1}, {1, 2}, {2, 1}});
}

inline LeaderModel unit_van_der_pol() {
    return van_der_pol_leader(Eigen::Vector3d(1.0, 1.0, 1.0));
}

/// Section-5 gain: rho(z) = 2 + 6(|z| + |z|^2 + |z|^3 + |z|^4).
inline RhoSpec section5_rho() {
    Eigen::VectorXd c(5);
    c << 0.0, 6.0, 6.0, 6.0, 6.0;
    return RhoSpec(c, 2.0);
}

/// Reference scenario with config overrides applied, e.g. {"sim.t_end", "5"}.
inline SimConfig reference_with(
    const std::vector<std::pair<std::string, std::string>>& overrides) {
    json doc = json::parse(reference_scenario_json());
    for (const auto& [key, value] : overrides) apply_override(doc, key, value);
    return scenario_from_json(doc);
}

inline Eigen::VectorXd random_vector(std::mt19937& rng, int size, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Eigen::VectorXd v(size);
    for (int k = 0; k < size; ++k) v(k) = dist(rng);
    return v;
}

/// Random valid graph on n followers: a random spanning arrangement of
/// undirected follower edges plus at least one leader link.
inline CommGraph random_valid_graph(std::mt19937& rng, int n) {
    std::vector<std::pair<int, int>> edges;
    std::uniform_int_distribution<int> coin(0, 1);
    // random tree over followers keeps the subgraph connected
    for (int j = 2; j <= n; ++j) {
        std::uniform_int_distribution<int> pick(1, j - 1);
        const int i = pick(rng);
        edges.push_back({i, j});
        edges.push_back({j, i});
    }
    // extra chords
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j)
            if (coin(rng) && coin(rng)) {
                edges.push_back({i, j});
                edges.push_back({j, i});
            }
    std::uniform_int_distribution<int> pick(1, n);
    edges.push_back({n + 1, pick(rng)});
    if (coin(rng)) edges.push_back({n + 1, pick(rng)});
    return build_graph(n, edges);
}

}  // namespace synclab::testing
