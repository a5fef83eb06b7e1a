#pragma once

#include <algorithm>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "synclab/errors.hpp"

namespace synclab {

/**
 * Communication topology of N followers (nodes 1..N) and one leader
 * (node N+1). An edge (i, j) means node j receives information from node i.
 *
 * Standing assumptions, validated by build_graph():
 *  - the leader has no incoming edges,
 *  - the follower-induced subgraph is undirected,
 *  - every follower is reachable from the leader (spanning tree rooted at N+1).
 */
class CommGraph {
public:
    /// Empty placeholder; real graphs come from build_graph().
    CommGraph() : num_followers_(0), in_neighbors_(1) {}

    CommGraph(int num_followers,
              std::vector<std::pair<int, int>> edges,
              std::vector<std::vector<int>> in_neighbors)
        : num_followers_(num_followers),
          edges_(std::move(edges)),
          in_neighbors_(std::move(in_neighbors)) {}

    int num_followers() const { return num_followers_; }
    int leader() const { return num_followers_ + 1; }

    /// In-neighbor set of a node (1-based); empty for the leader.
    const std::vector<int>& in_neighbors(int node) const {
        if (node < 1 || node > leader())
            throw IndexOutOfRange("node index " + std::to_string(node) +
                                  " outside 1.." + std::to_string(leader()));
        return in_neighbors_[static_cast<std::size_t>(node)];
    }

    const std::vector<std::pair<int, int>>& edges() const { return edges_; }

private:
    int num_followers_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<int>> in_neighbors_;  // 1-based, slot 0 unused
};

/// Build and validate a communication graph. Throws InvalidTopology with the
/// violated assumption spelled out.
inline CommGraph build_graph(int num_followers,
                             const std::vector<std::pair<int, int>>& edges) {
    if (num_followers < 1)
        throw InvalidTopology("graph needs at least one follower");
    const int n = num_followers;
    const int leader = n + 1;

    std::set<std::pair<int, int>> edge_set;
    for (const auto& [i, j] : edges) {
        if (i < 1 || i > leader || j < 1 || j > leader)
            throw InvalidTopology("edge (" + std::to_string(i) + "," +
                                  std::to_string(j) + ") uses a node outside 1.." +
                                  std::to_string(leader));
        if (i == j)
            throw InvalidTopology("self-loop at node " + std::to_string(i));
        if (j == leader)
            throw InvalidTopology(
                "edge (" + std::to_string(i) + "," + std::to_string(j) +
                ") enters the leader; the leader node must have no incoming edges");
        edge_set.insert({i, j});
    }

    // Follower-induced subgraph must be undirected.
    for (const auto& [i, j] : edge_set) {
        if (i <= n && j <= n && !edge_set.count({j, i}))
            throw InvalidTopology("follower subgraph is not undirected: edge (" +
                                  std::to_string(i) + "," + std::to_string(j) +
                                  ") has no reverse");
    }

    std::vector<std::vector<int>> nbrs(static_cast<std::size_t>(leader) + 1);
    for (const auto& [i, j] : edge_set)
        nbrs[static_cast<std::size_t>(j)].push_back(i);
    for (auto& v : nbrs) std::sort(v.begin(), v.end());

    // Every follower reachable from the leader along directed edges.
    std::vector<char> seen(static_cast<std::size_t>(leader) + 1, 0);
    std::queue<int> frontier;
    frontier.push(leader);
    seen[static_cast<std::size_t>(leader)] = 1;
    while (!frontier.empty()) {
        const int u = frontier.front();
        frontier.pop();
        for (const auto& [i, j] : edge_set) {
            if (i == u && !seen[static_cast<std::size_t>(j)]) {
                seen[static_cast<std::size_t>(j)] = 1;
                frontier.push(j);
            }
        }
    }
    for (int j = 1; j <= n; ++j) {
        if (!seen[static_cast<std::size_t>(j)])
            throw InvalidTopology(
                "no spanning tree rooted at the leader: follower " +
                std::to_string(j) + " is unreachable from node " +
                std::to_string(leader));
    }

    return CommGraph(n, std::vector<std::pair<int, int>>(edge_set.begin(), edge_set.end()),
                     std::move(nbrs));
}

/// Laplacian of the full graph (leader row is zero; every row sums to zero).
inline Eigen::MatrixXd laplacian(const CommGraph& g) {
    const int total = g.leader();
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(total, total);
    for (int node = 1; node <= total; ++node) {
        const auto& nbrs = g.in_neighbors(node);
        lap(node - 1, node - 1) = static_cast<double>(nbrs.size());
        for (int i : nbrs) lap(node - 1, i - 1) = -1.0;
    }
    return lap;
}

// Relative eigenvalue floor below which H is rejected as not positive definite.
inline constexpr double kHMatrixEigTolerance = 1e-9;

/// H = Laplacian with the leader row and column removed. Symmetric positive
/// definite for every admissible topology; verified by eigensolve.
inline Eigen::MatrixXd h_matrix(const CommGraph& g) {
    const int n = g.num_followers();
    const Eigen::MatrixXd lap = laplacian(g);
    Eigen::MatrixXd h = lap.topLeftCorner(n, n);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
    if (eig.info() != Eigen::Success)
        throw NotPositiveDefinite("eigensolve on H failed");
    const double min_eig = eig.eigenvalues().minCoeff();
    const double max_eig = eig.eigenvalues().maxCoeff();
    if (min_eig <= kHMatrixEigTolerance * std::max(max_eig, 1.0))
        throw NotPositiveDefinite(
            "H is not positive definite (min eigenvalue " +
            std::to_string(min_eig) +
            "); the topology violates the spanning-tree/undirected assumptions");
    return h;
}

}  // namespace synclab
