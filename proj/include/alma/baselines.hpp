#ifndef ALMA_BASELINES_HPP
#define ALMA_BASELINES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "alma/instance.hpp"
#include "alma/rng.hpp"

namespace alma {

struct DenseCostMatrix {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<double> weights; // row-major, missing edges = 0

    double at(int r, int c) const {
        return weights[static_cast<std::size_t>(r) * static_cast<std::size_t>(n_cols) +
                       static_cast<std::size_t>(c)];
    }
};

// Kuhn's O(n^3) Hungarian algorithm with potentials, on a square matrix
// padded with zeros; maximization done by negating weights. Returns for
// each row the assigned column (padded cells included; callers strip them).
inline std::vector<int> hungarian_square(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    const double INF = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0);
    std::vector<double> v(static_cast<std::size_t>(n + 1), 0.0);
    std::vector<int> p(static_cast<std::size_t>(n + 1), 0);   // column -> row (1-based)
    std::vector<int> way(static_cast<std::size_t>(n + 1), 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n + 1), INF);
        std::vector<bool> used(static_cast<std::size_t>(n + 1), false);
        do {
            used[static_cast<std::size_t>(j0)] = true;
            int i0 = p[static_cast<std::size_t>(j0)];
            int j1 = 0;
            double delta = INF;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                double cur = cost[static_cast<std::size_t>(i0 - 1)][static_cast<std::size_t>(j - 1)] -
                             u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            int j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= n; ++j)
        if (p[static_cast<std::size_t>(j)] > 0)
            row_to_col[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
    return row_to_col;
}

// Maximum-total-utility matching of a bipartite instance. Zero-utility and
// padded assignments are stripped from the output.
inline Matching hungarian_max_weight(const MatchingInstance& instance) {
    const int n = std::max(instance.n_agents, instance.n_resources);
    std::vector<std::vector<double>> cost(
        static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int a = 0; a < instance.n_agents; ++a)
        for (const Edge& e : instance.interest[static_cast<std::size_t>(a)])
            cost[static_cast<std::size_t>(a)][static_cast<std::size_t>(e.resource)] =
                -e.utility;
    Matching m;
    m.assignment.assign(static_cast<std::size_t>(instance.n_agents), std::nullopt);
    if (n == 0) return m;
    const auto row_to_col = hungarian_square(cost);
    for (int a = 0; a < instance.n_agents; ++a) {
        int r = row_to_col[static_cast<std::size_t>(a)];
        if (r < 0 || r >= instance.n_resources) continue;
        auto u = instance.utility_of(a, r);
        if (u && *u > 0.0) m.assignment[static_cast<std::size_t>(a)] = r;
    }
    return m;
}

struct WeightedEdge {
    int u = 0;
    int v = 0;
    double weight = 0.0;
};

struct GraphMatching {
    std::vector<std::pair<int, int>> edges; // normalized u < v, sorted
    double weight = 0.0;
};

namespace detail {

struct BfValue {
    double weight = 0.0;
    int cardinality = 0;
    int choice = -2; // -2 unsolved, -1 skip lowest vertex, else matched partner index
};

// Subset DP over one connected component: best(S) considers the lowest
// set vertex, matching it with each neighbor in S (partners in ascending
// order) or skipping it. The enumeration order makes the reconstructed
// edge set the lexicographically smallest among ties (max weight, then
// max cardinality).
inline BfValue& bf_solve(std::uint32_t mask, std::vector<BfValue>& memo,
                         const std::vector<std::vector<double>>& w, int k) {
    BfValue& val = memo[mask];
    if (val.choice != -2) return val;
    if (mask == 0) {
        val = {0.0, 0, -1};
        return val;
    }
    int lo = 0;
    while (!(mask & (1u << lo))) ++lo;
    // Try matching lo with each later vertex in the mask, ascending.
    BfValue best{-1.0, -1, -1};
    bool have = false;
    for (int j = lo + 1; j < k; ++j) {
        if (!(mask & (1u << j))) continue;
        double wij = w[static_cast<std::size_t>(lo)][static_cast<std::size_t>(j)];
        if (wij < 0.0) continue; // no edge
        const BfValue& rest =
            bf_solve(mask & ~(1u << lo) & ~(1u << j), memo, w, k);
        double cand_w = wij + rest.weight;
        int cand_c = 1 + rest.cardinality;
        if (!have || cand_w > best.weight + 1e-15 ||
            (cand_w > best.weight - 1e-15 && cand_c > best.cardinality)) {
            best = {cand_w, cand_c, j};
            have = true;
        }
    }
    { // Skip lo entirely; last in the tie order.
        const BfValue& rest = bf_solve(mask & ~(1u << lo), memo, w, k);
        if (!have || rest.weight > best.weight + 1e-15 ||
            (rest.weight > best.weight - 1e-15 && rest.cardinality > best.cardinality)) {
            best = {rest.weight, rest.cardinality, -1};
        }
    }
    val = best;
    return val;
}

} // namespace detail

// Exact maximum-weight matching on a general graph by enumeration with
// memoization over vertex subsets, per connected component. Ties broken
// toward maximum weight, then maximum cardinality, then lexicographically
// smallest edge set. Components are limited to 16 vertices.
inline GraphMatching brute_force_max_weight(const std::vector<WeightedEdge>& edges) {
    // Collect vertices and union components.
    std::map<int, int> vid; // original id -> dense id
    for (const WeightedEdge& e : edges) {
        if (e.u == e.v) throw std::invalid_argument("brute force: self-loop");
        if (e.weight < 0.0 || !std::isfinite(e.weight))
            throw std::invalid_argument("brute force: weight must be finite, >= 0");
        vid.emplace(e.u, 0);
        vid.emplace(e.v, 0);
    }
    std::vector<int> verts;
    for (auto& [orig, dense] : vid) {
        dense = static_cast<int>(verts.size());
        verts.push_back(orig);
    }
    const int nv = static_cast<int>(verts.size());
    std::vector<int> parent(static_cast<std::size_t>(nv));
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    for (const WeightedEdge& e : edges)
        parent[static_cast<std::size_t>(find(vid[e.u]))] = find(vid[e.v]);

    std::map<int, std::vector<int>> components; // root -> dense vertex ids
    for (int i = 0; i < nv; ++i) components[find(i)].push_back(i);

    GraphMatching result;
    for (auto& [root, comp] : components) {
        const int k = static_cast<int>(comp.size());
        if (k > 16)
            throw std::invalid_argument(
                "brute force: component with " + std::to_string(k) +
                " vertices exceeds the 16-vertex enumeration limit");
        std::vector<int> local(static_cast<std::size_t>(nv), -1);
        for (int i = 0; i < k; ++i) local[static_cast<std::size_t>(comp[static_cast<std::size_t>(i)])] = i;
        std::vector<std::vector<double>> w(
            static_cast<std::size_t>(k), std::vector<double>(static_cast<std::size_t>(k), -1.0));
        for (const WeightedEdge& e : edges) {
            int a = local[static_cast<std::size_t>(vid[e.u])];
            int b = local[static_cast<std::size_t>(vid[e.v])];
            if (a < 0 || b < 0) continue;
            w[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
                std::max(w[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)], e.weight);
            w[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] =
                w[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        }
        std::vector<detail::BfValue> memo(1u << k);
        std::uint32_t full = (k == 32) ? 0xffffffffu : ((1u << k) - 1);
        detail::bf_solve(full, memo, w, k);
        // Reconstruct.
        std::uint32_t mask = full;
        while (mask) {
            const detail::BfValue& val = memo[mask];
            int lo = 0;
            while (!(mask & (1u << lo))) ++lo;
            if (val.choice == -1) {
                mask &= ~(1u << lo);
            } else {
                int a = verts[static_cast<std::size_t>(comp[static_cast<std::size_t>(lo)])];
                int b = verts[static_cast<std::size_t>(comp[static_cast<std::size_t>(val.choice)])];
                result.edges.emplace_back(std::min(a, b), std::max(a, b));
                result.weight +=
                    w[static_cast<std::size_t>(lo)][static_cast<std::size_t>(val.choice)];
                mask &= ~(1u << lo) & ~(1u << val.choice);
            }
        }
    }
    std::sort(result.edges.begin(), result.edges.end());
    return result;
}

// Exact bipartite optimum via the general-graph enumerator; used as an
// independent oracle against hungarian_max_weight. Agents are vertices
// 0..N-1, resources N..N+R-1.
inline Matching brute_force_bipartite(const MatchingInstance& instance) {
    std::vector<WeightedEdge> edges;
    for (int a = 0; a < instance.n_agents; ++a)
        for (const Edge& e : instance.interest[static_cast<std::size_t>(a)])
            if (e.utility > 0.0)
                edges.push_back({a, instance.n_agents + e.resource, e.utility});
    GraphMatching gm = brute_force_max_weight(edges);
    Matching m;
    m.assignment.assign(static_cast<std::size_t>(instance.n_agents), std::nullopt);
    for (const auto& [u, v] : gm.edges)
        m.assignment[static_cast<std::size_t>(u)] = v - instance.n_agents;
    return m;
}

// Random agent order; each takes its best still-free positive-utility
// resource, or nothing.
inline Matching centralized_greedy(const MatchingInstance& instance, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<int> order(static_cast<std::size_t>(instance.n_agents));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    std::vector<bool> taken(static_cast<std::size_t>(instance.n_resources), false);
    Matching m;
    m.assignment.assign(static_cast<std::size_t>(instance.n_agents), std::nullopt);
    for (int a : order) {
        const Edge* best = nullptr;
        for (const Edge& e : instance.interest[static_cast<std::size_t>(a)]) {
            if (e.utility <= 0.0 || taken[static_cast<std::size_t>(e.resource)]) continue;
            if (!best || e.utility > best->utility ||
                (e.utility == best->utility && e.resource < best->resource))
                best = &e;
        }
        if (best) {
            taken[static_cast<std::size_t>(best->resource)] = true;
            m.assignment[static_cast<std::size_t>(a)] = best->resource;
        }
    }
    return m;
}

// Random agent order; each gets a uniformly random still-free resource
// from its positive-utility interest set.
inline Matching random_assignment(const MatchingInstance& instance, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<int> order(static_cast<std::size_t>(instance.n_agents));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    std::vector<bool> taken(static_cast<std::size_t>(instance.n_resources), false);
    Matching m;
    m.assignment.assign(static_cast<std::size_t>(instance.n_agents), std::nullopt);
    std::vector<int> free;
    for (int a : order) {
        free.clear();
        for (const Edge& e : instance.interest[static_cast<std::size_t>(a)])
            if (e.utility > 0.0 && !taken[static_cast<std::size_t>(e.resource)])
                free.push_back(e.resource);
        if (free.empty()) continue;
        int r = free[static_cast<std::size_t>(rng.below(free.size()))];
        taken[static_cast<std::size_t>(r)] = true;
        m.assignment[static_cast<std::size_t>(a)] = r;
    }
    return m;
}

} // namespace alma

#endif
