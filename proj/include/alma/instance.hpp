#ifndef ALMA_INSTANCE_HPP
#define ALMA_INSTANCE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "alma/rng.hpp"

namespace alma {

struct Edge {
    int resource = 0;
    double utility = 0.0;
};

// Bipartite utility structure: agents, resources, per-agent interest sets.
// Immutable after construction by convention; generators and the loader are
// the only producers.
struct MatchingInstance {
    int n_agents = 0;
    int n_resources = 0;
    std::vector<std::vector<Edge>> interest; // one list per agent

    void validate() const {
        if (static_cast<int>(interest.size()) != n_agents)
            throw std::invalid_argument("instance: interest list count != N");
        for (int n = 0; n < n_agents; ++n) {
            std::vector<bool> seen(static_cast<std::size_t>(n_resources), false);
            for (const Edge& e : interest[static_cast<std::size_t>(n)]) {
                if (e.resource < 0 || e.resource >= n_resources)
                    throw std::invalid_argument("instance: resource id out of range");
                if (seen[static_cast<std::size_t>(e.resource)])
                    throw std::invalid_argument("instance: duplicate resource in interest set");
                seen[static_cast<std::size_t>(e.resource)] = true;
                if (!std::isfinite(e.utility) || e.utility < 0.0 || e.utility > 1.0)
                    throw std::invalid_argument("instance: utility outside [0,1]");
            }
        }
    }

    std::optional<double> utility_of(int agent, int resource) const {
        for (const Edge& e : interest[static_cast<std::size_t>(agent)])
            if (e.resource == resource) return e.utility;
        return std::nullopt;
    }

    bool operator==(const MatchingInstance& other) const {
        if (n_agents != other.n_agents || n_resources != other.n_resources) return false;
        for (int n = 0; n < n_agents; ++n) {
            const auto& a = interest[static_cast<std::size_t>(n)];
            const auto& b = other.interest[static_cast<std::size_t>(n)];
            if (a.size() != b.size()) return false;
            for (std::size_t i = 0; i < a.size(); ++i)
                if (a[i].resource != b[i].resource || a[i].utility != b[i].utility) return false;
        }
        return true;
    }
};

// Per-agent assignment under at-most-one constraints on both sides.
struct Matching {
    std::vector<std::optional<int>> assignment; // agent -> resource

    int cardinality() const {
        int c = 0;
        for (const auto& a : assignment)
            if (a) ++c;
        return c;
    }
};

enum class ScenarioKind { NoisyCommon, UniformRandom, CartesianMap };

struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::UniformRandom;
    int n_agents = 0;
    int n_resources = 0;
    double sigma = 0.0;                 // noisy-common
    std::optional<double> cutoff;       // cartesian: fraction of max distance, (0,1]
    std::optional<int> bound_rn;        // cartesian: keep bound_rn nearest resources
    std::optional<int> bound_nr;        // cartesian: then bound_nr nearest agents
    std::uint64_t seed = 0;

    int grid_side() const {
        return static_cast<int>(std::ceil(std::sqrt(4.0 * n_agents)));
    }

    void validate() const {
        if (n_agents < 0 || n_resources < 0)
            throw std::invalid_argument("scenario: negative counts");
        if (sigma < 0.0) throw std::invalid_argument("scenario: sigma < 0");
        if (cutoff && (*cutoff <= 0.0 || *cutoff > 1.0))
            throw std::invalid_argument("scenario: cutoff outside (0,1]");
        if (bound_rn.has_value() != bound_nr.has_value() ||
            (bound_rn && *bound_rn != *bound_nr))
            throw std::invalid_argument("scenario: bound_rn and bound_nr must be equal");
        if (bound_rn && *bound_rn < 1)
            throw std::invalid_argument("scenario: bound < 1");
    }
};

inline double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

// One shared base utility per resource, plus per-agent zero-mean gaussian
// noise, clamped to [0,1]. Full interest sets.
inline MatchingInstance generate_noisy_common(const ScenarioConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    std::vector<double> base(static_cast<std::size_t>(cfg.n_resources));
    for (double& b : base) b = rng.uniform();
    MatchingInstance inst;
    inst.n_agents = cfg.n_agents;
    inst.n_resources = cfg.n_resources;
    inst.interest.resize(static_cast<std::size_t>(cfg.n_agents));
    for (int n = 0; n < cfg.n_agents; ++n) {
        auto& list = inst.interest[static_cast<std::size_t>(n)];
        list.reserve(static_cast<std::size_t>(cfg.n_resources));
        for (int r = 0; r < cfg.n_resources; ++r) {
            double u = cfg.sigma == 0.0
                           ? base[static_cast<std::size_t>(r)]
                           : clamp01(rng.gaussian(base[static_cast<std::size_t>(r)], cfg.sigma));
            list.push_back({r, u});
        }
    }
    return inst;
}

// Every utility independent Uniform[0,1), full interest sets.
inline MatchingInstance generate_uniform_random(const ScenarioConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    MatchingInstance inst;
    inst.n_agents = cfg.n_agents;
    inst.n_resources = cfg.n_resources;
    inst.interest.resize(static_cast<std::size_t>(cfg.n_agents));
    for (int n = 0; n < cfg.n_agents; ++n) {
        auto& list = inst.interest[static_cast<std::size_t>(n)];
        list.reserve(static_cast<std::size_t>(cfg.n_resources));
        for (int r = 0; r < cfg.n_resources; ++r) list.push_back({r, rng.uniform()});
    }
    return inst;
}

// Agents and resources placed uniformly at random on an integer grid of
// side ceil(sqrt(4N)); utility 1/d with d the Manhattan distance (d=0
// treated as d=1); pairs beyond cutoff*(2*side) dropped; optional
// nearest-first pruning under both degree caps: candidate pairs admitted
// in ascending distance order (ties by lower agent id, then resource id)
// while both endpoints are below their bound. Keeps every agent-side set
// <= bound_rn and every resource's interested-agent count <= bound_nr
// without stranding agents the way sequential per-side truncation does;
// utilities min-max normalized to (0,1] per instance.
inline MatchingInstance generate_cartesian(const ScenarioConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    const int side = cfg.grid_side();
    struct Point { int x, y; };
    auto place = [&](int count) {
        std::vector<Point> pts(static_cast<std::size_t>(count));
        for (auto& p : pts) {
            p.x = static_cast<int>(rng.below(static_cast<std::uint64_t>(side)));
            p.y = static_cast<int>(rng.below(static_cast<std::uint64_t>(side)));
        }
        return pts;
    };
    const auto agents = place(cfg.n_agents);
    const auto resources = place(cfg.n_resources);
    const double max_d = cfg.cutoff ? *cfg.cutoff * 2.0 * side
                                    : std::numeric_limits<double>::infinity();

    struct Raw { int agent, resource, dist; };
    std::vector<std::vector<Raw>> by_agent(static_cast<std::size_t>(cfg.n_agents));
    for (int n = 0; n < cfg.n_agents; ++n) {
        for (int r = 0; r < cfg.n_resources; ++r) {
            int d = std::abs(agents[static_cast<std::size_t>(n)].x -
                             resources[static_cast<std::size_t>(r)].x) +
                    std::abs(agents[static_cast<std::size_t>(n)].y -
                             resources[static_cast<std::size_t>(r)].y);
            if (static_cast<double>(d) > max_d) continue;
            by_agent[static_cast<std::size_t>(n)].push_back({n, r, std::max(d, 1)});
        }
    }

    if (cfg.bound_rn) {
        std::vector<Raw> all;
        for (const auto& list : by_agent)
            all.insert(all.end(), list.begin(), list.end());
        std::sort(all.begin(), all.end(), [](const Raw& a, const Raw& b) {
            if (a.dist != b.dist) return a.dist < b.dist;
            return a.agent != b.agent ? a.agent < b.agent : a.resource < b.resource;
        });
        std::vector<int> agent_deg(static_cast<std::size_t>(cfg.n_agents), 0);
        std::vector<int> res_deg(static_cast<std::size_t>(cfg.n_resources), 0);
        for (auto& list : by_agent) list.clear();
        for (const Raw& e : all) {
            if (agent_deg[static_cast<std::size_t>(e.agent)] >= *cfg.bound_rn ||
                res_deg[static_cast<std::size_t>(e.resource)] >= *cfg.bound_nr)
                continue;
            ++agent_deg[static_cast<std::size_t>(e.agent)];
            ++res_deg[static_cast<std::size_t>(e.resource)];
            by_agent[static_cast<std::size_t>(e.agent)].push_back(e);
        }
        for (auto& list : by_agent)
            std::sort(list.begin(), list.end(),
                      [](const Raw& a, const Raw& b) { return a.resource < b.resource; });
    }

    // Min-max normalize 1/d to (0,1]: the farthest kept pair maps to a small
    // positive value, the nearest to 1.
    double umin = std::numeric_limits<double>::infinity();
    double umax = 0.0;
    for (const auto& list : by_agent)
        for (const Raw& e : list) {
            double u = 1.0 / e.dist;
            umin = std::min(umin, u);
            umax = std::max(umax, u);
        }

    MatchingInstance inst;
    inst.n_agents = cfg.n_agents;
    inst.n_resources = cfg.n_resources;
    inst.interest.resize(static_cast<std::size_t>(cfg.n_agents));
    for (int n = 0; n < cfg.n_agents; ++n) {
        for (const Raw& e : by_agent[static_cast<std::size_t>(n)]) {
            double u = 1.0 / e.dist;
            double norm = umax == umin ? 1.0
                                       : (u - umin) / (umax - umin) * (1.0 - 1e-6) + 1e-6;
            inst.interest[static_cast<std::size_t>(n)].push_back({e.resource, norm});
        }
    }
    return inst;
}

inline MatchingInstance generate(const ScenarioConfig& cfg) {
    switch (cfg.kind) {
        case ScenarioKind::NoisyCommon: return generate_noisy_common(cfg);
        case ScenarioKind::UniformRandom: return generate_uniform_random(cfg);
        case ScenarioKind::CartesianMap: return generate_cartesian(cfg);
    }
    throw std::logic_error("unreachable");
}

// Text format: header `alma-instance v1 N=<int> R=<int>`, then `n r u`
// per edge; `#` starts a comment.
inline void save_instance(const MatchingInstance& inst, std::ostream& os) {
    os << "alma-instance v1 N=" << inst.n_agents << " R=" << inst.n_resources << "\n";
    os.precision(17);
    for (int n = 0; n < inst.n_agents; ++n)
        for (const Edge& e : inst.interest[static_cast<std::size_t>(n)])
            os << n << " " << e.resource << " " << e.utility << "\n";
}

inline void save_instance(const MatchingInstance& inst, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for write: " + path);
    save_instance(inst, f);
}

inline MatchingInstance load_instance(std::istream& is) {
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& msg) {
        throw std::runtime_error("instance parse error at line " +
                                 std::to_string(lineno) + ": " + msg);
    };
    if (!std::getline(is, line)) {
        lineno = 1;
        fail("missing header");
    }
    ++lineno;
    MatchingInstance inst;
    {
        std::istringstream hs(line);
        std::string magic, ver, nfield, rfield;
        hs >> magic >> ver >> nfield >> rfield;
        if (magic != "alma-instance" || ver != "v1" ||
            nfield.rfind("N=", 0) != 0 || rfield.rfind("R=", 0) != 0)
            fail("bad header");
        try {
            inst.n_agents = std::stoi(nfield.substr(2));
            inst.n_resources = std::stoi(rfield.substr(2));
        } catch (const std::exception&) {
            fail("bad header counts");
        }
        if (inst.n_agents < 0 || inst.n_resources < 0) fail("negative counts");
    }
    inst.interest.resize(static_cast<std::size_t>(inst.n_agents));
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        int n, r;
        double u;
        if (!(ls >> n)) continue; // blank or comment-only line
        if (!(ls >> r >> u)) fail("malformed edge line");
        std::string trailing;
        if (ls >> trailing) fail("trailing tokens");
        if (n < 0 || n >= inst.n_agents) fail("agent id out of range");
        if (r < 0 || r >= inst.n_resources) fail("resource id out of range");
        if (!std::isfinite(u) || u < 0.0 || u > 1.0) fail("utility outside [0,1]");
        for (const Edge& e : inst.interest[static_cast<std::size_t>(n)])
            if (e.resource == r) fail("duplicate edge");
        inst.interest[static_cast<std::size_t>(n)].push_back({r, u});
    }
    return inst;
}

inline MatchingInstance load_instance(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open: " + path);
    return load_instance(f);
}

} // namespace alma

#endif
