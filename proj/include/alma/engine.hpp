#ifndef ALMA_ENGINE_HPP
#define ALMA_ENGINE_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "alma/backoff.hpp"
#include "alma/instance.hpp"
#include "alma/rng.hpp"

namespace alma {

enum class TraceEvent { Attempt, Acquire, Backoff, Monitor, Terminate };

struct TraceRecord {
    std::uint64_t step;
    int agent;
    TraceEvent event;
    int resource;
};

inline const char* trace_event_name(TraceEvent e) {
    switch (e) {
        case TraceEvent::Attempt: return "attempt";
        case TraceEvent::Acquire: return "acquire";
        case TraceEvent::Backoff: return "backoff";
        case TraceEvent::Monitor: return "monitor";
        case TraceEvent::Terminate: return "terminate";
    }
    return "?";
}

// One ALMA agent. Preferences are sorted by descending utility, ties by
// ascending resource id. The agent never reads anything about the system
// beyond the occupancy bit of the one resource it attempts or monitors.
struct AgentState {
    enum class Strategy { Access, Yield };
    Strategy strategy = Strategy::Access;
    std::vector<Edge> prefs;          // descending utility
    std::vector<double> pref_utils;   // utilities of prefs, for loss()
    std::size_t cursor = 0;           // index of r_prev in prefs
    std::optional<int> acquired;
    std::optional<std::uint64_t> acquired_at;
    std::size_t owned_streak = 0;     // consecutive monitored-as-owned resources
    bool terminated = false;          // gave up: full cycle of owned resources

    bool done() const { return acquired.has_value() || terminated; }

    explicit AgentState(const std::vector<Edge>& interest) {
        for (const Edge& e : interest)
            if (e.utility > 0.0) prefs.push_back(e);
        std::sort(prefs.begin(), prefs.end(), [](const Edge& a, const Edge& b) {
            return a.utility != b.utility ? a.utility > b.utility
                                          : a.resource < b.resource;
        });
        pref_utils.reserve(prefs.size());
        for (const Edge& e : prefs) pref_utils.push_back(e.utility);
        if (prefs.empty()) terminated = true; // nothing to compete for
    }
};

struct RunResult {
    Matching matching;
    bool converged = false;
    std::uint64_t steps_total = 0;
    // Acquisition step per agent; infinity sentinel for non-winners.
    std::vector<double> steps_per_agent;
    std::uint64_t collisions_total = 0;

    double mean_winner_steps() const {
        double sum = 0.0;
        int count = 0;
        for (double s : steps_per_agent)
            if (std::isfinite(s)) {
                sum += s;
                ++count;
            }
        return count == 0 ? 0.0 : sum / count;
    }
};

// A resource's 1-bit feedback as seen by agents: busy when owned or when
// somebody attempted it in the current step's access phase. The appendix
// round/break structure relies on contested resources reading as busy to
// monitoring agents.
struct OccupancyBoard {
    std::vector<bool> owned;
    std::vector<bool> attempted;

    explicit OccupancyBoard(int n_resources)
        : owned(static_cast<std::size_t>(n_resources), false),
          attempted(static_cast<std::size_t>(n_resources), false) {}

    bool busy(int r) const {
        return owned[static_cast<std::size_t>(r)] || attempted[static_cast<std::size_t>(r)];
    }
};

// Synchronous execution of the ALMA learning rule until no agent is still
// active, or the optional step budget runs out. Deterministic given seed.
//
// Per step: agents in Access attempt their cursor resource; a sole
// attempter on an unowned resource acquires it permanently; otherwise each
// attempter flips a back-off coin with probability f(loss at cursor)
// (an attempt on an owned resource counts as a collision too). Agents in
// Yield advance the cursor cyclically and re-enter Access when the next
// resource reads free; a full cycle of owned-only resources terminates the
// agent as a non-winner.
//
// dual_agent_of_resource (optional, used by the on-line module): maps a
// resource id to an agent id playing a dual role. Acquiring resource r
// retires agent dual_agent_of_resource[r], and an agent n acquiring
// anything retires the resource it embodies.
struct EngineOptions {
    std::optional<std::uint64_t> budget;
    std::vector<TraceRecord>* trace = nullptr;
    std::vector<int> dual_agent_of_resource;  // -1 or absent: no dual role
    std::vector<int> dual_resource_of_agent;
};

inline RunResult run(const MatchingInstance& instance, const BackoffPolicy& policy,
                     std::uint64_t seed, const EngineOptions& opts = {}) {
    policy.validate();
    if (opts.budget && *opts.budget < 1)
        throw std::invalid_argument("engine: budget must be >= 1");
    const int n_agents = instance.n_agents;
    Rng rng(seed);

    std::vector<AgentState> agents;
    agents.reserve(static_cast<std::size_t>(n_agents));
    for (int n = 0; n < n_agents; ++n)
        agents.emplace_back(instance.interest[static_cast<std::size_t>(n)]);

    OccupancyBoard board(instance.n_resources);
    const bool dual = !opts.dual_agent_of_resource.empty();

    RunResult result;
    result.steps_per_agent.assign(static_cast<std::size_t>(n_agents),
                                  std::numeric_limits<double>::infinity());
    result.matching.assignment.assign(static_cast<std::size_t>(n_agents), std::nullopt);

    auto trace = [&](std::uint64_t step, int agent, TraceEvent ev, int res) {
        if (opts.trace) opts.trace->push_back({step, agent, ev, res});
    };

    auto retire_dual = [&](int winner, int won_resource, std::uint64_t step) {
        // The winner stops being available as a resource; the request
        // embodied by the won resource stops being an agent.
        int self_res = opts.dual_resource_of_agent[static_cast<std::size_t>(winner)];
        if (self_res >= 0) board.owned[static_cast<std::size_t>(self_res)] = true;
        int other = opts.dual_agent_of_resource[static_cast<std::size_t>(won_resource)];
        if (other >= 0 && !agents[static_cast<std::size_t>(other)].done()) {
            agents[static_cast<std::size_t>(other)].terminated = true;
            trace(step, other, TraceEvent::Terminate, won_resource);
        }
    };

    std::vector<int> attempt_count(static_cast<std::size_t>(instance.n_resources), 0);
    std::vector<bool> backed_off_now(static_cast<std::size_t>(n_agents), false);

    std::uint64_t step = 0;
    for (;;) {
        bool any_active = false;
        for (const AgentState& a : agents)
            if (!a.done()) {
                any_active = true;
                break;
            }
        if (!any_active) {
            result.converged = true;
            break;
        }
        if (opts.budget && step >= *opts.budget) break;
        ++step;

        // Access phase: collect simultaneous attempts. The attempted bit
        // covers the whole step, so a contested resource reads busy to
        // monitoring agents even if every attempter then backs off (the
        // appendix round/break structure depends on this).
        std::fill(attempt_count.begin(), attempt_count.end(), 0);
        std::fill(board.attempted.begin(), board.attempted.end(), false);
        std::fill(backed_off_now.begin(), backed_off_now.end(), false);
        for (int n = 0; n < n_agents; ++n) {
            AgentState& a = agents[static_cast<std::size_t>(n)];
            if (a.done() || a.strategy != AgentState::Strategy::Access) continue;
            int r = a.prefs[a.cursor].resource;
            trace(step, n, TraceEvent::Attempt, r);
            ++attempt_count[static_cast<std::size_t>(r)];
            board.attempted[static_cast<std::size_t>(r)] = true;
        }

        // Resolve: a sole attempter on an unowned resource acquires it;
        // every other attempt is a collision and triggers a back-off coin.
        for (int n = 0; n < n_agents; ++n) {
            AgentState& a = agents[static_cast<std::size_t>(n)];
            if (a.done() || a.strategy != AgentState::Strategy::Access) continue;
            int r = a.prefs[a.cursor].resource;
            bool owned = board.owned[static_cast<std::size_t>(r)];
            if (!owned && attempt_count[static_cast<std::size_t>(r)] == 1) {
                board.owned[static_cast<std::size_t>(r)] = true;
                a.acquired = r;
                a.acquired_at = step;
                result.matching.assignment[static_cast<std::size_t>(n)] = r;
                result.steps_per_agent[static_cast<std::size_t>(n)] =
                    static_cast<double>(step);
                trace(step, n, TraceEvent::Acquire, r);
                if (dual) retire_dual(n, r, step);
            } else {
                ++result.collisions_total;
                double l = loss_at(policy, a.pref_utils, a.cursor + 1);
                double p = backoff_probability(policy, l);
                if (rng.bernoulli(p)) {
                    a.strategy = AgentState::Strategy::Yield;
                    a.owned_streak = 0;
                    backed_off_now[static_cast<std::size_t>(n)] = true;
                    trace(step, n, TraceEvent::Backoff, r);
                }
            }
        }

        // Monitor phase: agents already yielded before this step advance
        // the cursor cyclically and re-enter Access if the next resource
        // reads free. A fresh back-off starts monitoring next step (one
        // action per time-step).
        for (int n = 0; n < n_agents; ++n) {
            AgentState& a = agents[static_cast<std::size_t>(n)];
            if (a.done() || a.strategy != AgentState::Strategy::Yield ||
                backed_off_now[static_cast<std::size_t>(n)])
                continue;
            a.cursor = (a.cursor + 1) % a.prefs.size();
            int r = a.prefs[a.cursor].resource;
            trace(step, n, TraceEvent::Monitor, r);
            if (!board.busy(r)) {
                a.strategy = AgentState::Strategy::Access;
                a.owned_streak = 0;
            } else if (board.owned[static_cast<std::size_t>(r)]) {
                if (++a.owned_streak >= a.prefs.size()) {
                    a.terminated = true;
                    trace(step, n, TraceEvent::Terminate, r);
                }
            } else {
                a.owned_streak = 0; // contested, not permanently gone
            }
        }
    }

    result.steps_total = step;
    return result;
}

inline int thread_limit() {
    if (const char* env = std::getenv("ALMA_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// n_runs independent runs with child seeds derived from the master seed.
// May execute in parallel; results are placed by run index, so the output
// is identical regardless of thread count.
inline std::vector<RunResult> run_batch(const MatchingInstance& instance,
                                        const BackoffPolicy& policy, int n_runs,
                                        std::uint64_t master_seed,
                                        std::optional<std::uint64_t> budget = {}) {
    if (n_runs < 1) throw std::invalid_argument("run_batch: n_runs must be >= 1");
    std::vector<RunResult> results(static_cast<std::size_t>(n_runs));
    const int threads = std::min(thread_limit(), n_runs);
    if (threads <= 1) {
        for (int i = 0; i < n_runs; ++i) {
            EngineOptions opts;
            opts.budget = budget;
            results[static_cast<std::size_t>(i)] =
                run(instance, policy, derive_seed(master_seed, static_cast<std::uint64_t>(i)), opts);
        }
        return results;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= n_runs) return;
                EngineOptions opts;
                opts.budget = budget;
                results[static_cast<std::size_t>(i)] =
                    run(instance, policy,
                        derive_seed(master_seed, static_cast<std::uint64_t>(i)), opts);
            }
        });
    }
    for (auto& th : pool) th.join();
    return results;
}

inline void write_trace_csv(const std::vector<TraceRecord>& trace, std::ostream& os) {
    os << "step,agent,event,resource\n";
    for (const TraceRecord& t : trace)
        os << t.step << "," << t.agent << "," << trace_event_name(t.event) << ","
           << t.resource << "\n";
}

} // namespace alma

#endif
