// Acceptance gate: twelve end-to-end checks with pinned tolerances, one
// PASS/FAIL line each. Exit status is the number of failed checks.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "alma/backoff.hpp"
#include "alma/baselines.hpp"
#include "alma/cli.hpp"
#include "alma/engine.hpp"
#include "alma/instance.hpp"
#include "alma/online.hpp"
#include "alma/report.hpp"
#include "alma/rng.hpp"
#include "alma/theory.hpp"

using namespace alma;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool ok, const std::string& detail) {
    std::printf("%s  %2d  %-34s %s\n", ok ? "PASS" : "FAIL", index, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(4);
    os << x;
    return os.str();
}

// ---- 1: exact-solver equivalence ---------------------------------------

void check_oracle_equivalence() {
    auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    bool ok = true;
    for (int trial = 0; trial < 500; ++trial) {
        Rng pick(derive_seed(101, static_cast<std::uint64_t>(trial)));
        ScenarioConfig cfg;
        cfg.kind = ScenarioKind::UniformRandom;
        cfg.n_agents = 2 + static_cast<int>(pick.below(7));   // 2..8
        cfg.n_resources = 2 + static_cast<int>(pick.below(7));
        cfg.seed = pick.next_u64();
        MatchingInstance inst = generate_uniform_random(cfg);
        double hs = social_welfare(inst, hungarian_max_weight(inst));
        double bs = social_welfare(inst, brute_force_bipartite(inst));
        worst = std::max(worst, std::fabs(hs - bs));
        ok &= std::fabs(hs - bs) <= 1e-9;
    }
    double dt = seconds_since(t0);
    ok &= dt < 10.0;
    report(1, "exact solvers agree (500x <=8x8)",
           ok, "max |dSW|=" + fmt(worst) + " in " + fmt(dt) + "s");
}

// ---- 2 & 3: chain grid bounds ------------------------------------------

void check_hitting_probability_bound() {
    auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    double worst_slack = 1e9, worst_tight = 0.0;
    for (int pi = 1; pi <= 19; ++pi) {
        double p = 0.05 * pi;
        double lambda = 2.0 * (1.0 - p) / (2.0 - p);
        BackoffChain y(ChainVariant::Y, 50, p);
        auto h = hitting_probability(y, {1});
        for (int i = 1; i <= 50; ++i) {
            worst_slack = std::min(worst_slack, h[static_cast<std::size_t>(i)] - lambda);
            ok &= h[static_cast<std::size_t>(i)] >= lambda - 1e-9;
        }
        worst_tight = std::max(worst_tight, std::fabs(h[2] - lambda));
        ok &= std::fabs(h[2] - lambda) <= 1e-9;
    }
    double dt = seconds_since(t0);
    ok &= dt < 5.0;
    report(2, "sole-winner probability bound", ok,
           "min slack=" + fmt(worst_slack) + " |h2-bound|=" + fmt(worst_tight) +
           " in " + fmt(dt) + "s");
}

void check_hitting_time_ceiling() {
    auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    double worst_margin = 1e9;
    for (int pi = 1; pi <= 19; ++pi) {
        double p = 0.05 * pi;
        double beta = 1.0 / (1.0 - p);
        BackoffChain z(ChainVariant::Z, 50, p);
        auto t = hitting_time(z, {0});
        for (int i = 1; i <= 50; ++i) {
            double margin = mityushin_bound(beta, i) - t[static_cast<std::size_t>(i)];
            worst_margin = std::min(worst_margin, margin);
            ok &= margin >= -1e-9;
        }
    }
    double dt = seconds_since(t0);
    ok &= dt < 5.0;
    report(3, "shrinking-population time ceiling", ok,
           "min margin=" + fmt(worst_margin) + " in " + fmt(dt) + "s");
}

// ---- 4: engine matches the restart chain -------------------------------

void check_engine_vs_chain() {
    auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string detail;
    for (double p : {0.3, 0.5, 0.7}) {
        for (int n : {2, 4, 8}) {
            // All utilities 1-p under the linear curve puts every collision
            // coin at exactly p, so the competing count follows the restart
            // chain; add the one uncontested step needed to claim.
            MatchingInstance inst;
            inst.n_agents = n;
            inst.n_resources = 1;
            inst.interest.assign(static_cast<std::size_t>(n),
                                 {{0, 1.0 - p}});
            double expect =
                hitting_time(BackoffChain(ChainVariant::X, n, p), {1})
                    [static_cast<std::size_t>(n)] + 1.0;
            const int trials = 10000;
            auto results = run_batch(inst, BackoffPolicy::linear(0.1), trials,
                                     derive_seed(401, static_cast<std::uint64_t>(n * 100 +
                                                 static_cast<int>(p * 10))));
            double sum = 0.0;
            for (const auto& rr : results) sum += rr.mean_winner_steps();
            double rel = std::fabs(sum / trials - expect) / expect;
            if (rel > 0.05 || detail.empty())
                detail = "p=" + fmt(p) + " N=" + std::to_string(n) +
                         " rel.err=" + fmt(rel);
            ok &= rel <= 0.05;
        }
    }
    double dt = seconds_since(t0);
    ok &= dt < 60.0;
    report(4, "engine matches restart chain (5%)", ok, detail + " in " + fmt(dt) + "s");
}

// ---- 5: convergence-step bound -----------------------------------------

void check_convergence_bound() {
    auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string detail;
    BackoffPolicy policy = BackoffPolicy::logistic(2.0);
    for (int size : {16, 32, 64}) {
        ScenarioConfig cfg;
        cfg.kind = ScenarioKind::UniformRandom;
        cfg.n_agents = size;
        cfg.n_resources = size;
        cfg.seed = derive_seed(501, static_cast<std::uint64_t>(size));
        MatchingInstance inst = generate_uniform_random(cfg);
        BoundEstimate est = compute_loss_star(inst, policy);
        auto results = run_batch(inst, policy, 128, derive_seed(502, size));
        double mean = 0.0;
        for (const auto& rr : results) {
            ok &= rr.converged;
            mean += static_cast<double>(rr.steps_total);
        }
        mean /= 128.0;
        ok &= mean <= est.steps_bound;
        detail = "N=" + std::to_string(size) + " steps=" + fmt(mean) +
                 " bound=" + fmt(est.steps_bound);
    }
    double dt = seconds_since(t0);
    ok &= dt < 60.0;
    report(5, "convergence-step bound holds", ok, detail + " in " + fmt(dt) + "s");
}

// ---- 6: regret vs optimal, improving with size -------------------------

double uar_regret(int size, std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.kind = ScenarioKind::UniformRandom;
    cfg.n_agents = size;
    cfg.n_resources = size;
    cfg.seed = seed;
    MatchingInstance inst = generate_uniform_random(cfg);
    double opt = social_welfare(inst, hungarian_max_weight(inst));
    auto results = run_batch(inst, BackoffPolicy::logistic(2.0), 128,
                             derive_seed(seed, 1));
    std::vector<double> achieved, optimal;
    for (const auto& rr : results) {
        achieved.push_back(social_welfare(inst, rr.matching));
        optimal.push_back(opt);
    }
    return cumulative_regret(achieved, optimal);
}

void check_regret() {
    auto t0 = std::chrono::steady_clock::now();
    double r16 = uar_regret(16, 601);
    double r512 = uar_regret(512, 602);
    bool ok = r16 >= -0.15 && r512 >= -0.08 && std::fabs(r512) < std::fabs(r16);
    double dt = seconds_since(t0);
    ok &= dt < 300.0;
    report(6, "regret small and shrinking with N", ok,
           "regret16=" + fmt(r16) + " regret512=" + fmt(r512) + " in " + fmt(dt) + "s");
}

// ---- 7 & 8: bounded-neighborhood scaling -------------------------------

struct ScalePoint {
    double steps_per_agent;
    double winners_pct;
};

ScalePoint cartesian_scale_point(int size, int bound, std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.kind = ScenarioKind::CartesianMap;
    cfg.n_agents = size;
    cfg.n_resources = size;
    cfg.bound_rn = bound;
    cfg.bound_nr = bound;
    cfg.seed = seed;
    MatchingInstance inst = generate_cartesian(cfg);
    auto results = run_batch(inst, BackoffPolicy::linear(0.1), 128,
                             derive_seed(seed, 7));
    ScalePoint pt{0.0, 0.0};
    for (const auto& rr : results) {
        pt.steps_per_agent += rr.mean_winner_steps();
        pt.winners_pct += winners_percentage(inst, rr.matching);
    }
    pt.steps_per_agent /= 128.0;
    pt.winners_pct /= 128.0;
    return pt;
}

void check_per_agent_constancy_and_winners() {
    auto t0 = std::chrono::steady_clock::now();
    double lo = 1e18, hi = 0.0, min_winners = 100.0;
    std::string steps_detail;
    for (int size : {128, 512, 2048, 8192}) {
        ScalePoint pt = cartesian_scale_point(size, 8,
                                              derive_seed(701, static_cast<std::uint64_t>(size)));
        lo = std::min(lo, pt.steps_per_agent);
        hi = std::max(hi, pt.steps_per_agent);
        min_winners = std::min(min_winners, pt.winners_pct);
        steps_detail += std::to_string(size) + ":" + fmt(pt.steps_per_agent) + " ";
    }
    double ratio = hi / lo;
    double dt7 = seconds_since(t0);
    report(7, "per-agent steps stay flat with size", ratio <= 2.0 && dt7 < 600.0,
           "max/min=" + fmt(ratio) + " (" + steps_detail + ") in " + fmt(dt7) + "s");

    auto t1 = std::chrono::steady_clock::now();
    ScalePoint wide = cartesian_scale_point(8192, 128, derive_seed(801, 1));
    bool ok8 = min_winners >= 90.0 && wide.winners_pct >= 95.0;
    double dt8 = seconds_since(t1);
    ok8 &= dt8 < 600.0;
    report(8, "winner percentages", ok8,
           "bound8 min=" + fmt(min_winners) + "% bound128@8192=" +
               fmt(wide.winners_pct) + "% in " + fmt(dt8) + "s");
}

// ---- 9: anytime budgets ------------------------------------------------

void check_anytime() {
    auto t0 = std::chrono::steady_clock::now();
    ScenarioConfig cfg;
    cfg.kind = ScenarioKind::CartesianMap;
    cfg.n_agents = 1024;
    cfg.n_resources = 1024;
    cfg.cutoff = 0.25;
    cfg.seed = 901;
    MatchingInstance inst = generate_cartesian(cfg);
    BackoffPolicy policy = BackoffPolicy::linear(0.1);
    const int seeds = 32;

    std::vector<std::uint64_t> budgets{32, 64, 128, 256, 512, 1024};
    // sw[budget index][seed]
    std::vector<std::vector<double>> sw(budgets.size(),
                                        std::vector<double>(seeds, 0.0));
    bool monotone = true;
    for (int s = 0; s < seeds; ++s) {
        std::uint64_t run_seed = derive_seed(902, static_cast<std::uint64_t>(s));
        for (std::size_t b = 0; b < budgets.size(); ++b) {
            EngineOptions opts;
            opts.budget = budgets[b];
            RunResult rr = run(inst, policy, run_seed, opts);
            sw[b][static_cast<std::size_t>(s)] = social_welfare(inst, rr.matching);
            if (b > 0)
                monotone &= sw[b][static_cast<std::size_t>(s)] >=
                            sw[b - 1][static_cast<std::size_t>(s)] - 1e-12;
        }
    }
    double full = 0.0, low = 0.0, high = 0.0;
    for (int s = 0; s < seeds; ++s) {
        RunResult rr = run(inst, policy, derive_seed(902, static_cast<std::uint64_t>(s)));
        full += social_welfare(inst, rr.matching);
        low += sw[0][static_cast<std::size_t>(s)];
        high += sw.back()[static_cast<std::size_t>(s)];
    }
    full /= seeds;
    low /= seeds;
    high /= seeds;
    double gap = (high - low) / full;
    bool ok = monotone && gap <= 0.03;
    double dt = seconds_since(t0);
    ok &= dt < 300.0;
    report(9, "anytime budgets", ok,
           "gap=" + fmt(100.0 * gap) + "% monotone=" + (monotone ? "yes" : "no") +
               " in " + fmt(dt) + "s");
}

// ---- 10: on-line ordering ----------------------------------------------

void check_online_ordering() {
    auto t0 = std::chrono::steady_clock::now();
    OnlineConfig base;
    base.min_wait = 1;
    base.max_wait = 3;
    base.q = 0.1;
    base.d_min = 2.0; // defer low-saving pairs; eager batching needs this
    base.batch = 1;
    ManhattanProvider provider;
    BackoffPolicy policy = BackoffPolicy::linear(0.1);
    double sum_bmwm = 0.0, sum_alma = 0.0, sum_bg = 0.0;
    bool all_bounded = true;
    for (int day = 0; day < 32; ++day) {
        SyntheticStreamConfig scfg;
        scfg.n_requests = 100;
        scfg.seed = derive_seed(1001, static_cast<std::uint64_t>(day));
        auto requests = synthesize_requests(scfg, base);
        double opt = clairvoyant_offline(requests, provider);
        if (opt <= 0.0) continue;
        auto ratio = [&](OnlineAlgorithm algo) {
            OnlineConfig cfg = base;
            cfg.algorithm = algo;
            OnlineResult res = simulate_online(requests, cfg, provider, policy,
                                               derive_seed(1002, static_cast<std::uint64_t>(day)));
            all_bounded &= res.sw_saved_km <= opt + 1e-9;
            return res.sw_saved_km / opt;
        };
        sum_bmwm += ratio(OnlineAlgorithm::Bmwm);
        sum_alma += ratio(OnlineAlgorithm::Alma);
        sum_bg += ratio(OnlineAlgorithm::Bg);
    }
    bool ok = all_bounded && sum_bmwm >= sum_alma && sum_alma >= sum_bg;
    double dt = seconds_since(t0);
    ok &= dt < 300.0;
    report(10, "on-line ratio ordering", ok,
           "bmwm=" + fmt(sum_bmwm / 32) + " alma=" + fmt(sum_alma / 32) +
               " bg=" + fmt(sum_bg / 32) + " in " + fmt(dt) + "s");
}

// ---- 11: clairvoyant equals exhaustive pairing enumeration -------------

double exhaustive_best_pairing(const std::vector<OnlineRequest>& reqs,
                               const DistanceProvider& provider) {
    const int n = static_cast<int>(reqs.size());
    std::function<double(std::uint32_t)> best = [&](std::uint32_t mask) -> double {
        if (!mask) return 0.0;
        int lo = 0;
        while (!(mask & (1u << lo))) ++lo;
        double out = best(mask & ~(1u << lo)); // leave lo solo
        for (int j = lo + 1; j < n; ++j) {
            if (!(mask & (1u << j))) continue;
            const auto& a = reqs[static_cast<std::size_t>(lo)];
            const auto& b = reqs[static_cast<std::size_t>(j)];
            if (a.arrival > b.deadline || b.arrival > a.deadline) continue;
            double s = provider.saved_km(a, b);
            out = std::max(out, s + best(mask & ~(1u << lo) & ~(1u << j)));
        }
        return out;
    };
    return best(n == 32 ? 0xffffffffu : (1u << n) - 1);
}

void check_clairvoyant() {
    auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    double worst = 0.0;
    OnlineConfig cfg;
    cfg.min_wait = 1;
    cfg.max_wait = 5;
    ManhattanProvider provider;
    for (int trial = 0; trial < 100; ++trial) {
        Rng pick(derive_seed(1101, static_cast<std::uint64_t>(trial)));
        SyntheticStreamConfig scfg;
        scfg.n_requests = 4 + static_cast<int>(pick.below(9)); // 4..12
        scfg.span_minutes = 60;
        scfg.seed = pick.next_u64();
        auto requests = synthesize_requests(scfg, cfg);
        double a = clairvoyant_offline(requests, provider);
        double b = exhaustive_best_pairing(requests, provider);
        worst = std::max(worst, std::fabs(a - b));
        ok &= std::fabs(a - b) <= 1e-9;
    }
    double dt = seconds_since(t0);
    ok &= dt < 30.0;
    report(11, "clairvoyant = exhaustive pairing", ok,
           "max |d|=" + fmt(worst) + " in " + fmt(dt) + "s");
}

// ---- 12: byte-identical reruns -----------------------------------------

std::string run_to_string(const std::function<void(const std::string&)>& invoke,
                          const std::string& path) {
    invoke(path);
    std::ifstream f(path, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    fs::remove(path);
    return os.str();
}

void check_determinism() {
    auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    std::string base = (fs::temp_directory_path() / "alma_accept_det_").string();

    auto run_cmd = [&](const std::string& path) {
        RunSpec spec;
        spec.scenario = "noisy";
        spec.n = 64;
        spec.r = 64;
        spec.runs = 32;
        spec.seed = 1201;
        spec.algorithms = {"alma", "hungarian", "greedy", "random"};
        spec.out = path;
        cmd_run(spec);
    };
    auto sweep_cmd = [&](const std::string& path) {
        RunSpec spec;
        spec.scenario = "cartesian";
        spec.cutoff = 0.5;
        spec.sweep_min = 8;
        spec.sweep_max = 32;
        spec.runs = 16;
        spec.seed = 1202;
        spec.algorithms = {"alma"};
        spec.policy = BackoffPolicy::linear(0.1);
        spec.out = path;
        cmd_sweep(spec);
    };
    auto online_cmd = [&](const std::string& path) {
        RunSpec spec;
        spec.algorithms = {"alma", "jitmwm", "bmwm", "bg"};
        spec.online_requests = 60;
        spec.online_days = 2;
        spec.seed = 1203;
        spec.policy = BackoffPolicy::linear(0.1);
        spec.out = path;
        cmd_online(spec);
    };

    int cmd_no = 0;
    for (const auto& invoke : {std::function<void(const std::string&)>(run_cmd),
                               std::function<void(const std::string&)>(sweep_cmd),
                               std::function<void(const std::string&)>(online_cmd)}) {
        ++cmd_no;
        setenv("ALMA_THREADS", "1", 1);
        std::string serial =
            run_to_string(invoke, base + std::to_string(cmd_no) + "a.csv");
        unsetenv("ALMA_THREADS"); // hardware concurrency: maximum parallelism
        std::string parallel =
            run_to_string(invoke, base + std::to_string(cmd_no) + "b.csv");
        std::string again =
            run_to_string(invoke, base + std::to_string(cmd_no) + "c.csv");
        ok &= serial == parallel && parallel == again && !serial.empty();
    }
    double dt = seconds_since(t0);
    report(12, "byte-identical CSV reruns", ok, "3 commands x 3 reruns in " + fmt(dt) + "s");
}

} // namespace

int main() {
    std::printf("acceptance gate: 12 checks\n");
    check_oracle_equivalence();
    check_hitting_probability_bound();
    check_hitting_time_ceiling();
    check_engine_vs_chain();
    check_convergence_bound();
    check_regret();
    check_per_agent_constancy_and_winners();
    check_anytime();
    check_online_ordering();
    check_clairvoyant();
    check_determinism();
    std::printf("%d/12 passed\n", 12 - g_failures);
    return g_failures;
}
