#ifndef ALMA_CLI_HPP
#define ALMA_CLI_HPP

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "alma/backoff.hpp"
#include "alma/baselines.hpp"
#include "alma/engine.hpp"
#include "alma/instance.hpp"
#include "alma/online.hpp"
#include "alma/report.hpp"
#include "alma/theory.hpp"

namespace alma {

// One parsed command invocation. Exactly one input source: a generator
// config (scenario non-empty) or a file path.
struct RunSpec {
    std::string scenario;       // "uar" | "noisy" | "cartesian"
    std::string instance_path;
    std::string requests_path;
    int n = 0;
    int r = 0;
    double sigma = 0.1;
    std::optional<double> cutoff;
    std::optional<int> bound;
    BackoffPolicy policy = BackoffPolicy::logistic(2.0);
    std::vector<std::string> algorithms{"alma", "hungarian"};
    int runs = 128;
    std::optional<std::uint64_t> budget;
    std::string out;
    std::uint64_t seed = 1;

    // sweep
    int sweep_min = 8;
    int sweep_max = 64;
    std::vector<std::uint64_t> budgets;

    // online
    int online_minw = 1;
    std::optional<int> online_maxw = 3;
    double online_q = 0.1;
    double online_dmin = 0.0;
    int online_batch = 1;
    int online_requests = 100;
    int online_days = 1;

    void validate() const {
        int sources = 0;
        if (!scenario.empty()) ++sources;
        if (!instance_path.empty()) ++sources;
        if (!requests_path.empty()) ++sources;
        if (sources > 1)
            throw std::invalid_argument("spec: choose one input source (generator or file)");
        if (out.empty()) throw std::invalid_argument("spec: --out is required");
        if (runs < 1) throw std::invalid_argument("spec: runs must be >= 1");
    }
};

namespace cli_detail {

inline ScenarioConfig scenario_config(const RunSpec& spec, std::uint64_t seed) {
    ScenarioConfig cfg;
    if (spec.scenario == "uar") cfg.kind = ScenarioKind::UniformRandom;
    else if (spec.scenario == "noisy") cfg.kind = ScenarioKind::NoisyCommon;
    else if (spec.scenario == "cartesian") cfg.kind = ScenarioKind::CartesianMap;
    else throw std::invalid_argument("unknown scenario '" + spec.scenario + "'");
    cfg.n_agents = spec.n;
    cfg.n_resources = spec.r;
    cfg.sigma = spec.sigma;
    cfg.cutoff = spec.cutoff;
    cfg.bound_rn = spec.bound;
    cfg.bound_nr = spec.bound;
    cfg.seed = seed;
    return cfg;
}

inline MatchingInstance obtain_instance(const RunSpec& spec, std::uint64_t seed) {
    if (!spec.instance_path.empty()) return load_instance(spec.instance_path);
    return generate(scenario_config(spec, seed));
}

// One metrics row per (instance, algorithm); ALMA/greedy/random are
// averaged over `runs` seeded repetitions on the same instance.
inline std::vector<MetricRow> evaluate_instance(const MatchingInstance& inst,
                                                const RunSpec& spec,
                                                const std::string& scenario_name) {
    std::vector<MetricRow> rows;
    bool want_opt = false;
    for (const auto& a : spec.algorithms) want_opt |= (a == "hungarian");
    std::optional<double> sw_opt;
    if (want_opt) sw_opt = social_welfare(inst, hungarian_max_weight(inst));

    auto base_row = [&](const std::string& algo) {
        MetricRow row;
        row.scenario = scenario_name;
        row.algorithm = algo;
        row.n_agents = inst.n_agents;
        row.n_resources = inst.n_resources;
        row.runs = spec.runs;
        row.sw_optimal = sw_opt.value_or(0.0);
        return row;
    };

    for (const auto& algo : spec.algorithms) {
        if (algo == "hungarian") {
            MetricRow row = base_row(algo);
            row.runs = 1;
            row.sw = *sw_opt;
            Matching m = hungarian_max_weight(inst);
            row.winners_pct = winners_percentage(inst, m);
            rows.push_back(row);
        } else if (algo == "alma") {
            auto results = run_batch(inst, spec.policy, spec.runs, spec.seed, spec.budget);
            MetricRow row = base_row(algo);
            row.budget = spec.budget;
            std::vector<double> sw_runs, opt_runs;
            double steps = 0.0, per_agent = 0.0, winners = 0.0;
            for (const auto& rr : results) {
                double sw = social_welfare(inst, rr.matching);
                sw_runs.push_back(sw);
                if (sw_opt) opt_runs.push_back(*sw_opt);
                steps += static_cast<double>(rr.steps_total);
                per_agent += rr.mean_winner_steps();
                winners += winners_percentage(inst, rr.matching);
            }
            const double k = static_cast<double>(results.size());
            row.sw = 0.0;
            for (double s : sw_runs) row.sw += s;
            row.sw /= k;
            row.steps_total = steps / k;
            row.steps_per_agent_mean = per_agent / k;
            row.winners_pct = winners / k;
            if (sw_opt && *sw_opt > 0.0) {
                row.rel_diff = (row.sw - *sw_opt) / *sw_opt;
                row.cum_regret = cumulative_regret(sw_runs, opt_runs);
            }
            rows.push_back(row);
        } else if (algo == "greedy" || algo == "random") {
            MetricRow row = base_row(algo);
            std::vector<double> sw_runs, opt_runs;
            double winners = 0.0;
            for (int i = 0; i < spec.runs; ++i) {
                std::uint64_t s = derive_seed(spec.seed, static_cast<std::uint64_t>(i));
                Matching m = algo == "greedy" ? centralized_greedy(inst, s)
                                              : random_assignment(inst, s);
                sw_runs.push_back(social_welfare(inst, m));
                if (sw_opt) opt_runs.push_back(*sw_opt);
                winners += winners_percentage(inst, m);
            }
            row.sw = 0.0;
            for (double s : sw_runs) row.sw += s;
            row.sw /= static_cast<double>(spec.runs);
            row.winners_pct = winners / static_cast<double>(spec.runs);
            if (sw_opt && *sw_opt > 0.0) {
                row.rel_diff = (row.sw - *sw_opt) / *sw_opt;
                row.cum_regret = cumulative_regret(sw_runs, opt_runs);
            }
            rows.push_back(row);
        } else {
            throw std::invalid_argument("unknown algorithm '" + algo + "'");
        }
    }
    return rows;
}

} // namespace cli_detail

inline int cmd_run(const RunSpec& spec) {
    spec.validate();
    MatchingInstance inst = cli_detail::obtain_instance(spec, spec.seed);
    std::string name = spec.scenario.empty() ? "file" : spec.scenario;
    auto rows = cli_detail::evaluate_instance(inst, spec, name);
    emit_csv(rows, spec.out);
    return 0;
}

inline int cmd_sweep(const RunSpec& spec) {
    spec.validate();
    if (spec.scenario.empty())
        throw std::invalid_argument("sweep: needs a generator scenario");
    std::vector<MetricRow> rows;
    int size_index = 0;
    for (int size = spec.sweep_min; size <= spec.sweep_max; size *= 2, ++size_index) {
        RunSpec cell = spec;
        cell.n = size;
        cell.r = size;
        std::uint64_t inst_seed = derive_seed(spec.seed, 1000 + static_cast<std::uint64_t>(size_index));
        MatchingInstance inst = generate(cli_detail::scenario_config(cell, inst_seed));
        if (spec.budgets.empty()) {
            auto block = cli_detail::evaluate_instance(inst, cell, spec.scenario);
            rows.insert(rows.end(), block.begin(), block.end());
        } else {
            for (std::uint64_t b : spec.budgets) {
                RunSpec bcell = cell;
                bcell.budget = b;
                auto block = cli_detail::evaluate_instance(inst, bcell, spec.scenario);
                rows.insert(rows.end(), block.begin(), block.end());
            }
        }
    }
    emit_csv(rows, spec.out);
    return 0;
}

inline int cmd_online(const RunSpec& spec) {
    spec.validate();
    OnlineConfig cfg;
    cfg.min_wait = spec.online_minw;
    cfg.max_wait = spec.online_maxw;
    cfg.q = spec.online_q;
    cfg.d_min = spec.online_dmin;
    cfg.batch = spec.online_batch;
    ManhattanProvider provider;
    std::vector<MetricRow> rows;
    for (int day = 0; day < spec.online_days; ++day) {
        std::vector<OnlineRequest> requests;
        if (!spec.requests_path.empty()) {
            requests = load_requests(spec.requests_path, cfg);
        } else {
            SyntheticStreamConfig scfg;
            scfg.n_requests = spec.online_requests;
            scfg.seed = derive_seed(spec.seed, 5000 + static_cast<std::uint64_t>(day));
            requests = synthesize_requests(scfg, cfg);
        }
        const double opt = clairvoyant_offline(requests, provider);
        for (const auto& algo : spec.algorithms) {
            OnlineConfig acfg = cfg;
            if (algo == "alma") acfg.algorithm = OnlineAlgorithm::Alma;
            else if (algo == "jitmwm") acfg.algorithm = OnlineAlgorithm::JitMwm;
            else if (algo == "bmwm") acfg.algorithm = OnlineAlgorithm::Bmwm;
            else if (algo == "bg") acfg.algorithm = OnlineAlgorithm::Bg;
            else throw std::invalid_argument("unknown online algorithm '" + algo + "'");
            OnlineResult res = simulate_online(requests, acfg, provider, spec.policy,
                                               derive_seed(spec.seed, 9000 + static_cast<std::uint64_t>(day)));
            MetricRow row;
            row.scenario = "online-day" + std::to_string(day);
            row.algorithm = algo;
            row.n_agents = static_cast<int>(requests.size());
            row.n_resources = static_cast<int>(requests.size());
            row.runs = 1;
            row.sw = res.sw_saved_km;
            row.sw_optimal = opt;
            if (opt > 0.0) {
                row.rel_diff = (res.sw_saved_km - opt) / opt;
                row.competitive_ratio = res.sw_saved_km / opt;
            }
            row.winners_pct = requests.empty()
                                  ? 0.0
                                  : 100.0 * 2.0 * static_cast<double>(res.matches.size()) /
                                        static_cast<double>(requests.size());
            rows.push_back(row);
        }
    }
    emit_csv(rows, spec.out);
    return 0;
}

inline int cmd_verify_theory(const RunSpec& spec,
                             const std::function<double(double)>& perturb = {}) {
    spec.validate();
    std::vector<double> p_grid;
    for (int i = 1; i <= 19; ++i) p_grid.push_back(0.05 * i);
    std::vector<int> n_grid{2, 5, 10, 20, 50};
    auto rows = verify_theory(p_grid, n_grid, perturb);
    std::ofstream f(spec.out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for write: " + spec.out);
    f << "variant,p,N,computed,bound,pass\n";
    bool all_ok = true;
    std::string first_fail;
    for (const auto& row : rows) {
        f << row.variant << "," << format_fixed(row.p) << "," << row.n << ","
          << format_fixed(row.computed) << "," << format_fixed(row.bound) << ","
          << (row.pass ? "1" : "0") << "\n";
        if (!row.pass && all_ok) {
            all_ok = false;
            first_fail = row.variant + " p=" + format_fixed(row.p) +
                         " N=" + std::to_string(row.n);
        }
    }
    if (!all_ok) {
        std::cerr << "verify-theory: FAILED check " << first_fail << "\n";
        return 1;
    }
    return 0;
}

inline int cmd_oracle_check(const RunSpec& spec) {
    spec.validate();
    const int trials = spec.runs;
    int size = spec.n > 0 ? spec.n : 6;
    if (size > 8) throw std::invalid_argument("oracle-check: size capped at 8");
    std::ofstream f(spec.out, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for write: " + spec.out);
    f << "trial,hungarian_sw,brute_sw,match\n";
    int mismatches = 0;
    for (int i = 0; i < trials; ++i) {
        ScenarioConfig cfg;
        cfg.kind = ScenarioKind::UniformRandom;
        cfg.n_agents = size;
        cfg.n_resources = size;
        cfg.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(i));
        MatchingInstance inst = generate_uniform_random(cfg);
        double hs = social_welfare(inst, hungarian_max_weight(inst));
        double bs = social_welfare(inst, brute_force_bipartite(inst));
        bool ok = std::fabs(hs - bs) <= 1e-9;
        if (!ok) ++mismatches;
        f << i << "," << format_fixed(hs) << "," << format_fixed(bs) << ","
          << (ok ? "1" : "0") << "\n";
    }
    if (mismatches > 0) {
        std::cerr << "oracle-check: " << mismatches << "/" << trials << " mismatches\n";
        return 1;
    }
    return 0;
}

} // namespace alma

#endif
