// alma: decentralized weighted-matching simulator and benchmark harness.
//
// Subcommands: run, sweep, online, verify-theory, oracle-check.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "alma/cli.hpp"

namespace {

// Flat key=value config file; each pair becomes --key value.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            std::ifstream f(args[i + 1]);
            if (!f) throw std::runtime_error("cannot open config: " + args[i + 1]);
            std::string line;
            while (std::getline(f, line)) {
                auto hash = line.find('#');
                if (hash != std::string::npos) line.erase(hash);
                auto eq = line.find('=');
                if (eq == std::string::npos) continue;
                auto trim = [](std::string s) {
                    auto b = s.find_first_not_of(" \t");
                    auto e = s.find_last_not_of(" \t");
                    return b == std::string::npos ? std::string()
                                                  : s.substr(b, e - b + 1);
                };
                std::string key = trim(line.substr(0, eq));
                std::string val = trim(line.substr(eq + 1));
                if (key.empty()) continue;
                out.push_back("--" + key);
                if (!val.empty()) out.push_back(val);
            }
            ++i;
        } else {
            out.push_back(args[i]);
        }
    }
    return out;
}

void add_common(CLI::App* cmd, alma::RunSpec& spec, std::string& backoff) {
    cmd->add_option("--out", spec.out, "output CSV path")->required();
    cmd->add_option("--seed", spec.seed, "master seed");
    cmd->add_option("--runs", spec.runs, "seeded repetitions per instance");
    cmd->add_option("--backoff", backoff, "linear:<eps> or logistic:<gamma>");
}

void add_generator(CLI::App* cmd, alma::RunSpec& spec) {
    cmd->add_option("--gen", spec.scenario, "uar | noisy | cartesian");
    cmd->add_option("--n", spec.n, "number of agents");
    cmd->add_option("--r", spec.r, "number of resources");
    cmd->add_option("--sigma", spec.sigma, "noise SD (noisy scenario)");
    cmd->add_option("--cutoff", [&spec](const std::vector<std::string>& v) {
        spec.cutoff = std::stod(v[0]);
        return true;
    }, "cutoff fraction of max distance (cartesian)");
    cmd->add_option("--bound", [&spec](const std::vector<std::string>& v) {
        spec.bound = std::stoi(v[0]);
        return true;
    }, "interest-set bound (cartesian)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ALMA weighted-matching simulator"};
    app.require_subcommand(1);

    alma::RunSpec spec;
    std::string backoff;
    std::string algos;
    std::string budgets;

    auto* run = app.add_subcommand("run", "single instance, selected algorithms");
    add_common(run, spec, backoff);
    add_generator(run, spec);
    run->add_option("--instance", spec.instance_path, "instance file instead of a generator");
    run->add_option("--algos", algos, "comma list: alma,hungarian,greedy,random");
    run->add_option("--budget", [&spec](const std::vector<std::string>& v) {
        spec.budget = std::stoull(v[0]);
        return true;
    }, "anytime step budget");

    auto* sweep = app.add_subcommand("sweep", "doubling size ladder, N = R");
    add_common(sweep, spec, backoff);
    add_generator(sweep, spec);
    sweep->add_option("--min", spec.sweep_min, "smallest size");
    sweep->add_option("--max", spec.sweep_max, "largest size");
    sweep->add_option("--algos", algos, "comma list of algorithms");
    sweep->add_option("--budgets", budgets, "comma list of anytime budgets");

    auto* online = app.add_subcommand("online", "request-stream replay");
    add_common(online, spec, backoff);
    online->add_option("--requests", spec.requests_path, "request CSV file");
    online->add_option("--algos", algos, "comma list: alma,jitmwm,bmwm,bg");
    online->add_option("--minw", spec.online_minw, "minimum waiting time (min)");
    online->add_option("--maxw", [&spec](const std::vector<std::string>& v) {
        if (v[0] == "inf") spec.online_maxw.reset();
        else spec.online_maxw = std::stoi(v[0]);
        return true;
    }, "maximum waiting time (min or 'inf')");
    online->add_option("--q", spec.online_q, "waiting fraction of trip time");
    online->add_option("--dmin", spec.online_dmin, "non-myopic filter threshold (km)");
    online->add_option("--batch", spec.online_batch, "batch size x (min)");
    online->add_option("--n-requests", spec.online_requests, "synthetic requests per day");
    online->add_option("--days", spec.online_days, "synthetic days");

    auto* verify = app.add_subcommand("verify-theory", "chain lemma grid checks");
    add_common(verify, spec, backoff);

    auto* oracle = app.add_subcommand("oracle-check", "hungarian vs enumeration fuzz");
    add_common(oracle, spec, backoff);
    oracle->add_option("--n", spec.n, "square instance size (<= 8)");

    std::vector<std::string> args;
    try {
        args = expand_config(argc, argv);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    std::vector<const char*> cargs;
    cargs.push_back(argv[0]);
    for (const auto& a : args) cargs.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (!backoff.empty()) spec.policy = alma::BackoffPolicy::parse(backoff);
        auto split = [](const std::string& s) {
            std::vector<std::string> out;
            std::istringstream is(s);
            std::string item;
            while (std::getline(is, item, ','))
                if (!item.empty()) out.push_back(item);
            return out;
        };
        if (!algos.empty()) spec.algorithms = split(algos);
        if (!budgets.empty())
            for (const auto& b : split(budgets))
                spec.budgets.push_back(std::stoull(b));

        // Scenario defaults: logistic gamma=2 for the preference scenarios,
        // linear eps=0.1 for the map scenario.
        if (backoff.empty() && spec.scenario == "cartesian")
            spec.policy = alma::BackoffPolicy::linear(0.1);

        if (run->parsed()) return alma::cmd_run(spec);
        if (sweep->parsed()) return alma::cmd_sweep(spec);
        if (online->parsed()) {
            if (online->count("--algos") == 0)
                spec.algorithms = {"alma", "jitmwm", "bmwm", "bg"};
            if (online->count("--backoff") == 0)
                spec.policy = alma::BackoffPolicy::linear(0.1);
            return alma::cmd_online(spec);
        }
        if (verify->parsed()) return alma::cmd_verify_theory(spec);
        if (oracle->parsed()) {
            if (oracle->count("--runs") == 0) spec.runs = 500;
            return alma::cmd_oracle_check(spec);
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 2;
}
