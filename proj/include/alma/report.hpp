#ifndef ALMA_REPORT_HPP
#define ALMA_REPORT_HPP

#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "alma/instance.hpp"

namespace alma {

// Sum of utilities of assigned pairs. Rejects infeasible matchings
// (resource used twice, or a pair outside the interest structure).
inline double social_welfare(const MatchingInstance& instance, const Matching& matching) {
    if (matching.assignment.size() != static_cast<std::size_t>(instance.n_agents))
        throw std::invalid_argument("social_welfare: matching size != N");
    std::vector<bool> used(static_cast<std::size_t>(instance.n_resources), false);
    double sum = 0.0;
    for (int a = 0; a < instance.n_agents; ++a) {
        const auto& assigned = matching.assignment[static_cast<std::size_t>(a)];
        if (!assigned) continue;
        int r = *assigned;
        if (r < 0 || r >= instance.n_resources)
            throw std::invalid_argument("social_welfare: resource id out of range");
        if (used[static_cast<std::size_t>(r)])
            throw std::invalid_argument("social_welfare: resource assigned twice");
        used[static_cast<std::size_t>(r)] = true;
        auto u = instance.utility_of(a, r);
        if (!u || *u <= 0.0)
            throw std::invalid_argument("social_welfare: assigned pair not a positive-utility edge");
        sum += *u;
    }
    return sum;
}

// Pooled relative difference across runs: (sum achieved - sum optimal) / sum optimal.
inline double cumulative_regret(const std::vector<double>& achieved,
                                const std::vector<double>& optimal) {
    if (achieved.empty() || achieved.size() != optimal.size())
        throw std::invalid_argument("cumulative_regret: length mismatch or empty");
    double sa = 0.0, so = 0.0;
    for (double x : achieved) sa += x;
    for (double x : optimal) so += x;
    if (so <= 0.0) throw std::invalid_argument("cumulative_regret: optimal sum not positive");
    return (sa - so) / so;
}

// Percentage of agents holding a positive-utility resource, over the total
// population N.
inline double winners_percentage(const MatchingInstance& instance, const Matching& matching) {
    if (instance.n_agents == 0) return 0.0;
    int winners = 0;
    for (int a = 0; a < instance.n_agents; ++a) {
        const auto& assigned = matching.assignment[static_cast<std::size_t>(a)];
        if (!assigned) continue;
        auto u = instance.utility_of(a, *assigned);
        if (u && *u > 0.0) ++winners;
    }
    return 100.0 * winners / instance.n_agents;
}

struct MetricRow {
    std::string scenario;
    std::string algorithm;
    int n_agents = 0;
    int n_resources = 0;
    int runs = 0;
    double sw = 0.0;
    double sw_optimal = 0.0;
    double rel_diff = 0.0;
    double cum_regret = 0.0;
    double winners_pct = 0.0;
    double steps_total = 0.0;
    double steps_per_agent_mean = 0.0;
    std::optional<double> competitive_ratio;
    std::optional<std::uint64_t> budget;
};

inline std::string format_fixed(double x) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(6) << x;
    return os.str();
}

// Fixed column order and 6-decimal formatting for golden-file stability.
inline void emit_csv(const std::vector<MetricRow>& rows, std::ostream& os) {
    os << "scenario,algo,N,R,runs,sw,sw_opt,rel_diff,cum_regret,winners_pct,"
          "steps_total,steps_per_agent,comp_ratio,budget\n";
    for (const MetricRow& r : rows) {
        os << r.scenario << "," << r.algorithm << "," << r.n_agents << ","
           << r.n_resources << "," << r.runs << "," << format_fixed(r.sw) << ","
           << format_fixed(r.sw_optimal) << "," << format_fixed(r.rel_diff) << ","
           << format_fixed(r.cum_regret) << "," << format_fixed(r.winners_pct) << ","
           << format_fixed(r.steps_total) << "," << format_fixed(r.steps_per_agent_mean)
           << "," << (r.competitive_ratio ? format_fixed(*r.competitive_ratio) : "")
           << "," << (r.budget ? std::to_string(*r.budget) : "") << "\n";
    }
}

inline void emit_csv(const std::vector<MetricRow>& rows, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for write: " + path);
    emit_csv(rows, f);
}

} // namespace alma

#endif
