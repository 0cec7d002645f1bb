#ifndef ALMA_ONLINE_HPP
#define ALMA_ONLINE_HPP

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "alma/baselines.hpp"
#include "alma/engine.hpp"
#include "alma/instance.hpp"
#include "alma/rng.hpp"

namespace alma {

struct Coord {
    double lat = 0.0; // planar providers read this as x (km)
    double lon = 0.0; // and this as y (km)
};

struct OnlineRequest {
    int id = 0;
    int arrival = 0;   // minute a
    int trip_len = 0;  // minutes l
    Coord pickup;
    Coord dropoff;
    int deadline = 0;  // minute e = a + k
};

enum class OnlineAlgorithm { Alma, JitMwm, Bmwm, Bg };

struct OnlineConfig {
    int min_wait = 0;                 // minW, minutes
    std::optional<int> max_wait;      // maxW; nullopt = unbounded
    double q = 0.1;                   // waiting-time fraction of trip time
    double d_min = 0.0;               // km; low-utility pairs deferred while non-critical
    OnlineAlgorithm algorithm = OnlineAlgorithm::Alma;
    int batch = 1;                    // x, minutes (BMWM / BG)

    void validate() const {
        if (min_wait < 0) throw std::invalid_argument("online: minW < 0");
        if (max_wait && *max_wait < min_wait)
            throw std::invalid_argument("online: maxW < minW");
        if (q < 0.0 || q > 1.0) throw std::invalid_argument("online: q outside [0,1]");
        if (d_min < 0.0) throw std::invalid_argument("online: d_min < 0");
        if (batch < 1) throw std::invalid_argument("online: batch < 1");
    }

    int waiting_time(int trip_len) const {
        int k = static_cast<int>(std::lround(q * trip_len));
        k = std::max(k, min_wait);
        if (max_wait) k = std::min(k, *max_wait);
        return k;
    }
};

// Distance provider: saved kilometers if two requests share a ride.
class DistanceProvider {
public:
    virtual ~DistanceProvider() = default;
    virtual double saved_km(const OnlineRequest& a, const OnlineRequest& b) const = 0;
    virtual double trip_km(const OnlineRequest& r) const = 0;
};

// Providers with an underlying point metric compute the saving as
// solo(a) + solo(b) minus the best of the four shared-ride point orders
// (each pickup precedes its own dropoff, both pickups before the first
// dropoff), floored at zero.
class MetricProvider : public DistanceProvider {
public:
    virtual double dist(const Coord& a, const Coord& b) const = 0;

    double trip_km(const OnlineRequest& r) const override {
        return dist(r.pickup, r.dropoff);
    }

    double saved_km(const OnlineRequest& a, const OnlineRequest& b) const override {
        const double solo = trip_km(a) + trip_km(b);
        const Coord* routes[4][4] = {
            {&a.pickup, &b.pickup, &a.dropoff, &b.dropoff},
            {&a.pickup, &b.pickup, &b.dropoff, &a.dropoff},
            {&b.pickup, &a.pickup, &a.dropoff, &b.dropoff},
            {&b.pickup, &a.pickup, &b.dropoff, &a.dropoff},
        };
        double best = std::numeric_limits<double>::infinity();
        for (const auto& route : routes) {
            double len = dist(*route[0], *route[1]) + dist(*route[1], *route[2]) +
                         dist(*route[2], *route[3]);
            best = std::min(best, len);
        }
        return std::max(0.0, solo - best);
    }
};

// Coordinates as planar kilometers; city-block metric.
class ManhattanProvider : public MetricProvider {
public:
    double dist(const Coord& a, const Coord& b) const override {
        return std::fabs(a.lat - b.lat) + std::fabs(a.lon - b.lon);
    }
};

// Haversine great-circle distance in km for geographic coordinates.
class GreatCircleProvider : public MetricProvider {
public:
    double dist(const Coord& a, const Coord& b) const override {
        constexpr double kEarthRadiusKm = 6371.0088;
        constexpr double kDeg = 0.017453292519943295;
        const double lat1 = a.lat * kDeg, lat2 = b.lat * kDeg;
        const double dlat = (b.lat - a.lat) * kDeg;
        const double dlon = (b.lon - a.lon) * kDeg;
        const double s1 = std::sin(dlat / 2.0), s2 = std::sin(dlon / 2.0);
        const double h = s1 * s1 + std::cos(lat1) * std::cos(lat2) * s2 * s2;
        return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
    }
};

// Precomputed pairwise savings keyed by request id. File format:
// header `alma-distmat v1 n=<int>` then `i j km` triples (symmetric).
class MatrixProvider : public DistanceProvider {
public:
    MatrixProvider() = default;

    static MatrixProvider load(std::istream& is) {
        MatrixProvider mp;
        std::string line;
        int lineno = 1;
        if (!std::getline(is, line))
            throw std::runtime_error("distmat: missing header");
        {
            std::istringstream hs(line);
            std::string magic, ver, nfield;
            hs >> magic >> ver >> nfield;
            if (magic != "alma-distmat" || ver != "v1" || nfield.rfind("n=", 0) != 0)
                throw std::runtime_error("distmat: bad header");
            mp.n_ = std::stoi(nfield.substr(2));
        }
        while (std::getline(is, line)) {
            ++lineno;
            std::istringstream ls(line);
            int i, j;
            double km;
            if (!(ls >> i)) continue;
            if (!(ls >> j >> km) || km < 0.0)
                throw std::runtime_error("distmat: malformed line " + std::to_string(lineno));
            mp.saved_[{std::min(i, j), std::max(i, j)}] = km;
        }
        return mp;
    }

    static MatrixProvider load(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw std::runtime_error("cannot open: " + path);
        return load(f);
    }

    void set(int i, int j, double km) { saved_[{std::min(i, j), std::max(i, j)}] = km; }
    void set_trip(int i, double km) { trip_[i] = km; }

    double saved_km(const OnlineRequest& a, const OnlineRequest& b) const override {
        auto it = saved_.find({std::min(a.id, b.id), std::max(a.id, b.id)});
        if (it == saved_.end())
            throw std::runtime_error("distmat: no entry for pair (" +
                                     std::to_string(a.id) + "," + std::to_string(b.id) + ")");
        return it->second;
    }

    double trip_km(const OnlineRequest& r) const override {
        auto it = trip_.find(r.id);
        return it == trip_.end() ? 0.0 : it->second;
    }

private:
    int n_ = 0;
    std::map<std::pair<int, int>, double> saved_;
    std::map<int, double> trip_;
};

struct MatchEvent {
    int minute = 0;
    int id_a = 0;
    int id_b = 0;
    double saved_km = 0.0;
};

struct OnlineResult {
    double sw_saved_km = 0.0;
    std::vector<MatchEvent> matches;
    std::vector<int> solo_ids; // departed unmatched
    int solo_count() const { return static_cast<int>(solo_ids.size()); }
};

namespace detail {

struct LiveRequest {
    const OnlineRequest* req;
    bool matched = false;
    bool departed = false;
};

// Pair eligibility at dispatch time: positive saving and, while either
// side is still open, at least d_min of it.
inline bool pair_allowed(double saved, bool a_critical, bool b_critical,
                         const OnlineConfig& cfg) {
    if (saved <= 0.0) return false;
    if (saved < cfg.d_min && !(a_critical && b_critical)) return false;
    return true;
}

} // namespace detail

// Critical requests run the matching heuristic as agents against all
// current requests as resources; a request matched while acting as a
// resource leaves both roles at once.
inline std::vector<std::pair<int, int>> dispatch_alma(
    const std::vector<const OnlineRequest*>& critical,
    const std::vector<const OnlineRequest*>& current, const DistanceProvider& provider,
    const OnlineConfig& cfg, const BackoffPolicy& policy, std::uint64_t seed) {
    if (critical.empty()) return {};
    std::map<int, std::size_t> current_index; // request id -> resource slot
    for (std::size_t i = 0; i < current.size(); ++i) current_index[current[i]->id] = i;

    MatchingInstance inst;
    inst.n_agents = static_cast<int>(critical.size());
    inst.n_resources = static_cast<int>(current.size());
    inst.interest.resize(critical.size());

    double max_saved = 0.0;
    std::vector<std::vector<double>> saved(critical.size(),
                                           std::vector<double>(current.size(), 0.0));
    for (std::size_t a = 0; a < critical.size(); ++a) {
        for (std::size_t r = 0; r < current.size(); ++r) {
            if (critical[a]->id == current[r]->id) continue;
            double s = provider.saved_km(*critical[a], *current[r]);
            saved[a][r] = s;
            max_saved = std::max(max_saved, s);
        }
    }
    if (max_saved <= 0.0) return {};

    std::vector<bool> res_is_critical(current.size(), false);
    {
        std::map<int, bool> crit_ids;
        for (const auto* c : critical) crit_ids[c->id] = true;
        for (std::size_t r = 0; r < current.size(); ++r)
            res_is_critical[r] = crit_ids.count(current[r]->id) > 0;
    }

    for (std::size_t a = 0; a < critical.size(); ++a)
        for (std::size_t r = 0; r < current.size(); ++r) {
            if (critical[a]->id == current[r]->id) continue;
            if (!detail::pair_allowed(saved[a][r], true, res_is_critical[r], cfg))
                continue;
            inst.interest[a].push_back(
                {static_cast<int>(r), saved[a][r] / max_saved});
        }

    // Dual-role wiring: resource slot r embodies critical agent index (if
    // any); agent a is itself the resource at slot current_index[id].
    EngineOptions opts;
    opts.dual_agent_of_resource.assign(current.size(), -1);
    opts.dual_resource_of_agent.assign(critical.size(), -1);
    for (std::size_t a = 0; a < critical.size(); ++a) {
        auto it = current_index.find(critical[a]->id);
        if (it != current_index.end()) {
            opts.dual_resource_of_agent[a] = static_cast<int>(it->second);
            opts.dual_agent_of_resource[it->second] = static_cast<int>(a);
        }
    }

    RunResult rr = run(inst, policy, seed, opts);
    std::vector<std::pair<int, int>> matches;
    for (std::size_t a = 0; a < critical.size(); ++a) {
        const auto& assigned = rr.matching.assignment[a];
        if (!assigned) continue;
        matches.emplace_back(critical[a]->id, current[static_cast<std::size_t>(*assigned)]->id);
    }
    return matches;
}

// Maximum-weight matching over the current-request graph (exact, via the
// subset enumerator; components beyond the guard raise a size error).
inline std::vector<std::pair<int, int>> dispatch_max_weight(
    const std::vector<const OnlineRequest*>& current,
    const std::vector<bool>& is_critical, const DistanceProvider& provider,
    const OnlineConfig& cfg) {
    std::vector<WeightedEdge> edges;
    for (std::size_t i = 0; i < current.size(); ++i)
        for (std::size_t j = i + 1; j < current.size(); ++j) {
            double s = provider.saved_km(*current[i], *current[j]);
            if (detail::pair_allowed(s, is_critical[i], is_critical[j], cfg))
                edges.push_back({current[i]->id, current[j]->id, s});
        }
    GraphMatching gm = brute_force_max_weight(edges);
    return gm.edges;
}

// Greedy: pairs sorted by saving descending, ties in random order, taken
// while disjoint.
inline std::vector<std::pair<int, int>> dispatch_greedy(
    const std::vector<const OnlineRequest*>& current,
    const std::vector<bool>& is_critical, const DistanceProvider& provider,
    const OnlineConfig& cfg, Rng& rng) {
    struct Cand {
        double saved;
        std::uint64_t tie;
        int a, b;
    };
    std::vector<Cand> cands;
    for (std::size_t i = 0; i < current.size(); ++i)
        for (std::size_t j = i + 1; j < current.size(); ++j) {
            double s = provider.saved_km(*current[i], *current[j]);
            if (detail::pair_allowed(s, is_critical[i], is_critical[j], cfg))
                cands.push_back({s, rng.next_u64(), current[i]->id, current[j]->id});
        }
    std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
        return x.saved != y.saved ? x.saved > y.saved : x.tie < y.tie;
    });
    std::map<int, bool> taken;
    std::vector<std::pair<int, int>> matches;
    for (const Cand& c : cands) {
        if (taken.count(c.a) || taken.count(c.b)) continue;
        taken[c.a] = taken[c.b] = true;
        matches.emplace_back(c.a, c.b);
    }
    return matches;
}

// Replays a time-ordered request stream minute by minute. A request is
// open from arrival until its deadline, gets exactly one critical dispatch
// opportunity at the deadline minute, and departs solo if still unmatched
// at the end of it.
inline OnlineResult simulate_online(const std::vector<OnlineRequest>& requests,
                                    const OnlineConfig& cfg,
                                    const DistanceProvider& provider,
                                    const BackoffPolicy& policy, std::uint64_t seed) {
    cfg.validate();
    for (std::size_t i = 1; i < requests.size(); ++i)
        if (requests[i].arrival < requests[i - 1].arrival)
            throw std::invalid_argument("simulate_online: requests not sorted by arrival");

    OnlineResult result;
    if (requests.empty()) return result;

    std::vector<detail::LiveRequest> live;
    live.reserve(requests.size());
    for (const auto& r : requests) live.push_back({&r, false, false});
    std::map<int, std::size_t> by_id;
    for (std::size_t i = 0; i < live.size(); ++i) by_id[live[i].req->id] = i;

    Rng rng(seed);
    const int t_begin = requests.front().arrival;
    int t_end = 0;
    for (const auto& r : requests) t_end = std::max(t_end, r.deadline);

    std::uint64_t dispatch_no = 0;
    for (int t = t_begin; t <= t_end; ++t) {
        std::vector<const OnlineRequest*> critical, current;
        std::vector<bool> is_critical;
        for (const auto& lr : live) {
            if (lr.matched || lr.departed) continue;
            if (lr.req->arrival > t) continue;
            bool crit = t >= lr.req->deadline;
            current.push_back(lr.req);
            is_critical.push_back(crit);
            if (crit) critical.push_back(lr.req);
        }

        std::vector<std::pair<int, int>> matches;
        switch (cfg.algorithm) {
            case OnlineAlgorithm::Alma:
                if (!critical.empty())
                    matches = dispatch_alma(critical, current, provider, cfg, policy,
                                            derive_seed(seed, ++dispatch_no));
                break;
            case OnlineAlgorithm::JitMwm:
                if (!critical.empty())
                    matches = dispatch_max_weight(current, is_critical, provider, cfg);
                break;
            case OnlineAlgorithm::Bmwm:
                if (!current.empty() && t % cfg.batch == 0)
                    matches = dispatch_max_weight(current, is_critical, provider, cfg);
                break;
            case OnlineAlgorithm::Bg:
                if (!current.empty() && t % cfg.batch == 0)
                    matches = dispatch_greedy(current, is_critical, provider, cfg, rng);
                break;
        }

        for (const auto& [ia, ib] : matches) {
            detail::LiveRequest& a = live[by_id.at(ia)];
            detail::LiveRequest& b = live[by_id.at(ib)];
            if (a.matched || b.matched || a.departed || b.departed)
                throw std::logic_error("simulate_online: dispatch returned a stale request");
            a.matched = b.matched = true;
            double s = provider.saved_km(*a.req, *b.req);
            result.sw_saved_km += s;
            result.matches.push_back({t, ia, ib, s});
        }

        // BG drops unmatched open requests after every batch.
        if (cfg.algorithm == OnlineAlgorithm::Bg && t % cfg.batch == 0) {
            for (auto& lr : live) {
                if (lr.matched || lr.departed || lr.req->arrival > t) continue;
                if (t < lr.req->deadline) {
                    lr.departed = true;
                    result.solo_ids.push_back(lr.req->id);
                }
            }
        }

        // Criticals unmatched at the end of their deadline minute drive off.
        for (auto& lr : live) {
            if (lr.matched || lr.departed || lr.req->arrival > t) continue;
            if (t >= lr.req->deadline) {
                lr.departed = true;
                result.solo_ids.push_back(lr.req->id);
            }
        }
    }

    // Anything never reaching its deadline inside the loop has departed by
    // construction (t_end covers all deadlines).
    return result;
}

// Clairvoyant off-line benchmark: maximum-weight matching over every pair
// of requests whose active windows [a, e] overlap (infeasible pairs are
// excluded rather than penalized; same optimum).
inline double clairvoyant_offline(const std::vector<OnlineRequest>& requests,
                                  const DistanceProvider& provider) {
    std::vector<WeightedEdge> edges;
    for (std::size_t i = 0; i < requests.size(); ++i)
        for (std::size_t j = i + 1; j < requests.size(); ++j) {
            const auto& a = requests[i];
            const auto& b = requests[j];
            if (a.arrival > b.deadline || b.arrival > a.deadline) continue;
            double s = provider.saved_km(a, b);
            if (s > 0.0) edges.push_back({a.id, b.id, s});
        }
    return brute_force_max_weight(edges).weight;
}

// ---- Request ingestion -------------------------------------------------

namespace detail {

// Epoch minutes from an ISO-8601 local timestamp (no zone handling) or a
// plain integer minute count.
inline long long parse_timestamp(const std::string& s, int row) {
    auto fail = [&](const std::string& msg) {
        throw std::runtime_error("requests csv row " + std::to_string(row) + ": " + msg);
    };
    bool all_digits = !s.empty();
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) {
            all_digits = false;
            break;
        }
    if (all_digits) return std::stoll(s);

    int y, mo, d, h, mi, sec = 0;
    char sep;
    std::istringstream is(s);
    if (!(is >> y >> sep >> mo >> sep >> d)) fail("bad date '" + s + "'");
    if (is.peek() == 'T' || is.peek() == ' ') is.get(); // date/time separator
    if (!(is >> h >> sep >> mi)) fail("bad time '" + s + "'");
    if (is.peek() == ':') is >> sep >> sec;
    (void)sec;
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59)
        fail("timestamp out of range '" + s + "'");
    // days_from_civil (Howard Hinnant's algorithm).
    const int yy = y - (mo <= 2);
    const int era = (yy >= 0 ? yy : yy - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(yy - era * 400);
    const unsigned doy = static_cast<unsigned>((153 * (mo + (mo > 2 ? -3 : 9)) + 2) / 5 + d - 1);
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    const long long days = static_cast<long long>(era) * 146097 +
                           static_cast<long long>(doe) - 719468;
    return days * 1440 + h * 60 + mi; // seconds rounded down to the minute
}

} // namespace detail

// CSV schema: id,pickup_ts,dropoff_ts,pickup_lat,pickup_lon,dropoff_lat,dropoff_lon.
// Trip time is dropoff minus pickup; waiting time per the config clamp.
inline std::vector<OnlineRequest> load_requests(std::istream& is, const OnlineConfig& cfg) {
    std::vector<OnlineRequest> out;
    std::string line;
    int row = 0;
    if (!std::getline(is, line))
        throw std::runtime_error("requests csv: empty file");
    ++row;
    long long t0 = -1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::istringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 7)
            throw std::runtime_error("requests csv row " + std::to_string(row) +
                                     ": expected 7 fields, got " +
                                     std::to_string(fields.size()));
        OnlineRequest r;
        try {
            r.id = std::stoi(fields[0]);
            r.pickup.lat = std::stod(fields[3]);
            r.pickup.lon = std::stod(fields[4]);
            r.dropoff.lat = std::stod(fields[5]);
            r.dropoff.lon = std::stod(fields[6]);
        } catch (const std::exception&) {
            throw std::runtime_error("requests csv row " + std::to_string(row) +
                                     ": malformed numeric field");
        }
        long long pick = detail::parse_timestamp(fields[1], row);
        long long drop = detail::parse_timestamp(fields[2], row);
        if (drop < pick)
            throw std::runtime_error("requests csv row " + std::to_string(row) +
                                     ": dropoff before pickup");
        if (t0 < 0) t0 = pick;
        r.arrival = static_cast<int>(pick - t0);
        r.trip_len = static_cast<int>(drop - pick);
        r.deadline = r.arrival + cfg.waiting_time(r.trip_len);
        out.push_back(r);
    }
    std::sort(out.begin(), out.end(), [](const OnlineRequest& a, const OnlineRequest& b) {
        return a.arrival != b.arrival ? a.arrival < b.arrival : a.id < b.id;
    });
    return out;
}

inline std::vector<OnlineRequest> load_requests(const std::string& path,
                                                const OnlineConfig& cfg) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open: " + path);
    return load_requests(f, cfg);
}

inline void save_requests(const std::vector<OnlineRequest>& requests, std::ostream& os) {
    os << "id,pickup_ts,dropoff_ts,pickup_lat,pickup_lon,dropoff_lat,dropoff_lon\n";
    os.precision(17);
    for (const auto& r : requests)
        os << r.id << "," << r.arrival << "," << (r.arrival + r.trip_len) << ","
           << r.pickup.lat << "," << r.pickup.lon << "," << r.dropoff.lat << ","
           << r.dropoff.lon << "\n";
}

// Synthetic request-stream day, statistically shaped like sparse urban
// demand: arrivals uniform over the span, planar km coordinates in a box,
// trip time derived from city-block distance at a fixed speed.
struct SyntheticStreamConfig {
    int n_requests = 100;
    int span_minutes = 1440;
    double box_km = 12.0;
    double km_per_minute = 0.5;
    std::uint64_t seed = 0;
};

inline std::vector<OnlineRequest> synthesize_requests(const SyntheticStreamConfig& scfg,
                                                      const OnlineConfig& cfg) {
    Rng rng(scfg.seed);
    std::vector<OnlineRequest> out;
    out.reserve(static_cast<std::size_t>(scfg.n_requests));
    for (int i = 0; i < scfg.n_requests; ++i) {
        OnlineRequest r;
        r.id = i;
        r.arrival = static_cast<int>(rng.below(static_cast<std::uint64_t>(scfg.span_minutes)));
        r.pickup = {rng.uniform(0.0, scfg.box_km), rng.uniform(0.0, scfg.box_km)};
        r.dropoff = {rng.uniform(0.0, scfg.box_km), rng.uniform(0.0, scfg.box_km)};
        double d = std::fabs(r.pickup.lat - r.dropoff.lat) +
                   std::fabs(r.pickup.lon - r.dropoff.lon);
        r.trip_len = std::max(1, static_cast<int>(std::lround(d / scfg.km_per_minute)));
        r.deadline = r.arrival + cfg.waiting_time(r.trip_len);
        out.push_back(r);
    }
    std::sort(out.begin(), out.end(), [](const OnlineRequest& a, const OnlineRequest& b) {
        return a.arrival != b.arrival ? a.arrival < b.arrival : a.id < b.id;
    });
    return out;
}

} // namespace alma

#endif
