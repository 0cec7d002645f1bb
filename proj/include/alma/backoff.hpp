#ifndef ALMA_BACKOFF_HPP
#define ALMA_BACKOFF_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace alma {

enum class BackoffCurve { Linear, Logistic };

// Horizon for the loss average: ImmediateNext looks one resource ahead,
// FullAverage over all remaining resources, Explicit uses a fixed k.
enum class LossHorizon { ImmediateNext, FullAverage, Explicit };

struct BackoffPolicy {
    BackoffCurve curve = BackoffCurve::Linear;
    double epsilon = 0.1; // linear threshold, must be in (0, 0.5)
    double gamma = 2.0;   // logistic steepness, must be > 0
    LossHorizon horizon = LossHorizon::ImmediateNext;
    std::size_t explicit_k = 0; // 1-based, only for LossHorizon::Explicit

    void validate() const {
        if (curve == BackoffCurve::Linear && (epsilon <= 0.0 || epsilon >= 0.5))
            throw std::invalid_argument("backoff: epsilon outside (0, 0.5)");
        if (curve == BackoffCurve::Logistic && gamma <= 0.0)
            throw std::invalid_argument("backoff: gamma <= 0");
    }

    static BackoffPolicy linear(double eps) {
        BackoffPolicy p;
        p.curve = BackoffCurve::Linear;
        p.epsilon = eps;
        p.validate();
        return p;
    }

    static BackoffPolicy logistic(double g) {
        BackoffPolicy p;
        p.curve = BackoffCurve::Logistic;
        p.gamma = g;
        p.validate();
        return p;
    }

    // Config syntax: "linear:<eps>" or "logistic:<gamma>".
    static BackoffPolicy parse(const std::string& s) {
        auto colon = s.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("backoff: expected curve:param, got '" + s + "'");
        const std::string name = s.substr(0, colon);
        const double param = std::stod(s.substr(colon + 1));
        if (name == "linear") return linear(param);
        if (name == "logistic") return logistic(param);
        throw std::invalid_argument("backoff: unknown curve '" + name + "'");
    }
};

// Average utility drop from the resource at 1-based position i to positions
// i+1..k of a descending-sorted list. For the last position (no remaining
// alternatives) the loss is the utility itself: losing the only option
// costs its full value.
inline double loss(const std::vector<double>& sorted_utilities, std::size_t i,
                   std::size_t k) {
    const std::size_t len = sorted_utilities.size();
    if (i < 1 || i > len) throw std::out_of_range("loss: index i out of bounds");
    if (i == len) return sorted_utilities[i - 1];
    if (k <= i || k > len) throw std::out_of_range("loss: horizon k out of bounds");
    double sum = 0.0;
    for (std::size_t j = i + 1; j <= k; ++j)
        sum += sorted_utilities[i - 1] - sorted_utilities[j - 1];
    return sum / static_cast<double>(k - i);
}

inline double linear_backoff(double loss_value, double epsilon) {
    if (loss_value <= epsilon) return 1.0 - epsilon;
    if (1.0 - loss_value <= epsilon) return epsilon;
    return 1.0 - loss_value;
}

inline double logistic_backoff(double loss_value, double gamma) {
    return 1.0 / (1.0 + std::exp(-gamma * (0.5 - loss_value)));
}

inline double backoff_probability(const BackoffPolicy& policy, double loss_value) {
    return policy.curve == BackoffCurve::Linear
               ? linear_backoff(loss_value, policy.epsilon)
               : logistic_backoff(loss_value, policy.gamma);
}

// Loss at position i under the policy's horizon.
inline double loss_at(const BackoffPolicy& policy,
                      const std::vector<double>& sorted_utilities, std::size_t i) {
    const std::size_t len = sorted_utilities.size();
    std::size_t k;
    switch (policy.horizon) {
        case LossHorizon::ImmediateNext: k = i + 1; break;
        case LossHorizon::FullAverage: k = len; break;
        case LossHorizon::Explicit: k = policy.explicit_k; break;
        default: throw std::logic_error("unreachable");
    }
    if (i == len) return loss(sorted_utilities, i, i); // last-resource fallback
    k = std::min(std::max(k, i + 1), len);
    return loss(sorted_utilities, i, k);
}

} // namespace alma

#endif
