#include <doctest.h>

#include <cmath>

#include "alma/backoff.hpp"
#include "alma/rng.hpp"

using namespace alma;

TEST_CASE("loss with immediate-next horizon is the pairwise drop") {
    std::vector<double> u{0.9, 0.7, 0.4};
    CHECK(loss(u, 1, 2) == doctest::Approx(0.2));
}

TEST_CASE("loss averaged over all remaining resources") {
    std::vector<double> u{0.9, 0.7, 0.4};
    CHECK(loss(u, 1, 3) == doctest::Approx(0.35)); // ((0.9-0.7)+(0.9-0.4))/2
}

TEST_CASE("last resource loses its full utility") {
    std::vector<double> u{0.6};
    CHECK(loss_at(BackoffPolicy::linear(0.1), u, 1) == doctest::Approx(0.6));
    std::vector<double> v{0.9, 0.3};
    CHECK(loss_at(BackoffPolicy::linear(0.1), v, 2) == doctest::Approx(0.3));
}

TEST_CASE("loss rejects out-of-range indices") {
    std::vector<double> u{0.9, 0.7};
    CHECK_THROWS_AS(loss(u, 0, 2), std::out_of_range);
    CHECK_THROWS_AS(loss(u, 3, 3), std::out_of_range);
    CHECK_THROWS_AS(loss(u, 1, 5), std::out_of_range);
}

TEST_CASE("linear curve branches") {
    CHECK(linear_backoff(0.05, 0.1) == doctest::Approx(0.9));
    CHECK(linear_backoff(0.95, 0.1) == doctest::Approx(0.1));
    CHECK(linear_backoff(0.5, 0.1) == doctest::Approx(0.5));
}

TEST_CASE("logistic curve closed-form points") {
    CHECK(logistic_backoff(0.5, 2.0) == doctest::Approx(0.5));
    CHECK(logistic_backoff(0.0, 2.0) == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
    CHECK(logistic_backoff(1.0, 2.0) == doctest::Approx(1.0 / (1.0 + std::exp(1.0))));
}

TEST_CASE("both curves are non-increasing in loss") {
    Rng rng(5);
    for (int trial = 0; trial < 5000; ++trial) {
        double l1 = rng.uniform(), l2 = rng.uniform();
        if (l1 > l2) std::swap(l1, l2);
        double eps = rng.uniform(0.01, 0.49);
        double gamma = rng.uniform(0.1, 10.0);
        CHECK(linear_backoff(l1, eps) >= linear_backoff(l2, eps));
        CHECK(logistic_backoff(l1, gamma) >= logistic_backoff(l2, gamma));
    }
}

TEST_CASE("logistic symmetry about 0.5") {
    Rng rng(6);
    for (int trial = 0; trial < 2000; ++trial) {
        double x = rng.uniform(0.0, 0.5);
        double gamma = rng.uniform(0.1, 10.0);
        CHECK(std::fabs(logistic_backoff(0.5 + x, gamma) +
                        logistic_backoff(0.5 - x, gamma) - 1.0) < 1e-12);
    }
}

TEST_CASE("output ranges") {
    Rng rng(7);
    for (int trial = 0; trial < 2000; ++trial) {
        double l = rng.uniform();
        double eps = rng.uniform(0.01, 0.49);
        double p = linear_backoff(l, eps);
        CHECK(p >= eps);
        CHECK(p <= 1.0 - eps);
        double q = logistic_backoff(l, rng.uniform(0.1, 10.0));
        CHECK(q > 0.0);
        CHECK(q < 1.0);
    }
}

TEST_CASE("immediate-next loss equals adjacent difference on random sorted lists") {
    Rng rng(8);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> u;
        int len = 2 + static_cast<int>(rng.below(10));
        for (int i = 0; i < len; ++i) u.push_back(rng.uniform());
        std::sort(u.rbegin(), u.rend());
        for (std::size_t i = 1; i < u.size(); ++i)
            CHECK(loss(u, i, i + 1) == doctest::Approx(u[i - 1] - u[i]));
    }
}

TEST_CASE("policy parsing and validation") {
    BackoffPolicy p = BackoffPolicy::parse("linear:0.1");
    CHECK(p.curve == BackoffCurve::Linear);
    CHECK(p.epsilon == doctest::Approx(0.1));
    BackoffPolicy q = BackoffPolicy::parse("logistic:2");
    CHECK(q.curve == BackoffCurve::Logistic);
    CHECK(q.gamma == doctest::Approx(2.0));
    CHECK_THROWS(BackoffPolicy::parse("sigmoid:1"));
    CHECK_THROWS(BackoffPolicy::linear(0.5));
    CHECK_THROWS(BackoffPolicy::linear(0.0));
    CHECK_THROWS(BackoffPolicy::logistic(0.0));
}
