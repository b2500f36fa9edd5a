#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "surrocal/bh_model.hpp"

using namespace surrocal;

namespace {

// Straight-line re-implementation of the two-type recursion, kept
// independent of bh_simulate: plain loop, no shared helpers.
struct OracleResult {
    std::vector<double> x;
    bool divergent = false;
};

OracleResult bh_oracle(const BHParams& p, double x0) {
    OracleResult out;
    double x = x0;
    double u1 = 0.0, u2 = 0.0;
    const double inv = 1.0 / (p.nu * p.sigma * p.sigma);
    for (int t = 1; t <= p.horizon; ++t) {
        const double f1 = p.g1 * x + p.b1;
        const double f2 = p.g2 * x + p.b2;
        double n1;
        if (t == 1) {
            n1 = p.n1_init;
        } else {
            const double e1 = p.beta * u1;
            const double e2 = p.beta * u2;
            const double shift = e1 > e2 ? e1 : e2;
            const double w1 = std::exp(e1 - shift);
            const double w2 = std::exp(e2 - shift);
            n1 = w1 / (w1 + w2);
        }
        const double x_new = (n1 * f1 + (1.0 - n1) * f2) / p.r_gross;
        const double excess = x_new - p.r_gross * x;
        u1 = excess * (f1 - p.r_gross * x) * inv - p.cost + p.omega * u1;
        u2 = excess * (f2 - p.r_gross * x) * inv + p.omega * u2;
        if (!std::isfinite(x_new) || std::abs(x_new) > 1e8 || !std::isfinite(u1) || !std::isfinite(u2)) {
            out.divergent = true;
            return out;
        }
        out.x.push_back(x_new);
        x = x_new;
    }
    return out;
}

BHParams random_in_box(std::mt19937& gen) {
    auto u = [&](double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(gen()) + 0.5) / 4294967296.0;
    };
    BHParams p;
    p.beta = u(0, 10);
    p.b1 = u(-2, 2);
    p.b2 = u(-2, 2);
    p.g1 = u(-2, 2);
    p.g2 = u(-2, 2);
    p.cost = u(0, 5);
    p.omega = u(0, 1);
    p.sigma = u(0.05, 1);
    p.nu = u(0.5, 100);
    p.r_gross = u(1.01, 1.1);
    return p;
}

} // namespace

TEST_CASE("pure fundamentalists stay at the fundamental") {
    BHParams p;
    p.g1 = p.g2 = p.b1 = p.b2 = 0.0;
    p.beta = 4.0;
    p.cost = 1.0;
    const PriceSeries s = bh_simulate(p, 0, 0.0);
    REQUIRE_FALSE(s.divergent);
    REQUIRE(s.prices.size() == 500);
    for (double price : s.prices) CHECK(price == 100.0);
}

TEST_CASE("zero intensity of choice keeps shares at one half") {
    BHParams p;
    p.beta = 0.0;
    p.cost = 0.0;
    p.g1 = 0.5;
    p.g2 = -0.3;
    p.b1 = 0.4;
    p.b2 = -0.2;
    BHTrace trace;
    const PriceSeries s = bh_simulate(p, 0, 0.1, &trace);
    REQUIRE_FALSE(s.divergent);
    for (double n1 : trace.n1) CHECK(n1 == 0.5);
}

TEST_CASE("homogeneous trend followers collapse to the closed form") {
    for (double g : {0.7, -0.9, 1.0099}) {
        BHParams p;
        p.g1 = p.g2 = g;
        p.b1 = p.b2 = 0.0;
        p.beta = 3.3;
        p.cost = 2.0;
        p.omega = 0.5;
        p.r_gross = 1.01;
        const double x0 = 0.1;
        const PriceSeries s = bh_simulate(p, 0, x0);
        REQUIRE_FALSE(s.divergent);
        double expected = x0;
        for (std::size_t t = 0; t < s.prices.size(); ++t) {
            expected *= g / p.r_gross;
            CHECK(s.prices[t] - 100.0 == doctest::Approx(expected).epsilon(1e-10));
        }
    }
}

TEST_CASE("identical beliefs make the path independent of beta, omega and cost") {
    BHParams base;
    base.g1 = base.g2 = 1.02;
    base.b1 = base.b2 = 0.3;
    base.sigma = 0.4;
    base.nu = 10.0;
    const PriceSeries ref = bh_simulate(base, 0, 0.1);
    for (double beta : {0.0, 2.0, 9.5}) {
        for (double omega : {0.0, 0.9}) {
            BHParams p = base;
            p.beta = beta;
            p.omega = omega;
            p.cost = 3.0;
            const PriceSeries s = bh_simulate(p, 0, 0.1);
            REQUIRE(s.prices.size() == ref.prices.size());
            for (std::size_t t = 0; t < s.prices.size(); ++t)
                CHECK(s.prices[t] == doctest::Approx(ref.prices[t]).epsilon(1e-12));
        }
    }
}

TEST_CASE("full dynamics match the straight-line oracle per step") {
    std::mt19937 gen(314159);
    int divergent_seen = 0;
    for (int rep = 0; rep < 25; ++rep) {
        const BHParams p = random_in_box(gen);
        const PriceSeries s = bh_simulate(p, 0, 0.1);
        const OracleResult o = bh_oracle(p, 0.1);
        CHECK(s.divergent == o.divergent);
        REQUIRE(s.prices.size() == o.x.size());
        for (std::size_t t = 0; t < o.x.size(); ++t)
            CHECK(s.prices[t] - 100.0 == doctest::Approx(o.x[t]).epsilon(1e-12));
        if (s.divergent) ++divergent_seen;
    }
    INFO("divergent runs in sample: ", divergent_seen);
}

TEST_CASE("determinism: identical inputs give bit-identical series") {
    std::mt19937 gen(99);
    const BHParams p = random_in_box(gen);
    const PriceSeries a = bh_simulate(p, 42, 0.1);
    const PriceSeries b = bh_simulate(p, 42, 0.1);
    CHECK(a.prices == b.prices);
    CHECK(a.divergent == b.divergent);

    BHParams noisy = p;
    noisy.noise_sd = 0.01;
    const PriceSeries c = bh_simulate(noisy, 42, 0.1);
    const PriceSeries d = bh_simulate(noisy, 42, 0.1);
    CHECK(c.prices == d.prices);
}

TEST_CASE("explosive dynamics flag divergence instead of crashing") {
    BHParams p;
    p.g1 = p.g2 = 2.0; // strong trend, g/R > 1
    p.r_gross = 1.01;
    const PriceSeries s = bh_simulate(p, 0, 0.5);
    CHECK(s.divergent);
    CHECK(s.prices.size() < 500);
}

TEST_CASE("shares stay inside [0,1] under extreme fitness differences") {
    BHParams p;
    p.beta = 10.0;
    p.g1 = 1.9;
    p.g2 = -1.8;
    p.b1 = 1.5;
    p.b2 = -1.2;
    p.sigma = 0.1;
    p.nu = 1.0;
    BHTrace trace;
    bh_simulate(p, 0, 0.1, &trace);
    for (double n1 : trace.n1) {
        CHECK(n1 >= 0.0);
        CHECK(n1 <= 1.0);
    }
}

TEST_CASE("log returns: constants, single step, and error paths") {
    PriceSeries flat;
    flat.prices.assign(100, 42.0);
    for (double r : log_returns(flat)) CHECK(r == 0.0);

    PriceSeries two;
    two.prices = {100.0, 100.0 * std::exp(0.01)};
    const auto r = log_returns(two);
    REQUIRE(r.size() == 1);
    CHECK(r[0] == doctest::Approx(0.01).epsilon(1e-12));

    PriceSeries bad;
    bad.prices = {100.0, -1.0, 50.0};
    CHECK_THROWS_AS(log_returns(bad), error);
}
