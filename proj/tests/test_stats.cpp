#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "surrocal/stats.hpp"

using namespace surrocal;

namespace {

// Brute force: evaluate |F_a - F_b| at every pooled point by counting.
// Independent of the two-pointer implementation.
double ks_brute_force(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> pooled = a;
    pooled.insert(pooled.end(), b.begin(), b.end());
    double best = 0.0;
    for (double x : pooled) {
        std::size_t ca = 0, cb = 0;
        for (double v : a)
            if (v <= x) ++ca;
        for (double v : b)
            if (v <= x) ++cb;
        best = std::max(best, std::abs(static_cast<double>(ca) / static_cast<double>(a.size()) -
                                       static_cast<double>(cb) / static_cast<double>(b.size())));
    }
    return best;
}

// test-side generators kept independent of surrocal::Rng
std::vector<double> draw_uniform(std::mt19937& gen, std::size_t n, double lo = 0.0, double hi = 1.0) {
    std::vector<double> v(n);
    for (double& x : v) x = lo + (hi - lo) * (static_cast<double>(gen()) / 4294967296.0);
    return v;
}

std::vector<double> draw_normal(std::mt19937& gen, std::size_t n, double mu = 0.0, double sd = 1.0) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        double u1 = (static_cast<double>(gen()) + 0.5) / 4294967296.0;
        double u2 = (static_cast<double>(gen()) + 0.5) / 4294967296.0;
        v[i] = mu + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
    return v;
}

std::vector<double> draw_laplace(std::mt19937& gen, std::size_t n, double mu = 0.0, double scale = 1.0) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = (static_cast<double>(gen()) + 0.5) / 4294967296.0 - 0.5;
        v[i] = mu - scale * (u < 0 ? -1.0 : 1.0) * std::log(1.0 - 2.0 * std::abs(u));
    }
    return v;
}

// two-sample permutation test on the KS statistic
double permutation_pvalue(const std::vector<double>& a, const std::vector<double>& b, int resamples,
                          std::mt19937& gen) {
    const double observed = ks_statistic(a, b);
    std::vector<double> pooled = a;
    pooled.insert(pooled.end(), b.begin(), b.end());
    int at_least = 0;
    for (int r = 0; r < resamples; ++r) {
        std::shuffle(pooled.begin(), pooled.end(), gen);
        const std::vector<double> ra(pooled.begin(), pooled.begin() + static_cast<std::ptrdiff_t>(a.size()));
        const std::vector<double> rb(pooled.begin() + static_cast<std::ptrdiff_t>(a.size()), pooled.end());
        if (ks_statistic(ra, rb) >= observed - 1e-15) ++at_least;
    }
    return static_cast<double>(at_least) / static_cast<double>(resamples);
}

} // namespace

TEST_CASE("ks statistic: identical, disjoint, and degenerate samples") {
    std::mt19937 gen(7);
    const auto a = draw_uniform(gen, 100);
    CHECK(ks_statistic(a, a) == 0.0);

    const auto lo = draw_uniform(gen, 50, 0.0, 1.0);
    const auto hi = draw_uniform(gen, 70, 2.0, 3.0);
    CHECK(ks_statistic(lo, hi) == 1.0);

    CHECK_THROWS_AS(ks_statistic(std::vector<double>{}, a), error);
}

TEST_CASE("ks statistic equals the brute-force oracle on random pairs") {
    std::mt19937 gen(99);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 2 + gen() % 200;
        const std::size_t m = 2 + gen() % 300;
        auto a = draw_normal(gen, n);
        auto b = draw_normal(gen, m, 0.2, 1.3);
        if (rep % 3 == 0) {
            // inject ties
            for (std::size_t i = 0; i + 1 < a.size(); i += 2) a[i + 1] = a[i];
            for (std::size_t i = 0; i < std::min(a.size(), b.size()); i += 3) b[i] = a[i];
        }
        CHECK(ks_statistic(a, b) == doctest::Approx(ks_brute_force(a, b)).epsilon(1e-15));
    }
}

TEST_CASE("ks statistic is symmetric and invariant under monotone transforms") {
    std::mt19937 gen(3);
    for (int rep = 0; rep < 20; ++rep) {
        const auto a = draw_normal(gen, 80);
        const auto b = draw_normal(gen, 120, 0.5);
        const double d1 = ks_statistic(a, b);
        CHECK(ks_statistic(b, a) == d1);
        auto ta = a;
        auto tb = b;
        auto f = [](double x) { return std::exp(0.5 * x) + x; }; // strictly increasing
        for (double& x : ta) x = f(x);
        for (double& x : tb) x = f(x);
        CHECK(ks_statistic(ta, tb) == d1);
    }
}

TEST_CASE("ks p-value endpoints and monotonicity") {
    CHECK(ks_pvalue(0.0, 100, 100) == 1.0);
    CHECK(ks_pvalue(1.0, 100, 100) < 1e-10);
    double prev = 1.1;
    for (double d = 0.01; d <= 1.0; d += 0.01) {
        const double p = ks_pvalue(d, 250, 250);
        CHECK(p <= prev + 1e-15);
        prev = p;
    }
}

TEST_CASE("asymptotic ks p-value tracks a permutation test in the mid-range") {
    std::mt19937 gen(2024);
    int used = 0;
    for (int rep = 0; rep < 40 && used < 20; ++rep) {
        const auto a = draw_normal(gen, 250);
        const auto b = draw_normal(gen, 250);
        const double d = ks_statistic(a, b);
        const double p = ks_pvalue(d, a.size(), b.size());
        if (p < 0.01 || p > 0.99) continue;
        ++used;
        const double pp = permutation_pvalue(a, b, 2000, gen);
        CHECK(std::abs(p - pp) < 0.03);
    }
    CHECK(used >= 10);
}

TEST_CASE("subbotin fit recovers the Laplace shape") {
    std::mt19937 gen(5150);
    const auto sample = draw_laplace(gen, 100000);
    const SubbotinFit fit = subbotin_fit(sample);
    CHECK(fit.shape == doctest::Approx(1.0).epsilon(0.05));
    CHECK(fit.location == doctest::Approx(0.0).epsilon(0.05));
    CHECK(fit.scale == doctest::Approx(1.0).epsilon(0.08));
}

TEST_CASE("subbotin fit recovers the Gaussian shape") {
    std::mt19937 gen(909);
    const auto sample = draw_normal(gen, 100000);
    const SubbotinFit fit = subbotin_fit(sample);
    CHECK(fit.shape == doctest::Approx(2.0).epsilon(0.05));
    CHECK(std::abs(fit.location) < 0.05);
}

TEST_CASE("subbotin fit is translation equivariant") {
    std::mt19937 gen(11);
    const auto sample = draw_laplace(gen, 5000, 0.0, 0.7);
    auto shifted = sample;
    const double c = 3.25;
    for (double& x : shifted) x += c;
    const SubbotinFit f0 = subbotin_fit(sample);
    const SubbotinFit f1 = subbotin_fit(shifted);
    CHECK(f1.location - f0.location == doctest::Approx(c).epsilon(1e-3));
    CHECK(f1.shape == doctest::Approx(f0.shape).epsilon(1e-3));
    CHECK(f1.scale == doctest::Approx(f0.scale).epsilon(1e-3));
}

TEST_CASE("subbotin profile log-likelihood is locally optimal at the returned shape") {
    std::mt19937 gen(42);
    const auto sample = draw_normal(gen, 3000, 1.0, 2.0);
    const SubbotinFit fit = subbotin_fit(sample);
    const double lo = *std::min_element(sample.begin(), sample.end());
    const double hi = *std::max_element(sample.begin(), sample.end());
    for (double db : {-1e-3, 1e-3}) {
        const double b = fit.shape + db;
        const double ll = stats_detail::subbotin_profile(sample, b, lo, hi, nullptr);
        CHECK(fit.loglik >= ll - 1e-6);
    }
}

TEST_CASE("subbotin fit rejects tiny and degenerate samples") {
    std::vector<double> tiny(10, 1.0);
    CHECK_THROWS_AS(subbotin_fit(tiny), error);
    std::vector<double> flat(100, 2.5);
    CHECK_THROWS_AS(subbotin_fit(flat), error);
}
