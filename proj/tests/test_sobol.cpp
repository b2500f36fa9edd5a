#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "surrocal/prng.hpp"
#include "surrocal/sobol.hpp"

using namespace surrocal;

TEST_CASE("first elements of dimension 1 match the radical-inverse sequence") {
    const auto pts = sobol_unit(1, 3, 1);
    CHECK(pts[0] == 0.5);
    CHECK(pts[1] == 0.75);
    CHECK(pts[2] == 0.25);
}

TEST_CASE("index 0 is the origin in every dimension") {
    for (int d : {1, 2, 5, 10, 16, 21}) {
        const auto pts = sobol_unit(d, 1, 0);
        for (int k = 0; k < d; ++k) CHECK(pts[static_cast<std::size_t>(k)] == 0.0);
    }
}

TEST_CASE("unsupported dimension raises") {
    CHECK_THROWS_AS(sobol_unit(22, 1, 0), error);
    CHECK_NOTHROW(sobol_unit(16, 4, 0));
}

TEST_CASE("deterministic: two generations are bit-identical") {
    const auto a = sobol_unit(7, 100, 11);
    const auto b = sobol_unit(7, 100, 11);
    CHECK(a == b);
}

TEST_CASE("skip is a pure fast-forward") {
    const auto whole = sobol_unit(5, 40, 0);
    const auto tail = sobol_unit(5, 10, 30);
    for (std::size_t i = 0; i < tail.size(); ++i) CHECK(whole[30 * 5 + i] == tail[i]);
}

TEST_CASE("each coordinate of the first 2^k points is a permutation of the dyadic grid") {
    // holds for any valid direction numbers; broken table entries would fail
    const int k = 7;
    const std::size_t n = 1u << k;
    for (int d : {1, 2, 3, 8, 13, 21}) {
        const auto pts = sobol_unit(d, n, 0);
        for (int c = 0; c < d; ++c) {
            std::set<long> seen;
            for (std::size_t i = 0; i < n; ++i) {
                const double v = pts[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(c)];
                seen.insert(std::lround(v * static_cast<double>(n)));
            }
            CHECK(seen.size() == n);
            CHECK(*seen.begin() == 0);
            CHECK(*seen.rbegin() == static_cast<long>(n - 1));
        }
    }
}

namespace {

// brute-force star-discrepancy proxy over an m-by-m grid of anchored boxes
double grid_discrepancy_2d(const std::vector<double>& pts, int m) {
    const std::size_t n = pts.size() / 2;
    double worst = 0.0;
    for (int a = 1; a <= m; ++a) {
        for (int b = 1; b <= m; ++b) {
            const double ux = static_cast<double>(a) / m;
            const double uy = static_cast<double>(b) / m;
            std::size_t count = 0;
            for (std::size_t i = 0; i < n; ++i)
                if (pts[2 * i] < ux && pts[2 * i + 1] < uy) ++count;
            worst = std::max(worst, std::abs(static_cast<double>(count) / static_cast<double>(n) - ux * uy));
        }
    }
    return worst;
}

} // namespace

TEST_CASE("1024 Sobol points beat 1024 uniform points on grid discrepancy") {
    const auto sobol_pts = sobol_unit(2, 1024, 1);
    std::vector<double> uniform_pts(2048);
    Rng rng(20240117);
    for (double& v : uniform_pts) v = rng.uniform();
    const double ds = grid_discrepancy_2d(sobol_pts, 32);
    const double du = grid_discrepancy_2d(uniform_pts, 32);
    CHECK(ds < du);
}
