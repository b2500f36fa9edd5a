#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "surrocal/tune.hpp"

using namespace surrocal;

namespace {

struct Toy {
    std::vector<double> x;
    std::vector<double> y;
    std::size_t n = 0;
    int d = 0;

    MatrixView view() const { return {x.data(), n, d}; }
};

Toy smooth_regression(std::size_t n, unsigned seed) {
    std::mt19937 gen(seed);
    Toy t;
    t.n = n;
    t.d = 2;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = static_cast<double>(gen()) / 4294967296.0;
        const double b = static_cast<double>(gen()) / 4294967296.0;
        t.x.push_back(a);
        t.x.push_back(b);
        t.y.push_back(std::sin(3.0 * a) + b * b);
    }
    return t;
}

Toy binary_blob(std::size_t n, unsigned seed) {
    std::mt19937 gen(seed);
    Toy t;
    t.n = n;
    t.d = 2;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = static_cast<double>(gen()) / 4294967296.0;
        const double b = static_cast<double>(gen()) / 4294967296.0;
        t.x.push_back(a);
        t.x.push_back(b);
        const double r = std::hypot(a - 0.5, b - 0.5);
        t.y.push_back(r < 0.25 ? 1.0 : 0.0);
    }
    return t;
}

double cv_mse_of(const Toy& t, const Hyperparams& hp, int folds, std::uint64_t seed) {
    // same fold assignment as tune() so configurations are comparable
    const auto fold = tune_detail::fold_assignment(t.y, folds, TuneObjective::mse, seed);
    std::vector<double> oof(t.n);
    for (int k = 0; k < folds; ++k) {
        std::vector<double> tx, ty;
        for (std::size_t i = 0; i < t.n; ++i) {
            if (fold[i] == k) continue;
            tx.push_back(t.x[i * 2]);
            tx.push_back(t.x[i * 2 + 1]);
            ty.push_back(t.y[i]);
        }
        const TreeEnsemble m = fit_boosted({tx.data(), ty.size(), 2}, ty, hp, Loss::squared);
        for (std::size_t i = 0; i < t.n; ++i)
            if (fold[i] == k) oof[i] = m.score(&t.x[i * 2]);
    }
    return mse(oof, t.y);
}

} // namespace

TEST_CASE("one trial returns the single sampled configuration") {
    const Toy t = smooth_regression(60, 3);
    const Hyperparams a = tune(t.view(), t.y, 1, 3, TuneObjective::mse, 42);
    const Hyperparams b = tune(t.view(), t.y, 1, 3, TuneObjective::mse, 42);
    CHECK(a.n_trees == b.n_trees);
    CHECK(a.max_depth == b.max_depth);
    CHECK(a.shrinkage == b.shrinkage);
    CHECK(a.subsample == b.subsample);
    CHECK(a.l2_reg == b.l2_reg);
    CHECK(a.min_child_weight == b.min_child_weight);
}

TEST_CASE("same seed gives identical hyperparameters, different seed may not") {
    const Toy t = binary_blob(90, 5);
    const Hyperparams a = tune(t.view(), t.y, 8, 3, TuneObjective::f1, 7);
    const Hyperparams b = tune(t.view(), t.y, 8, 3, TuneObjective::f1, 7);
    CHECK(a.n_trees == b.n_trees);
    CHECK(a.shrinkage == b.shrinkage);
    CHECK(a.seed == b.seed);
}

TEST_CASE("sampled configurations respect the documented grid") {
    Rng rng(9);
    for (int i = 0; i < 200; ++i) {
        const Hyperparams hp = tune_detail::sample_config(rng, 0);
        CHECK(hp.n_trees >= 50);
        CHECK(hp.n_trees <= 500);
        CHECK(hp.max_depth >= 2);
        CHECK(hp.max_depth <= 8);
        CHECK(hp.shrinkage >= 0.02);
        CHECK(hp.shrinkage <= 0.3);
        CHECK(hp.min_child_weight >= 1.0);
        CHECK(hp.min_child_weight <= 10.0);
        CHECK(hp.subsample >= 0.6);
        CHECK(hp.subsample <= 1.0);
        CHECK(hp.l2_reg >= 0.0);
        CHECK(hp.l2_reg <= 10.0);
    }
}

TEST_CASE("tuned config beats the weakest capacity on a smooth target") {
    const Toy t = smooth_regression(150, 11);
    const std::uint64_t seed = 20;
    const Hyperparams chosen = tune(t.view(), t.y, 12, 3, TuneObjective::mse, seed);

    Hyperparams weakest;
    weakest.n_trees = 50;
    weakest.max_depth = 2;
    weakest.shrinkage = 0.02;
    weakest.subsample = 1.0;
    weakest.l2_reg = 10.0;
    weakest.seed = chosen.seed;

    const double chosen_mse = cv_mse_of(t, chosen, 3, seed);
    const double weakest_mse = cv_mse_of(t, weakest, 3, seed);
    CHECK(chosen_mse <= weakest_mse + 1e-12);
}

TEST_CASE("classification tuning needs both classes") {
    Toy t = binary_blob(40, 13);
    std::fill(t.y.begin(), t.y.end(), 0.0);
    CHECK_THROWS_AS(tune(t.view(), t.y, 2, 3, TuneObjective::f1, 1), error);
}

TEST_CASE("too few samples for the fold count raises") {
    const Toy t = smooth_regression(5, 17);
    CHECK_THROWS_AS(tune(t.view(), t.y, 2, 3, TuneObjective::mse, 1), error);
}

TEST_CASE("stratified folds spread the positives") {
    std::vector<double> y(30, 0.0);
    y[4] = y[11] = y[23] = 1.0;
    const auto fold = tune_detail::fold_assignment(y, 3, TuneObjective::f1, 99);
    std::vector<int> pos_per_fold(3, 0);
    for (std::size_t i = 0; i < y.size(); ++i)
        if (y[i] == 1.0) ++pos_per_fold[static_cast<std::size_t>(fold[i])];
    for (int c : pos_per_fold) CHECK(c == 1);
}
