#include <doctest.h>

#include <random>
#include <vector>

#include "surrocal/metrics.hpp"

using namespace surrocal;

TEST_CASE("f1 on the reported confusion tables") {
    CHECK(f1_score({355, 22, 61, 62}) == doctest::Approx(710.0 / 793.0).epsilon(1e-12));
    CHECK(f1_score({10, 0, 0, 5}) == 1.0);
    CHECK(f1_score({0, 3, 4, 2}) == 0.0);
    CHECK_THROWS_AS(f1_score({0, 0, 0, 9}), error);
}

TEST_CASE("precision and recall on the robustness table rows") {
    CHECK(precision({355, 22, 61, 62}) == doctest::Approx(0.9417).epsilon(1e-3));
    CHECK(precision({305, 2, 0, 193}) == doctest::Approx(0.9935).epsilon(1e-3));
    CHECK(recall_tpr({305, 17, 0, 178}) == 1.0);
    CHECK_THROWS_AS(precision({0, 0, 5, 5}), error);
    CHECK_THROWS_AS(recall_tpr({0, 5, 0, 5}), error);
}

TEST_CASE("f1 ignores true negatives") {
    Confusion c{31, 7, 11, 100};
    const double f = f1_score(c);
    c.tn = 100000;
    CHECK(f1_score(c) == f);
}

TEST_CASE("f1 is the harmonic mean of precision and recall on random confusions") {
    std::mt19937 gen(8);
    for (int rep = 0; rep < 200; ++rep) {
        Confusion c{1 + gen() % 50, gen() % 50, gen() % 50, gen() % 50};
        const double p = precision(c);
        const double r = recall_tpr(c);
        const double f = f1_score(c);
        CHECK(f == doctest::Approx(2.0 * p * r / (p + r)).epsilon(1e-12));
        CHECK(f <= std::max(p, r) + 1e-12);
    }
}

TEST_CASE("mse basics and brute-force agreement") {
    std::vector<double> a{1.0, 2.0, 3.0};
    CHECK(mse(a, a) == 0.0);
    std::vector<double> b{2.0, 3.0, 4.0};
    CHECK(mse(a, b) == 1.0);
    CHECK(mse(a, b) == mse(b, a));
    CHECK_THROWS_AS(mse(a, std::vector<double>{1.0}), error);

    std::mt19937 gen(77);
    std::vector<double> p(500), t(500);
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = static_cast<double>(gen()) / 1e9;
        t[i] = static_cast<double>(gen()) / 1e9;
    }
    double naive = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) naive += (p[i] - t[i]) * (p[i] - t[i]);
    naive /= static_cast<double>(p.size());
    CHECK(mse(p, t) == doctest::Approx(naive).epsilon(1e-12));
}

TEST_CASE("confusion_from_labels counts exactly") {
    std::vector<int> ones(10, 1);
    const Confusion all = confusion_from_labels(ones, ones);
    CHECK(all.tp == 10);
    CHECK(all.fp + all.fn + all.tn == 0);

    std::vector<int> truth{1, 0, 1, 0};
    std::vector<int> flipped{0, 1, 0, 1};
    const Confusion c = confusion_from_labels(flipped, truth);
    CHECK(c.tp == 0);
    CHECK(c.tn == 0);
    CHECK(c.fp == 2);
    CHECK(c.fn == 2);

    std::vector<int> bad{2, 0, 1, 0};
    CHECK_THROWS_AS(confusion_from_labels(bad, truth), error);
}
