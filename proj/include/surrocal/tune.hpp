#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "surrocal/boosted.hpp"
#include "surrocal/common.hpp"
#include "surrocal/metrics.hpp"
#include "surrocal/prng.hpp"

namespace surrocal {

enum class TuneObjective { f1, mse };

namespace tune_detail {

// deterministic fold assignment; stratified dealing keeps both classes
// spread across folds for the classification objective
inline std::vector<int> fold_assignment(std::span<const double> y, int folds, TuneObjective objective,
                                        std::uint64_t seed) {
    const std::size_t n = y.size();
    std::vector<int> fold(n, 0);
    Rng rng(mix_seed(seed, 0xF01D5ull));
    auto deal = [&](std::vector<std::uint32_t>& idx) {
        // Fisher-Yates, then round-robin
        for (std::size_t i = idx.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.below(i));
            std::swap(idx[i - 1], idx[j]);
        }
        for (std::size_t k = 0; k < idx.size(); ++k)
            fold[idx[k]] = static_cast<int>(k % static_cast<std::size_t>(folds));
    };
    if (objective == TuneObjective::f1) {
        std::vector<std::uint32_t> pos, neg;
        for (std::size_t i = 0; i < n; ++i)
            (y[i] == 1.0 ? pos : neg).push_back(static_cast<std::uint32_t>(i));
        require(!pos.empty() && !neg.empty(),
                "tune: classification objective needs both classes in the training set");
        deal(pos);
        deal(neg);
    } else {
        std::vector<std::uint32_t> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<std::uint32_t>(i);
        deal(all);
    }
    return fold;
}

inline Hyperparams sample_config(Rng& rng, std::uint64_t fit_seed) {
    Hyperparams hp;
    hp.n_trees = 50 + static_cast<int>(rng.below(451));               // [50, 500]
    hp.max_depth = 2 + static_cast<int>(rng.below(7));                // [2, 8]
    hp.shrinkage = std::exp(rng.uniform(std::log(0.02), std::log(0.3)));
    hp.min_child_weight = rng.uniform(1.0, 10.0);
    hp.subsample = rng.uniform(0.6, 1.0);
    hp.l2_reg = rng.uniform(0.0, 10.0);
    hp.seed = fit_seed;
    return hp;
}

} // namespace tune_detail

// Random-search hyperparameter optimization with k-fold cross-validation.
// The objective pools out-of-fold predictions (micro scores), so folds that
// end up without positives never make the score undefined. Ties resolve to
// fewer trees, then lower depth, then earlier trial. Deterministic in seed.
inline Hyperparams tune(const MatrixView& x, std::span<const double> y, int trials, int folds,
                        TuneObjective objective, std::uint64_t seed) {
    require(trials >= 1, "tune: trials must be >= 1");
    require(folds >= 2, "tune: folds must be >= 2");
    require(x.n_rows == y.size(), "tune: X/y size mismatch");
    require(x.n_rows >= 2 * static_cast<std::size_t>(folds), "tune: need at least 2*folds samples");

    const std::size_t n = x.n_rows;
    const int d = x.n_cols;
    const Loss loss = objective == TuneObjective::f1 ? Loss::logistic : Loss::squared;
    const std::vector<int> fold = tune_detail::fold_assignment(y, folds, objective, seed);

    Rng sampler(mix_seed(seed, 0x7141Eull));
    Hyperparams best;
    double best_score = 0.0;
    bool have_best = false;

    std::vector<double> train_x, train_y, oof(n);
    train_x.reserve(n * static_cast<std::size_t>(d));
    train_y.reserve(n);

    for (int trial = 0; trial < trials; ++trial) {
        const Hyperparams hp = tune_detail::sample_config(sampler, mix_seed(seed, static_cast<std::uint64_t>(trial), 0x5EEDull));
        for (int k = 0; k < folds; ++k) {
            train_x.clear();
            train_y.clear();
            for (std::size_t i = 0; i < n; ++i) {
                if (fold[i] == k) continue;
                const double* r = x.row(i);
                train_x.insert(train_x.end(), r, r + d);
                train_y.push_back(y[i]);
            }
            MatrixView tv{train_x.data(), train_y.size(), d};
            const TreeEnsemble model = fit_boosted(tv, train_y, hp, loss);
            for (std::size_t i = 0; i < n; ++i)
                if (fold[i] == k) oof[i] = model.score(x.row(i));
        }

        double score; // larger is better internally
        if (objective == TuneObjective::f1) {
            Confusion c;
            for (std::size_t i = 0; i < n; ++i) {
                const int pred = oof[i] > 0.5 ? 1 : 0;
                if (y[i] == 1.0) (pred ? ++c.tp : ++c.fn);
                else (pred ? ++c.fp : ++c.tn);
            }
            score = (c.tp + c.fp + c.fn) > 0 ? f1_score(c) : 0.0;
        } else {
            score = -mse(oof, y);
        }

        const bool better =
            !have_best || score > best_score ||
            (score == best_score &&
             (hp.n_trees < best.n_trees ||
              (hp.n_trees == best.n_trees && hp.max_depth < best.max_depth)));
        if (better) {
            best = hp;
            best_score = score;
            have_best = true;
        }
    }
    if (objective == TuneObjective::f1 && best_score == 0.0) {
        // No trial achieved a single cross-validated true positive, so the
        // objective carries no ranking information; a capacity default keeps
        // the surrogate able to flag its training positives, which is what
        // the self-training selection feeds on.
        Hyperparams fallback;
        fallback.n_trees = 200;
        fallback.max_depth = 6;
        fallback.shrinkage = 0.2;
        fallback.min_child_weight = 1.0;
        fallback.subsample = 1.0;
        fallback.l2_reg = 1.0;
        fallback.seed = mix_seed(seed, 0xFA11Bull);
        return fallback;
    }
    return best;
}

} // namespace surrocal
