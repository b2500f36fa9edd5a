#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "surrocal/boosted.hpp"
#include "surrocal/common.hpp"
#include "surrocal/criteria.hpp"
#include "surrocal/logit.hpp"
#include "surrocal/metrics.hpp"
#include "surrocal/parallel.hpp"
#include "surrocal/param_space.hpp"
#include "surrocal/prng.hpp"
#include "surrocal/tune.hpp"

namespace surrocal {

// True-model evaluation: parameter vector in, calibration label out. Must be
// pure (all seeds captured), so batch evaluations can run on any job count.
using Labeler = std::function<CalibrationLabel(const double*)>;

enum class SurrogateFamily { boosted, logit };

inline SurrogateFamily parse_family(const std::string& s) {
    if (s == "boosted") return SurrogateFamily::boosted;
    if (s == "logit") return SurrogateFamily::logit;
    fail("unknown surrogate family '" + s + "' (expected boosted|logit)");
}

// What counts as a positive calibration. Binary labels are positive when 1;
// real labels compare against a threshold with a configurable direction.
struct PositiveRule {
    double threshold = 0.05;
    bool greater = true; // positive iff value > threshold; else value <= threshold

    bool label_positive(const CalibrationLabel& l) const {
        if (l.kind == OutcomeKind::binary) return l.binary_value == 1;
        return value_positive(l.real_value);
    }

    bool value_positive(double v) const { return greater ? v > threshold : v <= threshold; }

    // logistic squash of the distance to the threshold, for the entropy
    // fallback in the real-valued setting
    double pseudo_probability(double v) const {
        return sigmoid(greater ? v - threshold : threshold - v);
    }
};

struct LoopConfig {
    std::size_t budget = 500;     // B: total true-model evaluations
    std::size_t seed_size = 35;   // N
    std::size_t pool_size = 10000; // K
    std::size_t batch_size = 0;   // S; 0 derives ceil(batch_scale * ln budget)
    double batch_scale = 1.0;     // the C in C*log(budget)

    OutcomeKind kind = OutcomeKind::binary;
    PositiveRule positive;
    SampleScheme pool_scheme = SampleScheme::sobol;
    bool redraw_pool = false; // true redraws the out-of-sample pool each round

    SurrogateFamily family = SurrogateFamily::boosted;
    double logit_l2 = 0.1;
    int hpo_trials = 25;
    int hpo_trials_late = 10;
    int hpo_late_after = 5; // rounds after which the reduced trial count kicks in
    int hpo_folds = 3;
    int hpo_period = 1; // re-tune every this many rounds (1 follows the pseudo-code)

    std::uint64_t seed_sampler = 1;
    std::uint64_t seed_loop = 2;
    std::uint64_t seed_hpo = 3;
    int jobs = 1;

    std::size_t effective_batch() const {
        if (batch_size > 0) return batch_size;
        const double s = std::ceil(batch_scale * std::log(static_cast<double>(budget)));
        return static_cast<std::size_t>(std::max(1.0, s));
    }

    void validate() const {
        require(seed_size >= 2, "loop: seed set size must be >= 2");
        require(seed_size < budget || budget == seed_size, "loop: seed size must not exceed budget");
        require(budget >= seed_size, "loop: budget must be >= seed set size");
        require(pool_size > budget, "loop: pool size K must exceed the budget");
        require(batch_scale > 0.0, "loop: batch scale must be > 0");
        require(hpo_trials >= 1 && hpo_trials_late >= 1, "loop: HPO trials must be >= 1");
        require(hpo_folds >= 2, "loop: HPO folds must be >= 2");
        require(hpo_period >= 1, "loop: HPO period must be >= 1");
        require(jobs >= 1, "loop: jobs must be >= 1");
        if (family == SurrogateFamily::logit)
            require(kind == OutcomeKind::binary, "loop: the logit surrogate handles binary outcomes only");
    }
};

// Raised when the seed round exhausts its cap without one positive label;
// the procedure's precondition (at least one positive calibration) fails.
class seed_abort : public error {
public:
    explicit seed_abort(const std::string& msg) : error(msg) {}
};

enum class SelectionMode { seed, positive_sampling, entropy_fallback };

inline std::string selection_mode_name(SelectionMode m) {
    switch (m) {
        case SelectionMode::seed: return "seed";
        case SelectionMode::positive_sampling: return "positive-sampling";
        default: return "entropy-fallback";
    }
}

struct RoundLog {
    int round = 0;
    SelectionMode mode = SelectionMode::seed;
    std::size_t batch = 0;
    std::size_t labeled_after = 0;
    std::size_t positives_after = 0;
    bool tuned = false;
};

struct CalibrationRun {
    LoopConfig cfg;
    int dim = 0;
    std::vector<double> x;                  // labeled vectors, row-major
    std::vector<CalibrationLabel> labels;   // exact true-model labels
    std::vector<int> sample_round;          // per labeled point
    std::vector<SelectionMode> sample_mode; // per labeled point
    std::vector<RoundLog> rounds;
    Hyperparams final_hp;
    TreeEnsemble model;                 // boosted family
    std::optional<LogitModel> logit;    // logit family
    std::size_t evaluations = 0;

    MatrixView labeled_view() const {
        return MatrixView{x.data(), labels.size(), dim};
    }

    std::vector<double> label_values() const {
        std::vector<double> y(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i)
            y[i] = cfg.kind == OutcomeKind::binary ? static_cast<double>(labels[i].binary_value)
                                                   : labels[i].real_value;
        return y;
    }

    std::size_t positive_count() const {
        std::size_t c = 0;
        for (const auto& l : labels) c += cfg.positive.label_positive(l) ? 1 : 0;
        return c;
    }

    // surrogate score for one vector (probability or regression value)
    double score(const double* v) const {
        if (cfg.family == SurrogateFamily::logit) return logit ? logit->score(v) : 0.0;
        return model.score(v);
    }

    bool predicted_positive(double score_value) const {
        if (cfg.kind == OutcomeKind::binary) return score_value > 0.5;
        return cfg.positive.value_positive(score_value);
    }
};

namespace loop_detail {

inline std::uint64_t vector_fingerprint(const double* v, int dim) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (int k = 0; k < dim; ++k) {
        std::uint64_t bits;
        std::memcpy(&bits, v + k, sizeof(bits));
        h = splitmix64(h ^ bits);
    }
    return h;
}

struct PoolState {
    Pool pool;
    std::vector<std::uint32_t> alive; // original pool indices still unlabeled

    void reset_alive() {
        alive.resize(pool.size());
        for (std::size_t i = 0; i < alive.size(); ++i) alive[i] = static_cast<std::uint32_t>(i);
    }

    void remove(std::span<const std::uint32_t> taken) {
        std::unordered_set<std::uint32_t> gone(taken.begin(), taken.end());
        std::erase_if(alive, [&](std::uint32_t i) { return gone.count(i) > 0; });
    }
};

} // namespace loop_detail

// Seed round: n_seed quasi-random picks from the pool, evaluated on the true
// model; when no positive calibration shows up, single extra points keep
// being drawn (they count against the budget) until one is found or half the
// budget is burnt, at which point the run is unusable.
struct SeedRound {
    std::vector<std::uint32_t> indices; // pool indices, in evaluation order
    std::vector<CalibrationLabel> labels;
};

inline SeedRound seed_round(const Pool& pool, const Labeler& labeler, std::size_t n_seed,
                            std::size_t budget, OutcomeKind kind, const PositiveRule& rule,
                            std::uint64_t seed, int jobs = 1) {
    require(n_seed >= 2, "seed_round: need at least two seed points");
    require(pool.size() >= n_seed, "seed_round: pool smaller than the seed set");
    SeedRound out;
    Rng rng(mix_seed(seed, 0));

    std::vector<std::uint32_t> alive(pool.size());
    for (std::size_t i = 0; i < alive.size(); ++i) alive[i] = static_cast<std::uint32_t>(i);

    auto take_random_alive = [&]() {
        const std::size_t j = static_cast<std::size_t>(rng.below(alive.size()));
        const std::uint32_t idx = alive[j];
        alive[j] = alive.back();
        alive.pop_back();
        return idx;
    };

    std::vector<std::uint32_t> picks;
    for (std::size_t i = 0; i < n_seed; ++i) picks.push_back(take_random_alive());
    std::sort(picks.begin(), picks.end());
    out.labels.resize(picks.size());
    parallel_for(picks.size(), jobs,
                 [&](std::size_t k) { out.labels[k] = labeler(pool.row(picks[k])); });
    out.indices = picks;
    for (auto& l : out.labels) l.kind = kind;

    auto any_positive = [&] {
        for (const auto& l : out.labels)
            if (rule.label_positive(l)) return true;
        return false;
    };
    const std::size_t cap = std::max(n_seed, budget / 2);
    while (!any_positive()) {
        if (out.labels.size() >= cap || out.labels.size() >= budget || alive.empty())
            throw seed_abort("no positive seed found within " + std::to_string(out.labels.size()) +
                             " evaluations (cap " + std::to_string(cap) + ")");
        const std::uint32_t idx = take_random_alive();
        CalibrationLabel l = labeler(pool.row(idx));
        l.kind = kind;
        out.indices.push_back(idx);
        out.labels.push_back(l);
    }
    return out;
}

// Selects the next batch from pool scores: a uniform random subset of the
// predicted positives when any exist, otherwise the highest-entropy points
// (ties by pool index).
struct BatchSelection {
    std::vector<std::uint32_t> indices;
    SelectionMode mode = SelectionMode::positive_sampling;
};

inline BatchSelection select_batch(const CalibrationRun& run, std::span<const double> scores,
                                   std::span<const std::uint32_t> candidate_ids, std::size_t batch,
                                   std::uint64_t round_seed) {
    require(!candidate_ids.empty(), "select_batch: empty pool");
    require(scores.size() == candidate_ids.size(), "select_batch: score/pool size mismatch");
    BatchSelection sel;
    std::vector<std::uint32_t> positives;
    for (std::size_t k = 0; k < scores.size(); ++k)
        if (run.predicted_positive(scores[k])) positives.push_back(static_cast<std::uint32_t>(k));

    if (!positives.empty()) {
        sel.mode = SelectionMode::positive_sampling;
        Rng rng(mix_seed(round_seed, 0xBA7C4ull));
        const std::size_t take = std::min(batch, positives.size());
        for (std::size_t i = 0; i < take; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.below(positives.size() - i));
            std::swap(positives[i], positives[j]);
        }
        positives.resize(take);
        for (std::uint32_t k : positives) sel.indices.push_back(candidate_ids[k]);
        std::sort(sel.indices.begin(), sel.indices.end());
        return sel;
    }

    sel.mode = SelectionMode::entropy_fallback;
    std::vector<std::uint32_t> order(scores.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<std::uint32_t>(k);
    auto entropy_of = [&](std::uint32_t k) {
        double p = run.cfg.kind == OutcomeKind::binary ? scores[k]
                                                       : run.cfg.positive.pseudo_probability(scores[k]);
        p = std::clamp(p, 1e-15, 1.0 - 1e-15);
        return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
    };
    const std::size_t take = std::min(batch, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                          const double ea = entropy_of(a), eb = entropy_of(b);
                          if (ea != eb) return ea > eb;
                          return candidate_ids[a] < candidate_ids[b];
                      });
    order.resize(take);
    for (std::uint32_t k : order) sel.indices.push_back(candidate_ids[k]);
    std::sort(sel.indices.begin(), sel.indices.end());
    return sel;
}

// The budgeted online active semi-supervised procedure: Sobol-seeded initial
// set (guaranteeing one positive), then rounds of tune/fit, predict over the
// unlabeled pool, select, evaluate on the true model and grow the training
// set until the budget is spent. Deterministic given the three seeds.
inline CalibrationRun run_calibration(const ParameterSpace& space, const Labeler& labeler,
                                      const LoopConfig& cfg) {
    using namespace loop_detail;
    cfg.validate();
    space.validate();

    CalibrationRun run;
    run.cfg = cfg;
    run.dim = space.dimension();

    PoolState ps;
    ps.pool = draw_pool(space, cfg.pool_size, cfg.pool_scheme, cfg.seed_sampler);
    ps.reset_alive();

    std::unordered_set<std::uint64_t> labeled_fp;

    auto evaluate_batch = [&](std::span<const std::uint32_t> ids, int round, SelectionMode mode) {
        std::vector<CalibrationLabel> batch(ids.size());
        parallel_for(ids.size(), cfg.jobs,
                     [&](std::size_t k) { batch[k] = labeler(ps.pool.row(ids[k])); });
        for (std::size_t k = 0; k < ids.size(); ++k) {
            const double* v = ps.pool.row(ids[k]);
            run.x.insert(run.x.end(), v, v + run.dim);
            CalibrationLabel l = batch[k];
            l.kind = cfg.kind;
            run.labels.push_back(l);
            run.sample_round.push_back(round);
            run.sample_mode.push_back(mode);
            labeled_fp.insert(vector_fingerprint(v, run.dim));
        }
        run.evaluations += ids.size();
        ps.remove(ids);
    };

    // seed round
    {
        const SeedRound seeded = seed_round(ps.pool, labeler, cfg.seed_size, cfg.budget, cfg.kind,
                                            cfg.positive, cfg.seed_loop, cfg.jobs);
        for (std::size_t k = 0; k < seeded.indices.size(); ++k) {
            const double* v = ps.pool.row(seeded.indices[k]);
            run.x.insert(run.x.end(), v, v + run.dim);
            run.labels.push_back(seeded.labels[k]);
            run.sample_round.push_back(0);
            run.sample_mode.push_back(SelectionMode::seed);
            labeled_fp.insert(vector_fingerprint(v, run.dim));
        }
        run.evaluations += seeded.indices.size();
        ps.remove(seeded.indices);
        run.rounds.push_back({0, SelectionMode::seed, run.labels.size(), run.labels.size(),
                              run.positive_count(), false});
    }

    const std::size_t batch_target = cfg.effective_batch();
    const TuneObjective objective =
        cfg.kind == OutcomeKind::binary ? TuneObjective::f1 : TuneObjective::mse;
    const Loss loss = cfg.kind == OutcomeKind::binary ? Loss::logistic : Loss::squared;

    Hyperparams hp; // carried over between tuning rounds
    bool tuned_once = false;

    auto fit_surrogate = [&](int round) {
        const std::vector<double> y = run.label_values();
        const MatrixView xv = run.labeled_view();
        bool single_class = cfg.kind == OutcomeKind::binary;
        if (single_class)
            for (double v : y)
                if (v != y[0]) { single_class = false; break; }
        if (cfg.family == SurrogateFamily::logit) {
            if (single_class) {
                // degenerate training set: constant-probability model
                LogitModel m;
                m.weights.assign(static_cast<std::size_t>(run.dim), 0.0);
                m.intercept = logit(std::clamp(y[0], 1e-6, 1.0 - 1e-6));
                run.logit = m;
            } else {
                run.logit = fit_logit(xv, y, cfg.logit_l2);
            }
            return false;
        }
        bool tuned = false;
        const bool due = (!tuned_once || ((round - 1) % cfg.hpo_period == 0)) && !single_class;
        if (due && y.size() >= 2 * static_cast<std::size_t>(cfg.hpo_folds)) {
            const int trials = round <= cfg.hpo_late_after ? cfg.hpo_trials : cfg.hpo_trials_late;
            hp = tune(xv, y, trials, cfg.hpo_folds, objective,
                      mix_seed(cfg.seed_hpo, static_cast<std::uint64_t>(round)));
            tuned_once = true;
            tuned = true;
        }
        run.model = fit_boosted(xv, y, hp, loss);
        run.final_hp = hp;
        return tuned;
    };

    std::vector<double> scores;
    std::vector<double> gathered;
    for (int round = 1; run.labels.size() < cfg.budget; ++round) {
        const bool tuned = fit_surrogate(round);

        if (cfg.redraw_pool) {
            ps.pool = draw_pool(space, cfg.pool_size, cfg.pool_scheme,
                                mix_seed(cfg.seed_sampler, static_cast<std::uint64_t>(round)));
            ps.reset_alive();
            std::erase_if(ps.alive, [&](std::uint32_t i) {
                return labeled_fp.count(vector_fingerprint(ps.pool.row(i), run.dim)) > 0;
            });
        }
        require(!ps.alive.empty(), "loop: pool exhausted before budget was reached");

        // batched prediction over the remaining pool
        gathered.resize(ps.alive.size() * static_cast<std::size_t>(run.dim));
        for (std::size_t k = 0; k < ps.alive.size(); ++k)
            std::copy_n(ps.pool.row(ps.alive[k]), run.dim,
                        &gathered[k * static_cast<std::size_t>(run.dim)]);
        const MatrixView gv{gathered.data(), ps.alive.size(), run.dim};
        if (cfg.family == SurrogateFamily::logit) {
            scores.resize(ps.alive.size());
            for (std::size_t k = 0; k < ps.alive.size(); ++k) scores[k] = run.logit->score(gv.row(k));
        } else {
            scores = predict(run.model, gv);
        }

        const std::size_t want = std::min(batch_target, cfg.budget - run.labels.size());
        const BatchSelection sel = select_batch(run, scores, ps.alive, want,
                                                mix_seed(cfg.seed_loop, static_cast<std::uint64_t>(round)));
        evaluate_batch(sel.indices, round, sel.mode);
        run.rounds.push_back({round, sel.mode, sel.indices.size(), run.labels.size(),
                              run.positive_count(), tuned});
    }

    // final surrogate on the complete training set
    fit_surrogate(static_cast<int>(run.rounds.size()));
    return run;
}

struct ScoredPoint {
    std::size_t index = 0;
    double score = 0.0;
};

// Labels a fresh pool with the final surrogate and returns the predicted
// positives, strongest first.
inline std::vector<ScoredPoint> predict_positives(const CalibrationRun& run, const MatrixView& pool) {
    if (pool.n_rows == 0) return {};
    require(pool.n_cols == run.dim, "predict_positives: dimension mismatch");
    std::vector<ScoredPoint> out;
    for (std::size_t i = 0; i < pool.n_rows; ++i) {
        const double s = run.score(pool.row(i));
        if (run.predicted_positive(s)) out.push_back({i, s});
    }
    const bool ascending = run.cfg.kind == OutcomeKind::real && !run.cfg.positive.greater;
    std::sort(out.begin(), out.end(), [&](const ScoredPoint& a, const ScoredPoint& b) {
        if (a.score != b.score) return ascending ? a.score < b.score : a.score > b.score;
        return a.index < b.index;
    });
    return out;
}

} // namespace surrocal
