#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "surrocal/active_loop.hpp"
#include "surrocal/common.hpp"
#include "surrocal/io.hpp"
#include "surrocal/metrics.hpp"
#include "surrocal/parallel.hpp"

namespace surrocal {

inline double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

struct MetricCell {
    std::size_t budget = 0;
    int repetition = 0;
    std::string metric;
    double value = 0.0;
};

struct SummaryRow {
    std::size_t budget = 0;
    std::string metric;
    double mean = 0.0;
    double median = 0.0;
    double ci95_low = 0.0;
    double ci95_high = 0.0;
    int count = 0;
};

struct TimingCell {
    std::size_t budget = 0;
    int repetition = 0;
    double train_seconds = 0.0;
    double predict_seconds = 0.0;
};

struct SweepResult {
    std::vector<MetricCell> cells;
    std::vector<SummaryRow> summary;
    std::vector<TimingCell> timing;
    double oos_label_seconds = -1.0; // <0 when loaded from cache
    std::vector<double> oos_truth;   // per OOS point, in pool order
};

struct SweepPlan {
    std::vector<std::size_t> budgets;
    int repetitions = 10;
    std::size_t oos_size = 2000;
    SampleScheme oos_scheme = SampleScheme::sobol;
    std::uint64_t oos_seed = 0x005EEDull;
    std::uint64_t seed_base = 1;

    void validate() const {
        require(!budgets.empty(), "sweep: budgets must be non-empty");
        for (std::size_t i = 1; i < budgets.size(); ++i)
            require(budgets[i] > budgets[i - 1], "sweep: budgets must be ascending");
        require(repetitions >= 1, "sweep: repetitions must be >= 1");
        require(oos_size >= 2, "sweep: OOS pool too small");
    }
};

namespace harness_detail {

inline double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// mean with normal-approximation 95% interval across repetitions
inline SummaryRow summarize(std::size_t budget, const std::string& metric, const std::vector<double>& vals) {
    SummaryRow row;
    row.budget = budget;
    row.metric = metric;
    row.count = static_cast<int>(vals.size());
    double m = 0.0;
    for (double v : vals) m += v;
    m /= static_cast<double>(vals.size());
    double s2 = 0.0;
    for (double v : vals) s2 += (v - m) * (v - m);
    const double se = vals.size() > 1
                          ? std::sqrt(s2 / static_cast<double>(vals.size() - 1) / static_cast<double>(vals.size()))
                          : 0.0;
    row.mean = m;
    row.median = median_of(vals);
    row.ci95_low = m - 1.96 * se;
    row.ci95_high = m + 1.96 * se;
    return row;
}

} // namespace harness_detail

// True labels over a fixed pool, evaluated in parallel with index-ordered
// merge; optionally persisted so re-runs reuse the cache bit-identically.
inline std::vector<double> label_pool(const Pool& pool, const Labeler& labeler, OutcomeKind kind,
                                      int jobs) {
    std::vector<double> truth(pool.size());
    parallel_for(pool.size(), jobs, [&](std::size_t i) {
        const CalibrationLabel l = labeler(pool.row(i));
        truth[i] = kind == OutcomeKind::binary ? static_cast<double>(l.binary_value) : l.real_value;
    });
    return truth;
}

inline std::vector<double> cached_pool_labels(const Pool& pool, const Labeler& labeler, OutcomeKind kind,
                                              int jobs, const std::optional<std::filesystem::path>& cache,
                                              double* label_seconds) {
    if (cache && std::filesystem::exists(*cache)) {
        const CsvTable t = read_csv(*cache);
        require(t.header == std::vector<std::string>{"index", "truth"}, "OOS cache: unexpected header");
        require(t.rows.size() == pool.size(), "OOS cache: size mismatch (delete the cache to rebuild)");
        std::vector<double> truth(pool.size());
        for (const auto& r : t.rows) {
            const auto i = static_cast<std::size_t>(parse_int(r[0], "cache index"));
            require(i < truth.size(), "OOS cache: index out of range");
            truth[i] = parse_double(r[1], "cache truth");
        }
        if (label_seconds) *label_seconds = -1.0;
        return truth;
    }
    const double t0 = now_seconds();
    std::vector<double> truth = label_pool(pool, labeler, kind, jobs);
    if (label_seconds) *label_seconds = now_seconds() - t0;
    if (cache) {
        CsvWriter w(*cache);
        w.row({"index", "truth"});
        for (std::size_t i = 0; i < truth.size(); ++i)
            w.row({fmt_int(static_cast<long long>(i)), fmt_double(truth[i])});
    }
    return truth;
}

// Budget sweep with repetitions: per (budget, repetition) run the active
// loop, score the final surrogate on the cached out-of-sample pool (F1/TPR
// for binary outcomes, MSE/TPR for real ones) and record wall-clock for
// training and prediction. Failures of individual scores (undefined
// denominators) leave missing cells rather than fake zeros.
inline SweepResult run_sweep(const ParameterSpace& space, const Labeler& labeler, const LoopConfig& base,
                             const SweepPlan& plan,
                             const std::optional<std::filesystem::path>& oos_cache = std::nullopt) {
    plan.validate();
    SweepResult result;

    const Pool oos = draw_pool(space, plan.oos_size, plan.oos_scheme, plan.oos_seed);
    result.oos_truth = cached_pool_labels(oos, labeler, base.kind, base.jobs, oos_cache,
                                          &result.oos_label_seconds);
    const MatrixView oos_view{oos.data.data(), oos.size(), oos.dim};

    struct RepOutcome {
        std::vector<MetricCell> cells;
        TimingCell timing;
    };

    std::vector<std::pair<std::size_t, int>> tasks;
    for (std::size_t b : plan.budgets)
        for (int r = 0; r < plan.repetitions; ++r) tasks.emplace_back(b, r);
    std::vector<RepOutcome> outcomes(tasks.size());

    parallel_for(tasks.size(), base.jobs, [&](std::size_t ti) {
        const auto [budget, rep] = tasks[ti];
        LoopConfig cfg = base;
        cfg.budget = budget;
        cfg.jobs = 1; // repetitions parallelize across workers
        const std::uint64_t rs = mix_seed(plan.seed_base, budget, static_cast<std::uint64_t>(rep));
        cfg.seed_sampler = mix_seed(rs, 1);
        cfg.seed_loop = mix_seed(rs, 2);
        cfg.seed_hpo = mix_seed(rs, 3);

        RepOutcome& out = outcomes[ti];
        out.timing.budget = budget;
        out.timing.repetition = rep;
        auto push = [&](const char* name, double value) {
            out.cells.push_back({budget, rep, name, value});
        };
        try {
            const double t0 = now_seconds();
            const CalibrationRun run = run_calibration(space, labeler, cfg);
            const double t1 = now_seconds();
            std::vector<double> pred(oos.size());
            if (cfg.family == SurrogateFamily::logit) {
                for (std::size_t i = 0; i < oos.size(); ++i) pred[i] = run.logit->score(oos_view.row(i));
            } else {
                pred = predict(run.model, oos_view);
            }
            const double t2 = now_seconds();
            out.timing.train_seconds = t1 - t0;
            out.timing.predict_seconds = t2 - t1;

            Confusion c;
            for (std::size_t i = 0; i < oos.size(); ++i) {
                const bool truth_pos = base.kind == OutcomeKind::binary
                                           ? result.oos_truth[i] == 1.0
                                           : cfg.positive.value_positive(result.oos_truth[i]);
                const bool pred_pos = run.predicted_positive(pred[i]);
                if (truth_pos) (pred_pos ? ++c.tp : ++c.fn);
                else (pred_pos ? ++c.fp : ++c.tn);
            }
            if (base.kind == OutcomeKind::binary) {
                try { push("f1", f1_score(c)); } catch (const error&) {}
            } else {
                push("mse", mse(pred, result.oos_truth));
            }
            try { push("tpr", recall_tpr(c)); } catch (const error&) {}
            try { push("precision", precision(c)); } catch (const error&) {}
            push("evaluations", static_cast<double>(run.evaluations));
        } catch (const seed_abort&) {
            // unusable repetition: no positive seed; leave the cells missing
        }
    });

    for (auto& o : outcomes) {
        result.cells.insert(result.cells.end(), o.cells.begin(), o.cells.end());
        result.timing.push_back(o.timing);
    }
    for (std::size_t b : plan.budgets) {
        std::vector<std::string> metrics;
        for (const auto& c : result.cells)
            if (c.budget == b && std::find(metrics.begin(), metrics.end(), c.metric) == metrics.end())
                metrics.push_back(c.metric);
        for (const auto& m : metrics) {
            std::vector<double> vals;
            for (const auto& c : result.cells)
                if (c.budget == b && c.metric == m) vals.push_back(c.value);
            if (!vals.empty()) result.summary.push_back(harness_detail::summarize(b, m, vals));
        }
    }
    return result;
}

struct RobustnessRow {
    std::string surrogate; // logit | boosted | boosted_platt
    int run = 0;
    Confusion confusion;
    double precision_value = 0.0;
    bool precision_defined = false;
    bool aborted = false;
};

struct RobustnessPlan {
    int runs = 5;
    std::uint64_t seed_base = 71;
    bool with_platt = true;
};

// Robustness exercise: same loop, alternative surrogates. The confusion is
// taken over the evaluated (budget-sized) set, which is exactly what a user
// can observe in the field; Platt rescaling of the boosted probabilities is
// fitted on those same evaluated points.
inline std::vector<RobustnessRow> run_robustness(const ParameterSpace& space, const Labeler& labeler,
                                                 const LoopConfig& base, const RobustnessPlan& plan) {
    require(plan.runs >= 1, "robustness: runs must be >= 1");
    std::vector<RobustnessRow> rows;
    std::vector<std::vector<RobustnessRow>> per_run(static_cast<std::size_t>(plan.runs));

    parallel_for(static_cast<std::size_t>(plan.runs), base.jobs, [&](std::size_t r) {
        for (const SurrogateFamily family : {SurrogateFamily::boosted, SurrogateFamily::logit}) {
            LoopConfig cfg = base;
            cfg.family = family;
            cfg.jobs = 1;
            const std::uint64_t rs = mix_seed(plan.seed_base, r, family == SurrogateFamily::logit ? 1 : 0);
            cfg.seed_sampler = mix_seed(rs, 1);
            cfg.seed_loop = mix_seed(rs, 2);
            cfg.seed_hpo = mix_seed(rs, 3);

            auto abort_row = [&](const std::string& name) {
                RobustnessRow row;
                row.surrogate = name;
                row.run = static_cast<int>(r);
                row.aborted = true;
                per_run[r].push_back(row);
            };

            try {
                const CalibrationRun run = run_calibration(space, labeler, cfg);
                const MatrixView xv = run.labeled_view();
                std::vector<int> truth(run.labels.size());
                for (std::size_t i = 0; i < run.labels.size(); ++i)
                    truth[i] = run.labels[i].binary_value;

                auto score_row = [&](const std::string& name, const std::vector<double>& prob) {
                    std::vector<int> pred(prob.size());
                    for (std::size_t i = 0; i < prob.size(); ++i) pred[i] = prob[i] > 0.5 ? 1 : 0;
                    RobustnessRow row;
                    row.surrogate = name;
                    row.run = static_cast<int>(r);
                    row.confusion = confusion_from_labels(pred, truth);
                    if (row.confusion.tp + row.confusion.fp > 0) {
                        row.precision_value = precision(row.confusion);
                        row.precision_defined = true;
                    }
                    per_run[r].push_back(row);
                };

                if (family == SurrogateFamily::logit) {
                    std::vector<double> prob(run.labels.size());
                    for (std::size_t i = 0; i < prob.size(); ++i) prob[i] = run.logit->score(xv.row(i));
                    score_row("logit", prob);
                } else {
                    const std::vector<double> raw = predict(run.model, xv);
                    score_row("boosted", raw);
                    if (plan.with_platt) {
                        std::vector<double> y01(truth.begin(), truth.end());
                        const PlattCalibrator platt = platt_calibrate(raw, y01);
                        std::vector<double> scaled(raw.size());
                        for (std::size_t i = 0; i < raw.size(); ++i) scaled[i] = platt(raw[i]);
                        score_row("boosted_platt", scaled);
                    }
                }
            } catch (const seed_abort&) {
                // structured report instead of a crash
                abort_row(family == SurrogateFamily::logit ? "logit" : "boosted");
                if (family == SurrogateFamily::boosted && plan.with_platt) abort_row("boosted_platt");
            }
        }
    });
    for (auto& pr : per_run) rows.insert(rows.end(), pr.begin(), pr.end());
    return rows;
}

struct TimingReport {
    double true_seconds = 0.0;
    double predict_seconds = 0.0;
    double ratio = 0.0;
    std::size_t pool_points = 0;
};

// Wall-clock ratio of true-model evaluation to surrogate prediction over the
// same pool, both single-threaded. Prediction is repeated and the median
// taken because it finishes in microseconds per point.
template <typename Predictor>
TimingReport timing_ratio(const Pool& pool, const Labeler& labeler, Predictor&& predict_pool,
                          int predict_repeats = 5) {
    require(pool.size() >= 1, "timing_ratio: pool must be non-empty");
    TimingReport rep;
    rep.pool_points = pool.size();

    const double t0 = now_seconds();
    for (std::size_t i = 0; i < pool.size(); ++i) {
        volatile double sink = labeler(pool.row(i)).as_double();
        (void)sink;
    }
    rep.true_seconds = now_seconds() - t0;

    std::vector<double> times;
    for (int r = 0; r < predict_repeats; ++r) {
        const double p0 = now_seconds();
        predict_pool(pool);
        times.push_back(now_seconds() - p0);
    }
    rep.predict_seconds = harness_detail::median_of(times);
    rep.ratio = rep.predict_seconds > 0.0 ? rep.true_seconds / rep.predict_seconds
                                          : std::numeric_limits<double>::infinity();
    return rep;
}

} // namespace surrocal
