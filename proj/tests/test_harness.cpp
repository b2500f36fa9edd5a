#include <doctest.h>

#include <filesystem>

#include "surrocal/harness.hpp"
#include "surrocal/synthetic.hpp"

using namespace surrocal;

namespace {

struct Fixture {
    SyntheticModel model{4, 0.4, 0.45}; // ~20% positive, seeds reliably
    ParameterSpace space = synthetic_space(4);

    Labeler labeler(OutcomeKind kind) const {
        const SyntheticModel m = model;
        return [m, kind](const double* v) { return m.label(v, kind); };
    }

    LoopConfig base(OutcomeKind kind) const {
        LoopConfig cfg;
        cfg.kind = kind;
        cfg.budget = 60;
        cfg.seed_size = 15;
        cfg.pool_size = 3000;
        cfg.hpo_trials = 2;
        cfg.hpo_trials_late = 1;
        cfg.hpo_period = 4;
        cfg.jobs = 2;
        if (kind == OutcomeKind::real) cfg.positive = {0.33, false};
        return cfg;
    }
};

} // namespace

TEST_CASE("sweep accounting: cells per metric per budget and repetition") {
    Fixture f;
    SweepPlan plan;
    plan.budgets = {40, 60};
    plan.repetitions = 2;
    plan.oos_size = 400;
    plan.seed_base = 5;
    const SweepResult res = run_sweep(f.space, f.labeler(OutcomeKind::binary), f.base(OutcomeKind::binary), plan);

    int f1_cells = 0;
    for (const auto& c : res.cells)
        if (c.metric == "f1") ++f1_cells;
    CHECK(f1_cells == 4); // 2 budgets x 2 repetitions

    bool found_summary = false;
    for (const auto& s : res.summary)
        if (s.metric == "f1" && s.budget == 60) {
            found_summary = true;
            CHECK(s.count == 2);
            CHECK(s.ci95_low <= s.mean);
            CHECK(s.mean <= s.ci95_high);
        }
    CHECK(found_summary);
    CHECK(res.timing.size() == 4);
}

TEST_CASE("sweep cells are reproducible; timing may differ") {
    Fixture f;
    SweepPlan plan;
    plan.budgets = {40};
    plan.repetitions = 2;
    plan.oos_size = 300;
    plan.seed_base = 9;
    const SweepResult a = run_sweep(f.space, f.labeler(OutcomeKind::real), f.base(OutcomeKind::real), plan);
    const SweepResult b = run_sweep(f.space, f.labeler(OutcomeKind::real), f.base(OutcomeKind::real), plan);
    REQUIRE(a.cells.size() == b.cells.size());
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
        CHECK(a.cells[i].metric == b.cells[i].metric);
        CHECK(a.cells[i].value == b.cells[i].value);
    }
}

TEST_CASE("oos label cache is written once and reused bit-identically") {
    Fixture f;
    SweepPlan plan;
    plan.budgets = {40};
    plan.repetitions = 1;
    plan.oos_size = 250;
    const auto cache = std::filesystem::temp_directory_path() / "surrocal_oos_cache_test.csv";
    std::filesystem::remove(cache);

    const SweepResult first =
        run_sweep(f.space, f.labeler(OutcomeKind::binary), f.base(OutcomeKind::binary), plan, cache);
    CHECK(first.oos_label_seconds >= 0.0);
    REQUIRE(std::filesystem::exists(cache));
    const std::string bytes = read_file(cache);

    const SweepResult second =
        run_sweep(f.space, f.labeler(OutcomeKind::binary), f.base(OutcomeKind::binary), plan, cache);
    CHECK(second.oos_label_seconds < 0.0); // loaded, not recomputed
    CHECK(second.oos_truth == first.oos_truth);
    CHECK(read_file(cache) == bytes);
    std::filesystem::remove(cache);
}

TEST_CASE("robustness rows cover all three surrogates with sane precision") {
    Fixture f;
    RobustnessPlan plan;
    plan.runs = 2;
    plan.seed_base = 31;
    const auto rows = run_robustness(f.space, f.labeler(OutcomeKind::binary), f.base(OutcomeKind::binary), plan);

    int logit_rows = 0, boosted_rows = 0, platt_rows = 0;
    for (const auto& r : rows) {
        REQUIRE_FALSE(r.aborted);
        CHECK(r.confusion.total() == 60); // evaluated set == budget
        if (r.surrogate == "logit") {
            // a ball-shaped positive set is not linearly separable, so the
            // logit may genuinely predict no positives here
            ++logit_rows;
            continue;
        }
        CHECK(r.precision_defined);
        CHECK(r.precision_value >= 0.0);
        CHECK(r.precision_value <= 1.0);
        if (r.surrogate == "boosted") ++boosted_rows;
        if (r.surrogate == "boosted_platt") ++platt_rows;
    }
    CHECK(logit_rows == 2);
    CHECK(boosted_rows == 2);
    CHECK(platt_rows == 2);
}

TEST_CASE("timing ratio is finite and positive on a pool of one") {
    Fixture f;
    const Pool pool = draw_pool(f.space, 1, SampleScheme::sobol, 1);
    const Labeler labeler = f.labeler(OutcomeKind::binary);
    const TimingReport rep = timing_ratio(pool, labeler, [&](const Pool& p) {
        volatile double sink = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) sink = sink + p.row(i)[0];
    });
    CHECK(rep.pool_points == 1);
    CHECK(rep.ratio > 0.0);
    CHECK(std::isfinite(rep.true_seconds));
}

TEST_CASE("a labeler with no positives anywhere surfaces as seed aborts, not a crash") {
    Fixture f;
    const Labeler never = [](const double*) { return CalibrationLabel{OutcomeKind::binary, 0, 0.0}; };
    SweepPlan plan;
    plan.budgets = {40};
    plan.repetitions = 2;
    plan.oos_size = 100;
    const SweepResult res = run_sweep(f.space, never, f.base(OutcomeKind::binary), plan);
    for (const auto& c : res.cells) CHECK(c.metric != "f1"); // all repetitions aborted
}
