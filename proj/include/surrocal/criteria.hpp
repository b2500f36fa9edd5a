#pragma once

#include <cmath>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "surrocal/bh_model.hpp"
#include "surrocal/common.hpp"
#include "surrocal/io.hpp"
#include "surrocal/islands_model.hpp"
#include "surrocal/stats.hpp"

namespace surrocal {

enum class OutcomeKind { binary, real };

inline OutcomeKind parse_outcome(const std::string& s) {
    if (s == "binary") return OutcomeKind::binary;
    if (s == "real") return OutcomeKind::real;
    fail("unknown outcome kind '" + s + "' (expected binary|real)");
}

struct CalibrationLabel {
    OutcomeKind kind = OutcomeKind::binary;
    int binary_value = 0;
    double real_value = 0.0;

    double as_double() const {
        return kind == OutcomeKind::binary ? static_cast<double>(binary_value) : real_value;
    }
};

// Daily log-returns computed from a Date,AdjClose price export.
struct ReferenceReturns {
    std::vector<double> returns;
};

inline ReferenceReturns load_reference_returns(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    require(t.header.size() >= 2 && t.header[0] == "Date" && t.header[1] == "AdjClose",
            "reference CSV " + path.string() + ": expected header 'Date,AdjClose'");
    std::vector<double> prices;
    prices.reserve(t.rows.size());
    for (const auto& r : t.rows) {
        require(r.size() >= 2, "reference CSV: short row");
        const double p = parse_double(r[1], "AdjClose");
        require(p > 0.0 && std::isfinite(p), "reference CSV: prices must be positive");
        prices.push_back(p);
    }
    require(prices.size() >= 31, "reference CSV: need at least 31 prices");
    ReferenceReturns ref;
    ref.returns.reserve(prices.size() - 1);
    for (std::size_t i = 1; i < prices.size(); ++i)
        ref.returns.push_back(std::log(prices[i] / prices[i - 1]));
    return ref;
}

// B&H criterion: two-sample KS between simulated and reference log-returns.
// Binary: 1 iff the null is not rejected at the configured level; real: the
// p-value itself. Divergent or non-positive-price runs label negative.
struct BhCriterion {
    double alpha = 0.05;
};

inline CalibrationLabel bh_label(const PriceSeries& series, const ReferenceReturns& ref,
                                 OutcomeKind kind, const BhCriterion& cfg = {}) {
    CalibrationLabel label;
    label.kind = kind;
    if (series.divergent || series.prices.size() < 2) return label;
    for (double p : series.prices)
        if (!(p > 0.0)) return label;
    const std::vector<double> r = log_returns(series);
    const double d = ks_statistic(r, ref.returns);
    const double p = ks_pvalue(d, r.size(), ref.returns.size());
    label.binary_value = p > cfg.alpha ? 1 : 0;
    label.real_value = p;
    if (kind == OutcomeKind::binary) label.real_value = static_cast<double>(label.binary_value);
    return label;
}

// (log GDP_T - log GDP_1) / (T-1); -inf when either endpoint is non-positive
inline double avg_growth_rate(const GdpSeries& g) {
    require(g.gdp.size() >= 2, "avg_growth_rate: need at least two periods");
    const double first = g.gdp.front();
    const double last = g.gdp.back();
    if (!(first > 0.0) || !(last > 0.0)) return -std::numeric_limits<double>::infinity();
    return (std::log(last) - std::log(first)) / static_cast<double>(g.gdp.size() - 1);
}

enum class IslandsMode { growth_and_tails, growth_only };

// Islands criterion. growth_and_tails: sustained growth (AGR > agr_threshold)
// and fat-tailed growth shocks (Subbotin shape <= b_threshold fitted on
// post-burn-in delta-log GDP); the tail fit only runs once the growth
// condition holds. growth_only: the milder AGR > agr_threshold alone.
// Real outcome: the fitted shape, with a sentinel when the growth gate fails
// or the fit errors.
struct IslandsCriterion {
    IslandsMode mode = IslandsMode::growth_and_tails;
    double agr_threshold = 0.02;      // 0.005 for the growth_only robustness setting
    double b_threshold = 1.0;
    bool b_below = true;              // positive when shape <= threshold
    int burn_in = 50;
    double shape_sentinel = 5.0;
};

inline CalibrationLabel islands_label(const GdpSeries& g, OutcomeKind kind, const IslandsCriterion& cfg) {
    CalibrationLabel label;
    label.kind = kind;
    label.real_value = cfg.shape_sentinel;
    const double agr = avg_growth_rate(g);

    if (cfg.mode == IslandsMode::growth_only) {
        label.binary_value = agr > cfg.agr_threshold ? 1 : 0;
        label.real_value = std::isfinite(agr) ? agr : -1.0;
        if (kind == OutcomeKind::binary) label.real_value = static_cast<double>(label.binary_value);
        return label;
    }

    if (!(agr > cfg.agr_threshold)) {
        if (kind == OutcomeKind::binary) label.real_value = 0.0;
        return label;
    }

    // growth-rate series after burn-in
    std::vector<double> growth;
    const std::size_t start = static_cast<std::size_t>(std::max(cfg.burn_in, 0));
    if (start + 1 < g.gdp.size()) {
        growth.reserve(g.gdp.size() - start - 1);
        for (std::size_t t = start; t + 1 < g.gdp.size(); ++t) {
            if (!(g.gdp[t] > 0.0) || !(g.gdp[t + 1] > 0.0)) { growth.clear(); break; }
            growth.push_back(std::log(g.gdp[t + 1]) - std::log(g.gdp[t]));
        }
    }
    double shape = cfg.shape_sentinel;
    if (growth.size() >= 30) {
        try {
            shape = subbotin_fit(growth).shape;
        } catch (const error&) {
            shape = cfg.shape_sentinel; // degenerate fit maps to a negative label
        }
    }
    const bool tails_ok = cfg.b_below ? shape <= cfg.b_threshold : shape > cfg.b_threshold;
    label.binary_value = tails_ok ? 1 : 0;
    label.real_value = shape;
    if (kind == OutcomeKind::binary) label.real_value = static_cast<double>(label.binary_value);
    return label;
}

} // namespace surrocal
