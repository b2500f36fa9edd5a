#pragma once

#include <cstddef>
#include <span>

#include "surrocal/common.hpp"

namespace surrocal {

struct Confusion {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;

    std::size_t total() const { return tp + fp + fn + tn; }
};

// Scores raise on undefined denominators instead of returning 0; a silent
// zero would corrupt sweep tables, and the harness treats errors as missing
// cells.
inline double f1_score(const Confusion& c) {
    const double denom = 2.0 * static_cast<double>(c.tp) + static_cast<double>(c.fp) + static_cast<double>(c.fn);
    require(denom > 0.0, "f1_score undefined: tp+fp+fn == 0");
    return 2.0 * static_cast<double>(c.tp) / denom;
}

inline double precision(const Confusion& c) {
    require(c.tp + c.fp > 0, "precision undefined: no predicted positives");
    return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
}

inline double recall_tpr(const Confusion& c) {
    require(c.tp + c.fn > 0, "TPR undefined: no actual positives");
    return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

inline double mse(std::span<const double> pred, std::span<const double> truth) {
    require(pred.size() == truth.size(), "mse: length mismatch");
    require(!pred.empty(), "mse: empty input");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        s += d * d;
    }
    return s / static_cast<double>(pred.size());
}

inline Confusion confusion_from_labels(std::span<const int> pred, std::span<const int> truth) {
    require(pred.size() == truth.size(), "confusion: length mismatch");
    Confusion c;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        require((pred[i] == 0 || pred[i] == 1) && (truth[i] == 0 || truth[i] == 1),
                "confusion: labels must be 0/1");
        if (truth[i] == 1) {
            if (pred[i] == 1) ++c.tp; else ++c.fn;
        } else {
            if (pred[i] == 1) ++c.fp; else ++c.tn;
        }
    }
    return c;
}

} // namespace surrocal
