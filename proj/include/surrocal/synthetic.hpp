#pragma once

#include <cmath>
#include <string>

#include "surrocal/criteria.hpp"
#include "surrocal/param_space.hpp"

namespace surrocal {

// Built-in test model: the "simulation" is the point itself, scored by its
// euclidean distance to a center. Positive calibrations live inside a ball
// whose radius tunes the positive density, which makes loop behaviour easy
// to reason about in tests and demos.
struct SyntheticModel {
    int dim = 5;
    double center = 0.35;
    double radius = 0.2856; // ~1% of the unit 5-cube

    double distance(const double* v) const {
        double s = 0.0;
        for (int k = 0; k < dim; ++k) {
            const double d = v[k] - center;
            s += d * d;
        }
        return std::sqrt(s);
    }

    CalibrationLabel label(const double* v, OutcomeKind kind) const {
        CalibrationLabel l;
        l.kind = kind;
        const double r = distance(v);
        l.real_value = r;
        l.binary_value = r <= radius ? 1 : 0;
        if (kind == OutcomeKind::binary) l.real_value = static_cast<double>(l.binary_value);
        return l;
    }
};

inline ParameterSpace synthetic_space(int dim) {
    ParameterSpace s;
    for (int k = 0; k < dim; ++k)
        s.dims.push_back({"x" + std::to_string(k), 0.0, 1.0});
    return s;
}

} // namespace surrocal
