#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "surrocal/boosted.hpp"
#include "surrocal/common.hpp"

namespace surrocal {

// L2-regularized logistic regression fit by Newton-Raphson on internally
// standardized features. Weights are reported in original feature units.
struct LogitModel {
    std::vector<double> weights;
    double intercept = 0.0;

    double score(const double* x) const {
        double z = intercept;
        for (std::size_t j = 0; j < weights.size(); ++j) z += weights[j] * x[j];
        return sigmoid(z);
    }
};

inline LogitModel fit_logit(const MatrixView& x, std::span<const double> y, double l2,
                            int max_iter = 100, double tol = 1e-8) {
    require(l2 >= 0.0, "fit_logit: penalty must be >= 0");
    require(x.n_rows == y.size(), "fit_logit: X/y size mismatch");
    require(x.n_rows >= 2, "fit_logit: need at least two samples");
    const std::size_t n = x.n_rows;
    const int d = x.n_cols;

    bool has_pos = false, has_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
        require(y[i] == 0.0 || y[i] == 1.0, "fit_logit: labels must be 0/1");
        (y[i] == 1.0 ? has_pos : has_neg) = true;
    }
    require(has_pos && has_neg, "fit_logit: both classes must be present");

    // standardize columns; constant columns stay zero after centering
    std::vector<double> mean(static_cast<std::size_t>(d), 0.0), sd(static_cast<std::size_t>(d), 0.0);
    for (int j = 0; j < d; ++j) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m += x.at(i, j);
        m /= static_cast<double>(n);
        double v = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = x.at(i, j) - m;
            v += c * c;
        }
        v /= static_cast<double>(n);
        mean[static_cast<std::size_t>(j)] = m;
        sd[static_cast<std::size_t>(j)] = v > 0.0 ? std::sqrt(v) : 1.0;
    }
    std::vector<double> z(n * static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j)
            z[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)] =
                (x.at(i, j) - mean[static_cast<std::size_t>(j)]) / sd[static_cast<std::size_t>(j)];

    const int dim = d + 1; // intercept last, unpenalized
    std::vector<double> w(static_cast<std::size_t>(dim), 0.0);
    std::vector<double> g(static_cast<std::size_t>(dim));
    std::vector<double> hess(static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim));
    std::vector<double> p(n);

    auto feature = [&](std::size_t i, int j) {
        return j == d ? 1.0 : z[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)];
    };

    bool converged = false;
    for (int iter = 0; iter < max_iter && !converged; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            double zi = w[static_cast<std::size_t>(d)];
            for (int j = 0; j < d; ++j) zi += w[static_cast<std::size_t>(j)] * feature(i, j);
            p[i] = sigmoid(zi);
        }
        std::fill(g.begin(), g.end(), 0.0);
        std::fill(hess.begin(), hess.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double r = p[i] - y[i];
            const double hi = std::max(p[i] * (1.0 - p[i]), 1e-12);
            for (int a = 0; a < dim; ++a) {
                const double fa = feature(i, a);
                g[static_cast<std::size_t>(a)] += r * fa;
                for (int b = a; b < dim; ++b)
                    hess[static_cast<std::size_t>(a) * static_cast<std::size_t>(dim) + static_cast<std::size_t>(b)] +=
                        hi * fa * feature(i, b);
            }
        }
        for (int a = 0; a < d; ++a) {
            g[static_cast<std::size_t>(a)] += l2 * w[static_cast<std::size_t>(a)];
            hess[static_cast<std::size_t>(a) * static_cast<std::size_t>(dim) + static_cast<std::size_t>(a)] += l2;
        }
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b < a; ++b)
                hess[static_cast<std::size_t>(a) * static_cast<std::size_t>(dim) + static_cast<std::size_t>(b)] =
                    hess[static_cast<std::size_t>(b) * static_cast<std::size_t>(dim) + static_cast<std::size_t>(a)];

        // solve H step = g by Cholesky with a small jitter
        std::vector<double> chol = hess;
        for (int a = 0; a < dim; ++a)
            chol[static_cast<std::size_t>(a) * static_cast<std::size_t>(dim) + static_cast<std::size_t>(a)] += 1e-10;
        std::vector<double> step = g;
        for (int c = 0; c < dim; ++c) {
            double diag = chol[static_cast<std::size_t>(c) * static_cast<std::size_t>(dim) + static_cast<std::size_t>(c)];
            for (int k = 0; k < c; ++k) {
                const double l = chol[static_cast<std::size_t>(c) * static_cast<std::size_t>(dim) + static_cast<std::size_t>(k)];
                diag -= l * l;
            }
            require(diag > 0.0, "fit_logit: Hessian not positive definite");
            diag = std::sqrt(diag);
            chol[static_cast<std::size_t>(c) * static_cast<std::size_t>(dim) + static_cast<std::size_t>(c)] = diag;
            for (int r = c + 1; r < dim; ++r) {
                double v = chol[static_cast<std::size_t>(r) * static_cast<std::size_t>(dim) + static_cast<std::size_t>(c)];
                for (int k = 0; k < c; ++k)
                    v -= chol[static_cast<std::size_t>(r) * static_cast<std::size_t>(dim) + static_cast<std::size_t>(k)] *
                         chol[static_cast<std::size_t>(c) * static_cast<std::size_t>(dim) + static_cast<std::size_t>(k)];
                chol[static_cast<std::size_t>(r) * static_cast<std::size_t>(dim) + static_cast<std::size_t>(c)] = v / diag;
            }
        }
        for (int r = 0; r < dim; ++r) {
            double v = step[static_cast<std::size_t>(r)];
            for (int k = 0; k < r; ++k)
                v -= chol[static_cast<std::size_t>(r) * static_cast<std::size_t>(dim) + static_cast<std::size_t>(k)] *
                     step[static_cast<std::size_t>(k)];
            step[static_cast<std::size_t>(r)] = v / chol[static_cast<std::size_t>(r) * static_cast<std::size_t>(dim) + static_cast<std::size_t>(r)];
        }
        for (int r = dim - 1; r >= 0; --r) {
            double v = step[static_cast<std::size_t>(r)];
            for (int k = r + 1; k < dim; ++k)
                v -= chol[static_cast<std::size_t>(k) * static_cast<std::size_t>(dim) + static_cast<std::size_t>(r)] *
                     step[static_cast<std::size_t>(k)];
            step[static_cast<std::size_t>(r)] = v / chol[static_cast<std::size_t>(r) * static_cast<std::size_t>(dim) + static_cast<std::size_t>(r)];
        }

        double max_step = 0.0;
        for (int a = 0; a < dim; ++a) {
            w[static_cast<std::size_t>(a)] -= step[static_cast<std::size_t>(a)];
            max_step = std::max(max_step, std::abs(step[static_cast<std::size_t>(a)]));
        }
        converged = max_step < tol;
    }
    require(converged, "fit_logit: Newton iterations did not converge (try a larger l2 penalty)");

    LogitModel model;
    model.weights.resize(static_cast<std::size_t>(d));
    model.intercept = w[static_cast<std::size_t>(d)];
    for (int j = 0; j < d; ++j) {
        model.weights[static_cast<std::size_t>(j)] = w[static_cast<std::size_t>(j)] / sd[static_cast<std::size_t>(j)];
        model.intercept -= w[static_cast<std::size_t>(j)] * mean[static_cast<std::size_t>(j)] / sd[static_cast<std::size_t>(j)];
    }
    return model;
}

// Platt scaling: fit P(y=1|s) = 1/(1+exp(a*s+b)) by Newton iterations on the
// regularized log-likelihood with smoothed targets (N+ +1)/(N+ +2), 1/(N- +2).
inline PlattCalibrator platt_calibrate(std::span<const double> scores, std::span<const double> y,
                                       int max_iter = 200, double tol = 1e-8) {
    require(scores.size() == y.size(), "platt: score/label size mismatch");
    require(scores.size() >= 2, "platt: need at least two samples");
    std::size_t n_pos = 0, n_neg = 0;
    for (double v : y) {
        require(v == 0.0 || v == 1.0, "platt: labels must be 0/1");
        if (v == 1.0) ++n_pos; else ++n_neg;
    }
    require(n_pos > 0 && n_neg > 0, "platt: both classes must be present");

    const double t_pos = (static_cast<double>(n_pos) + 1.0) / (static_cast<double>(n_pos) + 2.0);
    const double t_neg = 1.0 / (static_cast<double>(n_neg) + 2.0);
    const std::size_t n = scores.size();

    double a = 0.0;
    double b = std::log((static_cast<double>(n_neg) + 1.0) / (static_cast<double>(n_pos) + 1.0));
    for (int iter = 0; iter < max_iter; ++iter) {
        double ga = 0.0, gb = 0.0, haa = 1e-12, hab = 0.0, hbb = 1e-12;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = y[i] == 1.0 ? t_pos : t_neg;
            const double p = sigmoid(-(a * scores[i] + b));
            const double dz = t - p; // d(loglik)/dz with z = a*s+b enters negatively
            const double wgt = std::max(p * (1.0 - p), 1e-12);
            ga += dz * scores[i];
            gb += dz;
            haa += wgt * scores[i] * scores[i];
            hab += wgt * scores[i];
            hbb += wgt;
        }
        const double det = haa * hbb - hab * hab;
        require(std::abs(det) > 1e-300, "platt: singular Hessian");
        // maximize: with p = sigmoid(-(a*s+b)), ascent means stepping against (ga, gb)
        const double da = (hbb * ga - hab * gb) / det;
        const double db = (haa * gb - hab * ga) / det;
        a -= da;
        b -= db;
        if (std::max(std::abs(da), std::abs(db)) < tol) return PlattCalibrator{a, b};
    }
    return PlattCalibrator{a, b};
}

} // namespace surrocal
