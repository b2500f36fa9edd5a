#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "surrocal/common.hpp"

namespace surrocal {

// Exact two-sample Kolmogorov-Smirnov statistic: sup |F_a - F_b| over the
// pooled sample, via sorted two-pointer sweep. Handles ties.
inline double ks_statistic(std::span<const double> a, std::span<const double> b) {
    require(!a.empty() && !b.empty(), "ks_statistic: samples must be non-empty");
    std::vector<double> sa(a.begin(), a.end());
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const double na = static_cast<double>(sa.size());
    const double nb = static_cast<double>(sb.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < sa.size() || j < sb.size()) {
        double x;
        if (i < sa.size() && j < sb.size()) x = std::min(sa[i], sb[j]);
        else if (i < sa.size()) x = sa[i];
        else x = sb[j];
        while (i < sa.size() && sa[i] == x) ++i;
        while (j < sb.size() && sb[j] == x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

// Asymptotic two-sample p-value: 2 * sum_{k>=1} (-1)^{k-1} exp(-2 k^2 lam^2)
// with lam = D*sqrt(nm/(n+m)); series truncated once a term drops below
// 1e-12, result clamped to [0,1]. Below lam = 0.05 the tail mass is
// numerically zero, so the p-value is exactly 1.
inline double ks_pvalue(double d, std::size_t n, std::size_t m) {
    require(n >= 1 && m >= 1, "ks_pvalue: sample sizes must be >= 1");
    require(d >= 0.0 && d <= 1.0, "ks_pvalue: D must lie in [0,1]");
    const double ne = static_cast<double>(n) * static_cast<double>(m) /
                      (static_cast<double>(n) + static_cast<double>(m));
    const double lam = d * std::sqrt(ne);
    if (lam < 0.05) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100000; ++k) {
        const double term = std::exp(-2.0 * lam * lam * static_cast<double>(k) * static_cast<double>(k));
        sum += sign * term;
        if (term < 1e-12) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

// golden-section search for the minimum of f over [lo, hi]
inline double golden_min(const std::function<double(double)>& f, double lo, double hi, double tol) {
    static const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

struct SubbotinFit {
    double scale = 0.0;  // a
    double shape = 0.0;  // b
    double location = 0.0;  // mu
    double loglik = 0.0;
};

namespace stats_detail {

// location estimate for fixed shape: argmin_mu sum |x - mu|^b
inline double subbotin_location(std::span<const double> x, double b, double lo, double hi) {
    auto obj = [&](double mu) {
        double s = 0.0;
        for (double v : x) s += std::pow(std::abs(v - mu), b);
        return s;
    };
    const double tol = std::max(1e-10, 1e-9 * (hi - lo));
    return golden_min(obj, lo, hi, tol);
}

// profile log-likelihood of the shape after maximizing over (a, mu);
// identical for the 1/b-in-the-exponent parameterization of the density.
inline double subbotin_profile(std::span<const double> x, double b, double lo, double hi, SubbotinFit* out) {
    const double n = static_cast<double>(x.size());
    const double mu = subbotin_location(x, b, lo, hi);
    double mb = 0.0;
    for (double v : x) mb += std::pow(std::abs(v - mu), b);
    mb /= n;
    if (!(mb > 0.0)) return -1e300;
    const double a = std::pow(b * mb, 1.0 / b);
    const double ll = n * (-std::log(2.0) - std::log(a) - std::lgamma(1.0 + 1.0 / b) - 1.0 / b);
    if (out) {
        out->scale = a;
        out->shape = b;
        out->location = mu;
        out->loglik = ll;
    }
    return ll;
}

} // namespace stats_detail

// Maximum-likelihood fit of the symmetric exponential power (Subbotin)
// density f(x) = exp(-|(x-mu)/a|^b) / (2 a Gamma(1+1/b)). Nested search:
// golden-section over the shape on [0.2, 5] against the profile likelihood,
// with mu by inner golden-section and a in closed form. b = 2 is Gaussian,
// b = 1 Laplace; smaller b means fatter tails.
inline SubbotinFit subbotin_fit(std::span<const double> sample) {
    require(sample.size() >= 30, "subbotin_fit: need at least 30 observations");
    const auto [mn, mx] = std::minmax_element(sample.begin(), sample.end());
    require(*mx > *mn, "subbotin_fit: degenerate sample (zero variance)");
    const double lo = *mn, hi = *mx;
    auto neg_profile = [&](double b) {
        return -stats_detail::subbotin_profile(sample, b, lo, hi, nullptr);
    };
    const double b_hat = golden_min(neg_profile, 0.2, 5.0, 1e-6);
    SubbotinFit fit;
    stats_detail::subbotin_profile(sample, b_hat, lo, hi, &fit);
    return fit;
}

inline double mean_of(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

inline double variance_of(std::span<const double> x) {
    const double m = mean_of(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size());
}

} // namespace surrocal
