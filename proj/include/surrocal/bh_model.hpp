#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "surrocal/common.hpp"
#include "surrocal/param_space.hpp"
#include "surrocal/prng.hpp"

namespace surrocal {

// Two-type Brock-Hommes asset pricing model. Prices are handled as
// deviations x_t from a constant fundamental p*; per period the model
// forecasts f_h = g_h x_{t-1} + b_h, forms discrete-choice strategy shares
// from lagged fitness, clears the market R x_t = n_1 f_1 + n_2 f_2 and
// updates fitness with the realized excess return.
struct BHParams {
    double beta = 0.0;      // intensity of choice
    double b1 = 0.0;        // bias, type 1
    double b2 = 0.0;        // bias, type 2
    double g1 = 0.0;        // trend component, type 1
    double g2 = 0.0;        // trend component, type 2
    double cost = 0.0;      // cost C of type-1 forecasts
    double omega = 0.0;     // memory weight on past profits
    double sigma = 1.0;     // conditional volatility
    double nu = 1.0;        // risk aversion
    double r_gross = 1.01;  // gross risk-free return R
    double n1_init = 0.5;   // initial share of type-1 traders
    int horizon = 500;      // T_BH

    double fundamental = 100.0; // p*; only shifts the level entering log-returns
    double noise_sd = 0.0;      // optional additive pricing noise on x_t
    bool cost_both_types = false;

    void validate() const {
        require(beta >= 0.0, "bh: beta must be >= 0");
        require(cost >= 0.0, "bh: cost must be >= 0");
        require(omega >= 0.0 && omega <= 1.0, "bh: omega must lie in [0,1]");
        require(nu >= 0.0, "bh: nu must be >= 0");
        require(r_gross > 1.0, "bh: gross return must exceed 1");
        require(horizon >= 2, "bh: horizon must be >= 2");
        require(n1_init >= 0.0 && n1_init <= 1.0, "bh: n1 must lie in [0,1]");
        require(noise_sd >= 0.0, "bh: noise sd must be >= 0");
    }
};

struct PriceSeries {
    std::vector<double> prices; // levels p_t = p* + x_t, t = 1..T
    double fundamental = 0.0;
    bool divergent = false;
};

struct BHTrace {
    std::vector<double> x, n1, u1, u2;
};

inline constexpr double kBHDivergenceBound = 1e8;

inline PriceSeries bh_simulate(const BHParams& p, std::uint64_t seed, double x0 = 0.1,
                               BHTrace* trace = nullptr) {
    p.validate();
    require(std::isfinite(x0), "bh: x0 must be finite");

    Rng rng(mix_seed(0xB40C4ull, seed));
    PriceSeries out;
    out.fundamental = p.fundamental;
    out.prices.reserve(static_cast<std::size_t>(p.horizon));

    const double R = p.r_gross;
    const double inv_nu_sigma2 = 1.0 / (p.nu * p.sigma * p.sigma);
    const double c1 = p.cost;
    const double c2 = p.cost_both_types ? p.cost : 0.0;

    double x_prev = x0;
    double u1 = 0.0, u2 = 0.0;

    for (int t = 1; t <= p.horizon; ++t) {
        // a. beliefs about next-period deviation, formed on x_{t-1}
        const double f1 = p.g1 * x_prev + p.b1;
        const double f2 = p.g2 * x_prev + p.b2;

        // b. strategy shares from fitness through t-1 (lagged, so the
        //    recursion stays explicit); max-shift guards exp overflow
        double n1;
        if (t == 1) {
            n1 = p.n1_init;
        } else {
            const double e1 = p.beta * u1;
            const double e2 = p.beta * u2;
            const double m = std::max(e1, e2);
            const double w1 = std::exp(e1 - m);
            const double w2 = std::exp(e2 - m);
            n1 = w1 / (w1 + w2);
        }
        const double n2 = 1.0 - n1;

        // c. market clearing
        double x = (n1 * f1 + n2 * f2) / R;
        if (p.noise_sd > 0.0) x += rng.normal(0.0, p.noise_sd);

        // d. fitness from the realized excess return of each forecast
        const double excess = x - R * x_prev;
        u1 = excess * (f1 - R * x_prev) * inv_nu_sigma2 - c1 + p.omega * u1;
        u2 = excess * (f2 - R * x_prev) * inv_nu_sigma2 - c2 + p.omega * u2;

        if (!std::isfinite(x) || std::abs(x) > kBHDivergenceBound || !std::isfinite(u1) || !std::isfinite(u2)) {
            out.divergent = true;
            break;
        }
        out.prices.push_back(p.fundamental + x);
        if (trace) {
            trace->x.push_back(x);
            trace->n1.push_back(n1);
            trace->u1.push_back(u1);
            trace->u2.push_back(u2);
        }
        x_prev = x;
    }
    return out;
}

// r_t = log(p_t) - log(p_{t-1}); length T-1
inline std::vector<double> log_returns(const PriceSeries& s) {
    require(s.prices.size() >= 2, "log_returns: need at least two prices");
    std::vector<double> r;
    r.reserve(s.prices.size() - 1);
    double prev = s.prices[0];
    require(prev > 0.0, "log_returns: non-positive price");
    double log_prev = std::log(prev);
    for (std::size_t t = 1; t < s.prices.size(); ++t) {
        require(s.prices[t] > 0.0, "log_returns: non-positive price");
        const double log_cur = std::log(s.prices[t]);
        r.push_back(log_cur - log_prev);
        log_prev = log_cur;
    }
    return r;
}

// Table 1 explored box; n1 and T_BH stay fixed, so 10 dims are explored.
inline ParameterSpace bh_space() {
    ParameterSpace s;
    s.dims = {
        {"beta", 0.0, 10.0}, {"b1", -2.0, 2.0},   {"b2", -2.0, 2.0},
        {"g1", -2.0, 2.0},   {"g2", -2.0, 2.0},   {"cost", 0.0, 5.0},
        {"omega", 0.0, 1.0}, {"sigma", 0.0, 1.0}, {"nu", 0.0, 100.0},
        {"r", 1.01, 1.1},
    };
    s.fixed = {{"n1", 0.5}, {"horizon", 500}};
    return s;
}

inline BHParams bh_params_from_vector(const ParameterSpace& space, const double* v) {
    BHParams p;
    auto pick = [&](const char* name, double fallback) {
        const int i = space.index_of(name);
        return i >= 0 ? v[i] : space.fixed_value(name, fallback);
    };
    p.beta = pick("beta", 0.0);
    p.b1 = pick("b1", 0.0);
    p.b2 = pick("b2", 0.0);
    p.g1 = pick("g1", 0.0);
    p.g2 = pick("g2", 0.0);
    p.cost = pick("cost", 0.0);
    p.omega = pick("omega", 0.0);
    p.sigma = pick("sigma", 1.0);
    p.nu = pick("nu", 1.0);
    p.r_gross = pick("r", 1.01);
    p.n1_init = space.fixed_value("n1", 0.5);
    p.horizon = static_cast<int>(space.fixed_value("horizon", 500));
    return p;
}

} // namespace surrocal
