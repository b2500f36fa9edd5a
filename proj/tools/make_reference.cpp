// Regenerates the bundled reference price series (data/reference_prices.csv).
//
// The file is a synthetic daily price series in the Yahoo-export format the
// criterion loader reads (Date,AdjClose). It is produced by one fixed,
// documented run of the asset-pricing model in a noisy contrarian regime,
// which gives a return distribution with a realistic daily scale and a
// parameter-space match set that is neither empty nor trivial. Substitute a
// real market export for empirical work; any file in this format is accepted.

#include <cstdio>
#include <string>

#include "surrocal/bh_model.hpp"
#include "surrocal/io.hpp"

using namespace surrocal;

int main(int argc, char** argv) {
    const std::string out = argc > 1 ? argv[1] : "data/reference_prices.csv";

    BHParams p;
    p.beta = 2.0;
    p.g1 = -0.9;
    p.g2 = -0.85;
    p.b1 = 0.0;
    p.b2 = 0.0;
    p.cost = 0.3;
    p.omega = 0.3;
    p.sigma = 0.7;
    p.nu = 30.0;
    p.r_gross = 1.05;
    p.noise_sd = 0.32;
    p.horizon = 502;

    const PriceSeries s = bh_simulate(p, 7, 0.1);
    if (s.divergent) {
        std::fprintf(stderr, "unexpected divergence in the generating run\n");
        return 1;
    }

    // synthetic business-day calendar: Mon-Fri from 2013-12-09
    static const int days_in_month[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int year = 2013, month = 12, day = 9, weekday = 0; // 2013-12-09 was a Monday

    CsvWriter w(out);
    w.row({"Date", "AdjClose"});
    for (double price : s.prices) {
        char date[16];
        std::snprintf(date, sizeof(date), "%04d-%02d-%02d", year, month, day);
        w.row({date, fmt_double(price)});
        int step = weekday == 4 ? 3 : 1; // skip weekends
        weekday = (weekday + step) % 7;
        day += step;
        int dim = days_in_month[month - 1];
        if (month == 2 && year % 4 == 0) dim = 29;
        if (day > dim) {
            day -= dim;
            ++month;
            if (month > 12) {
                month = 1;
                ++year;
            }
        }
    }
    std::printf("wrote %zu prices to %s\n", s.prices.size(), out.c_str());
    return 0;
}
