#pragma once

// Deliberately naive reference implementations used to cross-check the
// library. They share no code with drsim.

#include <algorithm>
#include <cmath>
#include <vector>

namespace drsim::testing {

inline long double oracle_mean(const std::vector<double>& xs) {
    long double s = 0.0L;
    for (double x : xs) s += x;
    return s / static_cast<long double>(xs.size());
}

inline double oracle_rmse(const std::vector<double>& xs, double c) {
    long double s = 0.0L;
    for (double x : xs) s += (static_cast<long double>(x) - c) * (static_cast<long double>(x) - c);
    return static_cast<double>(std::sqrt(s / static_cast<long double>(xs.size())));
}

inline double oracle_median(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

inline double oracle_sample_sd(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const long double m = oracle_mean(xs);
    long double s = 0.0L;
    for (double x : xs) s += (x - m) * (x - m);
    return static_cast<double>(std::sqrt(s / static_cast<long double>(xs.size() - 1)));
}

/// Kept/rejected by the modified z-score rule written out longhand,
/// re-run on the survivors until stable.
inline std::vector<bool> oracle_mad_keep(const std::vector<double>& xs) {
    std::vector<bool> keep(xs.size(), true);
    for (bool changed = true; changed;) {
        changed = false;
        std::vector<double> live;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (keep[i]) live.push_back(xs[i]);
        }
        const double med = oracle_median(live);
        std::vector<double> dev;
        for (double x : live) dev.push_back(std::fabs(x - med));
        const double mad = oracle_median(dev);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (!keep[i]) continue;
            const double d = std::fabs(xs[i] - med);
            if (!(mad == 0.0 ? d <= 0.1 : d <= 3.5 * 1.4826 * mad)) {
                keep[i] = false;
                changed = true;
            }
        }
    }
    return keep;
}

struct OracleBand {
    double lo;
    double hi;
};

inline OracleBand oracle_range(const std::vector<double>& xs) {
    const double sd = oracle_sample_sd(xs);
    return {*std::min_element(xs.begin(), xs.end()) - 1.5 * sd, *std::max_element(xs.begin(), xs.end()) + 1.5 * sd};
}

/// Ordinary least squares via the normal equations.
inline double oracle_max_line_residual(const std::vector<double>& x, const std::vector<double>& y) {
    long double n = x.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += static_cast<long double>(x[i]) * x[i];
        sxy += static_cast<long double>(x[i]) * y[i];
    }
    const long double b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const long double a = (sy - b * sx) / n;
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        worst = std::max(worst, static_cast<double>(std::fabs(y[i] - (a + b * x[i]))));
    }
    return worst;
}

} // namespace drsim::testing
