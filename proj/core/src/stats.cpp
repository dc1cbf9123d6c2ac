#include "drsim/stats.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace drsim {

double mean(std::span<const double> xs) {
    if (xs.empty()) {
        throw std::invalid_argument("mean of empty sequence");
    }
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double stddev(std::span<const double> xs) {
    if (xs.size() < 2) {
        return 0.0;
    }
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) {
        ss += (x - m) * (x - m);
    }
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double median(std::span<const double> xs) {
    if (xs.empty()) {
        throw std::invalid_argument("median of empty sequence");
    }
    std::vector<double> v(xs.begin(), xs.end());
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) {
        return upper;
    }
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

double rmse(std::span<const double> measured, double predicted) {
    if (measured.empty()) {
        throw std::invalid_argument("rmse: no measurements");
    }
    double ss = 0.0;
    for (double x : measured) {
        ss += (x - predicted) * (x - predicted);
    }
    return std::sqrt(ss / static_cast<double>(measured.size()));
}

double RmseCurve::max_rmse() const {
    double m = 0.0;
    for (const auto& p : points) {
        m = std::max(m, p.rmse_watts);
    }
    return m;
}

std::optional<OutlierMode> parse_outlier_mode(std::string_view name) {
    if (name == "mad") {
        return OutlierMode::Mad;
    }
    if (name == "iqr10") {
        return OutlierMode::Iqr10;
    }
    return std::nullopt;
}

std::string_view to_string(OutlierMode mode) { return mode == OutlierMode::Mad ? "mad" : "iqr10"; }

namespace {

// Linear-interpolated quantile of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - static_cast<double>(lo));
}

} // namespace

namespace {

// One rejection pass; returns the [lo, hi] acceptance interval.
std::pair<double, double> acceptance(std::span<const double> samples, OutlierMode mode) {
    const double med = median(samples);
    double lo = 0.0;
    double hi = 0.0;
    bool degenerate = false;

    if (mode == OutlierMode::Mad) {
        std::vector<double> dev;
        dev.reserve(samples.size());
        for (double x : samples) {
            dev.push_back(std::abs(x - med));
        }
        const double mad = median(dev);
        degenerate = mad == 0.0;
        const double limit = kMadThreshold * kMadScale * mad;
        lo = med - limit;
        hi = med + limit;
    } else {
        std::vector<double> sorted(samples.begin(), samples.end());
        std::sort(sorted.begin(), sorted.end());
        const double q1 = quantile_sorted(sorted, 0.25);
        const double q3 = quantile_sorted(sorted, 0.75);
        const double iqr = q3 - q1;
        degenerate = iqr == 0.0;
        lo = q1 - 10.0 * iqr;
        hi = q3 + 10.0 * iqr;
    }
    if (degenerate) {
        lo = med - kDegenerateSpreadWatts;
        hi = med + kDegenerateSpreadWatts;
    }
    return {lo, hi};
}

} // namespace

FilterResult mad_filter(std::span<const double> samples, OutlierMode mode) {
    if (samples.empty()) {
        throw std::invalid_argument("mad_filter: no samples");
    }
    // Repeat until a pass rejects nothing, so the kept set is a fixed point.
    // At least half the samples survive every pass.
    std::vector<bool> keep(samples.size(), true);
    std::vector<double> kept(samples.begin(), samples.end());
    for (;;) {
        const auto [lo, hi] = acceptance(kept, mode);
        bool changed = false;
        kept.clear();
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (!keep[i]) {
                continue;
            }
            if (samples[i] < lo || samples[i] > hi) {
                keep[i] = false;
                changed = true;
            } else {
                kept.push_back(samples[i]);
            }
        }
        if (!changed) {
            break;
        }
    }

    FilterResult out;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        (keep[i] ? out.kept : out.rejected).push_back(samples[i]);
    }
    return out;
}

RangeBand conservative_range(std::span<const double> kept) {
    if (kept.size() < 2) {
        throw std::invalid_argument("conservative_range: need at least two samples");
    }
    const auto [mn, mx] = std::minmax_element(kept.begin(), kept.end());
    const double sigma = stddev(kept);
    return RangeBand{*mn - 1.5 * sigma, *mx + 1.5 * sigma, mean(kept), 0};
}

GroupSummary summarize_group(std::span<const double> samples, OutlierMode mode) {
    auto filtered = mad_filter(samples, mode);
    GroupSummary g;
    g.n_kept = filtered.kept.size();
    g.mean = mean(filtered.kept);
    g.stddev = stddev(filtered.kept);
    if (filtered.kept.size() >= 2) {
        g.band = conservative_range(filtered.kept);
    } else {
        g.band = RangeBand{g.mean, g.mean, g.mean, 0};
    }
    g.band.n_rejected = filtered.rejected.size();
    return g;
}

double precision_score(std::span<const double> setpoints, std::span<const double> measured, double base_watts,
                       std::size_t samples_per_interval) {
    if (setpoints.size() != measured.size()) {
        throw std::invalid_argument("precision_score: streams differ in length");
    }
    if (samples_per_interval == 0) {
        throw std::invalid_argument("precision_score: interval must hold at least one sample");
    }
    const std::size_t intervals = setpoints.size() / samples_per_interval;
    if (intervals == 0) {
        throw std::invalid_argument("precision_score: streams shorter than one scoring interval");
    }
    double err = 0.0;
    double reg = 0.0;
    for (std::size_t k = 0; k < intervals; ++k) {
        const auto first = k * samples_per_interval;
        const double p_set = mean(setpoints.subspan(first, samples_per_interval));
        const double p_meas = mean(measured.subspan(first, samples_per_interval));
        err += std::abs(p_meas - p_set);
        reg += std::abs(p_set - base_watts);
    }
    if (reg == 0.0) {
        throw std::domain_error("precision_score: regulation signal is identically at base load");
    }
    return std::max(0.0, 1.0 - err / reg);
}

double settling_time(std::span<const PowerSample> trace, double t_from, double t_to, double target,
                     double band_watts) {
    std::optional<double> settled_at;
    for (const auto& s : trace) {
        if (s.t_end <= t_from || s.t_end > t_to) {
            continue;
        }
        const bool inside = std::abs(s.watts - target) <= band_watts;
        if (!inside) {
            settled_at.reset();
        } else if (!settled_at) {
            settled_at = s.t_end;
        }
    }
    return settled_at ? *settled_at - t_from : t_to - t_from;
}

RampMetrics ramp_metrics(std::span<const PowerSample> trace, double settle_band) {
    if (trace.size() < 4) {
        throw NoStepError("ramp_metrics: trace too short");
    }
    const std::size_t edge = std::max<std::size_t>(2, trace.size() / 10);
    std::vector<double> head;
    std::vector<double> tail;
    for (std::size_t i = 0; i < edge; ++i) {
        head.push_back(trace[i].watts);
        tail.push_back(trace[trace.size() - edge + i].watts);
    }
    const double initial = mean(head);
    const double final_level = mean(tail);
    const double range = final_level - initial;
    const double sh = stddev(head);
    const double st = stddev(tail);
    const double noise = std::sqrt(0.5 * (sh * sh + st * st));
    if (std::abs(range) < std::max(1.0, 6.0 * noise)) {
        throw NoStepError(fmt::format("ramp_metrics: no detectable step (change {:.3f} W, noise {:.3f} W)", range,
                                      noise));
    }

    auto level = [&](std::size_t i) { return (trace[i].watts - initial) / range; };
    std::size_t i90 = trace.size();
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (level(i) >= 0.9) {
            i90 = i;
            break;
        }
    }
    std::size_t i10 = 0;
    for (std::size_t i = i90; i-- > 0;) {
        if (level(i) <= 0.1) {
            i10 = i;
            break;
        }
    }

    RampMetrics m;
    m.rising = range > 0.0;
    m.dynamic_range = std::abs(range);
    m.t_step = trace[i10].t_end;
    m.rise_time = trace[i90].t_end - trace[i10].t_end;
    m.ramp_rate = 0.8 * m.dynamic_range / m.rise_time;
    m.settling_time = settling_time(trace, m.t_step, trace.back().t_end, final_level, settle_band * m.dynamic_range);
    return m;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("linear_fit: need two or more paired points");
    }
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) {
        throw std::invalid_argument("linear_fit: x values are all equal");
    }
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    for (std::size_t i = 0; i < x.size(); ++i) {
        f.max_abs_residual = std::max(f.max_abs_residual, std::abs(y[i] - (f.intercept + f.slope * x[i])));
    }
    return f;
}

std::size_t distinct_levels(std::span<const double> values, double tolerance) {
    if (values.empty()) {
        return 0;
    }
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    std::size_t n = 1;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] - v[i - 1] > tolerance) {
            ++n;
        }
    }
    return n;
}

} // namespace drsim
