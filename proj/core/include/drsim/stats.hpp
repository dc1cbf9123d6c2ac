#pragma once

#include "drsim/sensing.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace drsim {

/// Raised when a ramp trace contains no detectable transition.
class NoStepError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

double mean(std::span<const double> xs);
/// Sample standard deviation (n - 1); zero for fewer than two values.
double stddev(std::span<const double> xs);
double median(std::span<const double> xs);

/// Root mean square deviation of measurements from a single prediction.
double rmse(std::span<const double> measured, double predicted);

struct RmsePoint {
    double tau = 0.0;
    double rmse_watts = 0.0;
    std::size_t n = 0;
};

struct RmseCurve {
    std::vector<RmsePoint> points;
    double window = 0.0;

    [[nodiscard]] double max_rmse() const;
};

enum class OutlierMode {
    Mad,   ///< modified z-score > 3.5
    Iqr10, ///< more than 10 IQR outside the quartiles
};

std::optional<OutlierMode> parse_outlier_mode(std::string_view name);
std::string_view to_string(OutlierMode mode);

struct FilterResult {
    std::vector<double> kept;
    std::vector<double> rejected;
};

inline constexpr double kMadThreshold = 3.5;
inline constexpr double kMadScale = 1.4826;
/// Spread below which a group counts as degenerate and only values more
/// than this far from the median are rejected.
inline constexpr double kDegenerateSpreadWatts = 0.1;

/// Split samples into kept and rejected, preserving input order. The rule is
/// reapplied to the survivors until nothing more is rejected.
FilterResult mad_filter(std::span<const double> samples, OutlierMode mode = OutlierMode::Mad);

struct RangeBand {
    double lo = 0.0;
    double hi = 0.0;
    double mean = 0.0;
    std::size_t n_rejected = 0;
};

/// Observed [min, max] widened by 1.5 sigma on each side.
RangeBand conservative_range(std::span<const double> kept);

struct GroupSummary {
    double mean = 0.0;
    double stddev = 0.0;
    RangeBand band;
    std::size_t n_kept = 0;
};

/// Outlier rejection followed by mean, spread and conservative range.
GroupSummary summarize_group(std::span<const double> samples, OutlierMode mode = OutlierMode::Mad);

/// Reconstructed regulation precision score over aligned streams:
///   max(0, 1 - mean_k |P_meas - P_set| / mean_k |P_set - B|)
/// where k runs over whole scoring intervals of `samples_per_interval`
/// samples, each stream averaged within the interval. Throws
/// std::domain_error when the regulation magnitude is zero.
double precision_score(std::span<const double> setpoints, std::span<const double> measured, double base_watts,
                       std::size_t samples_per_interval);

inline constexpr std::string_view kPrecisionFormulaTag = "reconstructed-pjm-precision";

struct RampMetrics {
    double ramp_rate = 0.0;     ///< W/s over the 10-90% rise
    double dynamic_range = 0.0; ///< |steady final - steady initial|
    double settling_time = 0.0; ///< from the step to entering the final band for good
    double rise_time = 0.0;
    double t_step = 0.0;
    bool rising = true;
};

inline constexpr double kDefaultSettleBand = 0.05;

/// Throws NoStepError when the trace has no transition distinguishable
/// from its noise.
RampMetrics ramp_metrics(std::span<const PowerSample> trace, double settle_band = kDefaultSettleBand);

/// Time from `t_from` until the trace enters [target - band, target + band]
/// and stays there through `t_to`. Samples are considered when
/// t_from < t_end <= t_to. Returns t_to - t_from if it never settles.
double settling_time(std::span<const PowerSample> trace, double t_from, double t_to, double target,
                     double band_watts);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double max_abs_residual = 0.0;
};

LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Number of clusters when sorted values are split at gaps wider than
/// `tolerance`.
std::size_t distinct_levels(std::span<const double> values, double tolerance);

} // namespace drsim
