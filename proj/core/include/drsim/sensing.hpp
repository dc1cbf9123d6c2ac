#pragma once

#include "drsim/rng.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace drsim {

struct RawSample {
    double t = 0.0;
    double watts = 0.0;
};

/// Block-averaged power over (t_end - window, t_end].
struct PowerSample {
    double t_end = 0.0;
    double watts = 0.0;
    double window = 0.0;
};

/// Tracking error e = P_set - measured cluster power.
struct ErrorSample {
    double t = 0.0;
    double e_watts = 0.0;
};

struct SensorConfig {
    /// Shunt + amplifier tolerance; per-channel gain error is drawn once,
    /// uniformly in [-bound, +bound].
    double gain_error_bound = 0.016;
    /// Relative amplitude of the line-frequency ripple on instantaneous power.
    double ripple_amp = 0.0;
    double ripple_hz = 120.0;
    double additive_sigma = 0.0;
    double raw_rate = 1000.0; ///< samples per second

    void validate() const;
};

/// One instrumented current channel. Systematic errors are fixed per channel.
struct SensorChannel {
    SensorConfig cfg;
    double gain_error = 0.0;
    double ripple_phase = 0.0;
};

SensorChannel make_channel(const SensorConfig& cfg, Rng& rng);

RawSample synthesize_raw(double true_watts, double t, const SensorChannel& channel, Rng& rng);

/// Fixed-phase block averager: window k covers raw sample indices
/// [k*n, (k+1)*n) with n = window / raw period. No zero-crossing alignment.
class BlockAverager {
public:
    BlockAverager(double window, double raw_period);

    /// Feed one raw sample; returns the previous window's average when this
    /// sample opens a new window.
    std::optional<PowerSample> push(const RawSample& s);
    /// Emit the open window if it is complete.
    std::optional<PowerSample> flush();

    [[nodiscard]] double window() const { return window_; }
    [[nodiscard]] std::int64_t samples_per_window() const { return per_window_; }

private:
    std::optional<PowerSample> close();

    double window_;
    double raw_period_;
    std::int64_t per_window_;
    std::int64_t current_ = -1;
    std::int64_t count_ = 0;
    double sum_ = 0.0;
};

std::vector<PowerSample> block_average(std::span<const RawSample> stream, double window, double raw_period);

/// Re-average block samples into coarser whole blocks of `factor` windows.
std::vector<PowerSample> reblock(std::span<const PowerSample> trace, std::size_t factor);

ErrorSample compute_error(double p_set, const PowerSample& measured_cluster);

struct ChannelTrace {
    std::string channel;
    std::vector<PowerSample> samples;
};

/// CSV `t,channel,watts`.
void write_power_csv(std::ostream& os, std::span<const ChannelTrace> traces);

} // namespace drsim
