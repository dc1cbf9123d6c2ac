#include "drsim/sensing.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace drsim {

void SensorConfig::validate() const {
    if (!(gain_error_bound >= 0.0 && gain_error_bound < 1.0)) {
        throw std::invalid_argument("sensor.gain_error must be in [0, 1)");
    }
    if (!(ripple_amp >= 0.0)) {
        throw std::invalid_argument("sensor.ripple_amp must be non-negative");
    }
    if (!(ripple_hz > 0.0)) {
        throw std::invalid_argument("sensor.ripple_hz must be positive");
    }
    if (!(additive_sigma >= 0.0)) {
        throw std::invalid_argument("sensor.additive_sigma must be non-negative");
    }
    if (!(raw_rate > 0.0 && raw_rate <= 10000.0)) {
        throw std::invalid_argument("sensor.raw_rate must be in (0, 10000]");
    }
}

SensorChannel make_channel(const SensorConfig& cfg, Rng& rng) {
    SensorChannel ch{cfg, 0.0, 0.0};
    if (cfg.gain_error_bound > 0.0) {
        ch.gain_error = std::uniform_real_distribution<double>(-cfg.gain_error_bound, cfg.gain_error_bound)(rng);
    }
    if (cfg.ripple_amp > 0.0) {
        ch.ripple_phase = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
    }
    return ch;
}

RawSample synthesize_raw(double true_watts, double t, const SensorChannel& channel, Rng& rng) {
    if (!(true_watts >= 0.0)) {
        throw std::invalid_argument("synthesize_raw: true_watts must be non-negative");
    }
    const auto& cfg = channel.cfg;
    double w = true_watts * (1.0 + channel.gain_error);
    if (cfg.ripple_amp > 0.0) {
        w += cfg.ripple_amp * true_watts * std::sin(2.0 * std::numbers::pi * cfg.ripple_hz * t + channel.ripple_phase);
    }
    if (cfg.additive_sigma > 0.0) {
        w += std::normal_distribution<double>(0.0, cfg.additive_sigma)(rng);
    }
    return RawSample{t, std::max(w, 0.0)};
}

BlockAverager::BlockAverager(double window, double raw_period) : window_(window), raw_period_(raw_period) {
    if (!(window > 0.0) || !(raw_period > 0.0)) {
        throw std::invalid_argument("block_average: window and raw period must be positive");
    }
    const double ratio = window / raw_period;
    per_window_ = std::llround(ratio);
    if (per_window_ < 1 || std::abs(ratio - static_cast<double>(per_window_)) > 1e-6 * ratio) {
        throw std::invalid_argument(
            fmt::format("block_average: window {} s is not a multiple of the raw period {} s", window, raw_period));
    }
}

std::optional<PowerSample> BlockAverager::close() {
    if (count_ == 0) {
        return std::nullopt;
    }
    PowerSample out{static_cast<double>(current_ + 1) * window_, sum_ / static_cast<double>(count_), window_};
    count_ = 0;
    sum_ = 0.0;
    return out;
}

std::optional<PowerSample> BlockAverager::push(const RawSample& s) {
    const std::int64_t index = std::llround(s.t / raw_period_);
    const std::int64_t block = index >= 0 ? index / per_window_ : (index - per_window_ + 1) / per_window_;
    std::optional<PowerSample> out;
    if (block != current_) {
        out = close();
        current_ = block;
    }
    sum_ += s.watts;
    ++count_;
    return out;
}

std::optional<PowerSample> BlockAverager::flush() {
    if (count_ < per_window_) {
        return std::nullopt;
    }
    return close();
}

std::vector<PowerSample> block_average(std::span<const RawSample> stream, double window, double raw_period) {
    BlockAverager avg(window, raw_period);
    std::vector<PowerSample> out;
    for (const auto& s : stream) {
        if (auto p = avg.push(s)) {
            out.push_back(*p);
        }
    }
    if (auto p = avg.flush()) {
        out.push_back(*p);
    }
    return out;
}

std::vector<PowerSample> reblock(std::span<const PowerSample> trace, std::size_t factor) {
    if (factor == 0) {
        throw std::invalid_argument("reblock: factor must be positive");
    }
    std::vector<PowerSample> out;
    out.reserve(trace.size() / factor);
    for (std::size_t i = 0; i + factor <= trace.size(); i += factor) {
        double sum = 0.0;
        for (std::size_t j = i; j < i + factor; ++j) {
            sum += trace[j].watts;
        }
        out.push_back({trace[i + factor - 1].t_end, sum / static_cast<double>(factor),
                       trace[i].window * static_cast<double>(factor)});
    }
    return out;
}

ErrorSample compute_error(double p_set, const PowerSample& measured_cluster) {
    return ErrorSample{measured_cluster.t_end, p_set - measured_cluster.watts};
}

void write_power_csv(std::ostream& os, std::span<const ChannelTrace> traces) {
    os << "t,channel,watts\n";
    for (const auto& tr : traces) {
        for (const auto& s : tr.samples) {
            fmt::print(os, "{:.4f},{},{:.6f}\n", s.t_end, tr.channel, s.watts);
        }
    }
}

} // namespace drsim
