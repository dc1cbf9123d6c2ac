#include "drsim/control.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace drsim {

SetpointSchedule::SetpointSchedule(double d_watts, double b_watts, std::vector<Segment> segments)
    : d_(d_watts), b_(b_watts), segments_(std::move(segments)) {
    if (segments_.empty()) {
        throw std::invalid_argument("schedule needs at least one segment");
    }
    if (!std::isfinite(d_) || !std::isfinite(b_) || d_ < 0.0) {
        throw std::invalid_argument("schedule D must be non-negative and B finite");
    }
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const auto& seg = segments_[i];
        if (!(seg.s >= 0.0 && seg.s <= 1.0)) {
            throw std::invalid_argument(fmt::format("schedule segment {} signal {} outside [0, 1]", i, seg.s));
        }
        if (i > 0 && !(seg.start_t > segments_[i - 1].start_t)) {
            throw std::invalid_argument(fmt::format("schedule segment {} start time not increasing", i));
        }
    }
}

double SetpointSchedule::signal_at(double t) const {
    if (t < segments_.front().start_t) {
        throw std::out_of_range(fmt::format("t = {} precedes the first schedule segment", t));
    }
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](double x, const Segment& seg) { return x < seg.start_t; });
    return std::prev(it)->s;
}

double SetpointSchedule::min_setpoint() const {
    auto it = std::min_element(segments_.begin(), segments_.end(),
                               [](const Segment& a, const Segment& b) { return a.s < b.s; });
    return d_ * it->s + b_;
}

double SetpointSchedule::max_setpoint() const {
    auto it = std::max_element(segments_.begin(), segments_.end(),
                               [](const Segment& a, const Segment& b) { return a.s < b.s; });
    return d_ * it->s + b_;
}

double setpoint_at(const SetpointSchedule& schedule, double t) { return schedule.setpoint_at(t); }

IntegralControllerState integral_update(IntegralControllerState state, const ErrorSample& e) {
    const double tau = state.tau.value();
    const bool at_high = tau >= 1.0;
    const bool at_low = tau <= 0.0;
    if ((at_high && e.e_watts > 0.0) || (at_low && e.e_watts < 0.0)) {
        state.saturated_high = at_high;
        state.saturated_low = at_low;
        return state;
    }
    const double candidate = tau + state.gain * e.e_watts;
    state.tau = DutyCycle::clamped(candidate);
    state.saturated_high = state.tau.value() >= 1.0;
    state.saturated_low = state.tau.value() <= 0.0;
    return state;
}

double loop_gain(double gain, int n_servers, double k_watts) {
    return gain * static_cast<double>(n_servers) * k_watts;
}

DutyCycle open_loop_tau(const LinearPowerModel& model, double p_target) {
    if (!std::isfinite(p_target)) {
        throw std::invalid_argument("open_loop_tau: target must be finite");
    }
    return DutyCycle::clamped((p_target - model.i_watts) / model.k_watts);
}

void write_controller_csv(std::ostream& os, std::span<const ControllerTraceRow> rows) {
    os << "t,server,e_watts,tau\n";
    for (const auto& r : rows) {
        fmt::print(os, "{:.4f},{},{:.6f},{:.6f}\n", r.t, r.server, r.e_watts, r.tau);
    }
}

} // namespace drsim
