#pragma once

#include "drsim/power_model.hpp"
#include "drsim/sensing.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace drsim {

struct Segment {
    double start_t = 0.0;
    double s = 0.0; ///< regulation signal in [0, 1]
};

/// Piecewise-constant regulation signal and the contract constants:
/// P_set(t) = D * s(t) + B.
class SetpointSchedule {
public:
    /// Throws std::invalid_argument on non-increasing times or s outside [0, 1].
    SetpointSchedule(double d_watts, double b_watts, std::vector<Segment> segments);

    [[nodiscard]] double d_watts() const { return d_; }
    [[nodiscard]] double b_watts() const { return b_; }
    [[nodiscard]] std::span<const Segment> segments() const { return segments_; }

    /// Throws std::out_of_range for t before the first segment.
    [[nodiscard]] double signal_at(double t) const;
    [[nodiscard]] double setpoint_at(double t) const { return d_ * signal_at(t) + b_; }

    [[nodiscard]] double min_setpoint() const;
    [[nodiscard]] double max_setpoint() const;

private:
    double d_;
    double b_;
    std::vector<Segment> segments_;
};

double setpoint_at(const SetpointSchedule& schedule, double t);

struct IntegralControllerState {
    DutyCycle tau;
    double gain = 0.0; ///< duty-cycle change per watt of cluster error per update
    bool saturated_low = false;
    bool saturated_high = false;
};

/// Integrate the shared cluster error with conditional-integration
/// anti-windup: at a bound, an error pushing further past it is ignored.
IntegralControllerState integral_update(IntegralControllerState state, const ErrorSample& e);

/// Per-update loop gain of n identical servers: n * K * gain.
double loop_gain(double gain, int n_servers, double k_watts);

/// Invert the linear model: clamp((P - I) / K, 0, 1).
DutyCycle open_loop_tau(const LinearPowerModel& model, double p_target);

struct ControllerTraceRow {
    double t = 0.0;
    int server = 0;
    double e_watts = 0.0;
    double tau = 0.0;
};

/// CSV `t,server,e_watts,tau`.
void write_controller_csv(std::ostream& os, std::span<const ControllerTraceRow> rows);

} // namespace drsim
