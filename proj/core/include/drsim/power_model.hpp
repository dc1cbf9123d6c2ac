#pragma once

#include "drsim/rng.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace drsim {

/// Fraction of CPU time granted to the workload, always in [0, 1].
class DutyCycle {
public:
    constexpr DutyCycle() = default;
    /// Throws std::invalid_argument outside [0, 1] (or NaN).
    explicit DutyCycle(double value);

    static DutyCycle clamped(double value);

    [[nodiscard]] constexpr double value() const { return value_; }

    friend constexpr bool operator==(DutyCycle, DutyCycle) = default;

private:
    double value_ = 0.0;
};

/// Server power as an affine function of duty cycle: I + K * tau.
struct LinearPowerModel {
    double k_watts = 0.0; ///< dynamic range
    double i_watts = 0.0; ///< idle power

    [[nodiscard]] double operator()(DutyCycle tau) const { return i_watts + k_watts * tau.value(); }
    [[nodiscard]] double max_watts() const { return i_watts + k_watts; }
    void validate() const;
};

enum class InterfaceKind {
    Cgroups,
    UserspaceIdleInjection,
    XenSchedCredit,
    CpufreqUserspace,
    Rapl,
    PowerClamp,
};

std::span<const InterfaceKind> all_interface_kinds();
std::string_view to_string(InterfaceKind kind);
std::optional<InterfaceKind> parse_interface_kind(std::string_view name);
/// Comma-separated list of accepted interface names, for error messages.
std::string interface_kind_names();

/// Interfaces that throttle by idle cycle injection and reach the full
/// idle-to-max range (PowerClamp injects idle too but is capped at 50%).
bool spans_full_range(InterfaceKind kind);
bool uses_idle_injection(InterfaceKind kind);

/// Block-mean noise is specified as the standard deviation of a mean over
/// this many seconds; shorter averaging windows scale up as 1/sqrt(dt).
inline constexpr double kNoiseReferenceSeconds = 1.0;

struct NoiseProfile {
    double base_watts = 0.0;
    /// Elevated sigma at integer-core allocation boundaries (0 = none).
    double boundary_watts = 0.0;
    /// Width in tau over which the boundary elevation fades out.
    double boundary_halfwidth = 0.0;
    /// Tau distance from 0 and 1 over which noise tapers linearly to zero.
    double end_taper = 0.0;
};

struct InterfaceParams {
    InterfaceKind kind = InterfaceKind::UserspaceIdleInjection;
    LinearPowerModel base;
    double knee_tau = 0.0;        ///< active-mode cutover
    double knee_dip = 0.0;        ///< depth of the sub-knee dip, fraction of K
    double low_pstate = 1.0;      ///< average p-state at tau = 0 for ICI ramps
    double floor_fraction = 0.0;  ///< lowest reachable fraction of K
    int n_levels = 0;             ///< discrete setpoints, 0 = continuous
    NoiseProfile noise;
    int n_cores = 6;
    /// Normalized power at interior core boundaries k/n_cores (Xen only).
    std::vector<double> boundary_levels;
    double plateau_halfwidth = 0.0;
    double accounting_period = 0.1;
    double active_exponent = 2.0;
    double c1_share = 0.0; ///< fraction of idle time spent in C1 rather than C6

    void validate() const;
};

/// Stock interface characteristic for the given kind on a server whose
/// idle/max envelope is `model`.
InterfaceParams default_params(InterfaceKind kind, const LinearPowerModel& model);

/// Named per-server calibrations: "r320-cluster" (default) and "r320-methods".
std::optional<LinearPowerModel> calibration_preset(std::string_view name);
std::span<const std::string_view> calibration_preset_names();

struct ResidencyProfile {
    double busy_frac = 0.0;
    double pstate_avg = 0.0; ///< f / f_max averaged over busy time
    double c1_frac = 0.0;
    double c6_frac = 0.0;

    [[nodiscard]] bool valid(double tol = 1e-9) const;
};

/// Per-state power constants of the platform behind an interface.
struct StatePowers {
    double platform_base = 0.0;
    double p_c1 = 0.0;
    double p_c6 = 0.0;
    double p_min_active = 0.0;
    double p_max_active = 0.0;
    double exponent = 2.0;

    [[nodiscard]] double active(double pstate) const;
};

/// Lowest p-state as a fraction of maximum frequency.
inline constexpr double kLowestPstate = 0.5;

StatePowers state_powers(const InterfaceParams& params);

double mean_power(const InterfaceParams& params, DutyCycle tau);
double sigma_watts(const InterfaceParams& params, DutyCycle tau);
/// One power level held for `dt` seconds: mean plus block-scaled noise,
/// clamped to the physical envelope.
double sample_power(const InterfaceParams& params, DutyCycle tau, double dt, Rng& rng);
/// Power with the workload stopped (OS idle), independent of the interface.
double sample_idle_power(const InterfaceParams& params, double dt, Rng& rng);

ResidencyProfile residency(const InterfaceParams& params, DutyCycle tau);
/// Throws std::invalid_argument if the profile does not sum to one.
double power_from_residency(const ResidencyProfile& profile, const InterfaceParams& params);

/// Nearest available p-state (f / f_max) for a requested duty cycle on a
/// quantized DVFS interface.
double snapped_pstate(const InterfaceParams& params, DutyCycle tau);

} // namespace drsim
