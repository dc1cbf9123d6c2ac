#include "drsim/power_model.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace drsim {

namespace {

constexpr std::array kAllKinds{
    InterfaceKind::Cgroups,          InterfaceKind::UserspaceIdleInjection,
    InterfaceKind::XenSchedCredit,   InterfaceKind::CpufreqUserspace,
    InterfaceKind::Rapl,             InterfaceKind::PowerClamp,
};

constexpr std::array<std::string_view, 2> kPresetNames{"r320-cluster", "r320-methods"};

// Idle-state and DVFS-floor constants as fractions of the dynamic range K.
// The full-busy power at the lowest p-state sits at half the dynamic range,
// which is what caps cpufreq and RAPL.
constexpr double kC6Fraction = 0.05;
constexpr double kC1Fraction = 0.15;
constexpr double kDvfsFloorFraction = 0.5;

// Physical envelope for noisy samples.
constexpr double kEnvelopeLow = 0.95;
constexpr double kEnvelopeHigh = 1.05;

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

void require(bool ok, std::string_view what) {
    if (!ok) {
        throw std::invalid_argument(std::string(what));
    }
}

// Inverse of StatePowers::active over [kLowestPstate, 1].
double pstate_for_active_power(const StatePowers& sp, double p_active) {
    const double span = sp.p_max_active - sp.p_min_active;
    const double x = std::max(0.0, (p_active - sp.p_min_active) / span);
    return std::clamp(std::pow(x, 1.0 / sp.exponent), kLowestPstate, 1.0);
}

double idle_state_power(const StatePowers& sp, double c1_share) {
    return c1_share * sp.p_c1 + (1.0 - c1_share) * sp.p_c6;
}

// Piecewise-linear curve through integer-core boundaries with a flat
// plateau either side of each boundary.
double xen_fraction(const InterfaceParams& p, double tau) {
    const int n = p.n_cores;
    double prev_x = 0.0;
    double prev_y = 0.0;
    auto segment = [&](double x, double y) -> std::optional<double> {
        if (tau <= x) {
            if (x <= prev_x) {
                return y;
            }
            return prev_y + (y - prev_y) * (tau - prev_x) / (x - prev_x);
        }
        prev_x = x;
        prev_y = y;
        return std::nullopt;
    };
    for (int k = 1; k < n; ++k) {
        const double b = static_cast<double>(k) / n;
        const double level = p.boundary_levels[static_cast<std::size_t>(k - 1)];
        if (auto v = segment(b - p.plateau_halfwidth, level)) {
            return *v;
        }
        if (auto v = segment(b + p.plateau_halfwidth, level)) {
            return *v;
        }
    }
    return segment(1.0, 1.0).value_or(1.0);
}

double dvfs_fraction(const InterfaceParams& p, double pstate) {
    const double a = p.active_exponent;
    const double lo = std::pow(kLowestPstate, a);
    const double rel = (std::pow(pstate, a) - lo) / (1.0 - lo);
    return p.floor_fraction + (1.0 - p.floor_fraction) * rel;
}

double knee_dip(const InterfaceParams& p, double tau) {
    if (tau >= p.knee_tau || p.knee_tau <= 0.0) {
        return 0.0;
    }
    const double x = tau / p.knee_tau;
    return p.knee_dip * 4.0 * x * (1.0 - x);
}

double normalized_mean(const InterfaceParams& p, double tau) {
    switch (p.kind) {
    case InterfaceKind::UserspaceIdleInjection:
    case InterfaceKind::Cgroups:
        return tau - knee_dip(p, tau);
    case InterfaceKind::XenSchedCredit:
        return xen_fraction(p, tau);
    case InterfaceKind::CpufreqUserspace:
        return dvfs_fraction(p, snapped_pstate(p, DutyCycle::clamped(tau)));
    case InterfaceKind::Rapl:
        return p.floor_fraction + (1.0 - p.floor_fraction) * tau;
    case InterfaceKind::PowerClamp:
        return std::max(tau, p.floor_fraction);
    }
    return tau;
}

} // namespace

DutyCycle::DutyCycle(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw std::invalid_argument(fmt::format("duty cycle {} outside [0, 1]", value));
    }
}

DutyCycle DutyCycle::clamped(double value) {
    if (std::isnan(value)) {
        throw std::invalid_argument("duty cycle is NaN");
    }
    return DutyCycle{clamp01(value)};
}

void LinearPowerModel::validate() const {
    require(k_watts > 0.0, "k_watts must be positive");
    require(i_watts > 0.0, "i_watts must be positive");
}

std::span<const InterfaceKind> all_interface_kinds() { return kAllKinds; }

std::string_view to_string(InterfaceKind kind) {
    switch (kind) {
    case InterfaceKind::Cgroups: return "cgroups";
    case InterfaceKind::UserspaceIdleInjection: return "userspace";
    case InterfaceKind::XenSchedCredit: return "xen";
    case InterfaceKind::CpufreqUserspace: return "cpufreq";
    case InterfaceKind::Rapl: return "rapl";
    case InterfaceKind::PowerClamp: return "powerclamp";
    }
    return "unknown";
}

std::optional<InterfaceKind> parse_interface_kind(std::string_view name) {
    for (auto kind : kAllKinds) {
        if (to_string(kind) == name) {
            return kind;
        }
    }
    return std::nullopt;
}

std::string interface_kind_names() {
    std::string out;
    for (auto kind : kAllKinds) {
        if (!out.empty()) {
            out += ", ";
        }
        out += to_string(kind);
    }
    return out;
}

bool spans_full_range(InterfaceKind kind) {
    return kind == InterfaceKind::Cgroups || kind == InterfaceKind::UserspaceIdleInjection ||
           kind == InterfaceKind::XenSchedCredit;
}

bool uses_idle_injection(InterfaceKind kind) {
    return spans_full_range(kind) || kind == InterfaceKind::PowerClamp;
}

void InterfaceParams::validate() const {
    base.validate();
    require(knee_tau >= 0.0 && knee_tau <= 1.0, "knee_tau must be in [0, 1]");
    require(knee_dip >= 0.0 && knee_dip <= 0.25, "knee_dip must be in [0, 0.25]");
    require(low_pstate >= kLowestPstate && low_pstate <= 1.0, "low_pstate must be in [0.5, 1]");
    require(floor_fraction >= 0.0 && floor_fraction <= 1.0, "floor_fraction must be in [0, 1]");
    require(n_levels >= 0, "n_levels must be non-negative");
    require(n_levels != 1, "n_levels must be 0 (continuous) or at least 2");
    require(noise.base_watts >= 0.0 && noise.boundary_watts >= 0.0, "sigma_watts must be non-negative");
    require(noise.boundary_halfwidth >= 0.0 && noise.end_taper >= 0.0 && noise.end_taper < 0.5,
            "noise widths out of range");
    require(accounting_period > 0.0, "accounting_period must be positive");
    require(active_exponent > 0.0, "active_exponent must be positive");
    require(c1_share >= 0.0 && c1_share <= 1.0, "c1_share must be in [0, 1]");
    require(n_cores >= 1, "n_cores must be at least 1");
    if (kind == InterfaceKind::CpufreqUserspace) {
        require(n_levels >= 2, "cpufreq needs at least two p-state levels");
    }
    if (kind == InterfaceKind::XenSchedCredit) {
        require(boundary_levels.size() == static_cast<std::size_t>(n_cores - 1),
                "xen boundary_levels must have n_cores - 1 entries");
        require(plateau_halfwidth >= 0.0 && plateau_halfwidth < 0.5 / n_cores,
                "plateau_halfwidth must be narrower than a core step");
        double prev = 0.0;
        for (double level : boundary_levels) {
            require(level >= prev && level <= 1.0, "xen boundary_levels must be non-decreasing in [0, 1]");
            prev = level;
        }
    }
}

InterfaceParams default_params(InterfaceKind kind, const LinearPowerModel& model) {
    InterfaceParams p;
    p.kind = kind;
    p.base = model;
    switch (kind) {
    case InterfaceKind::UserspaceIdleInjection:
        p.knee_tau = 0.2;
        p.knee_dip = 0.0096;
        p.low_pstate = 0.85;
        p.noise.base_watts = 0.4;
        p.accounting_period = 0.1;
        p.c1_share = 0.05;
        break;
    case InterfaceKind::Cgroups:
        p.knee_tau = 0.7;
        p.knee_dip = 0.045;
        p.low_pstate = 0.75;
        p.noise.base_watts = 0.7;
        p.accounting_period = 0.1;
        p.c1_share = 0.10;
        break;
    case InterfaceKind::XenSchedCredit:
        // Synthetic breakpoints: the measured curve is only known to be
        // monotone, full-range and strongly nonlinear.
        p.n_cores = 6;
        p.boundary_levels = {0.095, 0.185, 0.28, 0.42, 0.63};
        p.plateau_halfwidth = 0.02;
        p.noise = NoiseProfile{1.5, 4.0, 0.03, 0.05};
        p.accounting_period = 0.03;
        p.c1_share = 0.15;
        break;
    case InterfaceKind::CpufreqUserspace:
        p.floor_fraction = 0.5;
        p.n_levels = 12;
        p.noise.base_watts = 0.15;
        p.accounting_period = 0.1;
        break;
    case InterfaceKind::Rapl:
        p.floor_fraction = 0.5;
        p.noise.base_watts = 0.15;
        p.accounting_period = 0.1;
        break;
    case InterfaceKind::PowerClamp:
        p.floor_fraction = 0.5;
        p.noise.base_watts = 2.0;
        p.accounting_period = 0.1;
        break;
    }
    return p;
}

std::optional<LinearPowerModel> calibration_preset(std::string_view name) {
    // Cluster figures: 145 W range at 50% of a 290 W maximum, over four servers.
    if (name == "r320-cluster") {
        return LinearPowerModel{36.25, 36.25};
    }
    // Single-server bench: ~55 W idle, ~85 W fully loaded.
    if (name == "r320-methods") {
        return LinearPowerModel{30.0, 55.0};
    }
    return std::nullopt;
}

std::span<const std::string_view> calibration_preset_names() { return kPresetNames; }

bool ResidencyProfile::valid(double tol) const {
    auto in01 = [tol](double x) { return x >= -tol && x <= 1.0 + tol; };
    return in01(busy_frac) && in01(pstate_avg) && in01(c1_frac) && in01(c6_frac) &&
           std::abs(busy_frac + c1_frac + c6_frac - 1.0) <= tol;
}

double StatePowers::active(double pstate) const {
    return p_min_active + (p_max_active - p_min_active) * std::pow(pstate, exponent);
}

StatePowers state_powers(const InterfaceParams& params) {
    const double k = params.base.k_watts;
    StatePowers sp;
    sp.exponent = params.active_exponent;
    sp.p_c6 = kC6Fraction * k;
    sp.p_c1 = kC1Fraction * k;
    sp.platform_base = params.base.i_watts - sp.p_c6;
    sp.p_max_active = k + sp.p_c6;
    const double p_lowest = sp.p_c6 + kDvfsFloorFraction * k;
    const double span = (sp.p_max_active - p_lowest) / (1.0 - std::pow(kLowestPstate, sp.exponent));
    sp.p_min_active = sp.p_max_active - span;
    return sp;
}

double snapped_pstate(const InterfaceParams& params, DutyCycle tau) {
    if (params.n_levels < 2) {
        return std::max(tau.value(), kLowestPstate);
    }
    const double step = (1.0 - kLowestPstate) / (params.n_levels - 1);
    const double j = std::clamp(std::round((tau.value() - kLowestPstate) / step), 0.0,
                                static_cast<double>(params.n_levels - 1));
    return kLowestPstate + step * j;
}

double mean_power(const InterfaceParams& params, DutyCycle tau) {
    const double f = clamp01(normalized_mean(params, tau.value()));
    return params.base.i_watts + params.base.k_watts * f;
}

double sigma_watts(const InterfaceParams& params, DutyCycle tau) {
    const auto& n = params.noise;
    const double t = tau.value();
    double sigma = n.base_watts;
    if (n.boundary_watts > n.base_watts && n.boundary_halfwidth > 0.0 && params.n_cores > 1) {
        double d = 1.0;
        for (int k = 1; k < params.n_cores; ++k) {
            d = std::min(d, std::abs(t - static_cast<double>(k) / params.n_cores));
        }
        if (d < n.boundary_halfwidth) {
            sigma += (n.boundary_watts - n.base_watts) * (1.0 - d / n.boundary_halfwidth);
        }
    }
    if (n.end_taper > 0.0) {
        sigma *= std::min({1.0, t / n.end_taper, (1.0 - t) / n.end_taper});
    }
    return sigma;
}

namespace {

double noisy(const InterfaceParams& params, double mean, double sigma, double dt, Rng& rng) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("sample_power: dt must be positive");
    }
    double w = mean;
    if (sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, sigma * std::sqrt(kNoiseReferenceSeconds / dt));
        w += noise(rng);
    }
    return std::clamp(w, kEnvelopeLow * params.base.i_watts, kEnvelopeHigh * params.base.max_watts());
}

} // namespace

double sample_power(const InterfaceParams& params, DutyCycle tau, double dt, Rng& rng) {
    return noisy(params, mean_power(params, tau), sigma_watts(params, tau), dt, rng);
}

double sample_idle_power(const InterfaceParams& params, double dt, Rng& rng) {
    return noisy(params, params.base.i_watts, sigma_watts(params, DutyCycle{0.0}), dt, rng);
}

ResidencyProfile residency(const InterfaceParams& params, DutyCycle tau) {
    const double t = tau.value();
    ResidencyProfile r;
    auto split_idle = [&](double busy) {
        r.busy_frac = busy;
        const double idle = 1.0 - busy;
        r.c1_frac = idle * params.c1_share;
        r.c6_frac = idle - r.c1_frac;
    };
    const StatePowers sp = state_powers(params);

    switch (params.kind) {
    case InterfaceKind::UserspaceIdleInjection:
    case InterfaceKind::Cgroups:
        split_idle(t);
        r.pstate_avg = t >= params.knee_tau
                           ? 1.0
                           : params.low_pstate + (1.0 - params.low_pstate) * t / params.knee_tau;
        break;
    case InterfaceKind::XenSchedCredit: {
        split_idle(t);
        // Average p-state implied by the measured curve and the state powers.
        if (t <= 0.0) {
            r.pstate_avg = kLowestPstate;
        } else {
            const double target = mean_power(params, tau);
            const double idle = (1.0 - t) * idle_state_power(sp, params.c1_share);
            r.pstate_avg = pstate_for_active_power(sp, (target - sp.platform_base - idle) / t);
        }
        break;
    }
    case InterfaceKind::PowerClamp:
        split_idle(std::max(t, params.floor_fraction));
        r.pstate_avg = 1.0;
        break;
    case InterfaceKind::CpufreqUserspace:
        split_idle(1.0);
        r.pstate_avg = snapped_pstate(params, tau);
        break;
    case InterfaceKind::Rapl:
        split_idle(1.0);
        r.pstate_avg = pstate_for_active_power(sp, mean_power(params, tau) - sp.platform_base);
        break;
    }
    return r;
}

double power_from_residency(const ResidencyProfile& profile, const InterfaceParams& params) {
    if (!profile.valid()) {
        throw std::invalid_argument(fmt::format(
            "residency profile invalid: busy {} + c1 {} + c6 {} must sum to 1 with fields in [0, 1]",
            profile.busy_frac, profile.c1_frac, profile.c6_frac));
    }
    const StatePowers sp = state_powers(params);
    return sp.platform_base + profile.busy_frac * sp.active(profile.pstate_avg) +
           profile.c1_frac * sp.p_c1 + profile.c6_frac * sp.p_c6;
}

} // namespace drsim
