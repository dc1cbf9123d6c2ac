#pragma once

#include "drsim/control.hpp"
#include "drsim/netsim.hpp"
#include "drsim/power_model.hpp"
#include "drsim/sensing.hpp"
#include "drsim/stats.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace drsim {

/// Invalid or unknown configuration entry. `field()` is "section.key".
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& message);

    [[nodiscard]] const std::string& field() const { return field_; }

private:
    std::string field_;
};

enum class ControllerMode { Integral, OpenLoop };

std::optional<ControllerMode> parse_controller_mode(std::string_view name);
std::string_view to_string(ControllerMode mode);

struct ClusterConfig {
    int n_servers = 4;
    InterfaceKind interface = InterfaceKind::UserspaceIdleInjection;
    std::string preset = "r320-cluster";
    /// Multiplier on every interface noise sigma; 0 disables model noise.
    double noise_scale = 1.0;
    std::uint64_t seed = 42;
    ChannelConfig channel;
    SensorConfig sensor;
    double gain = 0.0009;
    ControllerMode controller = ControllerMode::Integral;

    [[nodiscard]] LinearPowerModel model() const;
    [[nodiscard]] InterfaceParams server_params() const;
    [[nodiscard]] InterfaceParams server_params(InterfaceKind kind) const;
};

struct ScheduleConfig {
    /// Contract constants; unset means the preset's cluster range.
    std::optional<double> d_watts;
    std::optional<double> b_watts;
    double step = 10.0; ///< seconds per segment
    std::vector<double> signals{0.8, 0.1, 0.9, 0.2, 0.95, 0.05, 0.7, 0.05, 0.85, 0.15, 0.9, 0.1};
};

struct TrackConfig {
    double window = 0.1;
    double settle_window = 0.5; ///< re-averaging used for settling detection
    double settle_band = kDefaultSettleBand;
    double score_interval = 10.0;
    double calibration = 10.0; ///< per-point hold when measuring I and K
};

struct SweepConfig {
    int points = 100;
    double hold = 90.0;
    double window = 0.1;
    double calibration = 10.0;
};

struct RampConfig {
    double start = 2.0;
    double stop = 5.0;
    double duration = 8.0;
    double window = 0.1;
    bool initially_on = false;
};

struct CharacterizeConfig {
    int points = 101;
    double hold = 30.0;
    double window = 0.5;
    OutlierMode outlier = OutlierMode::Mad;
    double level_tolerance = 0.3; ///< watts between group means counted as one level
};

struct ExperimentConfig {
    ClusterConfig cluster;
    ScheduleConfig schedule;
    TrackConfig track;
    SweepConfig sweep;
    RampConfig ramp;
    CharacterizeConfig characterize;

    [[nodiscard]] double d_watts() const;
    [[nodiscard]] double b_watts() const;
    [[nodiscard]] SetpointSchedule make_schedule() const;

    /// Throws ConfigError naming the first offending field.
    void validate() const;
};

/// Parse INI text on top of `base`. Unknown sections or keys are errors.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {});
/// Throws ConfigError with field "config" when the file cannot be read.
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

/// Complete effective configuration in the same INI grammar, loadable by
/// parse_config.
std::string config_snapshot(const ExperimentConfig& cfg);

} // namespace drsim
