#pragma once

#include "drsim/config.hpp"
#include "drsim/control.hpp"
#include "drsim/netsim.hpp"
#include "drsim/power_model.hpp"
#include "drsim/sensing.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace drsim {

/// The requested schedule leaves the range the cluster can physically reach.
class InfeasibleSchedule : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ExperimentKind { Track, Sweep, Ramp, Characterize };

std::string_view to_string(ExperimentKind kind);

struct MetricRow {
    std::string metric;
    std::optional<double> tau; ///< empty for scalar metrics
    double value = 0.0;
};

struct ExperimentReport {
    ExperimentKind kind = ExperimentKind::Track;
    std::string name; ///< report subdirectory, e.g. "track" or "characterize-xen"
    std::uint64_t seed = 0;
    std::string config_snapshot;
    std::vector<ChannelTrace> traces;
    std::vector<ControllerTraceRow> controller;
    std::vector<Delivery> deliveries;
    std::vector<MetricRow> metrics;
    /// Free-form key/value lines for the summary (labels, units, flags).
    std::vector<std::pair<std::string, std::string>> notes;

    /// Scalar metric by name; throws std::out_of_range if absent.
    [[nodiscard]] double metric(std::string_view name) const;
    /// All per-tau rows of a metric, in report order.
    [[nodiscard]] std::vector<MetricRow> series(std::string_view name) const;
    [[nodiscard]] const ChannelTrace* trace(std::string_view channel) const;
};

/// Per-server I and K as seen through each server's own sensor: hold
/// tau = 0 then tau = 1 for `hold` seconds each.
std::vector<LinearPowerModel> calibrate_servers(const ClusterConfig& cluster, double hold, double window);

/// Throws InfeasibleSchedule if [B, B + D] is outside the cluster's reach.
void check_feasible(const ClusterConfig& cluster, const SetpointSchedule& schedule);

ExperimentReport run_tracking(const ExperimentConfig& cfg, const SetpointSchedule& schedule);
ExperimentReport run_tracking(const ExperimentConfig& cfg);
ExperimentReport run_model_accuracy_sweep(const ExperimentConfig& cfg);
/// Throws NoStepError when the cluster is already loaded at StartLoad.
ExperimentReport run_ramp(const ExperimentConfig& cfg);
ExperimentReport run_characterization(const ExperimentConfig& cfg, InterfaceKind interface);

} // namespace drsim
