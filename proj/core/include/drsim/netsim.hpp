#pragma once

#include "drsim/rng.hpp"
#include "drsim/sensing.hpp"

#include <iosfwd>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace drsim {

struct ChannelConfig {
    double latency_mean = 0.001; ///< seconds
    double jitter = 0.0;         ///< extra delay, uniform on [0, jitter]
    double loss_prob = 0.0;
    double rate = 10.0;          ///< error samples per second

    void validate() const;
};

enum class ControlCommand { StartLoad, StopLoad };

/// New cluster target, streamed only when it changes.
struct SetpointUpdate {
    double p_set = 0.0;
};

using Payload = std::variant<ErrorSample, ControlCommand, SetpointUpdate>;

struct Datagram {
    double send_t = 0.0;
    Payload payload;
};

std::string_view payload_kind(const Payload& p);

struct Delivery {
    double send_t = 0.0;
    double recv_t = 0.0; ///< meaningless when dropped
    int subscriber = 0;
    Payload payload;
    bool dropped = false;
};

/// Simulated one-to-many datagram channel. Each subscriber independently
/// sees the datagram after latency + jitter, or loses it. No retransmission,
/// no ordering guarantee beyond what the delays produce.
class MulticastChannel {
public:
    MulticastChannel(ChannelConfig cfg, int subscribers);

    [[nodiscard]] const ChannelConfig& config() const { return cfg_; }
    [[nodiscard]] int subscribers() const { return subscribers_; }

    /// One delivery record per subscriber (dropped ones included). The
    /// records are also appended to the channel log.
    std::vector<Delivery> publish(const Datagram& d, Rng& rng);

    [[nodiscard]] const std::vector<Delivery>& log() const { return log_; }

private:
    ChannelConfig cfg_;
    int subscribers_;
    std::vector<Delivery> log_;
};

std::vector<Delivery> broadcast_sync_command(MulticastChannel& channel, double send_t, ControlCommand cmd, Rng& rng);

/// CSV `send_t,recv_t,subscriber,kind,dropped`.
void write_delivery_csv(std::ostream& os, std::span<const Delivery> log);

} // namespace drsim
