#include "drsim/netsim.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <ostream>
#include <stdexcept>

namespace drsim {

void ChannelConfig::validate() const {
    if (!(loss_prob >= 0.0 && loss_prob < 1.0)) {
        throw std::invalid_argument("channel.loss must be in [0, 1)");
    }
    if (!(latency_mean >= 0.0)) {
        throw std::invalid_argument("channel.latency must be non-negative");
    }
    if (!(jitter >= 0.0)) {
        throw std::invalid_argument("channel.jitter must be non-negative");
    }
    if (!(rate > 0.0)) {
        throw std::invalid_argument("channel.rate must be positive");
    }
}

std::string_view payload_kind(const Payload& p) {
    struct Visitor {
        std::string_view operator()(const ErrorSample&) const { return "error"; }
        std::string_view operator()(ControlCommand c) const {
            return c == ControlCommand::StartLoad ? "start" : "stop";
        }
        std::string_view operator()(const SetpointUpdate&) const { return "setpoint"; }
    };
    return std::visit(Visitor{}, p);
}

MulticastChannel::MulticastChannel(ChannelConfig cfg, int subscribers) : cfg_(cfg), subscribers_(subscribers) {
    if (subscribers < 1) {
        throw std::invalid_argument("multicast channel needs at least one subscriber");
    }
}

std::vector<Delivery> MulticastChannel::publish(const Datagram& d, Rng& rng) {
    std::vector<Delivery> out;
    out.reserve(static_cast<std::size_t>(subscribers_));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int s = 0; s < subscribers_; ++s) {
        Delivery del{d.send_t, d.send_t + cfg_.latency_mean, s, d.payload, false};
        // Loss and jitter are both drawn for every subscriber so the
        // stream position does not depend on earlier outcomes.
        const double loss_draw = unit(rng);
        const double jitter_draw = unit(rng);
        del.dropped = loss_draw < cfg_.loss_prob;
        del.recv_t += cfg_.jitter * jitter_draw;
        out.push_back(del);
    }
    log_.insert(log_.end(), out.begin(), out.end());
    return out;
}

std::vector<Delivery> broadcast_sync_command(MulticastChannel& channel, double send_t, ControlCommand cmd, Rng& rng) {
    return channel.publish(Datagram{send_t, cmd}, rng);
}

void write_delivery_csv(std::ostream& os, std::span<const Delivery> log) {
    os << "send_t,recv_t,subscriber,kind,dropped\n";
    for (const auto& d : log) {
        if (d.dropped) {
            fmt::print(os, "{:.6f},,{},{},1\n", d.send_t, d.subscriber, payload_kind(d.payload));
        } else {
            fmt::print(os, "{:.6f},{:.6f},{},{},0\n", d.send_t, d.recv_t, d.subscriber, payload_kind(d.payload));
        }
    }
}

} // namespace drsim
