#include "drsim/netsim.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace drsim;

TEST_CASE("ideal channel delivers to every subscriber after the mean latency") {
    MulticastChannel ch(ChannelConfig{}, 4);
    Rng rng(1);
    const auto ds = ch.publish(Datagram{1.5, ErrorSample{1.5, 3.0}}, rng);
    REQUIRE(ds.size() == 4);
    for (int i = 0; i < 4; ++i) {
        CHECK(ds[static_cast<std::size_t>(i)].subscriber == i);
        CHECK_FALSE(ds[static_cast<std::size_t>(i)].dropped);
        CHECK(ds[static_cast<std::size_t>(i)].recv_t == doctest::Approx(1.501));
    }
    CHECK(ch.log().size() == 4);
}

TEST_CASE("certain loss drops every delivery") {
    ChannelConfig cfg;
    cfg.loss_prob = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    MulticastChannel ch(cfg, 3);
    Rng rng(2);
    for (int k = 0; k < 100; ++k) {
        for (const auto& d : ch.publish(Datagram{0.1 * k, ControlCommand::StartLoad}, rng)) CHECK(d.dropped);
    }
}

TEST_CASE("delivered fraction follows the binomial loss model") {
    ChannelConfig cfg;
    cfg.loss_prob = 0.1;
    MulticastChannel ch(cfg, 4);
    Rng rng(3);
    const int n = 10000;
    std::vector<int> delivered(4, 0);
    for (int k = 0; k < n; ++k) {
        for (const auto& d : ch.publish(Datagram{0.1 * k, ErrorSample{0.1 * k, 0.0}}, rng)) {
            delivered[static_cast<std::size_t>(d.subscriber)] += d.dropped ? 0 : 1;
        }
    }
    const double se = std::sqrt(0.9 * 0.1 / n);
    for (int c : delivered) {
        CHECK(std::abs(c / static_cast<double>(n) - 0.9) <= 3.0 * se);
    }
}

TEST_CASE("jitter stays within its bound and identical seeds repeat the schedule") {
    ChannelConfig cfg;
    cfg.latency_mean = 0.002;
    cfg.jitter = 0.005;
    cfg.loss_prob = 0.2;
    MulticastChannel a(cfg, 4);
    MulticastChannel b(cfg, 4);
    Rng ra(9);
    Rng rb(9);
    for (int k = 0; k < 500; ++k) {
        const Datagram d{0.1 * k, ErrorSample{0.1 * k, 1.0}};
        const auto da = a.publish(d, ra);
        const auto db = b.publish(d, rb);
        for (std::size_t i = 0; i < da.size(); ++i) {
            CHECK(da[i].recv_t == db[i].recv_t);
            CHECK(da[i].dropped == db[i].dropped);
            CHECK(da[i].recv_t >= d.send_t + 0.002);
            CHECK(da[i].recv_t <= d.send_t + 0.007 + 1e-12);
        }
    }
}

TEST_CASE("without jitter each subscriber sees send order") {
    ChannelConfig cfg;
    cfg.latency_mean = 0.05;
    MulticastChannel ch(cfg, 2);
    Rng rng(4);
    std::vector<double> last(2, -1.0);
    for (int k = 0; k < 200; ++k) {
        for (const auto& d : ch.publish(Datagram{0.01 * k, ErrorSample{}}, rng)) {
            CHECK(d.recv_t > last[static_cast<std::size_t>(d.subscriber)]);
            last[static_cast<std::size_t>(d.subscriber)] = d.recv_t;
        }
    }
}

TEST_CASE("sync broadcast reaches all servers at the same instant on an ideal channel") {
    MulticastChannel ch(ChannelConfig{}, 4);
    Rng rng(5);
    const auto ds = broadcast_sync_command(ch, 2.0, ControlCommand::StartLoad, rng);
    REQUIRE(ds.size() == 4);
    for (const auto& d : ds) {
        CHECK(d.recv_t == ds.front().recv_t);
        CHECK(std::get<ControlCommand>(d.payload) == ControlCommand::StartLoad);
    }
}

TEST_CASE("payload kinds and delivery CSV") {
    CHECK(payload_kind(ErrorSample{}) == "error");
    CHECK(payload_kind(ControlCommand::StartLoad) == "start");
    CHECK(payload_kind(ControlCommand::StopLoad) == "stop");
    CHECK(payload_kind(SetpointUpdate{200.0}) == "setpoint");

    std::vector<Delivery> log{{0.1, 0.101, 0, ErrorSample{}, false}, {0.1, 0.0, 1, ControlCommand::StopLoad, true}};
    std::ostringstream os;
    write_delivery_csv(os, log);
    CHECK(os.str() == "send_t,recv_t,subscriber,kind,dropped\n0.100000,0.101000,0,error,0\n0.100000,,1,stop,1\n");
}

TEST_CASE("channel config validation") {
    ChannelConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.rate = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = ChannelConfig{};
    cfg.jitter = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    CHECK_THROWS_AS(MulticastChannel(ChannelConfig{}, 0), std::invalid_argument);
}
