#include "drsim/control.hpp"

#include "gen.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace drsim;

TEST_CASE("setpoint follows D * s + B") {
    const SetpointSchedule sched(145.0, 145.0, {{0.0, 0.0}, {10.0, 1.0}, {20.0, 0.5}});
    CHECK(sched.setpoint_at(0.0) == 145.0);
    CHECK(sched.setpoint_at(9.99) == 145.0);
    CHECK(sched.setpoint_at(10.0) == 290.0);
    CHECK(setpoint_at(sched, 25.0) == 217.5);
    CHECK(sched.setpoint_at(1e6) == 217.5);
    CHECK(sched.min_setpoint() == 145.0);
    CHECK(sched.max_setpoint() == 290.0);
    CHECK_THROWS_AS((void)sched.setpoint_at(-0.1), std::out_of_range);
}

TEST_CASE("schedule validation") {
    CHECK_THROWS_AS(SetpointSchedule(145.0, 145.0, {}), std::invalid_argument);
    CHECK_THROWS_AS(SetpointSchedule(145.0, 145.0, {{0.0, 0.1}, {0.0, 0.2}}), std::invalid_argument);
    CHECK_THROWS_AS(SetpointSchedule(145.0, 145.0, {{0.0, 1.2}}), std::invalid_argument);
    CHECK_THROWS_AS(SetpointSchedule(-1.0, 145.0, {{0.0, 0.5}}), std::invalid_argument);
}

TEST_CASE("integrator at rest and at its bounds") {
    IntegralControllerState s{DutyCycle{0.4}, 0.002, false, false};
    CHECK(integral_update(s, ErrorSample{0.0, 0.0}).tau.value() == 0.4);
    CHECK(integral_update(s, ErrorSample{0.0, 50.0}).tau.value() == doctest::Approx(0.5));

    s.tau = DutyCycle{1.0};
    const auto high = integral_update(s, ErrorSample{0.0, 80.0});
    CHECK(high.tau.value() == 1.0);
    CHECK(high.saturated_high);

    s.tau = DutyCycle{0.0};
    const auto low = integral_update(s, ErrorSample{0.0, -80.0});
    CHECK(low.tau.value() == 0.0);
    CHECK(low.saturated_low);
}

TEST_CASE("tau stays in the unit interval under arbitrary error streams (fuzz)") {
    testing::Gen gen(21);
    for (int trial = 0; trial < 500; ++trial) {
        IntegralControllerState s{DutyCycle{gen.uniform(0.0, 1.0)}, gen.uniform(0.0, 0.05), false, false};
        for (double e : gen.error_stream(200)) {
            s = integral_update(s, ErrorSample{0.0, e});
            REQUIRE(s.tau.value() >= 0.0);
            REQUIRE(s.tau.value() <= 1.0);
        }
    }
}

TEST_CASE("anti-windup: one sign flip moves tau off the bound immediately") {
    testing::Gen gen(22);
    for (int trial = 0; trial < 200; ++trial) {
        IntegralControllerState s{DutyCycle{0.5}, gen.uniform(1e-4, 0.01), false, false};
        const double sign = gen.coin() ? 1.0 : -1.0;
        for (int k = 0; k < 1000; ++k) s = integral_update(s, ErrorSample{0.0, sign * gen.uniform(1.0, 500.0)});
        const double at_bound = s.tau.value();
        CHECK(at_bound == (sign > 0 ? 1.0 : 0.0));
        s = integral_update(s, ErrorSample{0.0, -sign * 10.0});
        if (sign > 0) {
            CHECK(s.tau.value() < at_bound);
        } else {
            CHECK(s.tau.value() > at_bound);
        }
    }
}

TEST_CASE("open-loop inversion") {
    const LinearPowerModel m{36.25, 36.25};
    CHECK(open_loop_tau(m, 36.25).value() == 0.0);
    CHECK(open_loop_tau(m, 72.5).value() == 1.0);
    CHECK(open_loop_tau(m, 54.375).value() == doctest::Approx(0.5));
    CHECK(open_loop_tau(m, 10.0).value() == 0.0);
    CHECK(open_loop_tau(m, 500.0).value() == 1.0);
    CHECK_THROWS_AS(open_loop_tau(m, std::nan("")), std::invalid_argument);
}

TEST_CASE("open-loop inversion round-trips through the userspace mean curve") {
    const LinearPowerModel m = *calibration_preset("r320-cluster");
    const auto p = default_params(InterfaceKind::UserspaceIdleInjection, m);
    for (int j = 0; j <= 1000; ++j) {
        const double target = m.i_watts + m.k_watts * j / 1000.0;
        CHECK(std::abs(mean_power(p, open_loop_tau(m, target)) - target) <= 0.5);
    }
}

TEST_CASE("loop gain") { CHECK(loop_gain(0.002, 4, 36.25) == doctest::Approx(0.29)); }

TEST_CASE("controller CSV layout") {
    std::ostringstream os;
    std::vector<ControllerTraceRow> rows{{0.101, 2, 12.5, 0.025}};
    write_controller_csv(os, rows);
    CHECK(os.str() == "t,server,e_watts,tau\n0.1010,2,12.500000,0.025000\n");
}
