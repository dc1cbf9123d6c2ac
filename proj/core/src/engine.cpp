#include "drsim/engine.hpp"

#include "drsim/stats.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <queue>

namespace drsim {

std::string_view to_string(ExperimentKind kind) {
    switch (kind) {
    case ExperimentKind::Track: return "track";
    case ExperimentKind::Sweep: return "sweep";
    case ExperimentKind::Ramp: return "ramp";
    case ExperimentKind::Characterize: return "characterize";
    }
    return "unknown";
}

double ExperimentReport::metric(std::string_view name) const {
    for (const auto& m : metrics) {
        if (m.metric == name && !m.tau) {
            return m.value;
        }
    }
    throw std::out_of_range(fmt::format("report has no scalar metric '{}'", name));
}

std::vector<MetricRow> ExperimentReport::series(std::string_view name) const {
    std::vector<MetricRow> out;
    for (const auto& m : metrics) {
        if (m.metric == name && m.tau) {
            out.push_back(m);
        }
    }
    return out;
}

const ChannelTrace* ExperimentReport::trace(std::string_view channel) const {
    for (const auto& t : traces) {
        if (t.channel == channel) {
            return &t;
        }
    }
    return nullptr;
}

namespace {

std::int64_t to_ticks(double seconds, double rate) { return std::llround(seconds * rate); }

// First tick whose start is at or after `t`.
std::int64_t tick_at_or_after(double t, double rate) {
    return static_cast<std::int64_t>(std::ceil(t * rate - 1e-9));
}

std::string server_name(int i) { return fmt::format("server{}", i); }

// One simulated machine and its instrumented supply line. The power level is
// redrawn once per accounting period and immediately whenever the duty cycle
// or load state changes.
class Server {
public:
    Server(const ClusterConfig& cluster, InterfaceParams params, int index, std::string_view phase)
        : params_(std::move(params)),
          noise_(make_stream(cluster.seed, fmt::format("{}/{}/noise", phase, server_name(index)))),
          sensor_noise_(make_stream(cluster.seed, fmt::format("{}/{}/sensor", phase, server_name(index)))),
          rate_(cluster.sensor.raw_rate) {
        // The channel's systematic errors belong to the hardware, so every
        // phase of a run sees the same gain error.
        Rng hw = make_stream(cluster.seed, fmt::format("sensor/{}", server_name(index)));
        channel_ = make_channel(cluster.sensor, hw);
        period_ticks_ = std::max<std::int64_t>(1, to_ticks(params_.accounting_period, rate_));
    }

    [[nodiscard]] double tau() const { return tau_; }
    [[nodiscard]] const InterfaceParams& params() const { return params_; }

    void set_tau(double tau, std::int64_t tick) {
        if (tau != tau_) {
            tau_ = tau;
            next_draw_ = tick;
        }
    }

    void set_load(bool on, std::int64_t tick) {
        if (on != load_on_) {
            load_on_ = on;
            next_draw_ = tick;
        }
    }

    RawSample raw(std::int64_t tick) {
        if (tick >= next_draw_) {
            const double hold = static_cast<double>(period_ticks_) / rate_;
            level_ = load_on_ ? sample_power(params_, DutyCycle{tau_}, hold, noise_)
                              : sample_idle_power(params_, hold, noise_);
            next_draw_ = tick + period_ticks_;
        }
        return synthesize_raw(level_, static_cast<double>(tick) / rate_, channel_, sensor_noise_);
    }

private:
    InterfaceParams params_;
    Rng noise_;
    Rng sensor_noise_;
    SensorChannel channel_;
    double rate_;
    std::int64_t period_ticks_ = 1;
    double tau_ = 0.0;
    bool load_on_ = true;
    double level_ = 0.0;
    std::int64_t next_draw_ = 0;
};

// Drive the servers on the raw-sample clock for `n_ticks` ticks. `before`
// runs at the start of each tick; `on_window` receives each closed window
// (one sample per server, identical boundaries) with the tick that closed it.
template <typename Before, typename OnWindow>
void drive(std::vector<Server>& servers, std::int64_t n_ticks, double window, double rate, Before&& before,
           OnWindow&& on_window) {
    std::vector<BlockAverager> avg;
    avg.reserve(servers.size());
    for (std::size_t i = 0; i < servers.size(); ++i) {
        avg.emplace_back(window, 1.0 / rate);
    }
    std::vector<PowerSample> closed(servers.size());
    for (std::int64_t tick = 0; tick < n_ticks; ++tick) {
        before(tick);
        bool any = false;
        for (std::size_t i = 0; i < servers.size(); ++i) {
            if (auto s = avg[i].push(servers[i].raw(tick))) {
                closed[i] = *s;
                any = true;
            }
        }
        if (any) {
            on_window(closed, tick);
        }
    }
    bool any = false;
    for (std::size_t i = 0; i < servers.size(); ++i) {
        if (auto s = avg[i].flush()) {
            closed[i] = *s;
            any = true;
        }
    }
    if (any) {
        on_window(closed, n_ticks);
    }
}

struct PendingDelivery {
    std::int64_t tick;
    std::uint64_t seq;
    Delivery delivery;

    bool operator>(const PendingDelivery& o) const { return tick != o.tick ? tick > o.tick : seq > o.seq; }
};

// Datagrams in flight, released in (tick, publish order).
class DeliveryQueue {
public:
    explicit DeliveryQueue(double rate) : rate_(rate) {}

    void schedule(const std::vector<Delivery>& ds) {
        for (const auto& d : ds) {
            if (!d.dropped) {
                q_.push({tick_at_or_after(d.recv_t, rate_), seq_++, d});
            }
        }
    }

    template <typename Fn>
    void release(std::int64_t tick, Fn&& fn) {
        while (!q_.empty() && q_.top().tick <= tick) {
            const Delivery d = q_.top().delivery;
            q_.pop();
            fn(d);
        }
    }

private:
    double rate_;
    std::uint64_t seq_ = 0;
    std::priority_queue<PendingDelivery, std::vector<PendingDelivery>, std::greater<>> q_;
};

std::vector<Server> make_servers(const ClusterConfig& cluster, const InterfaceParams& params, std::string_view phase) {
    std::vector<Server> servers;
    servers.reserve(static_cast<std::size_t>(cluster.n_servers));
    for (int i = 0; i < cluster.n_servers; ++i) {
        servers.emplace_back(cluster, params, i, phase);
    }
    return servers;
}

void add_scalar(ExperimentReport& r, std::string name, double value) {
    r.metrics.push_back({std::move(name), std::nullopt, value});
}

void add_point(ExperimentReport& r, std::string name, double tau, double value) {
    r.metrics.push_back({std::move(name), tau, value});
}

std::vector<double> watts_of(const std::vector<PowerSample>& s) {
    std::vector<double> out;
    out.reserve(s.size());
    for (const auto& p : s) {
        out.push_back(p.watts);
    }
    return out;
}

ExperimentReport new_report(ExperimentKind kind, std::string name, const ExperimentConfig& cfg) {
    ExperimentReport r;
    r.kind = kind;
    r.name = std::move(name);
    r.seed = cfg.cluster.seed;
    r.config_snapshot = config_snapshot(cfg);
    return r;
}

double tau_grid(int j, int points) { return static_cast<double>(j) / static_cast<double>(points - 1); }

} // namespace

std::vector<LinearPowerModel> calibrate_servers(const ClusterConfig& cluster, double hold, double window) {
    auto servers = make_servers(cluster, cluster.server_params(), "calibration");
    const double rate = cluster.sensor.raw_rate;
    const std::int64_t hold_ticks = to_ticks(hold, rate);
    const auto windows_per_hold = static_cast<std::int64_t>(std::llround(hold / window));
    std::vector<std::array<double, 2>> sums(servers.size(), {0.0, 0.0});
    std::array<std::int64_t, 2> counts{0, 0};

    drive(
        servers, 2 * hold_ticks, window, rate,
        [&](std::int64_t tick) {
            if (tick == hold_ticks) {
                for (auto& s : servers) {
                    s.set_tau(1.0, tick);
                }
            }
        },
        [&](const std::vector<PowerSample>& w, std::int64_t) {
            const auto phase = static_cast<std::size_t>(std::llround(w[0].t_end / window) - 1 >= windows_per_hold);
            for (std::size_t i = 0; i < w.size(); ++i) {
                sums[i][phase] += w[i].watts;
            }
            ++counts[phase];
        });

    std::vector<LinearPowerModel> out;
    for (const auto& s : sums) {
        const double idle = s[0] / static_cast<double>(counts[0]);
        const double full = s[1] / static_cast<double>(counts[1]);
        out.push_back(LinearPowerModel{full - idle, idle});
    }
    return out;
}

void check_feasible(const ClusterConfig& cluster, const SetpointSchedule& schedule) {
    const auto params = cluster.server_params();
    double lo = mean_power(params, DutyCycle{0.0});
    double hi = lo;
    for (int j = 0; j <= 1000; ++j) {
        const double p = mean_power(params, DutyCycle{j / 1000.0});
        lo = std::min(lo, p);
        hi = std::max(hi, p);
    }
    const double n = cluster.n_servers;
    const double g = cluster.sensor.gain_error_bound;
    const double reach_lo = n * lo * (1.0 - g);
    const double reach_hi = n * hi * (1.0 + g);
    const double want_lo = schedule.min_setpoint();
    const double want_hi = schedule.max_setpoint();
    if (want_lo < reach_lo - 1e-9 || want_hi > reach_hi + 1e-9) {
        throw InfeasibleSchedule(fmt::format(
            "schedule spans [{:.2f}, {:.2f}] W but {} {} server(s) reach only [{:.2f}, {:.2f}] W", want_lo, want_hi,
            cluster.n_servers, to_string(cluster.interface), reach_lo, reach_hi));
    }
}

ExperimentReport run_tracking(const ExperimentConfig& cfg) { return run_tracking(cfg, cfg.make_schedule()); }

ExperimentReport run_tracking(const ExperimentConfig& cfg, const SetpointSchedule& schedule) {
    cfg.validate();
    const auto& cl = cfg.cluster;
    check_feasible(cl, schedule);

    const double rate = cl.sensor.raw_rate;
    const double window = cfg.track.window;
    const auto segs = schedule.segments();
    const double duration = segs.back().start_t + cfg.schedule.step;
    const std::int64_t n_ticks = to_ticks(duration, rate);
    const auto stride = static_cast<std::int64_t>(std::llround(1.0 / cl.channel.rate / window));
    const bool open_loop = cl.controller == ControllerMode::OpenLoop;
    const auto n = static_cast<std::size_t>(cl.n_servers);

    ExperimentReport report = new_report(ExperimentKind::Track, "track", cfg);

    std::vector<LinearPowerModel> models;
    if (open_loop) {
        models = calibrate_servers(cl, cfg.track.calibration, window);
    }

    auto servers = make_servers(cl, cl.server_params(), "track");
    std::vector<IntegralControllerState> ctrl(n, IntegralControllerState{DutyCycle{0.0}, cl.gain, true, false});
    MulticastChannel channel(cl.channel, cl.n_servers);
    Rng channel_rng = make_stream(cl.seed, "channel");
    DeliveryQueue queue(rate);

    std::vector<std::int64_t> segment_ticks;
    for (const auto& s : segs) {
        segment_ticks.push_back(to_ticks(s.start_t, rate));
    }

    std::vector<std::vector<PowerSample>> per_server(n);
    std::vector<PowerSample> cluster_trace;
    std::vector<PowerSample> setpoint_trace;
    std::vector<PowerSample> error_trace;
    std::size_t next_segment = 0;

    auto apply = [&](const Delivery& d, std::int64_t tick) {
        const auto i = static_cast<std::size_t>(d.subscriber);
        const double t = static_cast<double>(tick) / rate;
        if (const auto* e = std::get_if<ErrorSample>(&d.payload); e && !open_loop) {
            ctrl[i] = integral_update(ctrl[i], *e);
            servers[i].set_tau(ctrl[i].tau.value(), tick);
            report.controller.push_back({t, d.subscriber, e->e_watts, ctrl[i].tau.value()});
        } else if (const auto* u = std::get_if<SetpointUpdate>(&d.payload); u && open_loop) {
            const double s = schedule.d_watts() > 0.0 ? (u->p_set - schedule.b_watts()) / schedule.d_watts() : 0.0;
            const double target = models[i].i_watts + models[i].k_watts * s;
            const double tau = open_loop_tau(models[i], target).value();
            servers[i].set_tau(tau, tick);
            report.controller.push_back({t, d.subscriber, 0.0, tau});
        }
    };

    drive(
        servers, n_ticks, window, rate,
        [&](std::int64_t tick) {
            if (open_loop && next_segment < segment_ticks.size() && tick == segment_ticks[next_segment]) {
                const double t = static_cast<double>(tick) / rate;
                queue.schedule(channel.publish(Datagram{t, SetpointUpdate{schedule.setpoint_at(t)}}, channel_rng));
                ++next_segment;
            }
            queue.release(tick, [&](const Delivery& d) { apply(d, tick); });
        },
        [&](const std::vector<PowerSample>& w, std::int64_t tick) {
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                per_server[i].push_back(w[i]);
                sum += w[i].watts;
            }
            const double t_end = w[0].t_end;
            const PowerSample cluster{t_end, sum, window};
            cluster_trace.push_back(cluster);
            setpoint_trace.push_back({t_end, schedule.setpoint_at(t_end - 0.5 * window), window});
            const ErrorSample e = compute_error(schedule.setpoint_at(t_end), cluster);
            error_trace.push_back({t_end, e.e_watts, window});
            const auto k = static_cast<std::int64_t>(cluster_trace.size());
            if (!open_loop && k % stride == 0 && tick < n_ticks) {
                queue.schedule(channel.publish(Datagram{t_end, e}, channel_rng));
            }
        });

    report.deliveries = channel.log();
    for (std::size_t i = 0; i < n; ++i) {
        report.traces.push_back({server_name(static_cast<int>(i)), per_server[i]});
    }
    report.traces.push_back({"cluster", cluster_trace});
    report.traces.push_back({"setpoint", setpoint_trace});
    report.traces.push_back({"error", error_trace});

    // Tracking quality.
    const auto meas = watts_of(cluster_trace);
    const auto set = watts_of(setpoint_trace);
    double ss = 0.0;
    double sa = 0.0;
    for (std::size_t k = 0; k < meas.size(); ++k) {
        ss += (set[k] - meas[k]) * (set[k] - meas[k]);
        sa += std::abs(set[k] - meas[k]);
    }
    const double n_win = static_cast<double>(meas.size());

    const auto factor = static_cast<std::size_t>(std::llround(cfg.track.settle_window / window));
    const auto coarse = reblock(cluster_trace, factor);
    const double band = cfg.track.settle_band * schedule.d_watts();
    double settle_max = 0.0;
    for (std::size_t k = 0; k < segs.size(); ++k) {
        const double t_to = k + 1 < segs.size() ? segs[k + 1].start_t : duration;
        const double target = schedule.d_watts() * segs[k].s + schedule.b_watts();
        settle_max = std::max(settle_max, settling_time(coarse, segs[k].start_t, t_to, target, band));
    }

    const auto per_interval = static_cast<std::size_t>(std::llround(cfg.track.score_interval / window));
    const double cluster_score = precision_score(set, meas, schedule.b_watts(), per_interval);
    double score = cluster_score;
    std::vector<double> server_scores;
    if (open_loop) {
        score = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> target;
            target.reserve(set.size());
            for (double p : set) {
                const double s = schedule.d_watts() > 0.0 ? (p - schedule.b_watts()) / schedule.d_watts() : 0.0;
                target.push_back(models[i].i_watts + models[i].k_watts * s);
            }
            const double si = precision_score(target, watts_of(per_server[i]), models[i].i_watts, per_interval);
            server_scores.push_back(si);
            score = std::min(score, si);
        }
    }

    add_scalar(report, "precision_score", score);
    add_scalar(report, "precision_score_cluster", cluster_score);
    for (std::size_t i = 0; i < server_scores.size(); ++i) {
        add_scalar(report, fmt::format("precision_score_server{}", i), server_scores[i]);
    }
    add_scalar(report, "settling_time_s", settle_max);
    add_scalar(report, "rms_tracking_error_watts", std::sqrt(ss / n_win));
    add_scalar(report, "mean_abs_tracking_error_watts", sa / n_win);
    add_scalar(report, "loop_gain", loop_gain(cl.gain, cl.n_servers, cl.model().k_watts));
    for (std::size_t i = 0; i < models.size(); ++i) {
        add_scalar(report, fmt::format("i_hat_server{}_watts", i), models[i].i_watts);
        add_scalar(report, fmt::format("k_hat_server{}_watts", i), models[i].k_watts);
    }
    std::size_t dropped = 0;
    for (const auto& d : report.deliveries) {
        dropped += d.dropped ? 1 : 0;
    }
    add_scalar(report, "datagrams_dropped", static_cast<double>(dropped));

    report.notes = {
        {"controller", std::string(to_string(cl.controller))},
        {"interface", std::string(to_string(cl.interface))},
        {"precision_formula", std::string(kPrecisionFormulaTag)},
        {"score_interval_s", fmt::format("{}", cfg.track.score_interval)},
        {"settle_window_s", fmt::format("{}", cfg.track.settle_window)},
        {"settle_band", fmt::format("{} of D", cfg.track.settle_band)},
        {"contract", fmt::format("D = {} W, B = {} W", schedule.d_watts(), schedule.b_watts())},
    };
    return report;
}

ExperimentReport run_model_accuracy_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    ClusterConfig one = cfg.cluster;
    one.n_servers = 1;
    const auto& sw = cfg.sweep;
    const double rate = one.sensor.raw_rate;

    ExperimentReport report = new_report(ExperimentKind::Sweep, "sweep", cfg);
    const LinearPowerModel model = calibrate_servers(one, sw.calibration, sw.window).front();

    auto servers = make_servers(one, one.server_params(), "sweep");
    const std::int64_t hold_ticks = to_ticks(sw.hold, rate);
    const auto per_hold = static_cast<std::size_t>(std::llround(sw.hold / sw.window));
    std::vector<PowerSample> trace;

    drive(
        servers, hold_ticks * sw.points, sw.window, rate,
        [&](std::int64_t tick) {
            if (tick % hold_ticks == 0) {
                servers[0].set_tau(tau_grid(static_cast<int>(tick / hold_ticks), sw.points), tick);
            }
        },
        [&](const std::vector<PowerSample>& w, std::int64_t) { trace.push_back(w[0]); });

    RmseCurve curve;
    curve.window = sw.window;
    std::vector<double> group;
    for (int j = 0; j < sw.points; ++j) {
        const double tau = tau_grid(j, sw.points);
        group.clear();
        for (std::size_t k = static_cast<std::size_t>(j) * per_hold; k < (static_cast<std::size_t>(j) + 1) * per_hold;
             ++k) {
            group.push_back(trace[k].watts);
        }
        curve.points.push_back({tau, rmse(group, model(DutyCycle{tau})), group.size()});
    }

    report.traces.push_back({"server0", std::move(trace)});
    for (const auto& p : curve.points) {
        add_point(report, "rmse_watts", p.tau, p.rmse_watts);
    }
    double min_rmse = curve.points.front().rmse_watts;
    for (const auto& p : curve.points) {
        min_rmse = std::min(min_rmse, p.rmse_watts);
    }
    add_scalar(report, "max_rmse_watts", curve.max_rmse());
    add_scalar(report, "min_rmse_watts", min_rmse);
    add_scalar(report, "samples_per_tau", static_cast<double>(per_hold));
    add_scalar(report, "window_s", sw.window);
    add_scalar(report, "i_hat_watts", model.i_watts);
    add_scalar(report, "k_hat_watts", model.k_watts);
    report.notes = {
        {"interface", std::string(to_string(one.interface))},
        {"prediction", "I_hat + K_hat * tau, both measured through the server's own sensor"},
    };
    return report;
}

ExperimentReport run_ramp(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto& cl = cfg.cluster;
    const auto& rc = cfg.ramp;
    const double rate = cl.sensor.raw_rate;
    const auto n = static_cast<std::size_t>(cl.n_servers);

    ExperimentReport report = new_report(ExperimentKind::Ramp, "ramp", cfg);
    auto servers = make_servers(cl, cl.server_params(), "ramp");
    for (auto& s : servers) {
        s.set_tau(1.0, 0);
        s.set_load(rc.initially_on, 0);
    }
    MulticastChannel channel(cl.channel, cl.n_servers);
    Rng channel_rng = make_stream(cl.seed, "channel");
    DeliveryQueue queue(rate);
    const std::int64_t start_tick = to_ticks(rc.start, rate);
    const std::int64_t stop_tick = to_ticks(rc.stop, rate);

    std::vector<std::vector<PowerSample>> per_server(n);
    std::vector<PowerSample> cluster_trace;

    drive(
        servers, to_ticks(rc.duration, rate), rc.window, rate,
        [&](std::int64_t tick) {
            if (tick == start_tick || tick == stop_tick) {
                const auto cmd = tick == start_tick ? ControlCommand::StartLoad : ControlCommand::StopLoad;
                queue.schedule(broadcast_sync_command(channel, static_cast<double>(tick) / rate, cmd, channel_rng));
            }
            queue.release(tick, [&](const Delivery& d) {
                if (const auto* c = std::get_if<ControlCommand>(&d.payload)) {
                    servers[static_cast<std::size_t>(d.subscriber)].set_load(*c == ControlCommand::StartLoad, tick);
                }
            });
        },
        [&](const std::vector<PowerSample>& w, std::int64_t) {
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                per_server[i].push_back(w[i]);
                sum += w[i].watts;
            }
            cluster_trace.push_back({w[0].t_end, sum, rc.window});
        });

    report.deliveries = channel.log();
    for (std::size_t i = 0; i < n; ++i) {
        report.traces.push_back({server_name(static_cast<int>(i)), per_server[i]});
    }
    report.traces.push_back({"cluster", cluster_trace});

    std::vector<PowerSample> up;
    std::vector<PowerSample> down;
    const double mid = 0.5 * (rc.start + rc.stop);
    for (const auto& s : cluster_trace) {
        if (s.t_end <= rc.stop + 1e-9) {
            up.push_back(s);
        }
        if (s.t_end > mid) {
            down.push_back(s);
        }
    }
    const RampMetrics rise = ramp_metrics(up, cfg.track.settle_band);
    add_scalar(report, "dynamic_range_watts", rise.dynamic_range);
    add_scalar(report, "ramp_rate_w_per_s", rise.ramp_rate);
    add_scalar(report, "rise_time_s", rise.rise_time);
    add_scalar(report, "settling_time_s", rise.settling_time);
    const RampMetrics fall = ramp_metrics(down, cfg.track.settle_band);
    add_scalar(report, "dynamic_range_down_watts", fall.dynamic_range);
    add_scalar(report, "ramp_rate_down_w_per_s", fall.ramp_rate);
    add_scalar(report, "fall_time_s", fall.rise_time);
    add_scalar(report, "settling_time_down_s", fall.settling_time);
    report.notes = {
        {"interface", std::string(to_string(cl.interface))},
        {"start_load_s", fmt::format("{}", rc.start)},
        {"stop_load_s", fmt::format("{}", rc.stop)},
    };
    return report;
}

ExperimentReport run_characterization(const ExperimentConfig& cfg_in, InterfaceKind interface) {
    ExperimentConfig cfg = cfg_in;
    cfg.cluster.interface = interface;
    cfg.validate();
    ClusterConfig one = cfg.cluster;
    one.n_servers = 1;
    const auto& cc = cfg.characterize;
    const double rate = one.sensor.raw_rate;
    const auto params = one.server_params();

    ExperimentReport report =
        new_report(ExperimentKind::Characterize, fmt::format("characterize-{}", to_string(interface)), cfg);
    auto servers = make_servers(one, params, "characterize");
    const std::int64_t hold_ticks = to_ticks(cc.hold, rate);
    const auto per_hold = static_cast<std::size_t>(std::llround(cc.hold / cc.window));
    std::vector<PowerSample> trace;

    // Group 0 is an OS-idle baseline with the workload stopped; group j + 1
    // holds tau_j.
    servers[0].set_load(false, 0);
    drive(
        servers, hold_ticks * (cc.points + 1), cc.window, rate,
        [&](std::int64_t tick) {
            if (tick % hold_ticks == 0 && tick > 0) {
                servers[0].set_load(true, tick);
                servers[0].set_tau(tau_grid(static_cast<int>(tick / hold_ticks) - 1, cc.points), tick);
            }
        },
        [&](const std::vector<PowerSample>& w, std::int64_t) { trace.push_back(w[0]); });

    auto group = [&](std::size_t g) {
        std::vector<double> out;
        for (std::size_t k = g * per_hold; k < (g + 1) * per_hold; ++k) {
            out.push_back(trace[k].watts);
        }
        return out;
    };

    const GroupSummary idle = summarize_group(group(0), cc.outlier);
    std::vector<double> taus;
    std::vector<double> means;
    std::vector<double> busy;
    for (int j = 0; j < cc.points; ++j) {
        const double tau = tau_grid(j, cc.points);
        const GroupSummary g = summarize_group(group(static_cast<std::size_t>(j) + 1), cc.outlier);
        const ResidencyProfile r = residency(params, DutyCycle{tau});
        taus.push_back(tau);
        means.push_back(g.mean);
        busy.push_back(r.busy_frac);
        add_point(report, "mean_watts", tau, g.mean);
        add_point(report, "stddev_watts", tau, g.stddev);
        add_point(report, "band_lo_watts", tau, g.band.lo);
        add_point(report, "band_hi_watts", tau, g.band.hi);
        add_point(report, "n_rejected", tau, static_cast<double>(g.band.n_rejected));
        add_point(report, "busy_frac", tau, r.busy_frac);
        add_point(report, "pstate_avg", tau, r.pstate_avg);
        add_point(report, "c1_frac", tau, r.c1_frac);
        add_point(report, "c6_frac", tau, r.c6_frac);
    }

    const LinearFit fit = linear_fit(taus, means);
    const LinearFit busy_fit = linear_fit(taus, busy);
    const auto [mn, mx] = std::minmax_element(means.begin(), means.end());
    const double full_range = means.back() - idle.mean;
    add_scalar(report, "idle_watts", idle.mean);
    add_scalar(report, "full_load_watts", means.back());
    add_scalar(report, "linear_fit_slope", fit.slope);
    add_scalar(report, "linear_fit_intercept", fit.intercept);
    add_scalar(report, "linear_fit_max_residual_watts", fit.max_abs_residual);
    add_scalar(report, "distinct_levels", static_cast<double>(distinct_levels(means, cc.level_tolerance)));
    add_scalar(report, "controllable_span_fraction", full_range > 0.0 ? (*mx - *mn) / full_range : 0.0);
    add_scalar(report, "busy_slope", busy_fit.slope);

    report.traces.push_back({"server0", std::move(trace)});
    report.notes = {
        {"interface", std::string(to_string(interface))},
        {"outlier_mode", std::string(to_string(cc.outlier))},
        {"range_band", "observed range after outlier rejection widened by 1.5 sigma each side"},
        {"baseline", "first hold has the workload stopped"},
    };
    return report;
}

} // namespace drsim
