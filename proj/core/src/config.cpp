#include "drsim/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace drsim {

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::invalid_argument(fmt::format("{}: {}", field, message)), field_(std::move(field)) {}

std::optional<ControllerMode> parse_controller_mode(std::string_view name) {
    if (name == "integral") {
        return ControllerMode::Integral;
    }
    if (name == "open-loop") {
        return ControllerMode::OpenLoop;
    }
    return std::nullopt;
}

std::string_view to_string(ControllerMode mode) {
    return mode == ControllerMode::Integral ? "integral" : "open-loop";
}

LinearPowerModel ClusterConfig::model() const {
    auto m = calibration_preset(preset);
    if (!m) {
        throw ConfigError("cluster.preset", fmt::format("unknown preset '{}' (valid: r320-cluster, r320-methods)",
                                                        preset));
    }
    return *m;
}

InterfaceParams ClusterConfig::server_params() const { return server_params(interface); }

InterfaceParams ClusterConfig::server_params(InterfaceKind kind) const {
    auto p = default_params(kind, model());
    p.noise.base_watts *= noise_scale;
    p.noise.boundary_watts *= noise_scale;
    return p;
}

double ExperimentConfig::d_watts() const {
    return schedule.d_watts.value_or(cluster.n_servers * cluster.model().k_watts);
}

double ExperimentConfig::b_watts() const {
    return schedule.b_watts.value_or(cluster.n_servers * cluster.model().i_watts);
}

SetpointSchedule ExperimentConfig::make_schedule() const {
    std::vector<Segment> segs;
    segs.reserve(schedule.signals.size());
    for (std::size_t i = 0; i < schedule.signals.size(); ++i) {
        segs.push_back(Segment{static_cast<double>(i) * schedule.step, schedule.signals[i]});
    }
    return SetpointSchedule(d_watts(), b_watts(), std::move(segs));
}

namespace {

struct Field {
    std::string section;
    std::string key;
    std::function<void(const std::string&)> set;
    std::function<std::string()> get;

    [[nodiscard]] std::string name() const { return section + "." + key; }
};

double parse_double(const std::string& field, const std::string& text) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
        throw ConfigError(field, fmt::format("'{}' is not a number", text));
    }
    return v;
}

template <typename Int>
Int parse_int(const std::string& field, const std::string& text) {
    Int v{};
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) {
        throw ConfigError(field, fmt::format("'{}' is not an integer", text));
    }
    return v;
}

bool parse_bool(const std::string& field, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes") {
        return true;
    }
    if (text == "false" || text == "0" || text == "no") {
        return false;
    }
    throw ConfigError(field, fmt::format("'{}' is not a boolean", text));
}

std::vector<double> parse_list(const std::string& field, const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) {
            throw ConfigError(field, "empty list element");
        }
        out.push_back(parse_double(field, item.substr(b, e - b + 1)));
    }
    return out;
}

std::string fmt_double(double v) { return fmt::format("{}", v); }

std::vector<Field> bind(ExperimentConfig& c) {
    std::vector<Field> f;
    auto dbl = [&f](std::string sec, std::string key, double& ref) {
        const std::string name = sec + "." + key;
        f.push_back({sec, key, [&ref, name](const std::string& s) { ref = parse_double(name, s); },
                     [&ref] { return fmt_double(ref); }});
    };
    auto opt_dbl = [&f](std::string sec, std::string key, std::optional<double>& ref,
                        std::function<double()> fallback) {
        const std::string name = sec + "." + key;
        f.push_back({sec, key, [&ref, name](const std::string& s) { ref = parse_double(name, s); },
                     [&ref, fallback] { return fmt_double(ref.value_or(fallback())); }});
    };
    auto integer = [&f](std::string sec, std::string key, int& ref) {
        const std::string name = sec + "." + key;
        f.push_back({sec, key, [&ref, name](const std::string& s) { ref = parse_int<int>(name, s); },
                     [&ref] { return std::to_string(ref); }});
    };

    auto& cl = c.cluster;
    integer("cluster", "servers", cl.n_servers);
    f.push_back({"cluster", "interface",
                 [&cl](const std::string& s) {
                     auto k = parse_interface_kind(s);
                     if (!k) {
                         throw ConfigError("cluster.interface", fmt::format("unknown interface '{}' (valid: {})", s,
                                                                            interface_kind_names()));
                     }
                     cl.interface = *k;
                 },
                 [&cl] { return std::string(to_string(cl.interface)); }});
    f.push_back({"cluster", "preset",
                 [&cl](const std::string& s) {
                     if (!calibration_preset(s)) {
                         throw ConfigError("cluster.preset",
                                           fmt::format("unknown preset '{}' (valid: r320-cluster, r320-methods)", s));
                     }
                     cl.preset = s;
                 },
                 [&cl] { return cl.preset; }});
    dbl("cluster", "noise_scale", cl.noise_scale);
    f.push_back({"cluster", "seed",
                 [&cl](const std::string& s) { cl.seed = parse_int<std::uint64_t>("cluster.seed", s); },
                 [&cl] { return std::to_string(cl.seed); }});

    dbl("channel", "latency", cl.channel.latency_mean);
    dbl("channel", "jitter", cl.channel.jitter);
    dbl("channel", "loss", cl.channel.loss_prob);
    dbl("channel", "rate", cl.channel.rate);

    dbl("sensor", "gain_error", cl.sensor.gain_error_bound);
    dbl("sensor", "ripple_amp", cl.sensor.ripple_amp);
    dbl("sensor", "ripple_hz", cl.sensor.ripple_hz);
    dbl("sensor", "additive_sigma", cl.sensor.additive_sigma);
    dbl("sensor", "raw_rate", cl.sensor.raw_rate);

    dbl("control", "gain", cl.gain);
    f.push_back({"control", "mode",
                 [&cl](const std::string& s) {
                     auto m = parse_controller_mode(s);
                     if (!m) {
                         throw ConfigError("control.mode",
                                           fmt::format("unknown controller '{}' (valid: integral, open-loop)", s));
                     }
                     cl.controller = *m;
                 },
                 [&cl] { return std::string(to_string(cl.controller)); }});

    auto& sc = c.schedule;
    opt_dbl("schedule", "d", sc.d_watts, [&c] { return c.d_watts(); });
    opt_dbl("schedule", "b", sc.b_watts, [&c] { return c.b_watts(); });
    dbl("schedule", "step", sc.step);
    f.push_back({"schedule", "signals", [&sc](const std::string& s) { sc.signals = parse_list("schedule.signals", s); },
                 [&sc] {
                     std::string out;
                     for (double v : sc.signals) {
                         out += (out.empty() ? "" : ", ") + fmt_double(v);
                     }
                     return out;
                 }});

    dbl("track", "window", c.track.window);
    dbl("track", "settle_window", c.track.settle_window);
    dbl("track", "settle_band", c.track.settle_band);
    dbl("track", "score_interval", c.track.score_interval);
    dbl("track", "calibration", c.track.calibration);

    integer("sweep", "points", c.sweep.points);
    dbl("sweep", "hold", c.sweep.hold);
    dbl("sweep", "window", c.sweep.window);
    dbl("sweep", "calibration", c.sweep.calibration);

    dbl("ramp", "start", c.ramp.start);
    dbl("ramp", "stop", c.ramp.stop);
    dbl("ramp", "duration", c.ramp.duration);
    dbl("ramp", "window", c.ramp.window);
    f.push_back({"ramp", "initially_on",
                 [&c](const std::string& s) { c.ramp.initially_on = parse_bool("ramp.initially_on", s); },
                 [&c] { return std::string(c.ramp.initially_on ? "true" : "false"); }});

    integer("characterize", "points", c.characterize.points);
    dbl("characterize", "hold", c.characterize.hold);
    dbl("characterize", "window", c.characterize.window);
    f.push_back({"characterize", "outlier",
                 [&c](const std::string& s) {
                     auto m = parse_outlier_mode(s);
                     if (!m) {
                         throw ConfigError("characterize.outlier",
                                           fmt::format("unknown outlier mode '{}' (valid: mad, iqr10)", s));
                     }
                     c.characterize.outlier = *m;
                 },
                 [&c] { return std::string(to_string(c.characterize.outlier)); }});
    dbl("characterize", "level_tolerance", c.characterize.level_tolerance);
    return f;
}

void check(bool ok, const char* field, const char* message) {
    if (!ok) {
        throw ConfigError(field, message);
    }
}

// Whole number of `unit` in `span`, within rounding.
bool is_multiple(double span, double unit) {
    const double r = span / unit;
    return std::abs(r - std::round(r)) < 1e-6 && std::round(r) >= 1.0;
}

} // namespace

void ExperimentConfig::validate() const {
    const auto& cl = cluster;
    check(cl.n_servers >= 1, "cluster.servers", "must be at least 1");
    check(cl.noise_scale >= 0.0, "cluster.noise_scale", "must be non-negative");
    (void)cl.model();
    try {
        cl.channel.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("channel", e.what());
    }
    try {
        cl.sensor.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("sensor", e.what());
    }
    check(cl.gain >= 0.0, "control.gain", "must be non-negative");

    const double dt = 1.0 / cl.sensor.raw_rate;
    check(schedule.step > 0.0, "schedule.step", "must be positive");
    check(!schedule.signals.empty(), "schedule.signals", "needs at least one value");
    for (double s : schedule.signals) {
        check(s >= 0.0 && s <= 1.0, "schedule.signals", "values must lie in [0, 1]");
    }
    check(d_watts() >= 0.0, "schedule.d", "must be non-negative");
    check(b_watts() >= 0.0, "schedule.b", "must be non-negative");

    check(is_multiple(track.window, dt), "track.window", "must be a whole number of raw sample periods");
    check(is_multiple(1.0 / cl.channel.rate, track.window), "channel.rate",
          "error period must be a whole number of track windows");
    check(is_multiple(track.settle_window, track.window), "track.settle_window",
          "must be a whole number of track windows");
    check(track.settle_band > 0.0 && track.settle_band < 1.0, "track.settle_band", "must be in (0, 1)");
    check(is_multiple(track.score_interval, track.window), "track.score_interval",
          "must be a whole number of track windows");
    check(is_multiple(schedule.step * static_cast<double>(schedule.signals.size()), track.score_interval),
          "track.score_interval", "schedule length must be a whole number of scoring intervals");
    check(is_multiple(schedule.step, track.window), "schedule.step", "must be a whole number of track windows");
    check(is_multiple(track.calibration, track.window), "track.calibration",
          "must be a whole number of track windows");

    check(sweep.points >= 2, "sweep.points", "must be at least 2");
    check(is_multiple(sweep.window, dt), "sweep.window", "must be a whole number of raw sample periods");
    check(is_multiple(sweep.hold, sweep.window), "sweep.hold", "must be a whole number of windows");
    check(is_multiple(sweep.calibration, sweep.window), "sweep.calibration", "must be a whole number of windows");

    check(is_multiple(ramp.window, dt), "ramp.window", "must be a whole number of raw sample periods");
    check(ramp.start > 0.0 && ramp.start < ramp.stop, "ramp.start", "must satisfy 0 < start < stop");
    check(ramp.stop < ramp.duration, "ramp.stop", "must precede ramp.duration");
    check(is_multiple(ramp.duration, ramp.window), "ramp.duration", "must be a whole number of windows");

    check(characterize.points >= 2, "characterize.points", "must be at least 2");
    check(is_multiple(characterize.window, dt), "characterize.window",
          "must be a whole number of raw sample periods");
    check(is_multiple(characterize.hold, characterize.window) && characterize.hold >= 2.0 * characterize.window,
          "characterize.hold", "must be at least two whole windows");
    check(characterize.level_tolerance > 0.0, "characterize.level_tolerance", "must be positive");
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("config", fmt::format("line {}: {}", e.line(), e.message()));
    }
    auto fields = bind(base);
    for (const auto& [section, body] : tree) {
        if (body.empty()) {
            if (!body.data().empty()) {
                throw ConfigError(section, "key outside of any section");
            }
            continue;
        }
        for (const auto& [key, value] : body) {
            auto it = std::find_if(fields.begin(), fields.end(),
                                   [&](const Field& f) { return f.section == section && f.key == key; });
            if (it == fields.end()) {
                throw ConfigError(section + "." + key, "unknown setting");
            }
            it->set(value.data());
        }
    }
    return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config", fmt::format("cannot open '{}'", path.string()));
    }
    return parse_config(in, std::move(base));
}

std::string config_snapshot(const ExperimentConfig& cfg) {
    ExperimentConfig copy = cfg;
    const auto fields = bind(copy);
    std::string out;
    std::string section;
    for (const auto& f : fields) {
        if (f.section != section) {
            out += fmt::format("{}[{}]\n", section.empty() ? "" : "\n", f.section);
            section = f.section;
        }
        out += fmt::format("{} = {}\n", f.key, f.get());
    }
    return out;
}

} // namespace drsim
