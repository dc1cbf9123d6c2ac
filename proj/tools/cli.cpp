#include "cli.hpp"

#include "drsim/config.hpp"
#include "drsim/engine.hpp"
#include "drsim/report.hpp"
#include "drsim/stats.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace drsim::cli {

namespace {

struct Options {
    std::string config;
    std::string out = "report";
    std::optional<std::uint64_t> seed;
    std::string interface;
    std::string outlier;
    std::string controller;
    bool no_plots = false;
};

void add_common(CLI::App* sub, Options& o) {
    sub->add_option("--config", o.config, "INI configuration file");
    sub->add_option("--out", o.out, "report root directory")->capture_default_str();
    sub->add_option("--seed", o.seed, "root random seed");
    sub->add_option("--interface", o.interface, "power-modulating interface");
    sub->add_flag("--no-plots", o.no_plots, "skip SVG output");
    sub->add_option("--outlier", o.outlier, "outlier rejection for characterization: mad or iqr10");
    sub->add_option("--controller", o.controller, "tracking controller: integral or open-loop");
}

// Built-in preset, then the config file, then command-line flags.
ExperimentConfig resolve(const Options& o) {
    ExperimentConfig cfg;
    if (!o.config.empty()) {
        if (!std::filesystem::exists(o.config)) {
            throw ConfigError("--config", fmt::format("config file '{}' not found", o.config));
        }
        cfg = load_config(o.config, cfg);
    }
    if (o.seed) {
        cfg.cluster.seed = *o.seed;
    }
    if (!o.interface.empty()) {
        auto k = parse_interface_kind(o.interface);
        if (!k) {
            throw ConfigError("--interface",
                              fmt::format("unknown interface '{}' (valid: {})", o.interface, interface_kind_names()));
        }
        cfg.cluster.interface = *k;
    }
    if (!o.outlier.empty()) {
        auto m = parse_outlier_mode(o.outlier);
        if (!m) {
            throw ConfigError("--outlier", fmt::format("unknown outlier mode '{}' (valid: mad, iqr10)", o.outlier));
        }
        cfg.characterize.outlier = *m;
    }
    if (!o.controller.empty()) {
        auto m = parse_controller_mode(o.controller);
        if (!m) {
            throw ConfigError("--controller",
                              fmt::format("unknown controller '{}' (valid: integral, open-loop)", o.controller));
        }
        cfg.cluster.controller = *m;
    }
    cfg.validate();
    return cfg;
}

void emit(const ExperimentReport& r, const Options& o, std::ostream& out) {
    const auto dir = write_report(r, o.out, !o.no_plots);
    fmt::print(out, "{}: wrote {}\n", r.name, dir.string());
    for (const auto& m : r.metrics) {
        if (!m.tau) {
            fmt::print(out, "  {} = {:.6f}\n", m.metric, m.value);
        }
    }
}

} // namespace

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Deterministic simulator of a server cluster providing grid regulation", "drsim"};
    app.require_subcommand(1);
    Options o;
    auto* track = app.add_subcommand("track", "closed- or open-loop tracking of a stepped regulation signal");
    auto* sweep = app.add_subcommand("sweep", "linear model accuracy sweep over duty cycle");
    auto* ramp = app.add_subcommand("ramp", "synchronized idle to full load ramp");
    auto* characterize = app.add_subcommand("characterize", "per-interface power and residency characterization");
    auto* report = app.add_subcommand("report", "run every experiment and every interface characterization");
    for (auto* sub : {track, sweep, ramp, characterize, report}) {
        add_common(sub, o);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitBadInput;
    }

    try {
        const ExperimentConfig cfg = resolve(o);
        if (track->parsed()) {
            emit(run_tracking(cfg), o, out);
        } else if (sweep->parsed()) {
            emit(run_model_accuracy_sweep(cfg), o, out);
        } else if (ramp->parsed()) {
            emit(run_ramp(cfg), o, out);
        } else if (characterize->parsed()) {
            emit(run_characterization(cfg, cfg.cluster.interface), o, out);
        } else if (report->parsed()) {
            emit(run_tracking(cfg), o, out);
            emit(run_model_accuracy_sweep(cfg), o, out);
            emit(run_ramp(cfg), o, out);
            for (auto kind : all_interface_kinds()) {
                emit(run_characterization(cfg, kind), o, out);
            }
        }
    } catch (const ConfigError& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kExitBadInput;
    } catch (const InfeasibleSchedule& e) {
        fmt::print(err, "infeasible schedule: {}\n", e.what());
        return kExitInfeasible;
    } catch (const NoStepError& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kExitFailure;
    } catch (const std::invalid_argument& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kExitBadInput;
    } catch (const std::exception& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kExitFailure;
    }
    return kExitOk;
}

} // namespace drsim::cli
