#include "drsim/report.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <fstream>
#include <ostream>
#include <stdexcept>

namespace drsim {

void write_metrics_csv(std::ostream& os, std::span<const MetricRow> rows) {
    os << "metric,tau,value\n";
    for (const auto& r : rows) {
        if (r.tau) {
            fmt::print(os, "{},{:.4f},{:.6f}\n", r.metric, *r.tau, r.value);
        } else {
            fmt::print(os, "{},,{:.6f}\n", r.metric, r.value);
        }
    }
}

std::string summary_text(const ExperimentReport& report) {
    std::string out = fmt::format("experiment: {}\nkind: {}\nseed: {}\n", report.name, to_string(report.kind),
                                  report.seed);
    for (const auto& [k, v] : report.notes) {
        out += fmt::format("{}: {}\n", k, v);
    }
    out += "\n[metrics]\n";
    for (const auto& m : report.metrics) {
        if (!m.tau) {
            out += fmt::format("{} = {:.6f}\n", m.metric, m.value);
        }
    }
    std::size_t per_tau = 0;
    for (const auto& m : report.metrics) {
        per_tau += m.tau ? 1 : 0;
    }
    if (per_tau > 0) {
        out += fmt::format("({} per-tau rows in metrics.csv)\n", per_tau);
    }
    out += "\n[config]\n" + report.config_snapshot;
    return out;
}

namespace {

SvgSeries from_trace(const ChannelTrace& tr, std::string color) {
    SvgSeries s{tr.channel, {}, {}, std::move(color)};
    for (const auto& p : tr.samples) {
        s.x.push_back(p.t_end);
        s.y.push_back(p.watts);
    }
    return s;
}

SvgSeries from_series(const ExperimentReport& r, std::string_view metric, std::string label, std::string color) {
    SvgSeries s{std::move(label), {}, {}, std::move(color)};
    for (const auto& m : r.series(metric)) {
        s.x.push_back(*m.tau);
        s.y.push_back(m.value);
    }
    return s;
}

} // namespace

std::vector<std::pair<std::string, SvgChart>> report_charts(const ExperimentReport& r) {
    std::vector<std::pair<std::string, SvgChart>> charts;
    switch (r.kind) {
    case ExperimentKind::Track: {
        SvgChart power{"Cluster power tracking", "time (s)", "power (W)", {}, std::nullopt};
        if (const auto* t = r.trace("setpoint")) power.series.push_back(from_trace(*t, "#d62728"));
        if (const auto* t = r.trace("cluster")) power.series.push_back(from_trace(*t, "#1f77b4"));
        charts.emplace_back("tracking", std::move(power));
        SvgChart err{"Tracking error", "time (s)", "error (W)", {}, std::nullopt};
        if (const auto* t = r.trace("error")) err.series.push_back(from_trace(*t, "#2ca02c"));
        charts.emplace_back("tracking_error", std::move(err));
        break;
    }
    case ExperimentKind::Sweep: {
        SvgChart c{"Model RMSE by duty cycle", "tau", "RMSE (W)", {}, std::nullopt};
        c.series.push_back(from_series(r, "rmse_watts", "RMSE", "#1f77b4"));
        charts.emplace_back("rmse", std::move(c));
        break;
    }
    case ExperimentKind::Ramp: {
        SvgChart c{"Synchronized start/stop ramp", "time (s)", "power (W)", {}, std::nullopt};
        if (const auto* t = r.trace("cluster")) c.series.push_back(from_trace(*t, "#1f77b4"));
        charts.emplace_back("ramp", std::move(c));
        break;
    }
    case ExperimentKind::Characterize: {
        SvgChart means{"Mean power by duty cycle", "tau", "power (W)", {}, std::nullopt};
        means.series.push_back(from_series(r, "mean_watts", "mean", "#1f77b4"));
        SvgBand band;
        for (const auto& m : r.series("band_lo_watts")) {
            band.x.push_back(*m.tau);
            band.lo.push_back(m.value);
        }
        for (const auto& m : r.series("band_hi_watts")) {
            band.hi.push_back(m.value);
        }
        means.band = std::move(band);
        charts.emplace_back("power_means", std::move(means));
        SvgChart sd{"Power standard deviation by duty cycle", "tau", "stddev (W)", {}, std::nullopt};
        sd.series.push_back(from_series(r, "stddev_watts", "stddev", "#ff7f0e"));
        charts.emplace_back("power_stddevs", std::move(sd));
        SvgChart res{"Mean state residency", "tau", "fraction", {}, std::nullopt};
        res.series.push_back(from_series(r, "busy_frac", "busy", "#1f77b4"));
        res.series.push_back(from_series(r, "pstate_avg", "p-state (f/fmax)", "#d62728"));
        res.series.push_back(from_series(r, "c1_frac", "C1", "#2ca02c"));
        res.series.push_back(from_series(r, "c6_frac", "C6", "#9467bd"));
        charts.emplace_back("residency", std::move(res));
        break;
    }
    }
    return charts;
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os) {
        throw std::runtime_error(fmt::format("cannot write '{}'", p.string()));
    }
    return os;
}

} // namespace

std::filesystem::path write_report(const ExperimentReport& report, const std::filesystem::path& root, bool plots) {
    const auto dir = root / report.name;
    std::filesystem::create_directories(dir);
    {
        auto os = open_out(dir / "config.snapshot");
        os << report.config_snapshot;
    }
    {
        auto os = open_out(dir / "trace.csv");
        write_power_csv(os, report.traces);
    }
    {
        auto os = open_out(dir / "metrics.csv");
        write_metrics_csv(os, report.metrics);
    }
    {
        auto os = open_out(dir / "summary.txt");
        os << summary_text(report);
    }
    if (report.kind == ExperimentKind::Track) {
        auto os = open_out(dir / "controller.csv");
        write_controller_csv(os, report.controller);
    }
    if (report.kind == ExperimentKind::Track || report.kind == ExperimentKind::Ramp) {
        auto os = open_out(dir / "deliveries.csv");
        write_delivery_csv(os, report.deliveries);
    }
    if (plots) {
        for (const auto& [stem, chart] : report_charts(report)) {
            auto os = open_out(dir / (stem + ".svg"));
            os << render_svg(chart);
        }
    }
    return dir;
}

} // namespace drsim
