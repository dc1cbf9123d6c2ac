// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Tolerances are pinned here and never loosened to pass.

#include "cli.hpp"
#include "drsim/config.hpp"
#include "drsim/control.hpp"
#include "drsim/engine.hpp"
#include "drsim/power_model.hpp"
#include "drsim/sensing.hpp"
#include "drsim/stats.hpp"

#include "gen.hpp"
#include "oracles.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace drsim;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + ("failed: " + what);
        }
    }
    void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Each quantitative run must finish within a minute.
constexpr double kRunBudgetSeconds = 60.0;

template <class F>
auto timed(Verdict& v, const char* what, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    auto r = f();
    const double dt = seconds_since(t0);
    v.require(dt < kRunBudgetSeconds, fmt::format("{} took {:.1f} s", what, dt));
    return r;
}

Verdict ac1() {
    Verdict v;
    const auto r = timed(v, "sweep", [] { return run_model_accuracy_sweep(ExperimentConfig{}); });
    const double mx = r.metric("max_rmse_watts");
    v.require(r.series("rmse_watts").size() == 100, "100 tau points");
    v.require(mx <= 3.0, "max RMSE <= 3 W");
    v.require(mx >= 1.0, "max RMSE >= 1 W");
    v.note(fmt::format("max RMSE {:.3f} W, min {:.3f} W", mx, r.metric("min_rmse_watts")));
    return v;
}

Verdict ac2() {
    Verdict v;
    const auto r = timed(v, "track", [] { return run_tracking(ExperimentConfig{}); });
    const double settle = r.metric("settling_time_s");
    const double rms = r.metric("rms_tracking_error_watts");
    const double score = r.metric("precision_score");
    v.require(settle <= 3.0, "settling <= 3 s");
    v.require(rms <= 40.0, "RMS error <= 40 W");
    v.require(score >= 0.75, "score >= 0.75");
    v.require(score >= 0.80 && score <= 0.92, "score in [0.80, 0.92]");
    v.note(fmt::format("settling {:.2f} s, RMS {:.2f} W, score {:.4f}", settle, rms, score));
    return v;
}

Verdict ac3() {
    Verdict v;
    ExperimentConfig cfg;
    cfg.cluster.controller = ControllerMode::OpenLoop;
    const auto r = timed(v, "open-loop track", [&] { return run_tracking(cfg); });
    const double score = r.metric("precision_score");
    v.require(score >= 0.90, "minimum score >= 0.90");
    v.note(fmt::format("minimum per-server score {:.4f}", score));
    return v;
}

Verdict ac4() {
    Verdict v;
    const auto r = timed(v, "ramp", [] { return run_ramp(ExperimentConfig{}); });
    const double range = r.metric("dynamic_range_watts");
    const double rate = r.metric("ramp_rate_w_per_s");
    v.require(std::abs(range - 145.0) <= 14.5, "range 145 W +- 10%");
    v.require(rate >= 500.0, "rate >= 500 W/s");
    v.note(fmt::format("range {:.2f} W, rate {:.1f} W/s", range, rate));
    return v;
}

Verdict ac5() {
    Verdict v;
    const auto r = timed(v, "characterize cpufreq",
                         [] { return run_characterization(ExperimentConfig{}, InterfaceKind::CpufreqUserspace); });
    const double levels = r.metric("distinct_levels");
    const double span = r.metric("controllable_span_fraction");
    v.require(levels == 12.0, "exactly 12 levels");
    v.require(span <= 0.55, "span <= 55%");
    v.note(fmt::format("{} levels, span {:.3f}", levels, span));
    return v;
}

Verdict ac6() {
    Verdict v;
    struct Expect {
        InterfaceKind kind;
        bool linear;
    };
    for (const auto& e : {Expect{InterfaceKind::UserspaceIdleInjection, true}, Expect{InterfaceKind::Cgroups, true},
                          Expect{InterfaceKind::Rapl, true}, Expect{InterfaceKind::XenSchedCredit, false},
                          Expect{InterfaceKind::CpufreqUserspace, false}}) {
        const auto r = timed(v, "characterize", [&] { return run_characterization(ExperimentConfig{}, e.kind); });
        const double res = r.metric("linear_fit_max_residual_watts");
        const auto name = std::string(to_string(e.kind));
        v.require(e.linear ? res <= 2.0 : res >= 5.0, fmt::format("{} residual {} W", name, e.linear ? "<= 2" : ">= 5"));
        v.note(fmt::format("{} {:.2f} W", name, res));
    }
    return v;
}

Verdict ac7() {
    Verdict v;
    const auto model = *calibration_preset("r320-cluster");
    double worst_sum = 0.0;
    for (auto kind : all_interface_kinds()) {
        const auto p = default_params(kind, model);
        for (int j = 0; j <= 1000; ++j) {
            const auto r = residency(p, DutyCycle{j / 1000.0});
            worst_sum = std::max(worst_sum, std::abs(r.busy_frac + r.c1_frac + r.c6_frac - 1.0));
        }
    }
    v.require(worst_sum <= 1e-9, "residency sums to one within 1e-9");
    v.note(fmt::format("worst sum error {:.2e}", worst_sum));

    // PowerClamp cannot inject more than half idle, so its busy time is
    // only driven by tau on the upper half of the grid.
    struct Ici {
        InterfaceKind kind;
        int first;
    };
    for (const auto& k : {Ici{InterfaceKind::Cgroups, 0}, Ici{InterfaceKind::UserspaceIdleInjection, 0},
                          Ici{InterfaceKind::XenSchedCredit, 0}, Ici{InterfaceKind::PowerClamp, 500}}) {
        const auto p = default_params(k.kind, model);
        std::vector<double> x;
        std::vector<double> y;
        for (int j = k.first; j <= 1000; ++j) {
            x.push_back(j / 1000.0);
            y.push_back(residency(p, DutyCycle{j / 1000.0}).busy_frac);
        }
        const double slope = linear_fit(x, y).slope;
        const auto name = std::string(to_string(k.kind));
        v.require(std::abs(slope - 1.0) <= 0.02, name + " busy slope within 0.02 of 1");
        v.note(fmt::format("{} slope {:.4f}", name, slope));
    }
    return v;
}

Verdict ac8() {
    Verdict v;
    double worst = 0.0;
    for (const auto& preset : calibration_preset_names()) {
        const auto model = *calibration_preset(preset);
        for (auto kind : all_interface_kinds()) {
            const auto p = default_params(kind, model);
            for (int j = 0; j <= 100; ++j) {
                const DutyCycle tau{j / 100.0};
                worst = std::max(worst, std::abs(power_from_residency(residency(p, tau), p) - mean_power(p, tau)));
            }
        }
    }
    v.require(worst <= 1.5, "residency power within 1.5 W of mean power");
    v.note(fmt::format("worst gap {:.3f} W", worst));
    return v;
}

Verdict ac9() {
    Verdict v;
    testing::Gen gen(9001);
    int rmse_bad = 0;
    int mad_bad = 0;
    int range_bad = 0;
    int idem_bad = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto xs = gen.uniform_vec(static_cast<std::size_t>(gen.integer(1, 30)), -10.0, 300.0);
        const double c = gen.uniform(-10.0, 300.0);
        const double want = testing::oracle_rmse(xs, c);
        rmse_bad += std::abs(rmse(xs, c) - want) <= 1e-9 * std::max(1.0, want) ? 0 : 1;
    }
    for (int i = 0; i < 1000; ++i) {
        const auto xs = gen.power_samples(static_cast<std::size_t>(gen.integer(1, 30)));
        const auto keep = testing::oracle_mad_keep(xs);
        std::vector<double> kept;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            if (keep[k]) kept.push_back(xs[k]);
        }
        const auto r = mad_filter(xs);
        mad_bad += r.kept == kept ? 0 : 1;
        idem_bad += mad_filter(r.kept).rejected.empty() ? 0 : 1;
        idem_bad += mad_filter(mad_filter(xs, OutlierMode::Iqr10).kept, OutlierMode::Iqr10).rejected.empty() ? 0 : 1;
    }
    for (int i = 0; i < 1000; ++i) {
        const auto xs = gen.uniform_vec(static_cast<std::size_t>(gen.integer(2, 30)), 0.0, 300.0);
        const auto band = conservative_range(xs);
        const auto o = testing::oracle_range(xs);
        range_bad += std::abs(band.lo - o.lo) <= 1e-9 && std::abs(band.hi - o.hi) <= 1e-9 ? 0 : 1;
    }
    v.require(rmse_bad == 0, fmt::format("rmse oracle mismatches {}", rmse_bad));
    v.require(mad_bad == 0, fmt::format("mad_filter oracle mismatches {}", mad_bad));
    v.require(range_bad == 0, fmt::format("conservative_range oracle mismatches {}", range_bad));
    v.require(idem_bad == 0, fmt::format("mad_filter not idempotent in {} cases", idem_bad));
    v.note("3 x 1000 oracle cases, 2000 idempotence cases");
    return v;
}

Verdict ac10() {
    Verdict v;
    testing::Gen gen(10001);
    int out_of_range = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        IntegralControllerState s{DutyCycle{gen.uniform(0.0, 1.0)}, gen.uniform(0.0, 0.05), false, false};
        for (double e : gen.error_stream(200)) {
            s = integral_update(s, ErrorSample{0.0, e});
            out_of_range += s.tau.value() >= 0.0 && s.tau.value() <= 1.0 ? 0 : 1;
        }
    }
    int stuck = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        IntegralControllerState s{DutyCycle{0.5}, gen.uniform(1e-4, 0.01), false, false};
        const double sign = gen.coin() ? 1.0 : -1.0;
        for (int k = 0; k < 500; ++k) s = integral_update(s, ErrorSample{0.0, sign * gen.uniform(1.0, 1e4)});
        const double bound = s.tau.value();
        s = integral_update(s, ErrorSample{0.0, -sign * gen.uniform(0.5, 50.0)});
        stuck += (sign > 0 ? s.tau.value() < bound : s.tau.value() > bound) ? 0 : 1;
    }
    v.require(out_of_range == 0, fmt::format("{} updates left [0, 1]", out_of_range));
    v.require(stuck == 0, fmt::format("{} saturated integrators failed to recover in one update", stuck));
    v.note("200000 fuzzed updates, 1000 windup recoveries");
    return v;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"drsim"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    return cli::parse_and_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
}

Verdict ac11() {
    Verdict v;
    const fs::path root = "acceptance-determinism";
    fs::remove_all(root);
    struct Case {
        std::string subcommand;
        std::vector<std::string> dirs;
    };
    const std::vector<Case> cases{
        {"track", {"track"}},
        {"sweep", {"sweep"}},
        {"ramp", {"ramp"}},
        {"characterize", {"characterize-userspace"}},
        {"report",
         {"track", "sweep", "ramp", "characterize-cgroups", "characterize-userspace", "characterize-xen",
          "characterize-cpufreq", "characterize-rapl", "characterize-powerclamp"}},
    };
    int compared = 0;
    for (const auto& c : cases) {
        const auto a = (root / (c.subcommand + "-a")).string();
        const auto b = (root / (c.subcommand + "-b")).string();
        const int ca = cli({c.subcommand, "--out", a, "--no-plots"});
        const int cb = cli({c.subcommand, "--out", b, "--no-plots"});
        v.require(ca == 0 && cb == 0, c.subcommand + " exit status");
        for (const auto& d : c.dirs) {
            for (const char* f : {"trace.csv", "metrics.csv"}) {
                const auto x = slurp(fs::path(a) / d / f);
                const auto y = slurp(fs::path(b) / d / f);
                v.require(!x.empty() && x == y, fmt::format("{} {}/{} identical", c.subcommand, d, f));
                ++compared;
            }
        }
    }
    fs::remove_all(root);
    v.note(fmt::format("{} file pairs byte-identical", compared));
    return v;
}

Verdict ac12() {
    Verdict v;
    testing::Gen gen(12001);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const double rate = 1000.0;
        const int per = gen.integer(1, 200);
        const int windows = gen.integer(1, 50);
        std::vector<RawSample> raw;
        long double raw_energy = 0.0L;
        for (int i = 0; i < per * windows; ++i) {
            const double w = gen.uniform(0.0, 400.0);
            raw.push_back({i / rate, w});
            raw_energy += w / rate;
        }
        long double block_energy = 0.0L;
        for (const auto& s : block_average(raw, per / rate, 1.0 / rate)) block_energy += s.watts * s.window;
        worst = std::max(worst, static_cast<double>(std::abs((block_energy - raw_energy) / raw_energy)));
    }
    v.require(worst <= 1e-9, "relative energy error <= 1e-9");
    v.note(fmt::format("worst relative error {:.2e}", worst));
    return v;
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"AC1 model-accuracy sweep RMSE", ac1},
        {"AC2 closed-loop tracking", ac2},
        {"AC3 open-loop tracking", ac3},
        {"AC4 synchronized ramp", ac4},
        {"AC5 cpufreq levels and span", ac5},
        {"AC6 linearity ordering", ac6},
        {"AC7 residency sum and busy slope", ac7},
        {"AC8 residency power bridge", ac8},
        {"AC9 statistics oracles", ac9},
        {"AC10 controller fuzz and anti-windup", ac10},
        {"AC11 CLI determinism", ac11},
        {"AC12 block-average energy conservation", ac12},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = fmt::format("threw: {}", e.what());
        }
        failed += v.pass ? 0 : 1;
        std::cout << (v.pass ? "PASS " : "FAIL ") << name << " (" << v.detail << ")\n";
    }
    std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failed),
                             criteria.size());
    return failed == 0 ? 0 : 1;
}
