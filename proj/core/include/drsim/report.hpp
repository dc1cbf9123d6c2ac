#pragma once

#include "drsim/engine.hpp"
#include "drsim/svg.hpp"

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace drsim {

/// CSV `metric,tau,value`; tau is empty for scalar metrics.
void write_metrics_csv(std::ostream& os, std::span<const MetricRow> rows);

std::string summary_text(const ExperimentReport& report);

/// Named charts (file stem, chart) appropriate for the experiment kind.
std::vector<std::pair<std::string, SvgChart>> report_charts(const ExperimentReport& report);

/// Write `root/<report.name>/` and return that directory. Existing files of
/// the same name are overwritten.
std::filesystem::path write_report(const ExperimentReport& report, const std::filesystem::path& root,
                                   bool plots = true);

} // namespace drsim
