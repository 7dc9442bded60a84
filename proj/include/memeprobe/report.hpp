#pragma once

#include "memeprobe/domain.hpp"
#include "memeprobe/metrics.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace memeprobe {

struct ReportOptions {
    std::string model = "target";
    double threshold = kDefaultFailureThreshold;
    AvgMode avg_mode = AvgMode::micro;
    ConvergenceMode convergence_mode = ConvergenceMode::cumulative;
    std::size_t histogram_top = 10;
    std::vector<std::string> category_order; ///< column order; unlisted categories follow alphabetically
    nlohmann::json metadata = nlohmann::json::object();
};

struct EvaluationReport {
    ReportOptions options;
    MetricsTable combined;
    MetricsTable original;
    MetricsTable refined;
    std::vector<DeltaRow> deltas;
    std::map<std::string, std::vector<ConvergencePoint>> convergence;
    std::map<std::string, std::vector<HistogramRow>> histograms;
};

EvaluationReport build_report(const ScoredSet& history, const ReportOptions& options);

/// "7.38"
std::string format_score(double score);
/// A rate in [0,1] as a zero-padded percentage: 0.0218 -> "02.18".
std::string format_failure_rate(double rate);
/// A rate difference as a signed percentage in parentheses: "(-1.48)", "(+0.00)".
std::string format_delta(double rate_delta);

enum class ReportFormat { markdown, csv };

std::string render_markdown(const EvaluationReport& report);
/// One row per (model, subset, category) with unformatted values.
std::string render_metrics_csv(const EvaluationReport& report);
std::string render_convergence_csv(const EvaluationReport& report);
std::string render_histogram_csv(const EvaluationReport& report);
std::string render_report(const EvaluationReport& report, ReportFormat format);

} // namespace memeprobe
