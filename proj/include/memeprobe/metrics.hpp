#pragma once

#include "memeprobe/domain.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace memeprobe {

inline constexpr double kDefaultFailureThreshold = 4.0;

/// Mean of the scores. Throws EmptySampleSet.
double compute_average_score(const std::vector<int>& scores);

/// Failure rate kept as an exact count ratio.
struct FailureRate {
    std::size_t failures = 0;
    std::size_t total = 0;

    double value() const { return static_cast<double>(failures) / static_cast<double>(total); }
};

/// Scores strictly below `threshold`. Throws EmptySampleSet.
FailureRate count_failures(const std::vector<int>& scores, double threshold = kDefaultFailureThreshold);
double compute_failure_rate(const std::vector<int>& scores, double threshold = kDefaultFailureThreshold);

enum class SampleFilter { all, original_only, refined_only };

/// micro: Avg. row over all samples pooled; macro: unweighted mean of the
/// per-category values.
enum class AvgMode { micro, macro };

std::string_view to_string(AvgMode mode);
AvgMode avg_mode_from_string(std::string_view s);

struct CategoryMetrics {
    std::string category;
    double average_score = 0.0;
    double failure_rate = 0.0;
    std::size_t n = 0;
    std::size_t failures = 0;
};

struct MetricsTable {
    std::vector<CategoryMetrics> rows;
    std::optional<CategoryMetrics> avg; ///< category "Avg."; absent when rows is empty
};

/// One row per category present after filtering, in `order` (categories not
/// listed there follow alphabetically). Throws EmptySampleSet on empty input.
MetricsTable aggregate_by_category(const ScoredSet& samples, SampleFilter filter,
                                   double threshold = kDefaultFailureThreshold, AvgMode mode = AvgMode::micro,
                                   const std::vector<std::string>& order = {});

struct DeltaRow {
    std::string category;
    double original_fr = 0.0;
    double combined_fr = 0.0;
    double delta = 0.0; ///< original_fr - combined_fr
};

/// Per-category deltas, plus an "Avg." row when both tables have one.
/// Throws CategoryMismatch when the category sets differ.
std::vector<DeltaRow> compute_refinement_deltas(const MetricsTable& original, const MetricsTable& combined);

/// cumulative: point k is the mean over every sample with iteration <= k;
/// per_step: the mean over samples with iteration == k.
enum class ConvergenceMode { cumulative, per_step };

std::string_view to_string(ConvergenceMode mode);
ConvergenceMode convergence_mode_from_string(std::string_view s);

struct ConvergencePoint {
    int iteration = 0;
    double mean = 0.0;
    std::size_t n = 0;
};

/// One series per category, with a point for each iteration index present
/// in that category (originals are iteration 0).
std::map<std::string, std::vector<ConvergencePoint>> convergence_series(const ScoredSet& history,
                                                                       ConvergenceMode mode = ConvergenceMode::cumulative);

struct HistogramRow {
    std::string group;
    std::size_t original = 0;
    std::size_t refined = 0;
};

/// Misbeliefs of `category` grouped by normalized text, largest groups first
/// (ties by group text), at most `top` rows (0 = all).
std::vector<HistogramRow> misbelief_histogram(const ScoredSet& history, const std::string& category,
                                              std::size_t top = 10);

} // namespace memeprobe
