#include "memeprobe/metrics.hpp"

#include "memeprobe/errors.hpp"
#include "memeprobe/text.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace memeprobe {

double compute_average_score(const std::vector<int>& scores)
{
    if (scores.empty()) {
        throw EmptySampleSet();
    }
    long long sum = 0;
    for (int s : scores) {
        sum += s;
    }
    return static_cast<double>(sum) / static_cast<double>(scores.size());
}

FailureRate count_failures(const std::vector<int>& scores, double threshold)
{
    if (scores.empty()) {
        throw EmptySampleSet();
    }
    FailureRate fr;
    fr.total = scores.size();
    for (int s : scores) {
        if (static_cast<double>(s) < threshold) {
            ++fr.failures;
        }
    }
    return fr;
}

double compute_failure_rate(const std::vector<int>& scores, double threshold)
{
    return count_failures(scores, threshold).value();
}

std::string_view to_string(AvgMode mode) { return mode == AvgMode::micro ? "micro" : "macro"; }

AvgMode avg_mode_from_string(std::string_view s)
{
    if (s == "micro") {
        return AvgMode::micro;
    }
    if (s == "macro") {
        return AvgMode::macro;
    }
    throw std::invalid_argument("avg mode must be 'micro' or 'macro'");
}

MetricsTable aggregate_by_category(const ScoredSet& samples, SampleFilter filter, double threshold, AvgMode mode,
                                   const std::vector<std::string>& order)
{
    if (samples.empty()) {
        throw EmptySampleSet();
    }
    std::map<std::string, std::vector<int>> scores;
    for (const auto& s : samples) {
        if ((filter == SampleFilter::original_only && s.refined) ||
            (filter == SampleFilter::refined_only && !s.refined)) {
            continue;
        }
        scores[s.category()].push_back(s.score);
    }

    std::vector<std::string> names;
    for (const auto& name : order) {
        if (scores.count(name) != 0 && std::find(names.begin(), names.end(), name) == names.end()) {
            names.push_back(name);
        }
    }
    for (const auto& [name, _] : scores) {
        if (std::find(names.begin(), names.end(), name) == names.end()) {
            names.push_back(name);
        }
    }

    MetricsTable table;
    std::vector<int> pooled;
    for (const auto& name : names) {
        const auto& v = scores.at(name);
        const auto fr = count_failures(v, threshold);
        table.rows.push_back({name, compute_average_score(v), fr.value(), fr.total, fr.failures});
        pooled.insert(pooled.end(), v.begin(), v.end());
    }
    if (table.rows.empty()) {
        return table;
    }

    CategoryMetrics avg;
    avg.category = "Avg.";
    const auto fr = count_failures(pooled, threshold);
    avg.n = fr.total;
    avg.failures = fr.failures;
    if (mode == AvgMode::micro) {
        avg.average_score = compute_average_score(pooled);
        avg.failure_rate = fr.value();
    } else {
        double score_sum = 0.0;
        double fr_sum = 0.0;
        for (const auto& r : table.rows) {
            score_sum += r.average_score;
            fr_sum += r.failure_rate;
        }
        const auto k = static_cast<double>(table.rows.size());
        avg.average_score = score_sum / k;
        avg.failure_rate = fr_sum / k;
    }
    table.avg = avg;
    return table;
}

std::vector<DeltaRow> compute_refinement_deltas(const MetricsTable& original, const MetricsTable& combined)
{
    std::map<std::string, const CategoryMetrics*> combined_by_name;
    for (const auto& r : combined.rows) {
        combined_by_name[r.category] = &r;
    }
    std::set<std::string> original_names;
    std::vector<DeltaRow> out;
    for (const auto& r : original.rows) {
        original_names.insert(r.category);
        auto it = combined_by_name.find(r.category);
        if (it == combined_by_name.end()) {
            throw CategoryMismatch(r.category);
        }
        out.push_back({r.category, r.failure_rate, it->second->failure_rate, r.failure_rate - it->second->failure_rate});
    }
    for (const auto& r : combined.rows) {
        if (original_names.count(r.category) == 0) {
            throw CategoryMismatch(r.category);
        }
    }
    if (original.avg && combined.avg) {
        out.push_back({"Avg.", original.avg->failure_rate, combined.avg->failure_rate,
                       original.avg->failure_rate - combined.avg->failure_rate});
    }
    return out;
}

std::string_view to_string(ConvergenceMode mode)
{
    return mode == ConvergenceMode::cumulative ? "cumulative" : "per_step";
}

ConvergenceMode convergence_mode_from_string(std::string_view s)
{
    if (s == "cumulative") {
        return ConvergenceMode::cumulative;
    }
    if (s == "per_step") {
        return ConvergenceMode::per_step;
    }
    throw std::invalid_argument("convergence mode must be 'cumulative' or 'per_step'");
}

std::map<std::string, std::vector<ConvergencePoint>> convergence_series(const ScoredSet& history,
                                                                       ConvergenceMode mode)
{
    // category -> iteration -> (score sum, count)
    std::map<std::string, std::map<int, std::pair<long long, std::size_t>>> buckets;
    for (const auto& s : history) {
        const int it = s.refined ? s.iteration : 0;
        auto& b = buckets[s.category()][it];
        b.first += s.score;
        ++b.second;
    }
    std::map<std::string, std::vector<ConvergencePoint>> series;
    for (const auto& [category, by_iteration] : buckets) {
        auto& points = series[category];
        long long sum = 0;
        std::size_t n = 0;
        for (const auto& [iteration, bucket] : by_iteration) {
            if (mode == ConvergenceMode::cumulative) {
                sum += bucket.first;
                n += bucket.second;
            } else {
                sum = bucket.first;
                n = bucket.second;
            }
            points.push_back({iteration, static_cast<double>(sum) / static_cast<double>(n), n});
        }
    }
    return series;
}

std::vector<HistogramRow> misbelief_histogram(const ScoredSet& history, const std::string& category, std::size_t top)
{
    std::map<std::string, HistogramRow> groups;
    for (const auto& s : history) {
        if (s.category() != category) {
            continue;
        }
        auto key = text::normalize_statement(s.misbelief());
        auto& row = groups[key];
        row.group = key;
        ++(s.refined ? row.refined : row.original);
    }
    std::vector<HistogramRow> rows;
    for (auto& [_, row] : groups) {
        rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const HistogramRow& a, const HistogramRow& b) {
        return a.original + a.refined > b.original + b.refined;
    });
    if (top != 0 && rows.size() > top) {
        rows.resize(top);
    }
    return rows;
}

} // namespace memeprobe
