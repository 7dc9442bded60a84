#include "memeprobe/report.hpp"

#include <fmt/format.h>

#include <cmath>
#include <set>

namespace memeprobe {

namespace {

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n\r") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + "\"";
}

std::string md_cell(const std::string& s)
{
    std::string out;
    for (char c : s) {
        if (c == '|') {
            out += "\\|";
        } else if (c == '\n' || c == '\r') {
            out += ' ';
        } else {
            out += c;
        }
    }
    return out;
}

void metrics_rows(std::string& out, const std::string& model, const char* subset, const MetricsTable& table)
{
    auto row = [&](const CategoryMetrics& m) {
        out += fmt::format("{},{},{},{},{},{},{}\n", csv_field(model), subset, csv_field(m.category), m.n, m.failures,
                           m.average_score, m.failure_rate);
    };
    for (const auto& m : table.rows) {
        row(m);
    }
    if (table.avg) {
        row(*table.avg);
    }
}

} // namespace

EvaluationReport build_report(const ScoredSet& history, const ReportOptions& options)
{
    EvaluationReport r;
    r.options = options;
    const auto& t = options.threshold;
    r.combined = aggregate_by_category(history, SampleFilter::all, t, options.avg_mode, options.category_order);
    r.original = aggregate_by_category(history, SampleFilter::original_only, t, options.avg_mode, options.category_order);
    r.refined = aggregate_by_category(history, SampleFilter::refined_only, t, options.avg_mode, options.category_order);
    r.deltas = compute_refinement_deltas(r.original, r.combined);
    r.convergence = convergence_series(history, options.convergence_mode);
    for (const auto& row : r.combined.rows) {
        r.histograms[row.category] = misbelief_histogram(history, row.category, options.histogram_top);
    }
    return r;
}

std::string format_score(double score) { return fmt::format("{:.2f}", score); }

std::string format_failure_rate(double rate) { return fmt::format("{:05.2f}", rate * 100.0); }

std::string format_delta(double rate_delta)
{
    auto magnitude = fmt::format("{:.2f}", std::abs(rate_delta * 100.0));
    const bool negative = rate_delta < 0.0 && magnitude != "0.00";
    return fmt::format("({}{})", negative ? '-' : '+', magnitude);
}

std::string render_markdown(const EvaluationReport& r)
{
    const auto& model = r.options.model;
    std::string out = fmt::format("# Evaluation report: {}\n\n", md_cell(model));

    out += "## Score and failure rate (original and refined samples)\n\n| Model |";
    std::string rule = "|---|";
    std::string row = "| " + md_cell(model) + " |";
    auto add_metrics = [&](const CategoryMetrics& m) {
        out += " " + md_cell(m.category) + " Score | " + md_cell(m.category) + " FR |";
        rule += "---:|---:|";
        row += " " + format_score(m.average_score) + " | " + format_failure_rate(m.failure_rate) + " |";
    };
    for (const auto& m : r.combined.rows) {
        add_metrics(m);
    }
    if (r.combined.avg) {
        add_metrics(*r.combined.avg);
    }
    out += "\n" + rule + "\n" + row + "\n\n";

    out += "## Failure rate without refinement (change against the table above)\n\n| Model |";
    rule = "|---|";
    row = "| " + md_cell(model) + " |";
    for (const auto& d : r.deltas) {
        out += " " + md_cell(d.category) + " |";
        rule += "---:|";
        row += " " + format_failure_rate(d.original_fr) + " " + format_delta(d.delta) + " |";
    }
    out += "\n" + rule + "\n" + row + "\n\n";

    out += "## Per-category detail\n\n";
    out += "| Category | n original | n refined | n total | Score original | Score refined | Score total | "
           "FR original | FR refined | FR total |\n";
    out += "|---|---:|---:|---:|---:|---:|---:|---:|---:|---:|\n";
    std::map<std::string, const CategoryMetrics*> original;
    std::map<std::string, const CategoryMetrics*> refined;
    for (const auto& m : r.original.rows) {
        original[m.category] = &m;
    }
    for (const auto& m : r.refined.rows) {
        refined[m.category] = &m;
    }
    auto detail = [&](const CategoryMetrics& all, const CategoryMetrics* o, const CategoryMetrics* f) {
        auto n = [](const CategoryMetrics* m) { return m ? std::to_string(m->n) : std::string("0"); };
        auto score = [](const CategoryMetrics* m) { return m ? format_score(m->average_score) : std::string("-"); };
        auto fr = [](const CategoryMetrics* m) { return m ? format_failure_rate(m->failure_rate) : std::string("-"); };
        out += fmt::format("| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |\n", md_cell(all.category), n(o), n(f),
                           all.n, score(o), score(f), format_score(all.average_score), fr(o), fr(f),
                           format_failure_rate(all.failure_rate));
    };
    for (const auto& m : r.combined.rows) {
        auto o = original.find(m.category);
        auto f = refined.find(m.category);
        detail(m, o == original.end() ? nullptr : o->second, f == refined.end() ? nullptr : f->second);
    }
    if (r.combined.avg) {
        detail(*r.combined.avg, r.original.avg ? &*r.original.avg : nullptr,
               r.refined.avg ? &*r.refined.avg : nullptr);
    }

    out += fmt::format("\n## Score by refinement iteration ({} mean)\n\n", to_string(r.options.convergence_mode));
    out += "| Category | Iteration | Mean score | Samples |\n|---|---:|---:|---:|\n";
    for (const auto& m : r.combined.rows) {
        auto it = r.convergence.find(m.category);
        if (it == r.convergence.end()) {
            continue;
        }
        for (const auto& p : it->second) {
            out += fmt::format("| {} | {} | {} | {} |\n", md_cell(m.category), p.iteration, format_score(p.mean), p.n);
        }
    }

    out += "\n## Most frequent misbeliefs\n";
    for (const auto& m : r.combined.rows) {
        auto it = r.histograms.find(m.category);
        if (it == r.histograms.end()) {
            continue;
        }
        out += fmt::format("\n### {}\n\n| Misbelief | Original | Refined |\n|---|---:|---:|\n", md_cell(m.category));
        for (const auto& h : it->second) {
            out += fmt::format("| {} | {} | {} |\n", md_cell(h.group), h.original, h.refined);
        }
    }

    out += "\n## Run metadata\n\n```json\n" + r.options.metadata.dump(2) + "\n```\n";
    return out;
}

std::string render_metrics_csv(const EvaluationReport& r)
{
    std::string out = "model,subset,category,n,failures,average_score,failure_rate\n";
    metrics_rows(out, r.options.model, "all", r.combined);
    metrics_rows(out, r.options.model, "original", r.original);
    metrics_rows(out, r.options.model, "refined", r.refined);
    return out;
}

std::string render_convergence_csv(const EvaluationReport& r)
{
    std::string out = "model,category,iteration,mean_score,n\n";
    for (const auto& [category, points] : r.convergence) {
        for (const auto& p : points) {
            out += fmt::format("{},{},{},{},{}\n", csv_field(r.options.model), csv_field(category), p.iteration,
                               p.mean, p.n);
        }
    }
    return out;
}

std::string render_histogram_csv(const EvaluationReport& r)
{
    std::string out = "model,category,misbelief,original,refined\n";
    for (const auto& [category, rows] : r.histograms) {
        for (const auto& h : rows) {
            out += fmt::format("{},{},{},{},{}\n", csv_field(r.options.model), csv_field(category), csv_field(h.group),
                               h.original, h.refined);
        }
    }
    return out;
}

std::string render_report(const EvaluationReport& report, ReportFormat format)
{
    return format == ReportFormat::markdown ? render_markdown(report) : render_metrics_csv(report);
}

} // namespace memeprobe
