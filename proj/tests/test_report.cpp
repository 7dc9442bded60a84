#include "support.hpp"
#include "table_fixture.hpp"

#include "memeprobe/report.hpp"

#include <gtest/gtest.h>

#include <sstream>
#include <string_view>

using namespace memeprobe;
using namespace memeprobe::testing;

namespace {

std::string line_starting(const std::string& doc, const std::string& header_fragment, int skip)
{
    std::istringstream in(doc);
    std::string line;
    while (std::getline(in, line)) {
        if (line.find(header_fragment) != std::string::npos) {
            for (int i = 0; i < skip && std::getline(in, line); ++i) {
            }
            return line;
        }
    }
    return {};
}

EvaluationReport fixture_report(AvgMode mode = AvgMode::micro)
{
    auto f = load_table_fixture(source_dir() / "tests/fixtures/gpt4o_table_fixture.json");
    ReportOptions o;
    o.model = f.model;
    o.category_order = f.categories;
    o.avg_mode = mode;
    return build_report(f.history, o);
}

} // namespace

TEST(Formatting, ScoreFailureRateDelta)
{
    EXPECT_EQ(format_score(7.375), "7.38");
    EXPECT_EQ(format_score(10.0), "10.00");
    EXPECT_EQ(format_failure_rate(0.0218), "02.18");
    EXPECT_EQ(format_failure_rate(0.0), "00.00");
    EXPECT_EQ(format_failure_rate(0.5), "50.00");
    EXPECT_EQ(format_failure_rate(1.0), "100.00");
    EXPECT_EQ(format_delta(-0.0148), "(-1.48)");
    EXPECT_EQ(format_delta(0.0007), "(+0.07)");
    EXPECT_EQ(format_delta(0.0), "(+0.00)");
    EXPECT_EQ(format_delta(-0.00001), "(+0.00)");
}

TEST(GptFixture, AvgCellsRenderExactly)
{
    auto md = render_markdown(fixture_report());
    auto table1 = line_starting(md, "| Model | Nationality Score", 2);
    ASSERT_FALSE(table1.empty());
    EXPECT_TRUE(std::string_view(table1).ends_with("| 7.38 | 02.18 |")) << table1;
    auto table2 = line_starting(md, "| Model | Nationality |", 2);
    EXPECT_TRUE(std::string_view(table2).ends_with("| 00.70 (-1.48) |")) << table2;
}

TEST(GptFixture, CategoryCellsRenderExactly)
{
    auto md = render_markdown(fixture_report());
    auto table1 = line_starting(md, "| Model | Nationality Score", 2);
    EXPECT_EQ(table1,
              "| GPT-4o | 7.53 | 00.43 | 7.43 | 02.14 | 7.52 | 01.24 | 7.30 | 03.53 | 7.15 | 03.64 | 7.44 | 02.54 | "
              "7.39 | 03.36 | 7.26 | 00.44 | 7.38 | 02.18 |");
    auto table2 = line_starting(md, "| Model | Nationality |", 2);
    EXPECT_EQ(table2,
              "| GPT-4o | 00.50 (+0.07) | 00.50 (-1.64) | 00.00 (-1.24) | 00.00 (-3.53) | 02.82 (-0.82) | "
              "00.50 (-2.04) | 01.51 (-1.85) | 00.00 (-0.44) | 00.70 (-1.48) |");
}

TEST(GptFixture, MacroAverageDiffers)
{
    auto report = fixture_report(AvgMode::macro);
    ASSERT_TRUE(report.combined.avg);
    EXPECT_NE(format_failure_rate(report.combined.avg->failure_rate), "02.18");
}

TEST(Rendering, DeterministicAndCsvIsRaw)
{
    auto a = fixture_report();
    EXPECT_EQ(render_markdown(a), render_markdown(fixture_report()));
    auto csv = render_metrics_csv(a);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "model,subset,category,n,failures,average_score,failure_rate");
    auto first_row = line_starting(csv, "model,subset", 1);
    EXPECT_EQ(first_row.rfind("GPT-4o,all,Nationality,231,1,", 0), 0u) << first_row;
    EXPECT_EQ(render_report(a, ReportFormat::csv), csv);
    EXPECT_EQ(render_report(a, ReportFormat::markdown), render_markdown(a));
}

TEST(Rendering, DeltaConsistencyWithinPrecision)
{
    auto r = fixture_report();
    for (const auto& d : r.deltas) {
        EXPECT_NEAR(d.original_fr - d.delta, d.combined_fr, 1e-12) << d.category;
    }
}

TEST(Rendering, ConvergenceAndHistogramCsv)
{
    ScoredSet set{scored("m1", "Race", "Group A is lazy", 8)};
    auto r = set[0];
    r.mined.sample_id += "~r";
    r.refined = true;
    r.parent_id = set[0].id();
    r.iteration = 1;
    r.score = 6;
    set.push_back(r);
    ReportOptions o;
    o.model = "m,x";
    auto report = build_report(set, o);
    EXPECT_EQ(render_convergence_csv(report),
              "model,category,iteration,mean_score,n\n\"m,x\",Race,0,8,1\n\"m,x\",Race,1,7,2\n");
    EXPECT_EQ(render_histogram_csv(report), "model,category,misbelief,original,refined\n\"m,x\",Race,group a is lazy,1,1\n");
}
