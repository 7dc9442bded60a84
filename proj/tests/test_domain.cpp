#include "support.hpp"

#include "memeprobe/domain.hpp"
#include "memeprobe/errors.hpp"
#include "memeprobe/rng.hpp"
#include "memeprobe/text.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace memeprobe;
using namespace memeprobe::testing;

namespace {

std::string record_line(const std::string& id)
{
    return R"({"id":")" + id + R"(","image":"i/)" + id + R"(.png","text":"caption )" + id + R"("})";
}

} // namespace

TEST(Manifest, ThreeLinesKeepOrder)
{
    auto memes = parse_manifest(record_line("a") + "\n" + record_line("b") + "\n" + record_line("c") + "\n");
    ASSERT_EQ(memes.size(), 3u);
    EXPECT_EQ(memes[0].id, "a");
    EXPECT_EQ(memes[1].id, "b");
    EXPECT_EQ(memes[2].id, "c");
    EXPECT_FALSE(memes[0].erased_image.has_value());
    EXPECT_EQ(memes[0].preferred_image(), "i/a.png");
}

TEST(Manifest, DuplicateIdIsRejected)
{
    try {
        parse_manifest(record_line("m1") + "\n" + record_line("m1") + "\n");
        FAIL() << "expected DuplicateId";
    } catch (const DuplicateId& e) {
        EXPECT_EQ(e.id(), "m1");
    }
}

TEST(Manifest, EmptyFileGivesEmptyList)
{
    auto dir = scratch_dir("manifest_empty");
    write_file_atomic(dir / "m.jsonl", "");
    EXPECT_TRUE(load_manifest(dir / "m.jsonl").empty());
}

TEST(Manifest, MalformedLineReportsLineNumber)
{
    try {
        parse_manifest(record_line("a") + "\n{\"id\": \"b\", \"image\": 3}\n");
        FAIL() << "expected MalformedRecord";
    } catch (const MalformedRecord& e) {
        EXPECT_EQ(e.line_no(), 2u);
    }
    EXPECT_THROW(parse_manifest("not json\n"), MalformedRecord);
    EXPECT_THROW(parse_manifest(R"({"id":"a","image":"x","text":"  "})"), MalformedRecord);
}

TEST(Manifest, MissingFile)
{
    EXPECT_THROW(load_manifest("/nonexistent/manifest.jsonl"), MissingFile);
}

TEST(Manifest, RoundTrip)
{
    std::vector<MemeRecord> memes{meme("x1"), meme("x2")};
    memes[1].erased_image.reset();
    EXPECT_EQ(parse_manifest(serialize_manifest(memes)), memes);
}

TEST(Taxonomy, InitialHasSixSeedCategoriesAtRevisionZero)
{
    auto t = Taxonomy::initial();
    EXPECT_EQ(t.size(), 6u);
    EXPECT_EQ(t.revision(), 0);
    for (auto name : {"Race", "Gender", "Religion", "Nationality", "Disability", "Animal"}) {
        ASSERT_TRUE(t.contains(name)) << name;
        EXPECT_FALSE(t.find(name)->explanation.empty());
    }
    EXPECT_TRUE(t.contains("race"));
}

TEST(Taxonomy, AppendBumpsRevisionAndRejectsDuplicates)
{
    auto t = Taxonomy::initial();
    const auto& added = t.append("Political", "hostility towards a political group", CategoryOrigin::discovered);
    EXPECT_EQ(added.revision, 1);
    EXPECT_EQ(t.revision(), 1);
    EXPECT_THROW(t.append("POLITICAL", "again", CategoryOrigin::discovered), std::invalid_argument);
    EXPECT_THROW(t.append("Other", "  ", CategoryOrigin::discovered), std::invalid_argument);
    EXPECT_EQ(t.revision(), 1);
    EXPECT_EQ(Taxonomy::from_json(t.to_json()), t);
}

TEST(SampleIds, CategorySlugIsAppended)
{
    EXPECT_EQ(make_sample_id("m07", "Race"), "m07#race");
    EXPECT_EQ(make_sample_id("m07", "Child Exploitation"), "m07#child-exploitation");
}

namespace {

std::vector<MinedSample> category_of(const std::string& category, int n)
{
    std::vector<MinedSample> out;
    for (int i = 0; i < n; ++i) {
        out.push_back(mined("m" + std::to_string(1000 + i), category, "statement " + std::to_string(i)));
    }
    return out;
}

} // namespace

TEST(Sampling, SmallCategoryKeptWhole)
{
    auto all = category_of("Animal", 177);
    EXPECT_EQ(sample_per_category(all, 200, 1).size(), 177u);
}

TEST(Sampling, LargeCategoryCappedExactly)
{
    auto all = category_of("Religion", 537);
    auto animal = category_of("Animal", 12);
    all.insert(all.end(), animal.begin(), animal.end());
    auto kept = sample_per_category(all, 200, 1);
    std::map<std::string, int> per;
    for (const auto& s : kept) {
        ++per[s.category];
    }
    EXPECT_EQ(per["Religion"], 200);
    EXPECT_EQ(per["Animal"], 12);
}

TEST(Sampling, DeterministicAndOrderIndependent)
{
    auto all = category_of("Religion", 300);
    auto a = sample_per_category(all, 50, 9);
    EXPECT_EQ(a, sample_per_category(all, 50, 9));
    EXPECT_NE(a, sample_per_category(all, 50, 10));

    auto reversed = all;
    std::reverse(reversed.begin(), reversed.end());
    std::set<std::string> ids_a, ids_b;
    for (const auto& s : a) {
        ids_a.insert(s.sample_id);
    }
    for (const auto& s : sample_per_category(reversed, 50, 9)) {
        ids_b.insert(s.sample_id);
    }
    EXPECT_EQ(ids_a, ids_b);
    EXPECT_TRUE(sample_per_category({}, 5, 1).empty());
}

TEST(Rng, ChooseIndicesIsDistinctAndInRange)
{
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto n = 1 + seed % 37;
        auto k = seed % (n + 1);
        auto picks = choose_indices(n, k, seed);
        std::set<std::size_t> unique(picks.begin(), picks.end());
        EXPECT_EQ(unique.size(), k);
        for (auto p : picks) {
            EXPECT_LT(p, n);
        }
    }
    EXPECT_NE(derive_seed(1, "Race"), derive_seed(1, "Gender"));
}

TEST(ScoredArtifacts, RoundTripAndLineage)
{
    ScoredSet set;
    set.push_back(scored("m1", "Race", "group A is lazy", 6));
    auto r = set[0];
    r.mined.sample_id = "m1#race~r";
    r.mined.meme.text = "quieter caption";
    r.refined = true;
    r.parent_id = "m1#race";
    r.iteration = 1;
    r.score = 5;
    set.push_back(r);
    EXPECT_EQ(parse_scored(serialize_scored(set)), set);
    EXPECT_FALSE(find_broken_lineage(set).has_value());

    auto orphan = r;
    orphan.mined.sample_id = "m9#race~r";
    orphan.parent_id = "m9#race";
    set.push_back(orphan);
    EXPECT_EQ(find_broken_lineage(set), std::optional<std::string>("m9#race~r"));
}

TEST(ScoredArtifacts, RefinedFlagRequiresParent)
{
    auto s = scored("m1", "Race", "x", 4);
    s.refined = true;
    EXPECT_ANY_THROW(scored_from_line(scored_to_line(s)));
}

TEST(Text, NormalizeStatement)
{
    EXPECT_EQ(text::normalize_statement("  Group A  is\tLAZY!. "), "group a is lazy");
    EXPECT_EQ(text::slug("Child Exploitation"), "child-exploitation");
    EXPECT_EQ(text::collapse_whitespace(" a \n b "), "a b");
}
