#include "support.hpp"

#include "memeprobe/errors.hpp"
#include "memeprobe/mining.hpp"

#include <gtest/gtest.h>

using namespace memeprobe;
using namespace memeprobe::testing;

namespace {

MinerVote vote(int index, std::vector<std::string> categories)
{
    MinerVote v;
    v.miner_index = index;
    v.categories = std::move(categories);
    return v;
}

bool ends_with(const std::string& s, std::string_view suffix)
{
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// Answers per role; miners by miner index, verdicts by agent.
struct Script {
    std::map<int, std::vector<std::string>> miners; ///< index -> answers in order
    std::string examiner = "Verdict: YES";
    std::string judge = "Verdict: YES";
    std::string narrator = "Group A is lazy.";

    std::shared_ptr<FnBackend> backend()
    {
        auto cursor = std::make_shared<std::map<std::string, std::size_t>>();
        auto mutex = std::make_shared<std::mutex>();
        return std::make_shared<FnBackend>([this, cursor, mutex](const ModelRequest& r) -> std::string {
            switch (r.role) {
            case Role::Miner: {
                auto pos = r.slot.find("/miner-");
                int index = r.slot[pos + 7] - '0';
                std::lock_guard lock(*mutex);
                auto key = r.slot.substr(0, pos + 8);
                auto& answers = miners.at(index);
                auto n = (*cursor)[key]++;
                return answers[std::min(n, answers.size() - 1)];
            }
            case Role::Examiner: return examiner;
            case Role::Judge: return judge;
            case Role::Narrator: return narrator;
            default: return "";
            }
        });
    }
};

} // namespace

TEST(MinerParser, ListsAndProposals)
{
    auto a = parse_miner_answer("Categories: [Race, Gender]");
    ASSERT_TRUE(a);
    EXPECT_EQ(a->categories, (std::vector<std::string>{"Race", "Gender"}));
    EXPECT_FALSE(a->proposal);

    auto empty = parse_miner_answer("Categories: []");
    ASSERT_TRUE(empty);
    EXPECT_TRUE(empty->categories.empty());

    auto p = parse_miner_answer("Categories: [Religion]\nNew category: islamophobia\nExplanation: hostility to Muslims");
    ASSERT_TRUE(p && p->proposal);
    EXPECT_EQ(p->proposal->first, "islamophobia");
    EXPECT_EQ(p->proposal->second, "hostility to Muslims");

    EXPECT_TRUE(parse_miner_answer("[Race]"));
    EXPECT_FALSE(parse_miner_answer("I think it is racist."));
    EXPECT_FALSE(parse_miner_answer("Categories: [Race]\nNew category: Foo"));
    auto none = parse_miner_answer("**Categories:** [\"Race\"]\nNew category: none");
    ASSERT_TRUE(none);
    EXPECT_EQ(none->categories, std::vector<std::string>{"Race"});
    EXPECT_FALSE(none->proposal);
}

TEST(VerdictParser, FirstStandaloneWordDecides)
{
    EXPECT_EQ(parse_verdict("Verdict: YES, because"), std::optional(true));
    EXPECT_EQ(parse_verdict("no. It overlaps with Religion; yes it is harmful"), std::optional(false));
    EXPECT_EQ(parse_verdict("Nobody knows"), std::nullopt);
    EXPECT_EQ(parse_verdict(""), std::nullopt);
}

TEST(NarrationParser, StripsLabelAndQuotes)
{
    EXPECT_EQ(parse_narration("\n  Misbelief: \"Group A is lazy.\"\nmore"), "Group A is lazy.");
    EXPECT_EQ(parse_narration("   \n"), "");
}

TEST(Tally, Examples)
{
    EXPECT_EQ(tally_majority_vote({vote(1, {"Race"}), vote(2, {"Race"}), vote(3, {"Gender"})}),
              std::set<std::string>{"Race"});
    EXPECT_EQ(tally_majority_vote({vote(1, {"Race", "Gender"}), vote(2, {"Gender"}), vote(3, {"Race"})}),
              (std::set<std::string>{"Race", "Gender"}));
    EXPECT_TRUE(tally_majority_vote({vote(1, {}), vote(2, {}), vote(3, {})}).empty());
}

TEST(Tally, ExhaustiveOverThreeCategories)
{
    const std::vector<std::string> names{"A", "B", "C"};
    auto subset = [&](int mask) {
        std::vector<std::string> out;
        for (int i = 0; i < 3; ++i) {
            if (mask & (1 << i)) {
                out.push_back(names[static_cast<std::size_t>(i)]);
            }
        }
        return out;
    };
    int cases = 0;
    for (int a = 0; a < 8; ++a) {
        for (int b = 0; b < 8; ++b) {
            for (int c = 0; c < 8; ++c) {
                ++cases;
                std::set<std::string> expected;
                for (int i = 0; i < 3; ++i) {
                    int votes = ((a >> i) & 1) + ((b >> i) & 1) + ((c >> i) & 1);
                    if (votes >= 2) {
                        expected.insert(names[static_cast<std::size_t>(i)]);
                    }
                }
                EXPECT_EQ(tally_majority_vote({vote(1, subset(a)), vote(2, subset(b)), vote(3, subset(c))}), expected);
            }
        }
    }
    EXPECT_EQ(cases, 512);
}

TEST(CollectVotes, UnanimousAndHarmless)
{
    Script script;
    script.miners = {{1, {"Categories: [Race]"}}, {2, {"Categories: [Race]"}}, {3, {"Categories: []"}}};
    auto backend = script.backend();
    auto gateway = make_gateway(backend);
    EventBuffer events;
    auto votes = collect_miner_votes(gateway, meme("m1"), Taxonomy::initial(), {}, events);
    ASSERT_EQ(votes.size(), 3u);
    EXPECT_EQ(votes[0].categories, std::vector<std::string>{"Race"});
    EXPECT_EQ(votes[1].categories, std::vector<std::string>{"Race"});
    EXPECT_TRUE(votes[2].categories.empty());
    for (const auto& r : backend->requests()) {
        EXPECT_EQ(r.temperature, 1.0);
        EXPECT_NE(r.joined_text().find("- Race: "), std::string::npos);
    }
}

TEST(CollectVotes, ProposalCarriedInVote)
{
    Script script;
    script.miners = {{1, {"Categories: [Religion]\nNew category: islamophobia\nExplanation: hostility to Muslims"}},
                     {2, {"Categories: [Religion]"}},
                     {3, {"Categories: [Religion]"}}};
    auto gateway = make_gateway(script.backend());
    EventBuffer events;
    auto votes = collect_miner_votes(gateway, meme("m1"), Taxonomy::initial(), {}, events);
    ASSERT_TRUE(votes[0].proposal);
    EXPECT_EQ(votes[0].proposal->name, "islamophobia");
    EXPECT_EQ(votes[0].proposal->source_meme, "m1");
    EXPECT_EQ(votes[0].categories, (std::vector<std::string>{"Religion", "islamophobia"}));
}

TEST(CollectVotes, ReaskThenUnparseable)
{
    Script script;
    script.miners = {{1, {"hmm", "Categories: [Race]"}}, {2, {"no idea"}}, {3, {"Categories: [Race]"}}};
    auto backend = script.backend();
    auto gateway = make_gateway(backend);
    EventBuffer events;
    try {
        collect_miner_votes(gateway, meme("m1"), Taxonomy::initial(), {}, events);
        FAIL() << "expected UnparseableVote";
    } catch (const UnparseableVote& e) {
        EXPECT_EQ(e.kind(), "UnparseableVote");
        EXPECT_NE(std::string(e.what()).find('2'), std::string::npos);
    }
    // miner 1 recovered after one re-ask; miner 2 used both re-asks
    EXPECT_EQ(backend->count(Role::Miner), 2u + 3u + 1u);
}

TEST(Gate, AllVerdictCombinations)
{
    for (bool examiner : {true, false}) {
        for (bool judge : {true, false}) {
            Script script;
            script.examiner = examiner ? "Verdict: YES" : "Verdict: NO";
            script.judge = judge ? "YES, distinct" : "NO, it overlaps with Religion";
            auto backend = script.backend();
            auto gateway = make_gateway(backend);
            EventBuffer events;
            CategoryProposal p{"Political", "hostility towards a political group", "m1"};
            auto taxonomy = Taxonomy::initial();
            auto verdict = gate_category_proposal(gateway, p, meme("m1"), taxonomy, {}, events);
            EXPECT_EQ(verdict.examiner_ok, examiner);
            EXPECT_EQ(verdict.judge_ok, judge);
            EXPECT_FALSE(verdict.judge_rationale.empty());
            EXPECT_EQ(backend->count(Role::Examiner), 1u);
            EXPECT_EQ(backend->count(Role::Judge), 1u);

            auto updated = update_taxonomy(taxonomy, p, verdict);
            EXPECT_EQ(updated.contains("Political"), examiner && judge);
            EXPECT_EQ(updated.revision(), taxonomy.revision() + ((examiner && judge) ? 1 : 0));
            EXPECT_GE(updated.revision(), taxonomy.revision());
        }
    }
}

TEST(Gate, ExaminerSeesImageJudgeSeesTaxonomy)
{
    Script script;
    auto backend = script.backend();
    auto gateway = make_gateway(backend);
    EventBuffer events;
    gate_category_proposal(gateway, {"Political", "x", "m1"}, meme("m1"), Taxonomy::initial(), {}, events);
    auto requests = backend->requests();
    ASSERT_EQ(requests.size(), 2u);
    EXPECT_TRUE(requests[0].image.has_value());
    EXPECT_FALSE(requests[1].image.has_value());
    EXPECT_NE(requests[1].joined_text().find("- Religion: "), std::string::npos);
    EXPECT_THROW(gate_category_proposal(gateway, {"religion", "x", "m1"}, meme("m1"), Taxonomy::initial(), {}, events),
                 std::invalid_argument);
}

TEST(Gate, UnparseableVerdict)
{
    Script script;
    script.judge = "maybe";
    auto gateway = make_gateway(script.backend());
    EventBuffer events;
    EXPECT_THROW(gate_category_proposal(gateway, {"Political", "x", "m1"}, meme("m1"), Taxonomy::initial(), {}, events),
                 UnparseableVerdict);
}

TEST(Narrate, PassthroughAndEmpty)
{
    Script script;
    script.narrator = "Women are bad drivers.";
    auto gateway = make_gateway(script.backend());
    EventBuffer events;
    auto t = Taxonomy::initial();
    EXPECT_EQ(narrate_misbelief(gateway, meme("m1"), *t.find("Gender"), {}, events), "Women are bad drivers.");

    Script silent;
    silent.narrator = "  ";
    auto gateway2 = make_gateway(silent.backend());
    EXPECT_THROW(narrate_misbelief(gateway2, meme("m1"), *t.find("Gender"), {}, events), EmptyNarration);
}

TEST(MiningStage, UnanimousVotesLeaveTaxonomyUnchanged)
{
    Script script;
    script.miners = {{1, {"Categories: [Race]"}}, {2, {"Categories: [Race]"}}, {3, {"Categories: [Race]"}}};
    auto gateway = make_gateway(script.backend());
    EventLog log;
    auto result = run_mining_stage(gateway, {meme("m1"), meme("m2")}, Taxonomy::initial(), {}, log);
    ASSERT_EQ(result.samples.size(), 2u);
    EXPECT_EQ(result.samples[0].sample_id, "m1#race");
    EXPECT_EQ(result.samples[0].misbelief, "Group A is lazy.");
    EXPECT_EQ(result.taxonomy, Taxonomy::initial());
}

TEST(MiningStage, ApprovedProposalGrowsTaxonomy)
{
    Script script;
    const std::string proposal = "Categories: []\nNew category: Political\nExplanation: hostility to a party";
    script.miners = {{1, {proposal}}, {2, {proposal}}, {3, {"Categories: [Political]"}}};
    auto backend = script.backend();
    auto gateway = make_gateway(backend);
    EventLog log;
    auto result = run_mining_stage(gateway, {meme("m1")}, Taxonomy::initial(), {}, log);
    EXPECT_EQ(result.taxonomy.size(), 7u);
    EXPECT_EQ(result.taxonomy.revision(), 1);
    EXPECT_EQ(result.taxonomy.find("Political")->origin, CategoryOrigin::discovered);
    ASSERT_EQ(result.samples.size(), 1u);
    EXPECT_EQ(result.samples[0].category, "Political");
    EXPECT_EQ(result.samples[0].taxonomy_revision, 1);
    EXPECT_EQ(backend->count(Role::Examiner), 1u); // second identical proposal is folded
    EXPECT_EQ(result.summary.proposals_accepted, 1u);
}

TEST(MiningStage, RejectedProposalIsDropped)
{
    Script script;
    script.judge = "NO, overlaps with Religion";
    const std::string proposal = "Categories: [Religion]\nNew category: Islamophobia\nExplanation: hostility to Muslims";
    script.miners = {{1, {proposal}}, {2, {proposal}}, {3, {"Categories: [Religion]"}}};
    auto gateway = make_gateway(script.backend());
    EventLog log;
    auto result = run_mining_stage(gateway, {meme("m1")}, Taxonomy::initial(), {}, log);
    EXPECT_EQ(result.taxonomy, Taxonomy::initial());
    ASSERT_EQ(result.samples.size(), 1u);
    EXPECT_EQ(result.samples[0].category, "Religion");
    std::size_t dropped = 0;
    for (const auto& e : log.events()) {
        dropped += e.kind == "category_dropped" ? 1 : 0;
    }
    EXPECT_EQ(dropped, 2u);
}

TEST(MiningStage, HarmlessAndSkippedMemes)
{
    Script script;
    script.miners = {{1, {"Categories: []"}}, {2, {"Categories: []"}}, {3, {"garbage"}}};
    auto gateway = make_gateway(script.backend());
    EventLog log;
    auto result = run_mining_stage(gateway, {meme("m1")}, Taxonomy::initial(), {}, log);
    EXPECT_TRUE(result.samples.empty());
    EXPECT_EQ(result.summary.skipped, 1u);

    Script calm;
    calm.miners = {{1, {"Categories: []"}}, {2, {"Categories: []"}}, {3, {"Categories: []"}}};
    auto gateway2 = make_gateway(calm.backend());
    EventLog log2;
    auto harmless = run_mining_stage(gateway2, {meme("m1")}, Taxonomy::initial(), {}, log2);
    EXPECT_TRUE(harmless.samples.empty());
    EXPECT_EQ(harmless.summary.harmless, 1u);

    EXPECT_THROW(run_mining_stage(gateway2, {}, Taxonomy::initial(), {}, log2), EmptyStageInput);
}

TEST(MiningStage, EventLogIsGapless)
{
    Script script;
    script.miners = {{1, {"Categories: [Race, Gender]"}}, {2, {"Categories: [Gender]"}}, {3, {"Categories: [Race]"}}};
    auto gateway = make_gateway(script.backend());
    EventLog log;
    auto result = run_mining_stage(gateway, {meme("m2"), meme("m1")}, Taxonomy::initial(), {}, log);
    ASSERT_EQ(result.samples.size(), 4u);
    EXPECT_EQ(result.samples[0].sample_id, "m1#race");
    EXPECT_EQ(result.samples[1].sample_id, "m1#gender");
    auto events = log.events();
    for (std::size_t i = 0; i < events.size(); ++i) {
        EXPECT_EQ(events[i].seq, i + 1);
    }
    EXPECT_TRUE(ends_with(events.back().kind, "stage_completed"));
}
