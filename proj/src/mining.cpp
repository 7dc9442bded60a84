#include "memeprobe/mining.hpp"

#include "memeprobe/errors.hpp"
#include "memeprobe/text.hpp"

#include <algorithm>
#include <future>
#include <regex>

namespace memeprobe {

using nlohmann::json;

namespace {

constexpr std::string_view kStage = "mine";

const std::string kMinerReminder =
    "Your previous answer could not be read. Reply again using exactly this format:\n"
    "Categories: [Category A, Category B]\n"
    "and, only when proposing a new category, the lines \"New category: <name>\" and \"Explanation: <text>\".";
const std::string kVerdictReminder =
    "Your previous answer could not be read. Start your reply with \"Verdict: YES\" or \"Verdict: NO\".";
const std::string kNarratorReminder =
    "Your previous answer was empty. Reply with one sentence stating the misbelief.";

std::string strip_quotes(std::string s)
{
    s = text::trim(s);
    while (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\'') ||
                             (s.front() == '*' && s.back() == '*'))) {
        s = text::trim(std::string_view(s).substr(1, s.size() - 2));
    }
    return s;
}

/// Value after `label` (case-insensitive) when the trimmed line starts with it.
std::optional<std::string> labelled(const std::string& line, std::string_view label)
{
    auto t = text::trim(line);
    while (!t.empty() && (t.front() == '*' || t.front() == '-' || t.front() == '#')) {
        t = text::trim(std::string_view(t).substr(1));
    }
    if (t.size() < label.size() || !text::iequals(std::string_view(t).substr(0, label.size()), label)) {
        return std::nullopt;
    }
    auto rest = std::string_view(t).substr(label.size());
    while (!rest.empty() && rest.front() == '*') {
        rest.remove_prefix(1);
    }
    return text::trim(rest);
}

std::optional<std::vector<std::string>> parse_list(std::string_view body)
{
    auto s = text::trim(body);
    auto open = s.find('[');
    auto close = s.rfind(']');
    if (open != std::string::npos) {
        if (close == std::string::npos || close < open) {
            return std::nullopt;
        }
        s = s.substr(open + 1, close - open - 1);
    }
    std::vector<std::string> items;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto comma = s.find(',', start);
        auto item = strip_quotes(s.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (!item.empty() && !text::iequals(item, "none")) {
            items.push_back(item);
        }
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return items;
}

bool no_proposal_marker(std::string_view name)
{
    return name.empty() || text::iequals(name, "none") || text::iequals(name, "n/a") || text::iequals(name, "no");
}

void push_unique(std::vector<std::string>& names, const std::string& name)
{
    for (const auto& n : names) {
        if (text::iequals(n, name)) {
            return;
        }
    }
    names.push_back(name);
}

json vote_to_json(const MinerVote& v)
{
    json j = {{"miner", v.miner_index}, {"categories", v.categories}};
    if (v.proposal) {
        j["proposal"] = {{"name", v.proposal->name}, {"explanation", v.proposal->explanation}};
    }
    return j;
}

} // namespace

// ---- parsers ---------------------------------------------------------------

std::optional<MinerAnswer> parse_miner_answer(std::string_view raw)
{
    MinerAnswer answer;
    bool have_list = false;
    std::optional<std::string> new_name;
    std::optional<std::string> explanation;
    for (const auto& line : text::split_lines(raw)) {
        if (auto v = labelled(line, "categories:"); v && !have_list) {
            auto list = parse_list(*v);
            if (!list) {
                return std::nullopt;
            }
            answer.categories = std::move(*list);
            have_list = true;
        } else if (auto n = labelled(line, "new category:"); n && !new_name) {
            new_name = strip_quotes(*n);
        } else if (auto e = labelled(line, "explanation:"); e && !explanation) {
            explanation = strip_quotes(*e);
        }
    }
    if (!have_list) {
        for (const auto& line : text::split_lines(raw)) {
            auto t = text::trim(line);
            if (!t.empty() && t.front() == '[' && t.back() == ']') {
                answer.categories = *parse_list(t);
                have_list = true;
                break;
            }
        }
    }
    if (!have_list) {
        return std::nullopt;
    }
    if (new_name && !no_proposal_marker(*new_name)) {
        if (!explanation || explanation->empty()) {
            return std::nullopt;
        }
        answer.proposal = std::make_pair(*new_name, *explanation);
    }
    return answer;
}

std::optional<bool> parse_verdict(std::string_view text)
{
    static const std::regex word(R"(\b(yes|no)\b)", std::regex::icase);
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_search(text.begin(), text.end(), m, word)) {
        return std::nullopt;
    }
    return text::iequals(m[1].str(), "yes");
}

std::string parse_narration(std::string_view raw)
{
    for (const auto& line : text::split_lines(raw)) {
        auto t = text::trim(line);
        if (t.empty()) {
            continue;
        }
        if (auto v = labelled(t, "misbelief:")) {
            t = *v;
        }
        t = strip_quotes(t);
        if (!t.empty()) {
            return t;
        }
    }
    return {};
}

std::string render_taxonomy(const Taxonomy& taxonomy)
{
    std::string out;
    for (const auto& c : taxonomy.categories()) {
        out += "- " + c.name + ": " + c.explanation + "\n";
    }
    if (!out.empty()) {
        out.pop_back();
    }
    return out;
}

// ---- stage operations ------------------------------------------------------

std::vector<MinerVote> collect_miner_votes(Gateway& gateway, const MemeRecord& meme, const Taxonomy& taxonomy,
                                           const MiningOptions& options, EventBuffer& events)
{
    if (taxonomy.empty()) {
        throw std::invalid_argument("mining needs a non-empty taxonomy");
    }
    const TemplateVars vars{{"meme_text", meme.text}, {"taxonomy", render_taxonomy(taxonomy)}};
    const int n = options.miner_count;
    std::vector<EventBuffer> buffers(static_cast<std::size_t>(n));
    std::vector<std::future<MinerVote>> futures;
    for (int i = 1; i <= n; ++i) {
        futures.push_back(std::async(std::launch::async, [&, i] {
            auto& buf = buffers[static_cast<std::size_t>(i - 1)];
            auto parsed = ask_parsed(gateway, Role::Miner, meme.id + "/miner-" + std::to_string(i), vars, meme.image,
                                     options.reask_limit, kMinerReminder, buf, kStage, parse_miner_answer);
            if (!parsed) {
                throw UnparseableVote(i);
            }
            MinerVote vote;
            vote.miner_index = i;
            for (const auto& c : parsed->categories) {
                push_unique(vote.categories, c);
            }
            if (parsed->proposal) {
                vote.proposal = CategoryProposal{parsed->proposal->first, parsed->proposal->second, meme.id};
                push_unique(vote.categories, vote.proposal->name);
            }
            return vote;
        }));
    }
    std::vector<MinerVote> votes;
    std::exception_ptr failure;
    for (std::size_t i = 0; i < futures.size(); ++i) {
        try {
            votes.push_back(futures[i].get());
        } catch (...) {
            if (!failure) {
                failure = std::current_exception();
            }
        }
        events.splice(std::move(buffers[i]));
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return votes;
}

std::set<std::string> tally_majority_vote(const std::vector<MinerVote>& votes)
{
    std::map<std::string, std::size_t> counts;
    for (const auto& v : votes) {
        std::set<std::string> seen(v.categories.begin(), v.categories.end());
        for (const auto& c : seen) {
            ++counts[c];
        }
    }
    std::set<std::string> result;
    for (const auto& [name, count] : counts) {
        if (2 * count > votes.size()) {
            result.insert(name);
        }
    }
    return result;
}

GateVerdict gate_category_proposal(Gateway& gateway, const CategoryProposal& proposal, const MemeRecord& meme,
                                   const Taxonomy& taxonomy, const MiningOptions& options, EventBuffer& events)
{
    if (taxonomy.contains(proposal.name)) {
        throw std::invalid_argument("proposal '" + proposal.name + "' already names a taxonomy category");
    }
    const auto tag = text::slug(proposal.name);
    GateVerdict verdict;

    std::string rationale;
    auto keep_rationale = [&rationale](std::string_view answer) {
        rationale = text::trim(answer);
        return parse_verdict(answer);
    };

    auto examiner = ask_parsed(gateway, Role::Examiner, meme.id + "/examiner/" + tag,
                               {{"meme_text", meme.text},
                                {"category_name", proposal.name},
                                {"category_explanation", proposal.explanation}},
                               meme.image, options.reask_limit, kVerdictReminder, events, kStage, keep_rationale);
    if (!examiner) {
        throw UnparseableVerdict("Examiner");
    }
    verdict.examiner_ok = *examiner;
    verdict.examiner_rationale = rationale;

    auto judge = ask_parsed(gateway, Role::Judge, meme.id + "/judge/" + tag,
                            {{"taxonomy", render_taxonomy(taxonomy)},
                             {"category_name", proposal.name},
                             {"category_explanation", proposal.explanation}},
                            std::nullopt, options.reask_limit, kVerdictReminder, events, kStage, keep_rationale);
    if (!judge) {
        throw UnparseableVerdict("Judge");
    }
    verdict.judge_ok = *judge;
    verdict.judge_rationale = rationale;
    return verdict;
}

Taxonomy update_taxonomy(Taxonomy taxonomy, const CategoryProposal& proposal, const GateVerdict& verdict)
{
    if (verdict.approved() && !taxonomy.contains(proposal.name)) {
        taxonomy.append(proposal.name, proposal.explanation, CategoryOrigin::discovered);
    }
    return taxonomy;
}

std::string narrate_misbelief(Gateway& gateway, const MemeRecord& meme, const HarmCategory& category,
                              const MiningOptions& options, EventBuffer& events)
{
    auto statement = ask_parsed(
        gateway, Role::Narrator, meme.id + "/narrator/" + text::slug(category.name),
        {{"meme_text", meme.text}, {"category_name", category.name}, {"category_explanation", category.explanation}},
        meme.image, options.reask_limit, kNarratorReminder, events, kStage,
        [](std::string_view answer) -> std::optional<std::string> {
            auto s = parse_narration(answer);
            return s.empty() ? std::nullopt : std::optional(s);
        });
    if (!statement) {
        throw EmptyNarration();
    }
    return *statement;
}

json MiningSummary::to_json() const
{
    return {{"memes", memes},
            {"harmless", harmless},
            {"skipped", skipped},
            {"samples_per_category", samples_per_category},
            {"proposals_raised", proposals_raised},
            {"proposals_accepted", proposals_accepted},
            {"proposals_rejected", proposals_rejected}};
}

MiningResult run_mining_stage(Gateway& gateway, const std::vector<MemeRecord>& memes, Taxonomy taxonomy,
                              const MiningOptions& options, EventLog& log)
{
    if (memes.empty()) {
        throw EmptyStageInput(std::string(kStage));
    }
    MiningResult result;
    const std::string stage(kStage);

    for (const auto& meme : memes) {
        EventBuffer events;
        ++result.summary.memes;
        try {
            auto votes = collect_miner_votes(gateway, meme, taxonomy, options, events);
            json vote_log = json::array();
            for (const auto& v : votes) {
                vote_log.push_back(vote_to_json(v));
            }
            events.add(stage, "miner_votes", {{"meme_id", meme.id}, {"revision", taxonomy.revision()}, {"votes", vote_log}});

            std::map<std::string, GateVerdict> gated; // lower-cased name -> verdict, per meme
            for (const auto& v : votes) {
                if (!v.proposal) {
                    continue;
                }
                const auto& p = *v.proposal;
                if (taxonomy.contains(p.name)) {
                    events.add(stage, "proposal_folded",
                               {{"meme_id", meme.id}, {"miner", v.miner_index}, {"name", p.name},
                                {"category", taxonomy.find(p.name)->name}});
                    continue;
                }
                const auto key = text::to_lower(p.name);
                if (gated.count(key) != 0) {
                    continue;
                }
                ++result.summary.proposals_raised;
                auto verdict = gate_category_proposal(gateway, p, meme, taxonomy, options, events);
                gated.emplace(key, verdict);
                const int before = taxonomy.revision();
                taxonomy = update_taxonomy(std::move(taxonomy), p, verdict);
                const bool appended = taxonomy.revision() != before;
                if (appended) {
                    ++result.summary.proposals_accepted;
                } else {
                    ++result.summary.proposals_rejected;
                }
                events.add(stage, "proposal_gated",
                           {{"meme_id", meme.id},
                            {"miner", v.miner_index},
                            {"name", p.name},
                            {"explanation", p.explanation},
                            {"examiner_ok", verdict.examiner_ok},
                            {"judge_ok", verdict.judge_ok},
                            {"examiner_rationale", verdict.examiner_rationale},
                            {"judge_rationale", verdict.judge_rationale},
                            {"appended", appended},
                            {"revision", taxonomy.revision()}});
                if (appended) {
                    events.add(stage, "taxonomy_updated",
                               {{"revision", taxonomy.revision()}, {"name", p.name}, {"explanation", p.explanation}});
                }
            }

            // Resolve listed names against the taxonomy as it stands after gating.
            for (auto& v : votes) {
                std::vector<std::string> resolved;
                for (const auto& name : v.categories) {
                    if (const auto* c = taxonomy.find(name)) {
                        push_unique(resolved, c->name);
                    } else {
                        events.add(stage, "category_dropped",
                                   {{"meme_id", meme.id}, {"miner", v.miner_index}, {"name", name}});
                    }
                }
                v.categories = std::move(resolved);
            }

            const auto valid = tally_majority_vote(votes);
            if (valid.empty()) {
                ++result.summary.harmless;
                events.add(stage, "meme_harmless", {{"meme_id", meme.id}});
                log.commit(std::move(events));
                continue;
            }
            std::vector<MinedSample> mined;
            for (const auto& c : taxonomy.categories()) {
                if (valid.count(c.name) == 0) {
                    continue;
                }
                MinedSample s;
                s.sample_id = make_sample_id(meme.id, c.name);
                s.meme = meme;
                s.category = c.name;
                s.misbelief = narrate_misbelief(gateway, meme, c, options, events);
                s.taxonomy_revision = taxonomy.revision();
                mined.push_back(std::move(s));
            }
            for (auto& s : mined) {
                events.add(stage, "mined_sample",
                           {{"sample_id", s.sample_id},
                            {"meme_id", meme.id},
                            {"category", s.category},
                            {"misbelief", s.misbelief},
                            {"revision", s.taxonomy_revision}});
                ++result.summary.samples_per_category[s.category];
                result.samples.push_back(std::move(s));
            }
        } catch (const Error& e) {
            ++result.summary.skipped;
            events.add(stage, "meme_skipped", {{"meme_id", meme.id}, {"error_kind", e.kind()}, {"error", e.what()}});
        }
        log.commit(std::move(events));
    }

    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < taxonomy.categories().size(); ++i) {
        position[taxonomy.categories()[i].name] = i;
    }
    std::stable_sort(result.samples.begin(), result.samples.end(), [&](const MinedSample& a, const MinedSample& b) {
        if (a.meme.id != b.meme.id) {
            return a.meme.id < b.meme.id;
        }
        return position[a.category] < position[b.category];
    });
    result.taxonomy = std::move(taxonomy);
    log.append(stage, "stage_completed", result.summary.to_json());
    return result;
}

} // namespace memeprobe
