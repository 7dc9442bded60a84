#pragma once

#include "memeprobe/domain.hpp"
#include "memeprobe/events.hpp"
#include "memeprobe/gateway.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace memeprobe {

struct CategoryProposal {
    std::string name;
    std::string explanation;
    std::string source_meme;

    bool operator==(const CategoryProposal&) const = default;
};

/// One Miner's answer. `categories` holds the names the Miner listed (plus
/// the name of its proposal, if any); an empty list means "harmless".
struct MinerVote {
    int miner_index = 1;
    std::vector<std::string> categories;
    std::optional<CategoryProposal> proposal;

    bool operator==(const MinerVote&) const = default;
};

struct GateVerdict {
    bool examiner_ok = false;
    bool judge_ok = false;
    std::string examiner_rationale;
    std::string judge_rationale;

    bool approved() const noexcept { return examiner_ok && judge_ok; }
};

struct MiningOptions {
    int miner_count = 3;
    int reask_limit = 2;
};

// ---- output parsers --------------------------------------------------------

struct MinerAnswer {
    std::vector<std::string> categories;
    std::optional<std::pair<std::string, std::string>> proposal; ///< (name, explanation)
};

/// Reads a "Categories: [A, B]" line and an optional "New category:" /
/// "Explanation:" pair. A bare bracketed list is accepted too. Returns
/// nullopt when no list can be found.
std::optional<MinerAnswer> parse_miner_answer(std::string_view text);

/// First standalone "yes" or "no" (any case) decides.
std::optional<bool> parse_verdict(std::string_view text);

/// First non-empty line, without a "Misbelief:" label or surrounding quotes.
/// Empty when there is nothing left.
std::string parse_narration(std::string_view text);

/// "- Name: explanation" lines, as shown to the agents.
std::string render_taxonomy(const Taxonomy& taxonomy);

// ---- stage operations ------------------------------------------------------

/// Asks every Miner (concurrently) about one meme against a fixed taxonomy
/// snapshot. Listed names are returned as written; resolution against the
/// taxonomy happens after proposals are gated.
std::vector<MinerVote> collect_miner_votes(Gateway& gateway, const MemeRecord& meme, const Taxonomy& taxonomy,
                                           const MiningOptions& options, EventBuffer& events);

/// Categories named by strictly more than half of the votes.
std::set<std::string> tally_majority_vote(const std::vector<MinerVote>& votes);

/// Examiner (sees the meme) and Judge (sees the taxonomy) are both asked,
/// even when the Examiner already declined.
GateVerdict gate_category_proposal(Gateway& gateway, const CategoryProposal& proposal, const MemeRecord& meme,
                                   const Taxonomy& taxonomy, const MiningOptions& options, EventBuffer& events);

/// Appends the proposal when both verdicts are positive; otherwise returns
/// the taxonomy unchanged.
Taxonomy update_taxonomy(Taxonomy taxonomy, const CategoryProposal& proposal, const GateVerdict& verdict);

std::string narrate_misbelief(Gateway& gateway, const MemeRecord& meme, const HarmCategory& category,
                              const MiningOptions& options, EventBuffer& events);

struct MiningSummary {
    std::map<std::string, std::size_t> samples_per_category;
    std::size_t memes = 0;
    std::size_t harmless = 0;
    std::size_t skipped = 0;
    std::size_t proposals_raised = 0;
    std::size_t proposals_accepted = 0;
    std::size_t proposals_rejected = 0;

    nlohmann::json to_json() const;
};

struct MiningResult {
    std::vector<MinedSample> samples; ///< ordered by meme id, then taxonomy order
    Taxonomy taxonomy;
    MiningSummary summary;
};

/// Mines memes one after another (the taxonomy has a single writer), with
/// the Miners of each meme running concurrently. A meme whose processing
/// fails is skipped with a `meme_skipped` event.
MiningResult run_mining_stage(Gateway& gateway, const std::vector<MemeRecord>& memes, Taxonomy taxonomy,
                              const MiningOptions& options, EventLog& log);

} // namespace memeprobe
