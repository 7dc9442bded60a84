#pragma once

#include "memeprobe/domain.hpp"
#include "memeprobe/events.hpp"
#include "memeprobe/gateway.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace memeprobe {

struct CandidateAnswer {
    int index = 1;
    std::string text;
};

struct ReferenceAnswer {
    std::string text;
    /// Index of the candidate the summarizer picked; empty when it wrote a
    /// fresh analysis because no candidate was reasonable.
    std::optional<int> selected;

    std::string provenance() const;
};

struct TargetAnswer {
    std::string text;
    std::string model;
};

struct ScoringOptions {
    int candidate_count = 3;
    int reask_limit = 2;
    std::size_t window = 8;   ///< samples scored concurrently per commit window
    std::string target_model; ///< name recorded with target answers
    Taxonomy taxonomy;        ///< source of category explanations for prompts
};

// ---- output parsers --------------------------------------------------------

/// "Best: <n|none>" plus "Reference: <text>" (the reference may continue on
/// the following lines). nullopt when either part is missing or the index is
/// outside 1..candidate_count.
std::optional<ReferenceAnswer> parse_summary(std::string_view text, int candidate_count);

/// First integer token in [1,10], scanning left to right. Throws
/// OutOfRangeScore(first integer) when integers exist but none is in range,
/// UnparseableScore when there are none.
int parse_score(std::string_view text);

// ---- pipeline pieces -------------------------------------------------------

/// Erased image when available. Otherwise the original, and a
/// `erased_image_missing` warning goes to `events`.
std::string scoring_image(const MemeRecord& meme, EventBuffer& events, std::string_view stage);

/// `unit` tags the calls (normally the sample id).
std::vector<CandidateAnswer> generate_candidates(Gateway& gateway, const MinedSample& sample, const std::string& image,
                                                 const ScoringOptions& options, EventBuffer& events,
                                                 std::string_view stage);

ReferenceAnswer summarize_reference(Gateway& gateway, const std::vector<CandidateAnswer>& candidates,
                                    const MinedSample& sample, const std::string& image, const ScoringOptions& options,
                                    EventBuffer& events, std::string_view stage);

TargetAnswer query_target_answer(Gateway& gateway, const MinedSample& sample, const std::string& image,
                                 const ScoringOptions& options, EventBuffer& events, std::string_view stage);

int grade_answer(Gateway& gateway, const ReferenceAnswer& reference, const TargetAnswer& target,
                 const MinedSample& sample, const std::string& image, const ScoringOptions& options,
                 EventBuffer& events, std::string_view stage);

/// Candidates, reference, target answer and grade for one sample. Emits a
/// `sample_scored` event carrying every intermediate answer.
int score_mined(Gateway& gateway, const MinedSample& sample, const ScoringOptions& options, EventBuffer& events,
                std::string_view stage);

ScoredSample score_sample(Gateway& gateway, const MinedSample& sample, const ScoringOptions& options,
                          EventBuffer& events);

/// Scores every sample, ordered by (category, sample id). Samples that fail
/// are skipped with a `sample_skipped` event; each category closes with a
/// `category_scored` event.
ScoredSet run_scoring_stage(Gateway& gateway, std::vector<MinedSample> mined, const ScoringOptions& options,
                            EventLog& log);

} // namespace memeprobe
