#pragma once

#include "memeprobe/domain.hpp"
#include "memeprobe/events.hpp"
#include "memeprobe/gateway.hpp"
#include "memeprobe/retrieval.hpp"
#include "memeprobe/scoring.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace memeprobe {

struct RefinementOptions {
    std::size_t seed_set_size = 10;
    int max_iterations = 10;
    std::size_t retrieval_k = 3;
    int reask_limit = 2;
    Bm25Params bm25;
    std::uint64_t rng_seed = 0;
    std::size_t min_category_size_warning = 150;
};

struct SeedSplit {
    ScoredSet seeds; ///< ordered by sample id
    ScoredSet pool;  ///< the rest, ordered by sample id
};

/// Picks `size` seeds uniformly from `scored` (taken in sample-id order, so
/// the choice only depends on the ids and the seed). Throws
/// InsufficientSamples when `size` exceeds the number of samples.
SeedSplit select_seed_set(const ScoredSet& scored, std::size_t size, std::uint64_t rng_seed);

/// Rewrites a case's meme text; implementations must reject empty or
/// unchanged output.
class TextRefiner {
public:
    virtual ~TextRefiner() = default;
    virtual std::string refine(const ScoredSample& current, const std::vector<ScoredSample>& context,
                               EventBuffer& events) = 0;
};

/// Grades a refined sample with the full scoring pipeline.
class RefinedScorer {
public:
    virtual ~RefinedScorer() = default;
    virtual int score_refined(const MinedSample& refined, const ScoredSample& parent, EventBuffer& events) = 0;
};

/// Asks the Refiner agent. Empty output or output equal to the current text
/// is re-asked; DegenerateRefinement once the re-asks are used up.
std::string refine_text(Gateway& gateway, const ScoredSample& current, const std::vector<ScoredSample>& context,
                        int reask_limit, EventBuffer& events);

class GatewayRefiner : public TextRefiner {
public:
    GatewayRefiner(Gateway& gateway, int reask_limit) : gateway_(gateway), reask_limit_(reask_limit) {}
    std::string refine(const ScoredSample& current, const std::vector<ScoredSample>& context,
                       EventBuffer& events) override
    {
        return refine_text(gateway_, current, context, reask_limit_, events);
    }

private:
    Gateway& gateway_;
    int reask_limit_;
};

class GatewayRefinedScorer : public RefinedScorer {
public:
    GatewayRefinedScorer(Gateway& gateway, ScoringOptions options)
        : gateway_(gateway), options_(std::move(options)) {}
    int score_refined(const MinedSample& refined, const ScoredSample& parent, EventBuffer& events) override;

private:
    Gateway& gateway_;
    ScoringOptions options_;
};

/// H for one category: every scored sample so far plus a BM25 index over
/// their misbeliefs. Only grows.
class History {
public:
    History(const ScoredSet& originals, Bm25Params params);

    void add(ScoredSample sample);
    const ScoredSet& samples() const noexcept { return samples_; }
    std::size_t size() const noexcept { return samples_.size(); }
    /// Up to `k` samples most similar to `current`'s misbelief, best first,
    /// never `current` itself.
    std::vector<ScoredSample> context_for(const ScoredSample& current, std::size_t k) const;

private:
    ScoredSet samples_;
    std::map<std::string, std::size_t> position_;
    MisbeliefIndex index_;
};

/// Id given to the refined version of a case.
std::string refined_sample_id(const std::string& case_id);

/// One refinement of `current`: retrieve context from H, rewrite the text,
/// score it and append the result to H. `step` is the walk's drop counter
/// before this refinement; the new sample's iteration is step + 1.
ScoredSample refinement_step(const ScoredSample& current, int step, History& history, TextRefiner& refiner,
                             RefinedScorer& scorer, const RefinementOptions& options, EventBuffer& events);

enum class WalkExit { no_drop, max_steps, pool_exhausted, error };
std::string_view to_string(WalkExit exit);

struct WalkTrace {
    std::string seed_id;
    std::vector<std::string> cases;      ///< seed first, then each case taken from the pool
    std::vector<std::string> refined;    ///< ids of the refined samples the walk produced
    int steps = 0;                       ///< score drops (the step counter)
    WalkExit exit = WalkExit::no_drop;
    std::string error;                   ///< error kind when exit == error
};

struct CategoryRefinement {
    std::string category;
    std::vector<std::string> seed_ids;
    std::size_t pool_initial = 0;
    std::vector<std::string> consumed;   ///< pool samples taken, in order
    std::vector<WalkTrace> walks;
    ScoredSet history;                   ///< originals followed by refined samples in creation order
};

/// Runs every seed's walk for one category, one after another.
CategoryRefinement run_refinement_loop(const std::string& category, const ScoredSet& scored, const SeedSplit& split,
                                       TextRefiner& refiner, RefinedScorer& scorer, const RefinementOptions& options,
                                       EventBuffer& events);

struct RefinementResult {
    ScoredSet history; ///< per category (sorted by name): originals by id, then refined in creation order
    std::vector<CategoryRefinement> categories;
    std::vector<std::string> skipped_categories;
};

/// Partitions `scored` by category and refines the categories concurrently.
/// A category too small for the seed set keeps its original samples only and
/// is reported in `skipped_categories`.
RefinementResult run_refinement_stage(const ScoredSet& scored, TextRefiner& refiner, RefinedScorer& scorer,
                                      const RefinementOptions& options, EventLog& log);

RefinementResult run_refinement_stage(Gateway& gateway, const ScoredSet& scored, const RefinementOptions& options,
                                      const ScoringOptions& scoring, EventLog& log);

} // namespace memeprobe
