#include "memeprobe/refinement.hpp"

#include "memeprobe/errors.hpp"
#include "memeprobe/rng.hpp"
#include "memeprobe/text.hpp"

#include <algorithm>
#include <future>

namespace memeprobe {

using nlohmann::json;

namespace {

constexpr std::string_view kStage = "refine";

const std::string kRefinerReminder =
    "Your previous answer was empty or repeated the current meme text unchanged. "
    "Answer with a different rewritten meme text only.";

std::string render_examples(const std::vector<ScoredSample>& context)
{
    if (context.empty()) {
        return "(none)";
    }
    std::string out;
    for (std::size_t i = 0; i < context.size(); ++i) {
        if (i != 0) {
            out += "\n";
        }
        out += std::to_string(i + 1) + ". Text: \"" + context[i].mined.meme.text +
               "\" | Score: " + std::to_string(context[i].score);
    }
    return out;
}

json ids_of(const std::vector<ScoredSample>& samples)
{
    json ids = json::array();
    for (const auto& s : samples) {
        ids.push_back(s.id());
    }
    return ids;
}

} // namespace

SeedSplit select_seed_set(const ScoredSet& scored, std::size_t size, std::uint64_t rng_seed)
{
    if (size > scored.size()) {
        throw InsufficientSamples(size, scored.size());
    }
    auto sorted = scored;
    std::sort(sorted.begin(), sorted.end(), [](const ScoredSample& a, const ScoredSample& b) { return a.id() < b.id(); });
    std::vector<bool> chosen(sorted.size(), false);
    for (auto i : choose_indices(sorted.size(), size, rng_seed)) {
        chosen[i] = true;
    }
    SeedSplit split;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        (chosen[i] ? split.seeds : split.pool).push_back(std::move(sorted[i]));
    }
    return split;
}

std::string refine_text(Gateway& gateway, const ScoredSample& current, const std::vector<ScoredSample>& context,
                        int reask_limit, EventBuffer& events)
{
    const auto& meme = current.mined.meme;
    const auto image = scoring_image(meme, events, kStage);
    const auto original = text::trim(meme.text);
    auto rewritten = ask_parsed(gateway, Role::Refiner, current.id() + "/refiner",
                                {{"category_name", current.category()},
                                 {"misbelief", current.misbelief()},
                                 {"meme_text", meme.text},
                                 {"score", std::to_string(current.score)},
                                 {"examples", render_examples(context)}},
                                image, reask_limit, kRefinerReminder, events, kStage,
                                [&original](std::string_view answer) -> std::optional<std::string> {
                                    auto t = text::trim(answer);
                                    if (t.empty() || t == original) {
                                        return std::nullopt;
                                    }
                                    return t;
                                });
    if (!rewritten) {
        throw DegenerateRefinement();
    }
    return *rewritten;
}

int GatewayRefinedScorer::score_refined(const MinedSample& refined, const ScoredSample&, EventBuffer& events)
{
    return score_mined(gateway_, refined, options_, events, kStage);
}

History::History(const ScoredSet& originals, Bm25Params params) : index_(params)
{
    for (const auto& s : originals) {
        add(s);
    }
}

void History::add(ScoredSample sample)
{
    index_.add(sample.id(), sample.category(), sample.misbelief());
    position_.emplace(sample.id(), samples_.size());
    samples_.push_back(std::move(sample));
}

std::vector<ScoredSample> History::context_for(const ScoredSample& current, std::size_t k) const
{
    std::vector<ScoredSample> out;
    for (const auto& id : retrieve_top_k(current.misbelief(), current.category(), index_, k, current.id())) {
        out.push_back(samples_[position_.at(id)]);
    }
    return out;
}

std::string refined_sample_id(const std::string& case_id) { return case_id + "~r"; }

ScoredSample refinement_step(const ScoredSample& current, int step, History& history, TextRefiner& refiner,
                             RefinedScorer& scorer, const RefinementOptions& options, EventBuffer& events)
{
    auto context = history.context_for(current, options.retrieval_k);
    auto rewritten = refiner.refine(current, context, events);
    if (text::trim(rewritten).empty() || text::trim(rewritten) == text::trim(current.mined.meme.text)) {
        throw DegenerateRefinement();
    }

    ScoredSample refined;
    refined.mined = current.mined;
    refined.mined.sample_id = refined_sample_id(current.id());
    refined.mined.meme.text = rewritten;
    refined.refined = true;
    refined.parent_id = current.id();
    refined.iteration = step + 1;
    refined.score = scorer.score_refined(refined.mined, current, events);
    if (refined.score < 1 || refined.score > 10) {
        throw OutOfRangeScore(refined.score);
    }

    events.add(std::string(kStage), "refinement_step",
               {{"category", current.category()},
                {"case_id", current.id()},
                {"step", step},
                {"context", ids_of(context)},
                {"refined_id", refined.id()},
                {"text", rewritten},
                {"parent_score", current.score},
                {"score", refined.score},
                {"branch", refined.score < current.score ? "drop" : "no_drop"}});
    history.add(refined);
    return refined;
}

std::string_view to_string(WalkExit exit)
{
    switch (exit) {
    case WalkExit::no_drop: return "no_drop";
    case WalkExit::max_steps: return "max_steps";
    case WalkExit::pool_exhausted: return "pool_exhausted";
    case WalkExit::error: return "error";
    }
    return "?";
}

CategoryRefinement run_refinement_loop(const std::string& category, const ScoredSet& scored, const SeedSplit& split,
                                       TextRefiner& refiner, RefinedScorer& scorer, const RefinementOptions& options,
                                       EventBuffer& events)
{
    const std::string stage(kStage);
    CategoryRefinement run;
    run.category = category;
    run.pool_initial = split.pool.size();
    for (const auto& s : split.seeds) {
        run.seed_ids.push_back(s.id());
    }

    auto originals = scored;
    std::sort(originals.begin(), originals.end(),
              [](const ScoredSample& a, const ScoredSample& b) { return a.id() < b.id(); });
    History history(originals, options.bm25);
    SamplePool pool(split.pool, options.bm25);

    json seeds = run.seed_ids;
    events.add(stage, "seed_set", {{"category", category}, {"seeds", seeds}, {"pool", split.pool.size()}});

    for (const auto& seed : split.seeds) {
        WalkTrace walk;
        walk.seed_id = seed.id();
        walk.cases.push_back(seed.id());
        events.add(stage, "walk_started", {{"category", category}, {"seed", seed.id()}});

        ScoredSample current = seed;
        bool finished = false;
        while (walk.steps < options.max_iterations) {
            ScoredSample refined;
            try {
                refined = refinement_step(current, walk.steps, history, refiner, scorer, options, events);
            } catch (const Error& e) {
                walk.exit = WalkExit::error;
                walk.error = e.kind();
                events.add(stage, "walk_error",
                           {{"category", category}, {"seed", seed.id()}, {"case_id", current.id()},
                            {"error_kind", e.kind()}, {"error", e.what()}});
                finished = true;
                break;
            }
            walk.refined.push_back(refined.id());
            if (refined.score >= current.score) {
                walk.exit = WalkExit::no_drop;
                finished = true;
                break;
            }
            std::optional<ScoredSample> next;
            try {
                next = pool.take(pool.best(current.misbelief(), category).id());
            } catch (const PoolExhausted&) {
                walk.exit = WalkExit::pool_exhausted;
                events.add(stage, "pool_exhausted", {{"category", category}, {"seed", seed.id()}});
                finished = true;
                break;
            }
            ++walk.steps;
            run.consumed.push_back(next->id());
            walk.cases.push_back(next->id());
            events.add(stage, "walk_case",
                       {{"category", category}, {"seed", seed.id()}, {"case_id", next->id()}, {"step", walk.steps}});
            current = std::move(*next);
        }
        if (!finished) {
            walk.exit = WalkExit::max_steps;
        }
        json walk_cases = walk.cases;
        json walk_refined = walk.refined;
        json ended = {{"category", category},
                      {"seed", seed.id()},
                      {"exit", std::string(to_string(walk.exit))},
                      {"steps", walk.steps},
                      {"cases", walk_cases},
                      {"refined", walk_refined}};
        if (walk.exit == WalkExit::error) {
            ended["error_kind"] = walk.error;
        }
        events.add(stage, "walk_ended", std::move(ended));
        run.walks.push_back(std::move(walk));
    }
    run.history = history.samples();
    return run;
}

RefinementResult run_refinement_stage(const ScoredSet& scored, TextRefiner& refiner, RefinedScorer& scorer,
                                      const RefinementOptions& options, EventLog& log)
{
    const std::string stage(kStage);
    std::map<std::string, ScoredSet> by_category;
    for (const auto& s : scored) {
        if (s.refined) {
            throw std::invalid_argument("refinement input must contain original samples only");
        }
        by_category[s.category()].push_back(s);
    }

    struct Job {
        std::string category;
        EventBuffer events;
        std::optional<SeedSplit> split;
        std::future<CategoryRefinement> result;
    };
    std::vector<Job> jobs;
    jobs.reserve(by_category.size());
    for (const auto& [category, samples] : by_category) {
        auto& job = jobs.emplace_back();
        job.category = category;
        if (samples.size() < options.min_category_size_warning) {
            job.events.add(stage, "category_small",
                           {{"category", category},
                            {"samples", samples.size()},
                            {"recommended_minimum", options.min_category_size_warning}});
        }
        try {
            job.split = select_seed_set(samples, options.seed_set_size, derive_seed(options.rng_seed, category));
        } catch (const InsufficientSamples& e) {
            job.events.add(stage, "category_skipped",
                           {{"category", category}, {"error_kind", e.kind()}, {"error", e.what()}});
        }
    }
    for (auto& job : jobs) {
        if (job.split) {
            job.result = std::async(std::launch::async, [&, &job = job] {
                return run_refinement_loop(job.category, by_category.at(job.category), *job.split, refiner, scorer,
                                           options, job.events);
            });
        }
    }

    RefinementResult result;
    for (auto& job : jobs) {
        if (job.split) {
            auto run = job.result.get();
            result.history.insert(result.history.end(), run.history.begin(), run.history.end());
            result.categories.push_back(std::move(run));
        } else {
            auto originals = by_category.at(job.category);
            std::sort(originals.begin(), originals.end(),
                      [](const ScoredSample& a, const ScoredSample& b) { return a.id() < b.id(); });
            result.history.insert(result.history.end(), originals.begin(), originals.end());
            result.skipped_categories.push_back(job.category);
        }
        log.commit(std::move(job.events));
    }

    std::size_t refined = 0;
    for (const auto& c : result.categories) {
        for (const auto& w : c.walks) {
            refined += w.refined.size();
        }
    }
    log.append(stage, "stage_completed",
               {{"history", result.history.size()}, {"refined", refined}, {"skipped_categories", result.skipped_categories}});
    return result;
}

RefinementResult run_refinement_stage(Gateway& gateway, const ScoredSet& scored, const RefinementOptions& options,
                                      const ScoringOptions& scoring, EventLog& log)
{
    GatewayRefiner refiner(gateway, options.reask_limit);
    GatewayRefinedScorer scorer(gateway, scoring);
    return run_refinement_stage(scored, refiner, scorer, options, log);
}

} // namespace memeprobe
