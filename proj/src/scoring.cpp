#include "memeprobe/scoring.hpp"

#include "memeprobe/errors.hpp"
#include "memeprobe/text.hpp"

#include <algorithm>
#include <cctype>
#include <future>
#include <limits>

namespace memeprobe {

using nlohmann::json;

namespace {

const std::string kCandidateReminder = "Your previous answer was empty. Please give your analysis of the meme.";
const std::string kSummaryReminder =
    "Your previous answer could not be read. Reply using exactly this format:\n"
    "Best: <1, 2, 3 or none>\nReference: <the final reference analysis>";
const std::string kScoreReminder =
    "Your previous answer could not be read. Start your reply with \"Score: <integer from 1 to 10>\".";

std::string explanation_of(const ScoringOptions& options, const std::string& category)
{
    const auto* c = options.taxonomy.find(category);
    return c ? c->explanation : std::string();
}

std::optional<std::string> after_label(std::string_view line, std::string_view label)
{
    auto t = text::trim(line);
    while (!t.empty() && (t.front() == '*' || t.front() == '#')) {
        t.erase(t.begin());
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

bool is_backend_failure(const Error& e)
{
    const auto& k = e.kind();
    return k == "BackendUnreachable" || k == "RateLimited" || k == "BackendRejected" || k == "BackendProtocolError";
}

} // namespace

std::string ReferenceAnswer::provenance() const
{
    return selected ? "selected_candidate(" + std::to_string(*selected) + ")" : "synthesized";
}

std::optional<ReferenceAnswer> parse_summary(std::string_view raw, int candidate_count)
{
    std::optional<std::optional<int>> best;
    std::optional<std::string> reference;
    for (const auto& line : text::split_lines(raw)) {
        if (reference) {
            *reference += "\n" + line;
            continue;
        }
        if (auto b = after_label(line, "best:"); b && !best) {
            auto v = text::to_lower(*b);
            if (v.rfind("none", 0) == 0) {
                best = std::optional<int>();
            } else if (!v.empty() && std::isdigit(static_cast<unsigned char>(v[0]))) {
                int idx = v[0] - '0';
                if (v.size() > 1 && std::isdigit(static_cast<unsigned char>(v[1]))) {
                    return std::nullopt;
                }
                if (idx < 1 || idx > candidate_count) {
                    return std::nullopt;
                }
                best = std::optional<int>(idx);
            } else {
                return std::nullopt;
            }
        } else if (auto r = after_label(line, "reference:")) {
            reference = *r;
        }
    }
    if (!best || !reference) {
        return std::nullopt;
    }
    auto body = text::trim(*reference);
    if (body.empty()) {
        return std::nullopt;
    }
    return ReferenceAnswer{body, *best};
}

int parse_score(std::string_view raw)
{
    std::optional<long long> first;
    std::size_t i = 0;
    while (i < raw.size()) {
        if (!std::isdigit(static_cast<unsigned char>(raw[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < raw.size() && std::isdigit(static_cast<unsigned char>(raw[j]))) {
            ++j;
        }
        auto digits = raw.substr(i, j - i);
        long long value = std::numeric_limits<long long>::max();
        if (digits.size() <= 18) {
            value = std::stoll(std::string(digits));
        }
        if (value >= 1 && value <= 10) {
            return static_cast<int>(value);
        }
        if (!first) {
            first = value;
        }
        i = j;
    }
    if (first) {
        throw OutOfRangeScore(*first);
    }
    throw UnparseableScore();
}

std::string scoring_image(const MemeRecord& meme, EventBuffer& events, std::string_view stage)
{
    if (!meme.erased_image) {
        events.add(std::string(stage), "erased_image_missing", {{"meme_id", meme.id}, {"image", meme.image}});
    }
    return meme.preferred_image();
}

std::vector<CandidateAnswer> generate_candidates(Gateway& gateway, const MinedSample& sample, const std::string& image,
                                                 const ScoringOptions& options, EventBuffer& events,
                                                 std::string_view stage)
{
    const TemplateVars vars{{"meme_text", sample.meme.text},
                            {"category_name", sample.category},
                            {"category_explanation", explanation_of(options, sample.category)}};
    const auto n = static_cast<std::size_t>(options.candidate_count);
    std::vector<EventBuffer> buffers(n);
    std::vector<std::future<std::optional<std::string>>> futures;
    for (std::size_t i = 0; i < n; ++i) {
        futures.push_back(std::async(std::launch::async, [&, i] {
            return ask_parsed(gateway, Role::CandidateAnswerer,
                              sample.sample_id + "/candidate-" + std::to_string(i + 1), vars, image,
                              options.reask_limit, kCandidateReminder, buffers[i], stage,
                              [](std::string_view answer) -> std::optional<std::string> {
                                  auto t = text::trim(answer);
                                  return t.empty() ? std::nullopt : std::optional(t);
                              });
        }));
    }
    std::vector<CandidateAnswer> out;
    std::exception_ptr failure;
    std::optional<int> missing;
    for (std::size_t i = 0; i < n; ++i) {
        try {
            auto text = futures[i].get();
            if (text) {
                out.push_back({static_cast<int>(i + 1), *text});
            } else if (!missing) {
                missing = static_cast<int>(i + 1);
            }
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
    if (missing) {
        throw MissingCandidate(*missing);
    }
    return out;
}

ReferenceAnswer summarize_reference(Gateway& gateway, const std::vector<CandidateAnswer>& candidates,
                                    const MinedSample& sample, const std::string& image, const ScoringOptions& options,
                                    EventBuffer& events, std::string_view stage)
{
    if (candidates.size() != static_cast<std::size_t>(options.candidate_count)) {
        throw std::invalid_argument("summarizer needs every candidate answer");
    }
    std::string listing;
    for (const auto& c : candidates) {
        if (!listing.empty()) {
            listing += "\n\n";
        }
        listing += "Candidate " + std::to_string(c.index) + ":\n" + c.text;
    }
    const int count = options.candidate_count;
    auto ref = ask_parsed(gateway, Role::SeniorSummarizer, sample.sample_id + "/summarizer",
                          {{"meme_text", sample.meme.text},
                           {"category_name", sample.category},
                           {"category_explanation", explanation_of(options, sample.category)},
                           {"candidates", listing}},
                          image, options.reask_limit, kSummaryReminder, events, stage,
                          [count](std::string_view answer) { return parse_summary(answer, count); });
    if (!ref) {
        throw UnparseableSummary();
    }
    return *ref;
}

TargetAnswer query_target_answer(Gateway& gateway, const MinedSample& sample, const std::string& image,
                                 const ScoringOptions& options, EventBuffer& events, std::string_view stage)
{
    try {
        auto r = gateway.ask(Role::Target, sample.sample_id + "/target",
                             {{"meme_text", sample.meme.text},
                              {"category_name", sample.category},
                              {"category_explanation", explanation_of(options, sample.category)}},
                             image, {}, events, stage);
        return TargetAnswer{r.text, options.target_model};
    } catch (const Error& e) {
        if (is_backend_failure(e)) {
            throw TargetUnreachable(e.what());
        }
        throw;
    }
}

int grade_answer(Gateway& gateway, const ReferenceAnswer& reference, const TargetAnswer& target,
                 const MinedSample& sample, const std::string& image, const ScoringOptions& options,
                 EventBuffer& events, std::string_view stage)
{
    std::exception_ptr last_error;
    auto score = ask_parsed(gateway, Role::Scorer, sample.sample_id + "/scorer",
                            {{"meme_text", sample.meme.text},
                             {"category_name", sample.category},
                             {"category_explanation", explanation_of(options, sample.category)},
                             {"reference_answer", reference.text},
                             {"target_answer", target.text}},
                            image, options.reask_limit, kScoreReminder, events, stage,
                            [&last_error](std::string_view answer) -> std::optional<int> {
                                try {
                                    return parse_score(answer);
                                } catch (const Error&) {
                                    last_error = std::current_exception();
                                    return std::nullopt;
                                }
                            });
    if (!score) {
        std::rethrow_exception(last_error);
    }
    return *score;
}

int score_mined(Gateway& gateway, const MinedSample& sample, const ScoringOptions& options, EventBuffer& events,
                std::string_view stage)
{
    const auto image = scoring_image(sample.meme, events, stage);
    auto candidates = generate_candidates(gateway, sample, image, options, events, stage);
    auto reference = summarize_reference(gateway, candidates, sample, image, options, events, stage);
    auto target = query_target_answer(gateway, sample, image, options, events, stage);
    const int score = grade_answer(gateway, reference, target, sample, image, options, events, stage);

    json cands = json::array();
    for (const auto& c : candidates) {
        cands.push_back(c.text);
    }
    events.add(std::string(stage), "sample_scored",
               {{"sample_id", sample.sample_id},
                {"category", sample.category},
                {"text", sample.meme.text},
                {"candidates", cands},
                {"reference", reference.text},
                {"provenance", reference.provenance()},
                {"target_model", target.model},
                {"target_answer", target.text},
                {"score", score}});
    return score;
}

ScoredSample score_sample(Gateway& gateway, const MinedSample& sample, const ScoringOptions& options,
                          EventBuffer& events)
{
    ScoredSample s;
    s.mined = sample;
    s.score = score_mined(gateway, sample, options, events, "score");
    return s;
}

ScoredSet run_scoring_stage(Gateway& gateway, std::vector<MinedSample> mined, const ScoringOptions& options,
                            EventLog& log)
{
    if (mined.empty()) {
        throw EmptyStageInput("score");
    }
    std::sort(mined.begin(), mined.end(), [](const MinedSample& a, const MinedSample& b) {
        return std::tie(a.category, a.sample_id) < std::tie(b.category, b.sample_id);
    });

    ScoredSet scored;
    std::size_t category_done = 0;
    std::size_t category_skipped = 0;
    const std::size_t window = std::max<std::size_t>(1, options.window);

    for (std::size_t begin = 0; begin < mined.size(); begin += window) {
        const std::size_t end = std::min(mined.size(), begin + window);
        std::vector<EventBuffer> buffers(end - begin);
        std::vector<std::future<std::optional<ScoredSample>>> futures;
        for (std::size_t i = begin; i < end; ++i) {
            futures.push_back(std::async(std::launch::async, [&, i]() -> std::optional<ScoredSample> {
                auto& buf = buffers[i - begin];
                try {
                    return score_sample(gateway, mined[i], options, buf);
                } catch (const Error& e) {
                    buf.add("score", "sample_skipped",
                            {{"sample_id", mined[i].sample_id},
                             {"category", mined[i].category},
                             {"error_kind", e.kind()},
                             {"error", e.what()}});
                    return std::nullopt;
                }
            }));
        }
        for (std::size_t i = begin; i < end; ++i) {
            auto result = futures[i - begin].get();
            log.commit(std::move(buffers[i - begin]));
            if (result) {
                scored.push_back(std::move(*result));
                ++category_done;
            } else {
                ++category_skipped;
            }
            if (i + 1 == mined.size() || mined[i + 1].category != mined[i].category) {
                log.append("score", "category_scored",
                           {{"category", mined[i].category}, {"scored", category_done}, {"skipped", category_skipped}});
                category_done = 0;
                category_skipped = 0;
            }
        }
    }
    log.append("score", "stage_completed", {{"scored", scored.size()}, {"input", mined.size()}});
    return scored;
}

} // namespace memeprobe
