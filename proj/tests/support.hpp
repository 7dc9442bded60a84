#pragma once

#include "memeprobe/domain.hpp"
#include "memeprobe/gateway.hpp"
#include "memeprobe/refinement.hpp"

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

namespace memeprobe::testing {

/// Backend that answers through a callback; every request is kept.
class FnBackend : public ModelBackend {
public:
    using Fn = std::function<std::string(const ModelRequest&)>;
    explicit FnBackend(Fn fn, BackendKind kind = BackendKind::mock) : fn_(std::move(fn)), kind_(kind) {}

    ModelResponse complete(const ModelRequest& request) override
    {
        {
            std::lock_guard lock(mutex_);
            requests_.push_back(request);
        }
        ModelResponse r;
        r.text = fn_(request);
        r.backend = kind_;
        return r;
    }
    BackendKind kind() const override { return kind_; }

    std::vector<ModelRequest> requests() const
    {
        std::lock_guard lock(mutex_);
        return requests_;
    }
    std::size_t count(Role role) const
    {
        std::lock_guard lock(mutex_);
        std::size_t n = 0;
        for (const auto& r : requests_) {
            n += r.role == role ? 1 : 0;
        }
        return n;
    }

private:
    Fn fn_;
    BackendKind kind_;
    mutable std::mutex mutex_;
    std::vector<ModelRequest> requests_;
};

inline Gateway make_gateway(std::shared_ptr<ModelBackend> controller, std::shared_ptr<ModelBackend> target = nullptr)
{
    if (!target) {
        target = controller;
    }
    return Gateway(std::move(controller), std::move(target), PromptLibrary::builtin());
}

inline MemeRecord meme(const std::string& id, const std::string& text = "some caption")
{
    MemeRecord m;
    m.id = id;
    m.image = "images/" + id + ".png";
    m.erased_image = "images/" + id + "_erased.png";
    m.text = text;
    m.source = "test";
    return m;
}

inline MinedSample mined(const std::string& meme_id, const std::string& category, const std::string& misbelief)
{
    MinedSample s;
    s.meme = meme(meme_id, "caption of " + meme_id);
    s.category = category;
    s.sample_id = make_sample_id(meme_id, category);
    s.misbelief = misbelief;
    return s;
}

inline ScoredSample scored(const std::string& meme_id, const std::string& category, const std::string& misbelief,
                           int score)
{
    ScoredSample s;
    s.mined = mined(meme_id, category, misbelief);
    s.score = score;
    return s;
}

/// Appends a suffix to the current text.
class SuffixRefiner : public TextRefiner {
public:
    std::string refine(const ScoredSample& current, const std::vector<ScoredSample>&, EventBuffer&) override
    {
        ++calls;
        return current.mined.meme.text + " (reworded)";
    }
    std::atomic<int> calls{0};
};

/// Scores a refined sample relative to its parent: parent score + delta,
/// clamped to [1, 10].
class DeltaScorer : public RefinedScorer {
public:
    explicit DeltaScorer(int delta) : delta_(delta) {}
    int score_refined(const MinedSample&, const ScoredSample& parent, EventBuffer&) override
    {
        ++calls;
        return std::clamp(parent.score + delta_, 1, 10);
    }
    std::atomic<int> calls{0};

private:
    int delta_;
};

/// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() /
               ("memeprobe_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::filesystem::path source_dir() { return MEMEPROBE_SOURCE_DIR; }

} // namespace memeprobe::testing
