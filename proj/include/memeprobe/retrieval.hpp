#pragma once

#include "memeprobe/domain.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace memeprobe {

/// Lowercase, split on anything that is not an ASCII letter or digit, drop
/// empty tokens.
std::vector<std::string> tokenize(std::string_view text);

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

struct RankedDocument {
    std::string id;
    double score = 0.0;
};

/// BM25 index over misbelief statements. Corpus statistics (document count,
/// average length, document frequencies) are kept per category, so a
/// category's ranking only depends on that category's documents.
///
///   idf(q)      = ln(1 + (N - df + 0.5) / (df + 0.5))
///   score(d, Q) = sum over query tokens q (repeats included) of
///                 idf(q) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * |d| / avgdl))
class MisbeliefIndex {
public:
    explicit MisbeliefIndex(Bm25Params params = {});

    /// Throws std::invalid_argument on a duplicate id.
    void add(const std::string& id, const std::string& category, std::string_view misbelief);

    bool contains(const std::string& id) const { return docs_.count(id) != 0; }
    std::size_t size() const noexcept { return docs_.size(); }
    std::size_t category_size(const std::string& category) const;
    double average_length(const std::string& category) const;
    std::size_t document_length(const std::string& id) const;
    const Bm25Params& params() const noexcept { return params_; }

    /// Throws UnknownDocument.
    double score(const std::vector<std::string>& query, const std::string& id) const;

    /// Every document of `category` that is not `exclude` and passes `keep`,
    /// by descending score then ascending id, cut to `k` entries (0 = all).
    template <class Keep>
    std::vector<RankedDocument> rank(const std::vector<std::string>& query, const std::string& category,
                                     std::size_t k, const std::optional<std::string>& exclude, Keep&& keep) const;

    std::vector<RankedDocument> rank(const std::vector<std::string>& query, const std::string& category,
                                     std::size_t k, const std::optional<std::string>& exclude = std::nullopt) const
    {
        return rank(query, category, k, exclude, [](const std::string&) { return true; });
    }

private:
    struct Document {
        std::string category;
        std::map<std::string, std::size_t> tf;
        std::size_t length = 0;
    };
    struct CategoryStats {
        std::vector<std::string> ids;
        std::size_t total_length = 0;
        std::map<std::string, std::size_t> df;
    };

    static std::vector<RankedDocument> finish(std::vector<RankedDocument> ranked, std::size_t k);

    Bm25Params params_;
    std::map<std::string, Document> docs_;
    std::map<std::string, CategoryStats> categories_;
};

template <class Keep>
std::vector<RankedDocument> MisbeliefIndex::rank(const std::vector<std::string>& query, const std::string& category,
                                                 std::size_t k, const std::optional<std::string>& exclude,
                                                 Keep&& keep) const
{
    std::vector<RankedDocument> ranked;
    auto it = categories_.find(category);
    if (it == categories_.end()) {
        return ranked;
    }
    for (const auto& id : it->second.ids) {
        if ((exclude && id == *exclude) || !keep(id)) {
            continue;
        }
        ranked.push_back({id, score(query, id)});
    }
    return finish(std::move(ranked), k);
}

MisbeliefIndex build_index(const ScoredSet& samples, Bm25Params params = {});

double bm25_score(const std::vector<std::string>& query, const std::string& id, const MisbeliefIndex& index);

/// Ids of up to `k` samples of `category` most similar to `misbelief`; the
/// querying sample (`exclude`) is never returned.
std::vector<std::string> retrieve_top_k(std::string_view misbelief, const std::string& category,
                                        const MisbeliefIndex& index, std::size_t k,
                                        const std::optional<std::string>& exclude = std::nullopt);

/// The sample pool P. Ranking uses statistics over the pool as it was built;
/// taking a sample only marks it unavailable.
class SamplePool {
public:
    explicit SamplePool(ScoredSet samples, Bm25Params params = {});

    /// Best available in-category match. Throws PoolExhausted(category).
    const ScoredSample& best(std::string_view misbelief, const std::string& category) const;
    /// Removes a sample; throws UnknownDocument when it is not available.
    ScoredSample take(const std::string& id);

    bool available(const std::string& id) const { return available_.count(id) != 0; }
    std::size_t remaining() const noexcept { return available_.size(); }
    std::size_t remaining(const std::string& category) const;
    std::vector<std::string> remaining_ids() const;

private:
    std::map<std::string, ScoredSample> samples_;
    std::set<std::string> available_;
    MisbeliefIndex index_;
};

/// Best match in the pool; the caller removes it (`pool.take(id)`).
ScoredSample retrieve_next_case(std::string_view misbelief, const SamplePool& pool, const std::string& category);

} // namespace memeprobe
