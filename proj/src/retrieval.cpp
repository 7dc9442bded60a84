#include "memeprobe/retrieval.hpp"

#include "memeprobe/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace memeprobe {

std::vector<std::string> tokenize(std::string_view text)
{
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
            current.push_back(ch);
        } else if (c >= 'A' && c <= 'Z') {
            current.push_back(static_cast<char>(c - 'A' + 'a'));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) {
        tokens.push_back(std::move(current));
    }
    return tokens;
}

MisbeliefIndex::MisbeliefIndex(Bm25Params params) : params_(params)
{
    if (!(params.k1 >= 0.0) || !(params.b >= 0.0 && params.b <= 1.0)) {
        throw std::invalid_argument("BM25 needs k1 >= 0 and 0 <= b <= 1");
    }
}

void MisbeliefIndex::add(const std::string& id, const std::string& category, std::string_view misbelief)
{
    if (docs_.count(id) != 0) {
        throw std::invalid_argument("document " + id + " is already indexed");
    }
    Document doc;
    doc.category = category;
    for (auto& t : tokenize(misbelief)) {
        ++doc.tf[t];
        ++doc.length;
    }
    auto& stats = categories_[category];
    stats.ids.push_back(id);
    stats.total_length += doc.length;
    for (const auto& [term, _] : doc.tf) {
        ++stats.df[term];
    }
    docs_.emplace(id, std::move(doc));
}

std::size_t MisbeliefIndex::category_size(const std::string& category) const
{
    auto it = categories_.find(category);
    return it == categories_.end() ? 0 : it->second.ids.size();
}

double MisbeliefIndex::average_length(const std::string& category) const
{
    auto it = categories_.find(category);
    if (it == categories_.end() || it->second.ids.empty()) {
        return 0.0;
    }
    return static_cast<double>(it->second.total_length) / static_cast<double>(it->second.ids.size());
}

std::size_t MisbeliefIndex::document_length(const std::string& id) const
{
    auto it = docs_.find(id);
    if (it == docs_.end()) {
        throw UnknownDocument(id);
    }
    return it->second.length;
}

double MisbeliefIndex::score(const std::vector<std::string>& query, const std::string& id) const
{
    auto it = docs_.find(id);
    if (it == docs_.end()) {
        throw UnknownDocument(id);
    }
    const auto& doc = it->second;
    const auto& stats = categories_.at(doc.category);
    const double n = static_cast<double>(stats.ids.size());
    const double avgdl = average_length(doc.category);
    const double norm = avgdl > 0.0 ? static_cast<double>(doc.length) / avgdl : 0.0;
    double total = 0.0;
    for (const auto& q : query) {
        auto tf_it = doc.tf.find(q);
        if (tf_it == doc.tf.end()) {
            continue;
        }
        const double df = static_cast<double>(stats.df.at(q));
        const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        const double tf = static_cast<double>(tf_it->second);
        total += idf * (tf * (params_.k1 + 1.0)) / (tf + params_.k1 * (1.0 - params_.b + params_.b * norm));
    }
    return total;
}

std::vector<RankedDocument> MisbeliefIndex::finish(std::vector<RankedDocument> ranked, std::size_t k)
{
    std::sort(ranked.begin(), ranked.end(), [](const RankedDocument& a, const RankedDocument& b) {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        return a.id < b.id;
    });
    if (k != 0 && ranked.size() > k) {
        ranked.resize(k);
    }
    return ranked;
}

MisbeliefIndex build_index(const ScoredSet& samples, Bm25Params params)
{
    MisbeliefIndex index(params);
    for (const auto& s : samples) {
        index.add(s.id(), s.category(), s.misbelief());
    }
    return index;
}

double bm25_score(const std::vector<std::string>& query, const std::string& id, const MisbeliefIndex& index)
{
    return index.score(query, id);
}

std::vector<std::string> retrieve_top_k(std::string_view misbelief, const std::string& category,
                                        const MisbeliefIndex& index, std::size_t k,
                                        const std::optional<std::string>& exclude)
{
    if (k == 0) {
        throw std::invalid_argument("retrieve_top_k needs k >= 1");
    }
    std::vector<std::string> ids;
    for (auto& r : index.rank(tokenize(misbelief), category, k, exclude)) {
        ids.push_back(std::move(r.id));
    }
    return ids;
}

SamplePool::SamplePool(ScoredSet samples, Bm25Params params) : index_(params)
{
    for (auto& s : samples) {
        index_.add(s.id(), s.category(), s.misbelief());
        available_.insert(s.id());
        samples_.emplace(s.id(), std::move(s));
    }
}

const ScoredSample& SamplePool::best(std::string_view misbelief, const std::string& category) const
{
    auto ranked = index_.rank(tokenize(misbelief), category, 1, std::nullopt,
                              [this](const std::string& id) { return available_.count(id) != 0; });
    if (ranked.empty()) {
        throw PoolExhausted(category);
    }
    return samples_.at(ranked.front().id);
}

ScoredSample SamplePool::take(const std::string& id)
{
    if (available_.erase(id) == 0) {
        throw UnknownDocument(id);
    }
    return samples_.at(id);
}

std::size_t SamplePool::remaining(const std::string& category) const
{
    return static_cast<std::size_t>(std::count_if(available_.begin(), available_.end(), [&](const std::string& id) {
        return samples_.at(id).category() == category;
    }));
}

std::vector<std::string> SamplePool::remaining_ids() const { return {available_.begin(), available_.end()}; }

ScoredSample retrieve_next_case(std::string_view misbelief, const SamplePool& pool, const std::string& category)
{
    return pool.best(misbelief, category);
}

} // namespace memeprobe
