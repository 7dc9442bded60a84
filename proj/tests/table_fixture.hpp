#pragma once

#include "memeprobe/domain.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace memeprobe::testing {

struct TableFixture {
    std::string model;
    std::vector<std::string> categories;
    ScoredSet history;
};

/// Expands a per-category score histogram ({"original": {"7": 42, ...},
/// "refined": {...}}) into individual samples. Refined samples point at an
/// original of the same category and carry iteration 1.
inline TableFixture load_table_fixture(const std::filesystem::path& path)
{
    auto doc = nlohmann::json::parse(read_file(path));
    TableFixture f;
    f.model = doc.at("model").get<std::string>();
    for (const auto& c : doc.at("categories")) {
        const auto category = c.at("category").get<std::string>();
        f.categories.push_back(category);
        std::vector<std::string> originals;
        int n = 0;
        for (const auto& [score, count] : c.at("original").items()) {
            for (int i = 0; i < count.get<int>(); ++i) {
                ScoredSample s;
                s.mined.meme.id = category + "-" + std::to_string(n++);
                s.mined.category = category;
                s.mined.sample_id = make_sample_id(s.mined.meme.id, category);
                s.mined.misbelief = "fixture statement " + std::to_string(n % 7);
                s.score = std::stoi(score);
                originals.push_back(s.id());
                f.history.push_back(std::move(s));
            }
        }
        std::size_t parent = 0;
        for (const auto& [score, count] : c.at("refined").items()) {
            for (int i = 0; i < count.get<int>(); ++i) {
                ScoredSample s;
                s.mined.meme.id = category + "-r" + std::to_string(n++);
                s.mined.category = category;
                s.mined.sample_id = make_sample_id(s.mined.meme.id, category) + "~r";
                s.mined.misbelief = "fixture statement " + std::to_string(n % 7);
                s.score = std::stoi(score);
                s.refined = true;
                s.parent_id = originals[parent++ % originals.size()];
                s.iteration = 1;
                f.history.push_back(std::move(s));
            }
        }
    }
    return f;
}

} // namespace memeprobe::testing
