#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace memeprobe {

/// One meme: an image with embedded text. `erased_image` is the same picture
/// with the text painted out; when present it is the preferred visual input.
struct MemeRecord {
    std::string id;
    std::string image;
    std::optional<std::string> erased_image;
    std::string text;
    std::string source;

    const std::string& preferred_image() const { return erased_image ? *erased_image : image; }

    bool operator==(const MemeRecord&) const = default;
};

enum class CategoryOrigin { initial, discovered };

std::string_view to_string(CategoryOrigin origin);
CategoryOrigin category_origin_from_string(std::string_view s);

struct HarmCategory {
    std::string name;
    std::string explanation;
    CategoryOrigin origin = CategoryOrigin::initial;
    int revision = 0; ///< taxonomy revision at which the category was added

    bool operator==(const HarmCategory&) const = default;
};

/// Append-only list of harm categories. Names are unique ignoring case and
/// every successful append bumps the revision by exactly one.
class Taxonomy {
public:
    Taxonomy() = default;

    /// The six seed categories (race, gender, religion, nationality,
    /// disability, animal) at revision 0.
    static Taxonomy initial();

    const std::vector<HarmCategory>& categories() const noexcept { return categories_; }
    int revision() const noexcept { return revision_; }
    bool empty() const noexcept { return categories_.empty(); }
    std::size_t size() const noexcept { return categories_.size(); }

    const HarmCategory* find(std::string_view name) const;
    bool contains(std::string_view name) const { return find(name) != nullptr; }
    std::vector<std::string> names() const;

    /// Throws std::invalid_argument on a duplicate name or empty explanation.
    const HarmCategory& append(std::string name, std::string explanation, CategoryOrigin origin);

    std::string to_json() const;
    static Taxonomy from_json(std::string_view json);

    bool operator==(const Taxonomy&) const = default;

private:
    std::vector<HarmCategory> categories_;
    int revision_ = 0;
};

struct MinedSample {
    std::string sample_id;
    MemeRecord meme;
    std::string category;
    std::string misbelief;
    int taxonomy_revision = 0;

    bool operator==(const MinedSample&) const = default;
};

/// A mined sample with the grade the target model earned on it. Refined
/// samples carry the rewritten text in `mined.meme.text`, their source sample
/// in `parent_id` and the refinement iteration that produced them.
struct ScoredSample {
    MinedSample mined;
    int score = 0;
    bool refined = false;
    std::optional<std::string> parent_id;
    int iteration = 0;

    const std::string& id() const noexcept { return mined.sample_id; }
    const std::string& category() const noexcept { return mined.category; }
    const std::string& misbelief() const noexcept { return mined.misbelief; }

    bool operator==(const ScoredSample&) const = default;
};

using ScoredSet = std::vector<ScoredSample>;

std::string make_sample_id(std::string_view meme_id, std::string_view category);

// ---- manifest --------------------------------------------------------------

std::vector<MemeRecord> parse_manifest(std::string_view content);
std::vector<MemeRecord> load_manifest(const std::filesystem::path& path);
std::string serialize_manifest(const std::vector<MemeRecord>& records);

// ---- per-category sampling -------------------------------------------------

/// Keeps at most `cap` samples per category, chosen reproducibly from
/// `rng_seed`. Smaller categories are kept whole; input order is preserved.
std::vector<MinedSample> sample_per_category(const std::vector<MinedSample>& mined, std::size_t cap,
                                             std::uint64_t rng_seed);

// ---- line-delimited artifacts ---------------------------------------------

std::string mined_to_line(const MinedSample& s);
MinedSample mined_from_line(std::string_view line);
std::string scored_to_line(const ScoredSample& s);
ScoredSample scored_from_line(std::string_view line);

std::string serialize_mined(const std::vector<MinedSample>& samples);
std::vector<MinedSample> parse_mined(std::string_view content);
std::string serialize_scored(const ScoredSet& samples);
ScoredSet parse_scored(std::string_view content);

/// Returns the id of the first refined sample whose parent chain does not end
/// in an original sample, or nullopt when every lineage is intact.
std::optional<std::string> find_broken_lineage(const ScoredSet& samples);

// ---- small file helpers ----------------------------------------------------

std::string read_file(const std::filesystem::path& path);
/// Writes via a temporary file and rename so readers never see a torn file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

} // namespace memeprobe
