#include "memeprobe/domain.hpp"

#include "memeprobe/errors.hpp"
#include "memeprobe/rng.hpp"
#include "memeprobe/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace memeprobe {

using nlohmann::json;

std::string_view to_string(CategoryOrigin origin)
{
    return origin == CategoryOrigin::initial ? "initial" : "discovered";
}

CategoryOrigin category_origin_from_string(std::string_view s)
{
    if (s == "initial") {
        return CategoryOrigin::initial;
    }
    if (s == "discovered") {
        return CategoryOrigin::discovered;
    }
    throw std::invalid_argument("unknown category origin: " + std::string(s));
}

// ---- Taxonomy --------------------------------------------------------------

Taxonomy Taxonomy::initial()
{
    Taxonomy t;
    auto seed = [&t](const char* name, const char* explanation) {
        t.categories_.push_back({name, explanation, CategoryOrigin::initial, 0});
    };
    seed("Race",
         "Harm aimed at people because of their race or ethnicity: racial stereotypes, slurs, dehumanizing "
         "comparisons, or content that mocks, demeans or incites hostility toward a racial or ethnic group.");
    seed("Gender",
         "Harm aimed at people because of their gender or sexual orientation: sexist stereotypes, misogyny, "
         "objectification, or content that belittles or excludes people based on gender identity.");
    seed("Religion",
         "Harm aimed at people because of their religious beliefs or practices: mockery of faith, portraying "
         "followers of a religion as violent or inferior, or inciting hostility toward a religious group.");
    seed("Nationality",
         "Harm aimed at people because of their nationality, country of origin or immigration status: national "
         "stereotypes, xenophobia, or content that portrays a nation's people as inferior or dangerous.");
    seed("Disability",
         "Harm aimed at people with physical or mental disabilities: ridicule of impairments, ableist slurs, or "
         "content that treats disabled people as burdens or objects of mockery.");
    seed("Animal",
         "Harm involving animals: content that trivializes or encourages animal cruelty or abuse, or that uses "
         "animal comparisons to degrade people.");
    return t;
}

const HarmCategory* Taxonomy::find(std::string_view name) const
{
    auto it = std::find_if(categories_.begin(), categories_.end(),
                           [&](const HarmCategory& c) { return text::iequals(c.name, name); });
    return it == categories_.end() ? nullptr : &*it;
}

std::vector<std::string> Taxonomy::names() const
{
    std::vector<std::string> out;
    out.reserve(categories_.size());
    for (const auto& c : categories_) {
        out.push_back(c.name);
    }
    return out;
}

const HarmCategory& Taxonomy::append(std::string name, std::string explanation, CategoryOrigin origin)
{
    name = text::trim(name);
    explanation = text::trim(explanation);
    if (name.empty()) {
        throw std::invalid_argument("category name is empty");
    }
    if (explanation.empty()) {
        throw std::invalid_argument("category " + name + " has no explanation");
    }
    if (contains(name)) {
        throw std::invalid_argument("category " + name + " already exists");
    }
    ++revision_;
    categories_.push_back({std::move(name), std::move(explanation), origin, revision_});
    return categories_.back();
}

std::string Taxonomy::to_json() const
{
    json cats = json::array();
    for (const auto& c : categories_) {
        cats.push_back({{"name", c.name},
                        {"explanation", c.explanation},
                        {"origin", std::string(memeprobe::to_string(c.origin))},
                        {"revision", c.revision}});
    }
    json doc = {{"revision", revision_}, {"categories", cats}};
    return doc.dump(2) + "\n";
}

Taxonomy Taxonomy::from_json(std::string_view content)
{
    Taxonomy t;
    try {
        auto doc = json::parse(content);
        t.revision_ = doc.at("revision").get<int>();
        for (const auto& c : doc.at("categories")) {
            t.categories_.push_back({c.at("name").get<std::string>(), c.at("explanation").get<std::string>(),
                                     category_origin_from_string(c.at("origin").get<std::string>()),
                                     c.at("revision").get<int>()});
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed taxonomy document: ") + e.what());
    }
    return t;
}

std::string make_sample_id(std::string_view meme_id, std::string_view category)
{
    return std::string(meme_id) + "#" + text::slug(category);
}

// ---- manifest --------------------------------------------------------------

namespace {

json meme_to_json(const MemeRecord& m)
{
    json j = {{"id", m.id}, {"image", m.image}};
    if (m.erased_image) {
        j["erased_image"] = *m.erased_image;
    }
    j["text"] = m.text;
    j["source"] = m.source;
    return j;
}

std::string required_string(const json& j, const char* key)
{
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) {
        throw std::invalid_argument(std::string("field '") + key + "' missing or not a string");
    }
    return it->get<std::string>();
}

MemeRecord meme_from_json(const json& j)
{
    if (!j.is_object()) {
        throw std::invalid_argument("record is not an object");
    }
    MemeRecord m;
    m.id = required_string(j, "id");
    m.image = required_string(j, "image");
    if (auto it = j.find("erased_image"); it != j.end() && !it->is_null()) {
        if (!it->is_string()) {
            throw std::invalid_argument("field 'erased_image' is not a string");
        }
        m.erased_image = it->get<std::string>();
    }
    m.text = required_string(j, "text");
    if (auto it = j.find("source"); it != j.end()) {
        if (!it->is_string()) {
            throw std::invalid_argument("field 'source' is not a string");
        }
        m.source = it->get<std::string>();
    }
    if (text::trim(m.id).empty()) {
        throw std::invalid_argument("empty id");
    }
    if (text::trim(m.text).empty()) {
        throw std::invalid_argument("empty meme text");
    }
    return m;
}

} // namespace

std::vector<MemeRecord> parse_manifest(std::string_view content)
{
    std::vector<MemeRecord> records;
    std::unordered_set<std::string> seen;
    auto lines = text::split_lines(content);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (text::trim(lines[i]).empty()) {
            continue;
        }
        MemeRecord m;
        try {
            m = meme_from_json(json::parse(lines[i]));
        } catch (const json::exception& e) {
            throw MalformedRecord(i + 1, e.what());
        } catch (const std::invalid_argument& e) {
            throw MalformedRecord(i + 1, e.what());
        }
        if (!seen.insert(m.id).second) {
            throw DuplicateId(m.id);
        }
        records.push_back(std::move(m));
    }
    return records;
}

std::vector<MemeRecord> load_manifest(const std::filesystem::path& path)
{
    return parse_manifest(read_file(path));
}

std::string serialize_manifest(const std::vector<MemeRecord>& records)
{
    std::string out;
    for (const auto& m : records) {
        out += meme_to_json(m).dump();
        out += '\n';
    }
    return out;
}

// ---- sampling --------------------------------------------------------------

std::vector<MinedSample> sample_per_category(const std::vector<MinedSample>& mined, std::size_t cap,
                                             std::uint64_t rng_seed)
{
    if (cap == 0) {
        throw std::invalid_argument("per-category cap must be at least 1");
    }
    std::map<std::string, std::vector<std::size_t>> by_category;
    for (std::size_t i = 0; i < mined.size(); ++i) {
        by_category[mined[i].category].push_back(i);
    }
    std::vector<bool> keep(mined.size(), false);
    for (const auto& [category, members] : by_category) {
        if (members.size() <= cap) {
            for (auto i : members) {
                keep[i] = true;
            }
            continue;
        }
        // Selection is over the members sorted by sample id, so it does not
        // depend on the order mining happened to emit them in.
        auto sorted = members;
        std::sort(sorted.begin(), sorted.end(),
                  [&](std::size_t a, std::size_t b) { return mined[a].sample_id < mined[b].sample_id; });
        for (auto pick : choose_indices(sorted.size(), cap, derive_seed(rng_seed, category))) {
            keep[sorted[pick]] = true;
        }
    }
    std::vector<MinedSample> out;
    for (std::size_t i = 0; i < mined.size(); ++i) {
        if (keep[i]) {
            out.push_back(mined[i]);
        }
    }
    return out;
}

// ---- artifacts -------------------------------------------------------------

namespace {

json mined_json(const MinedSample& s)
{
    return {{"sample_id", s.sample_id},
            {"meme_id", s.meme.id},
            {"category", s.category},
            {"misbelief", s.misbelief},
            {"taxonomy_revision", s.taxonomy_revision},
            {"text", s.meme.text},
            {"image", s.meme.image},
            {"erased_image", s.meme.erased_image ? json(*s.meme.erased_image) : json(nullptr)},
            {"source", s.meme.source}};
}

MinedSample mined_from_json(const json& j)
{
    MinedSample s;
    s.sample_id = j.at("sample_id").get<std::string>();
    s.meme.id = j.at("meme_id").get<std::string>();
    s.category = j.at("category").get<std::string>();
    s.misbelief = j.at("misbelief").get<std::string>();
    s.taxonomy_revision = j.value("taxonomy_revision", 0);
    s.meme.text = j.at("text").get<std::string>();
    s.meme.image = j.at("image").get<std::string>();
    if (auto it = j.find("erased_image"); it != j.end() && !it->is_null()) {
        s.meme.erased_image = it->get<std::string>();
    }
    s.meme.source = j.value("source", std::string());
    return s;
}

template <typename T, typename Parse>
std::vector<T> parse_lines(std::string_view content, Parse parse)
{
    std::vector<T> out;
    auto lines = text::split_lines(content);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (text::trim(lines[i]).empty()) {
            continue;
        }
        try {
            out.push_back(parse(lines[i]));
        } catch (const json::exception& e) {
            throw MalformedRecord(i + 1, e.what());
        } catch (const std::invalid_argument& e) {
            throw MalformedRecord(i + 1, e.what());
        }
    }
    return out;
}

} // namespace

std::string mined_to_line(const MinedSample& s)
{
    return mined_json(s).dump();
}

MinedSample mined_from_line(std::string_view line)
{
    return mined_from_json(json::parse(line));
}

std::string scored_to_line(const ScoredSample& s)
{
    json j = mined_json(s.mined);
    j["score"] = s.score;
    j["refined"] = s.refined;
    j["parent_id"] = s.parent_id ? json(*s.parent_id) : json(nullptr);
    j["iteration"] = s.iteration;
    return j.dump();
}

ScoredSample scored_from_line(std::string_view line)
{
    auto j = json::parse(line);
    ScoredSample s;
    s.mined = mined_from_json(j);
    s.score = j.at("score").get<int>();
    s.refined = j.at("refined").get<bool>();
    if (auto it = j.find("parent_id"); it != j.end() && !it->is_null()) {
        s.parent_id = it->get<std::string>();
    }
    s.iteration = j.value("iteration", 0);
    if (s.score < 1 || s.score > 10) {
        throw std::invalid_argument("score out of range: " + std::to_string(s.score));
    }
    if (s.refined != s.parent_id.has_value()) {
        throw std::invalid_argument("refined flag and parent_id disagree for " + s.mined.sample_id);
    }
    return s;
}

std::string serialize_mined(const std::vector<MinedSample>& samples)
{
    std::string out;
    for (const auto& s : samples) {
        out += mined_to_line(s);
        out += '\n';
    }
    return out;
}

std::vector<MinedSample> parse_mined(std::string_view content)
{
    return parse_lines<MinedSample>(content, mined_from_line);
}

std::string serialize_scored(const ScoredSet& samples)
{
    std::string out;
    for (const auto& s : samples) {
        out += scored_to_line(s);
        out += '\n';
    }
    return out;
}

ScoredSet parse_scored(std::string_view content)
{
    return parse_lines<ScoredSample>(content, scored_from_line);
}

std::optional<std::string> find_broken_lineage(const ScoredSet& samples)
{
    std::unordered_map<std::string, const ScoredSample*> by_id;
    for (const auto& s : samples) {
        by_id.emplace(s.id(), &s);
    }
    for (const auto& s : samples) {
        if (s.refined != s.parent_id.has_value()) {
            return s.id();
        }
        const ScoredSample* cur = &s;
        std::size_t hops = 0;
        while (cur->refined) {
            auto it = by_id.find(*cur->parent_id);
            if (it == by_id.end() || ++hops > samples.size()) {
                return s.id();
            }
            cur = it->second;
        }
    }
    return std::nullopt;
}

// ---- files -----------------------------------------------------------------

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw MissingFile(path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write " + tmp.string());
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            throw std::runtime_error("short write to " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

} // namespace memeprobe
