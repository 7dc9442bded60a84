#include "memeprobe/prompts.hpp"

#include "memeprobe/domain.hpp"
#include "memeprobe/errors.hpp"

#include <cctype>
#include <stdexcept>
#include <utility>
#include <vector>

namespace memeprobe {

// Generated at configure time from prompts/*.txt.
const std::vector<std::pair<std::string, std::string>>& builtin_prompt_texts();

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Length of a `{identifier}` token starting at `pos`, or 0.
std::size_t placeholder_length(std::string_view t, std::size_t pos)
{
    if (pos + 2 >= t.size() || t[pos] != '{' || !ident_start(t[pos + 1])) {
        return 0;
    }
    std::size_t i = pos + 2;
    while (i < t.size() && ident_char(t[i])) {
        ++i;
    }
    return (i < t.size() && t[i] == '}') ? i - pos + 1 : 0;
}

} // namespace

std::string render_template(std::string_view tmpl, const TemplateVars& vars)
{
    std::string out;
    out.reserve(tmpl.size());
    for (std::size_t i = 0; i < tmpl.size();) {
        if (tmpl.compare(i, 2, "{{") == 0 || tmpl.compare(i, 2, "}}") == 0) {
            out.push_back(tmpl[i]);
            i += 2;
            continue;
        }
        if (auto len = placeholder_length(tmpl, i); len != 0) {
            auto name = tmpl.substr(i + 1, len - 2);
            auto it = vars.find(name);
            if (it == vars.end()) {
                throw TemplateError(std::string(name));
            }
            out += it->second;
            i += len;
            continue;
        }
        out.push_back(tmpl[i++]);
    }
    return out;
}

std::set<std::string> template_placeholders(std::string_view tmpl)
{
    std::set<std::string> names;
    for (std::size_t i = 0; i < tmpl.size();) {
        if (tmpl.compare(i, 2, "{{") == 0 || tmpl.compare(i, 2, "}}") == 0) {
            i += 2;
            continue;
        }
        if (auto len = placeholder_length(tmpl, i); len != 0) {
            names.emplace(tmpl.substr(i + 1, len - 2));
            i += len;
            continue;
        }
        ++i;
    }
    return names;
}

PromptLibrary PromptLibrary::builtin()
{
    PromptLibrary lib;
    for (const auto& [name, text] : builtin_prompt_texts()) {
        lib.templates_[name] = text;
    }
    return lib;
}

PromptLibrary PromptLibrary::with_overrides(const std::filesystem::path& dir)
{
    auto lib = builtin();
    if (!std::filesystem::is_directory(dir)) {
        throw MissingFile(dir.string());
    }
    for (auto& [name, text] : lib.templates_) {
        auto file = dir / (name + ".txt");
        if (std::filesystem::exists(file)) {
            text = read_file(file);
        }
    }
    return lib;
}

const std::string& PromptLibrary::get(std::string_view name) const
{
    auto it = templates_.find(name);
    if (it == templates_.end()) {
        throw std::out_of_range("no prompt template named " + std::string(name));
    }
    return it->second;
}

void PromptLibrary::set(std::string name, std::string tmpl)
{
    templates_[std::move(name)] = std::move(tmpl);
}

bool PromptLibrary::references(std::string_view name, std::string_view placeholder) const
{
    return template_placeholders(get(name)).count(std::string(placeholder)) != 0;
}

} // namespace memeprobe
