#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>

namespace memeprobe {

using TemplateVars = std::map<std::string, std::string, std::less<>>;

/// Substitutes `{name}` placeholders. `{{` and `}}` produce literal braces;
/// a brace not followed by an identifier and `}` is copied through. A
/// placeholder without a value raises TemplateError(name).
std::string render_template(std::string_view tmpl, const TemplateVars& vars);

/// Names of all `{name}` placeholders a template references.
std::set<std::string> template_placeholders(std::string_view tmpl);

/// Per-role prompt templates, keyed by template name (`miner`, `examiner`,
/// `judge`, `narrator`, `candidate`, `summarizer`, `target`, `scorer`,
/// `refiner`). The built-in set is compiled from the `prompts/` directory.
class PromptLibrary {
public:
    static PromptLibrary builtin();
    /// Built-ins overridden by any `<name>.txt` present in `dir`.
    static PromptLibrary with_overrides(const std::filesystem::path& dir);

    const std::string& get(std::string_view name) const;
    void set(std::string name, std::string tmpl);
    bool references(std::string_view name, std::string_view placeholder) const;

    std::string render(std::string_view name, const TemplateVars& vars) const
    {
        return render_template(get(name), vars);
    }

private:
    std::map<std::string, std::string, std::less<>> templates_;
};

} // namespace memeprobe
