#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "bsm/prompt_template.hpp"

namespace bsm {

/// Named collection of prompt templates. The built-in set is compiled from
/// the files under templates/; a directory of `<name>.txt` files can override
/// any of them.
class TemplateSet {
 public:
  static const TemplateSet& builtin();

  /// Built-in templates, replaced by any same-named file found in `dir`.
  static TemplateSet with_overrides(const std::filesystem::path& dir);

  const PromptTemplate& get(std::string_view name) const;
  std::string render(std::string_view name, const Bindings& bindings) const { return get(name).render(bindings); }

  const std::map<std::string, PromptTemplate, std::less<>>& all() const { return templates_; }

 private:
  std::map<std::string, PromptTemplate, std::less<>> templates_;
};

/// Template file contents baked in at build time, keyed by file stem.
const std::map<std::string, std::string>& embedded_template_sources();

}  // namespace bsm
