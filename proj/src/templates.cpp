#include "bsm/templates.hpp"

#include "bsm/errors.hpp"

namespace bsm {

const TemplateSet& TemplateSet::builtin() {
  static const TemplateSet set = [] {
    TemplateSet s;
    for (const auto& [stem, text] : embedded_template_sources()) {
      auto t = PromptTemplate::parse(text);
      if (t.name() != stem) throw TemplateError("template file " + stem + " declares name " + t.name());
      s.templates_.emplace(stem, std::move(t));
    }
    return s;
  }();
  return set;
}

TemplateSet TemplateSet::with_overrides(const std::filesystem::path& dir) {
  TemplateSet s = builtin();
  if (!std::filesystem::is_directory(dir)) throw IoError("template directory not found: " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".txt") continue;
    auto t = PromptTemplate::load(entry.path());
    auto stem = entry.path().stem().string();
    if (t.name() != stem) throw TemplateError("template file " + entry.path().string() + " declares name " + t.name());
    if (auto it = s.templates_.find(stem); it != s.templates_.end()) {
      if (t.required_placeholders() != it->second.required_placeholders()) {
        throw TemplateError("override " + stem + " changes the placeholder set");
      }
      it->second = std::move(t);
    } else {
      s.templates_.emplace(stem, std::move(t));
    }
  }
  return s;
}

const PromptTemplate& TemplateSet::get(std::string_view name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) throw TemplateError("no template named " + std::string(name));
  return it->second;
}

}  // namespace bsm
