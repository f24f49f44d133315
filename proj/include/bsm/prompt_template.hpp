#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>

namespace bsm {

using Bindings = std::map<std::string, std::string>;

/// Text with `{name}` placeholders. `{{` and `}}` render as literal braces.
class PromptTemplate {
 public:
  PromptTemplate() = default;

  /// Required placeholders are taken from the body.
  PromptTemplate(std::string name, std::string body);

  /// Declared placeholders must match the body exactly: an undeclared
  /// placeholder raises UnknownPlaceholder, a declared-but-unused one
  /// raises TemplateError.
  PromptTemplate(std::string name, std::string body, std::set<std::string> declared);

  /// Parses a template file: a `---` front-matter block with `name:` and
  /// `placeholders:` (comma separated) followed by the body.
  static PromptTemplate parse(std::string_view text);
  static PromptTemplate load(const std::filesystem::path& path);

  const std::string& name() const { return name_; }
  const std::string& body() const { return body_; }
  const std::set<std::string>& required_placeholders() const { return required_; }

  /// Bindings not named by the template are ignored.
  std::string render(const Bindings& bindings) const;

 private:
  std::string name_;
  std::string body_;
  std::set<std::string> required_;
};

inline std::string render_prompt(const PromptTemplate& t, const Bindings& bindings) {
  return t.render(bindings);
}

}  // namespace bsm
