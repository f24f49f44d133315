#include "bsm/prompt_template.hpp"

#include <cctype>
#include <fstream>
#include <functional>
#include <sstream>

#include "bsm/errors.hpp"

namespace bsm {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Walks the body, calling `literal` for plain text and `placeholder` for each
// `{name}`. Malformed braces raise TemplateError.
void scan(const std::string& name, const std::string& body,
          const std::function<void(std::string_view)>& literal,
          const std::function<void(const std::string&)>& placeholder) {
  std::size_t i = 0;
  std::size_t run = 0;
  auto flush = [&](std::size_t end) {
    if (end > run) literal(std::string_view(body).substr(run, end - run));
  };
  while (i < body.size()) {
    char c = body[i];
    if (c == '{' && i + 1 < body.size() && body[i + 1] == '{') {
      flush(i);
      literal("{");
      i += 2;
      run = i;
    } else if (c == '}' && i + 1 < body.size() && body[i + 1] == '}') {
      flush(i);
      literal("}");
      i += 2;
      run = i;
    } else if (c == '{') {
      std::size_t j = i + 1;
      if (j < body.size() && ident_start(body[j])) {
        while (j < body.size() && ident_char(body[j])) ++j;
      }
      if (j == i + 1 || j >= body.size() || body[j] != '}') {
        throw TemplateError("template '" + name + "': stray '{' at offset " + std::to_string(i));
      }
      flush(i);
      placeholder(body.substr(i + 1, j - i - 1));
      i = j + 1;
      run = i;
    } else if (c == '}') {
      throw TemplateError("template '" + name + "': stray '}' at offset " + std::to_string(i));
    } else {
      ++i;
    }
  }
  flush(body.size());
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

PromptTemplate::PromptTemplate(std::string name, std::string body)
    : name_(std::move(name)), body_(std::move(body)) {
  scan(name_, body_, [](std::string_view) {}, [&](const std::string& p) { required_.insert(p); });
}

PromptTemplate::PromptTemplate(std::string name, std::string body, std::set<std::string> declared)
    : PromptTemplate(std::move(name), std::move(body)) {
  for (const auto& p : required_) {
    if (!declared.count(p)) throw UnknownPlaceholder(p);
  }
  for (const auto& p : declared) {
    if (!required_.count(p)) {
      throw TemplateError("template '" + name_ + "' declares unused placeholder {" + p + "}");
    }
  }
}

PromptTemplate PromptTemplate::parse(std::string_view text) {
  auto first_nl = text.find('\n');
  if (trim(text.substr(0, first_nl)) != "---") {
    throw TemplateError("template file must start with a '---' front-matter line");
  }
  std::string name;
  std::set<std::string> declared;
  std::size_t pos = first_nl + 1;
  bool closed = false;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    if (trim(line) == "---") {
      closed = true;
      break;
    }
    auto colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    auto key = trim(line.substr(0, colon));
    auto value = trim(line.substr(colon + 1));
    if (key == "name") {
      name = value;
    } else if (key == "placeholders") {
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) {
        auto p = trim(item);
        if (!p.empty()) declared.insert(p);
      }
    }
  }
  if (!closed) throw TemplateError("unterminated template front matter");
  if (name.empty()) throw TemplateError("template front matter lacks a name");
  std::string body(text.substr(pos));
  if (!body.empty() && body.back() == '\n') body.pop_back();
  return PromptTemplate(std::move(name), std::move(body), std::move(declared));
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read template " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string PromptTemplate::render(const Bindings& bindings) const {
  for (const auto& p : required_) {
    if (!bindings.count(p)) throw MissingPlaceholder(p);
  }
  std::string out;
  out.reserve(body_.size());
  scan(
      name_, body_, [&](std::string_view s) { out.append(s); },
      [&](const std::string& p) { out.append(bindings.at(p)); });
  return out;
}

}  // namespace bsm
