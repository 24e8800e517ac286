#include "qsel/question_grid.hpp"

#include <array>
#include <cstdint>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "qsel/error.hpp"

namespace qsel {

namespace {

constexpr std::array<std::string_view, 3> kPlaceholders = {"{article}", "{wording}", "{state}"};

// Every "{...}" token must be one of the known placeholders.
void check_placeholders(std::string_view pattern) {
  std::size_t pos = 0;
  while ((pos = pattern.find('{', pos)) != std::string_view::npos) {
    const auto close = pattern.find('}', pos);
    if (close == std::string_view::npos) {
      throw SpecError(fmt::format("unterminated placeholder in form template \"{}\"", pattern));
    }
    const auto token = pattern.substr(pos, close - pos + 1);
    bool known = false;
    for (auto p : kPlaceholders) {
      known = known || token == p;
    }
    if (!known) {
      throw SpecError(fmt::format("unknown placeholder {} in form template \"{}\"", token, pattern));
    }
    pos = close + 1;
  }
}

void replace_all(std::string& text, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
}

const nlohmann::json& require_array(const nlohmann::json& doc, const char* key) {
  if (!doc.contains(key) || !doc.at(key).is_array()) {
    throw SpecError(fmt::format("question spec: \"{}\" must be an array", key));
  }
  if (doc.at(key).empty()) {
    throw SpecError(fmt::format("question spec: \"{}\" must not be empty", key));
  }
  return doc.at(key);
}

}  // namespace

std::string_view to_string(Style style) { return style == Style::does ? "does" : "is"; }

std::string_view to_string(Polarity polarity) {
  return polarity == Polarity::positive ? "positive" : "negated";
}

Style parse_style(std::string_view text) {
  if (text == "does") return Style::does;
  if (text == "is") return Style::is;
  throw SpecError(fmt::format("unknown form style \"{}\" (expected \"does\" or \"is\")", text));
}

Polarity parse_polarity(std::string_view text) {
  if (text == "positive") return Polarity::positive;
  if (text == "negated") return Polarity::negated;
  throw SpecError(fmt::format("unknown polarity \"{}\" (expected \"positive\" or \"negated\")", text));
}

void validate_spec(const QuestionSpec& spec) {
  if (spec.forms.empty()) throw SpecError("question spec: no forms");
  if (spec.articles.empty()) throw SpecError("question spec: no articles");
  if (spec.states.empty()) throw SpecError("question spec: no states");
  if (spec.wordings.empty()) throw SpecError("question spec: no wordings");

  // One form per style keeps (style, article, state, wording) a unique key.
  std::set<Style> styles;
  for (const auto& form : spec.forms) {
    if (!styles.insert(form.style).second) {
      throw SpecError(fmt::format("question spec: style \"{}\" used by more than one form",
                                  to_string(form.style)));
    }
    check_placeholders(form.pattern);
  }
  bool any_positive = false;
  for (const auto& state : spec.states) {
    any_positive = any_positive || state.polarity == Polarity::positive;
  }
  if (!any_positive) {
    throw SpecError("question spec: at least one state entry must be positive");
  }
}

QuestionSpec spec_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw SpecError("question spec: top level must be an object");
  QuestionSpec spec;
  try {
    for (const auto& form : require_array(doc, "forms")) {
      if (!form.contains("style")) throw SpecError("question spec: form without \"style\"");
      if (!form.contains("template")) throw SpecError("question spec: form without \"template\"");
      spec.forms.push_back({parse_style(form.at("style").get<std::string>()),
                            form.at("template").get<std::string>()});
    }
    for (const auto& a : require_array(doc, "articles")) {
      spec.articles.push_back(a.get<std::string>());
    }
    for (const auto& state : require_array(doc, "states")) {
      if (!state.contains("text")) throw SpecError("question spec: state without \"text\"");
      if (!state.contains("polarity")) {
        throw SpecError(fmt::format("question spec: state \"{}\" is missing its polarity tag",
                                    state.at("text").get<std::string>()));
      }
      spec.states.push_back({state.at("text").get<std::string>(),
                             parse_polarity(state.at("polarity").get<std::string>())});
    }
    for (const auto& w : require_array(doc, "wordings")) {
      spec.wordings.push_back(w.get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(fmt::format("question spec: {}", e.what()));
  }
  validate_spec(spec);
  return spec;
}

QuestionSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError(fmt::format("cannot open question spec {}", path.string()));
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw SpecError(fmt::format("cannot parse question spec {}: {}", path.string(), e.what()));
  }
  return spec_from_json(doc);
}

std::vector<Question> expand_grid(const QuestionSpec& spec, std::size_t cap) {
  validate_spec(spec);
  const std::size_t total = spec.grid_size();
  if (total > cap) {
    throw SpecError(fmt::format("grid exceeds cap: {} questions > cap {}", total, cap));
  }
  std::vector<Question> out;
  out.reserve(total);
  for (std::size_t f = 0; f < spec.forms.size(); ++f) {
    for (std::size_t a = 0; a < spec.articles.size(); ++a) {
      for (std::size_t s = 0; s < spec.states.size(); ++s) {
        for (std::size_t w = 0; w < spec.wordings.size(); ++w) {
          Question q;
          q.id = out.size();
          q.text = spec.forms[f].pattern;
          replace_all(q.text, "{article}", spec.articles[a]);
          replace_all(q.text, "{wording}", spec.wordings[w]);
          replace_all(q.text, "{state}", spec.states[s].text);
          q.style = spec.forms[f].style;
          q.form_index = f;
          q.article_index = a;
          q.state_index = s;
          q.wording_index = w;
          q.polarity = spec.states[s].polarity;
          out.push_back(std::move(q));
        }
      }
    }
  }
  return out;
}

nlohmann::json grid_to_json(std::span<const Question> questions) {
  auto doc = nlohmann::json::array();
  for (const auto& q : questions) {
    doc.push_back({{"id", q.id},
                   {"text", q.text},
                   {"style", to_string(q.style)},
                   {"polarity", to_string(q.polarity)},
                   {"coords",
                    {{"form", q.form_index},
                     {"article", q.article_index},
                     {"state", q.state_index},
                     {"wording", q.wording_index}}}});
  }
  return doc;
}

std::vector<Question> grid_from_json(const nlohmann::json& doc) {
  if (!doc.is_array() || doc.empty()) throw SpecError("question grid: expected a non-empty array");
  std::vector<Question> out;
  try {
    for (const auto& item : doc) {
      Question q;
      q.id = item.at("id").get<std::size_t>();
      if (q.id != out.size()) {
        throw SpecError(fmt::format("question grid: id {} at position {}", q.id, out.size()));
      }
      q.text = item.at("text").get<std::string>();
      if (q.text.find('{') != std::string::npos) {
        throw SpecError(fmt::format("question grid: unsubstituted placeholder in \"{}\"", q.text));
      }
      q.style = parse_style(item.at("style").get<std::string>());
      q.polarity = parse_polarity(item.at("polarity").get<std::string>());
      const auto& c = item.at("coords");
      q.form_index = c.at("form").get<std::size_t>();
      q.article_index = c.at("article").get<std::size_t>();
      q.state_index = c.at("state").get<std::size_t>();
      q.wording_index = c.at("wording").get<std::size_t>();
      out.push_back(std::move(q));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SpecError(fmt::format("question grid: {}", e.what()));
  }
  return out;
}

void save_grid(std::span<const Question> questions, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw SpecError(fmt::format("cannot write question grid {}", path.string()));
  out << grid_to_json(questions).dump(2) << '\n';
}

std::vector<Question> load_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError(fmt::format("cannot open question grid {}", path.string()));
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw SpecError(fmt::format("cannot parse question grid {}: {}", path.string(), e.what()));
  }
  return grid_from_json(doc);
}

std::string question_list_hash(std::span<const Question> questions) {
  const std::string canonical = grid_to_json(questions).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace qsel
