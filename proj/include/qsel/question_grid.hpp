#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace qsel {

enum class Style { does, is };
enum class Polarity { positive, negated };

std::string_view to_string(Style style);
std::string_view to_string(Polarity polarity);
Style parse_style(std::string_view text);
Polarity parse_polarity(std::string_view text);

/// A question pattern such as "Is {article} {wording} {state}?".
struct FormTemplate {
  Style style = Style::is;
  std::string pattern;

  bool operator==(const FormTemplate&) const = default;
};

struct StateEntry {
  std::string text;
  Polarity polarity = Polarity::positive;

  bool operator==(const StateEntry&) const = default;
};

/// Declarative description of the candidate questions for one recognizer.
struct QuestionSpec {
  std::vector<FormTemplate> forms;
  std::vector<std::string> articles;
  std::vector<StateEntry> states;
  std::vector<std::string> wordings;

  std::size_t grid_size() const {
    return forms.size() * articles.size() * states.size() * wordings.size();
  }

  bool operator==(const QuestionSpec&) const = default;
};

struct Question {
  std::size_t id = 0;
  std::string text;
  Style style = Style::is;
  std::size_t form_index = 0;
  std::size_t article_index = 0;
  std::size_t state_index = 0;
  std::size_t wording_index = 0;
  /// Whether "yes" asserts the target state. Inherited from the state entry.
  Polarity polarity = Polarity::positive;

  bool operator==(const Question&) const = default;
};

inline constexpr std::size_t kDefaultGridCap = 64;

/// Throws SpecError when any structural invariant is violated.
void validate_spec(const QuestionSpec& spec);

QuestionSpec spec_from_json(const nlohmann::json& doc);
QuestionSpec load_spec(const std::filesystem::path& path);

/// Cartesian product of the spec in row-major order: form outermost, then
/// article, state, and wording innermost. Question ids are grid positions.
std::vector<Question> expand_grid(const QuestionSpec& spec, std::size_t cap = kDefaultGridCap);

nlohmann::json grid_to_json(std::span<const Question> questions);
/// Parses and validates an exported grid (dense ids, no unsubstituted placeholders).
std::vector<Question> grid_from_json(const nlohmann::json& doc);
void save_grid(std::span<const Question> questions, const std::filesystem::path& path);
std::vector<Question> load_grid(const std::filesystem::path& path);

/// Stable 64-bit FNV-1a digest (hex) over the canonical JSON of the grid.
/// Used to tie answer matrices and optimization results to one question list.
std::string question_list_hash(std::span<const Question> questions);

}  // namespace qsel
