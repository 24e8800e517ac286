#pragma once

#include <optional>
#include <string_view>

#include "qsel/question_grid.hpp"

namespace qsel {

enum class Answer { yes, no };
enum class Outcome { correct, wrong, invalid };

std::string_view to_string(Answer answer);
std::string_view to_string(Outcome outcome);
Outcome parse_outcome(std::string_view text);

/// Lowercases, trims whitespace and strips trailing ".,!" characters, then
/// accepts exactly "yes" or "no". Anything else is an invalid reply (nullopt).
std::optional<Answer> normalize_answer(std::string_view raw);

/// The reply that counts as correct for a question of this polarity asked
/// about an image whose target state is `label`.
Answer expected_answer(Polarity polarity, bool label);

Outcome classify(std::optional<Answer> answer, Polarity polarity, bool label);

inline Outcome classify_raw(std::string_view raw, Polarity polarity, bool label) {
  return classify(normalize_answer(raw), polarity, label);
}

}  // namespace qsel
