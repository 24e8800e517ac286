#include "qsel/answer_semantics.hpp"

#include <string>

#include <fmt/format.h>

#include "qsel/error.hpp"

namespace qsel {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_terminal_punct(char c) { return c == '.' || c == ',' || c == '!'; }

}  // namespace

std::string_view to_string(Answer answer) { return answer == Answer::yes ? "yes" : "no"; }

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::correct: return "correct";
    case Outcome::wrong: return "wrong";
    case Outcome::invalid: return "invalid";
  }
  return "invalid";
}

Outcome parse_outcome(std::string_view text) {
  if (text == "correct") return Outcome::correct;
  if (text == "wrong") return Outcome::wrong;
  if (text == "invalid") return Outcome::invalid;
  throw MatrixError(fmt::format("unknown outcome \"{}\"", text));
}

std::optional<Answer> normalize_answer(std::string_view raw) {
  std::string s;
  s.reserve(raw.size());
  for (char c : raw) {
    s.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c);
  }
  std::size_t begin = 0;
  while (begin < s.size() && is_space(s[begin])) ++begin;
  std::size_t end = s.size();
  while (end > begin && (is_space(s[end - 1]) || is_terminal_punct(s[end - 1]))) --end;

  const std::string_view core(s.data() + begin, end - begin);
  if (core == "yes") return Answer::yes;
  if (core == "no") return Answer::no;
  return std::nullopt;
}

Answer expected_answer(Polarity polarity, bool label) {
  const bool asserts_state = polarity == Polarity::positive;
  return label == asserts_state ? Answer::yes : Answer::no;
}

Outcome classify(std::optional<Answer> answer, Polarity polarity, bool label) {
  if (!answer) return Outcome::invalid;
  return *answer == expected_answer(polarity, label) ? Outcome::correct : Outcome::wrong;
}

}  // namespace qsel
