#include "qsel/fitness.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

#include "qsel/error.hpp"

namespace qsel {

TallyTable::TallyTable(std::vector<std::string> image_ids, std::vector<bool> labels,
                       std::size_t n_questions, std::size_t n_aug, std::vector<Counts> cells)
    : image_ids_(std::move(image_ids)),
      labels_(std::move(labels)),
      n_questions_(n_questions),
      n_aug_(n_aug),
      cells_(std::move(cells)) {
  if (image_ids_.empty() || n_questions_ == 0) throw MatrixError("tally table: empty dimensions");
  if (labels_.size() != image_ids_.size()) throw MatrixError("tally table: label count mismatch");
  if (cells_.size() != image_ids_.size() * n_questions_) {
    throw MatrixError("tally table: cell count mismatch");
  }
  for (const auto& c : cells_) {
    if (c.correct < 0 || c.wrong < 0 || c.invalid < 0 ||
        static_cast<std::size_t>(c.total()) != n_aug_) {
      throw MatrixError(fmt::format("tally table: cell ({}, {}, {}) does not sum to n_aug = {}",
                                    c.correct, c.wrong, c.invalid, n_aug_));
    }
  }
}

std::optional<std::size_t> TallyTable::index_of(std::string_view image_id) const {
  const auto it = std::find(image_ids_.begin(), image_ids_.end(), image_id);
  if (it == image_ids_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - image_ids_.begin());
}

TallyTable tally(const AnswerMatrix& matrix) {
  const std::size_t n_images = matrix.n_images();
  const std::size_t nq = matrix.n_questions();
  std::vector<Counts> cells(n_images * nq);
  for (std::size_t i = 0; i < n_images; ++i) {
    for (std::size_t a = 0; a < matrix.n_aug(); ++a) {
      for (std::size_t q = 0; q < nq; ++q) {
        auto& cell = cells[i * nq + q];
        switch (matrix.record(i, a, q).outcome) {
          case Outcome::correct: ++cell.correct; break;
          case Outcome::wrong: ++cell.wrong; break;
          case Outcome::invalid: ++cell.invalid; break;
        }
      }
    }
  }
  std::vector<std::string> ids;
  std::vector<bool> labels;
  for (const auto& e : matrix.manifest().entries) {
    ids.push_back(e.image_id);
    labels.push_back(e.label);
  }
  return TallyTable(std::move(ids), std::move(labels), nq, matrix.n_aug(), std::move(cells));
}

SelectionVector SelectionVector::all(std::size_t n_questions) {
  SelectionVector s(n_questions);
  std::fill(s.bits_.begin(), s.bits_.end(), 1);
  return s;
}

SelectionVector SelectionVector::from_indices(std::size_t n_questions,
                                              std::span<const std::size_t> indices) {
  SelectionVector s(n_questions);
  for (auto i : indices) {
    if (i >= n_questions) {
      throw std::out_of_range(fmt::format("question index {} outside grid of {}", i, n_questions));
    }
    s.set(i);
  }
  return s;
}

SelectionVector SelectionVector::from_bitstring(std::string_view bits) {
  SelectionVector s(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != '0' && bits[i] != '1') {
      throw std::invalid_argument(fmt::format("bad selection bitstring \"{}\"", bits));
    }
    s.set(i, bits[i] == '1');
  }
  return s;
}

std::size_t SelectionVector::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

std::vector<std::size_t> SelectionVector::indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] != 0) out.push_back(i);
  }
  return out;
}

std::string SelectionVector::bitstring() const {
  std::string out(bits_.size(), '0');
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] != 0) out[i] = '1';
  }
  return out;
}

bool precedes(const SelectionVector& a, const SelectionVector& b) {
  const auto ca = a.count();
  const auto cb = b.count();
  if (ca != cb) return ca < cb;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a.test(i) != b.test(i)) return a.test(i);
  }
  return false;
}

ImageRates rates_from_counts(const Counts& c) {
  ImageRates r;
  const int valid = c.correct + c.wrong;
  if (valid > 0) r.correct = static_cast<double>(c.correct) / valid;
  if (c.total() > 0) r.correct_with_invalid = static_cast<double>(c.correct) / c.total();
  return r;
}

bool recognized(const Counts& c) { return c.correct > c.wrong; }

bool recognized_with_invalid(const Counts& c) { return 2 * c.correct > c.total(); }

Counts selected_counts(const TallyTable& table, const SelectionVector& s, std::size_t image) {
  Counts sum;
  for (std::size_t q = 0; q < table.n_questions(); ++q) {
    if (s.test(q)) sum += table.cell(image, q);
  }
  return sum;
}

namespace {

void check_selection(const TallyTable& table, const SelectionVector& s) {
  if (s.size() != table.n_questions()) {
    throw std::invalid_argument(fmt::format("selection has {} bits, table has {} questions",
                                            s.size(), table.n_questions()));
  }
  if (s.none()) throw std::invalid_argument("empty selection");
}

}  // namespace

ImageRates image_rates(const TallyTable& table, const SelectionVector& s,
                       std::string_view image_id) {
  check_selection(table, s);
  const auto image = table.index_of(image_id);
  if (!image) throw std::out_of_range(fmt::format("unknown image_id \"{}\"", image_id));
  return rates_from_counts(selected_counts(table, s, *image));
}

Metrics metrics_from_sums(std::span<const Counts> per_image, std::size_t n_selected,
                          std::size_t n_questions) {
  Metrics m;
  m.n_images = per_image.size();
  m.n_selected = n_selected;
  m.n_questions = n_questions;
  m.image_correct.reserve(per_image.size());
  m.image_correct_with_invalid.reserve(per_image.size());

  double sum_r = 0.0;
  double sum_r_prime = 0.0;
  long long invalid = 0;
  long long answers = 0;
  for (const auto& c : per_image) {
    const auto r = rates_from_counts(c);
    m.image_correct.push_back(r.correct);
    m.image_correct_with_invalid.push_back(r.correct_with_invalid);
    sum_r += r.correct;
    sum_r_prime += r.correct_with_invalid;
    if (recognized(c)) ++m.n_img_correct;
    if (recognized_with_invalid(c)) ++m.n_img_correct_prime;
    invalid += c.invalid;
    answers += c.total();
  }
  const auto n = static_cast<double>(m.n_images);
  m.r_img = static_cast<double>(m.n_img_correct) / n;
  m.r_ave = sum_r / n;
  m.r_img_prime = static_cast<double>(m.n_img_correct_prime) / n;
  m.r_ave_prime = sum_r_prime / n;
  m.r_invalid = answers > 0 ? static_cast<double>(invalid) / static_cast<double>(answers) : 0.0;
  m.r_q = static_cast<double>(n_selected) / static_cast<double>(n_questions);
  return m;
}

Metrics metrics(const TallyTable& table, const SelectionVector& s) {
  check_selection(table, s);
  std::vector<Counts> sums(table.n_images());
  for (std::size_t i = 0; i < table.n_images(); ++i) {
    sums[i] = selected_counts(table, s, i);
  }
  return metrics_from_sums(sums, s.count(), table.n_questions());
}

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::e_plus: return "e-plus";
    case Variant::e_prime_plus: return "e-prime-plus";
    case Variant::e_minus: return "e-minus";
    case Variant::e_prime_minus: return "e-prime-minus";
  }
  return "e-plus";
}

Variant parse_variant(std::string_view text) {
  for (auto v : kAllVariants) {
    if (to_string(v) == text) return v;
  }
  throw ConfigError(fmt::format(
      "unknown variant \"{}\" (expected e-plus, e-prime-plus, e-minus or e-prime-minus)", text));
}

std::string_view selection_label(Variant v) {
  switch (v) {
    case Variant::e_plus: return "s_+";
    case Variant::e_prime_plus: return "s'_+";
    case Variant::e_minus: return "s_-";
    case Variant::e_prime_minus: return "s'_-";
  }
  return "s_+";
}

bool uses_invalid_as_wrong(Variant v) {
  return v == Variant::e_prime_plus || v == Variant::e_prime_minus;
}

double evaluate(const Metrics& m, Variant v, double alpha, double beta) {
  const bool primed = uses_invalid_as_wrong(v);
  const double img = primed ? m.r_img_prime : m.r_img;
  const double ave = primed ? m.r_ave_prime : m.r_ave;
  const bool plus = v == Variant::e_plus || v == Variant::e_prime_plus;
  return alpha * img + ave + (plus ? beta * m.r_q : -beta * m.r_q);
}

bool image_count_dominates(std::size_t n_images, double alpha, double beta) {
  return n_images > 0 && alpha / static_cast<double>(n_images) > 1.0 + beta;
}

}  // namespace qsel
