#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qsel/answer_matrix.hpp"

namespace qsel {

struct Counts {
  int correct = 0;
  int wrong = 0;
  int invalid = 0;

  int total() const { return correct + wrong + invalid; }

  Counts& operator+=(const Counts& o) {
    correct += o.correct;
    wrong += o.wrong;
    invalid += o.invalid;
    return *this;
  }
  Counts& operator-=(const Counts& o) {
    correct -= o.correct;
    wrong -= o.wrong;
    invalid -= o.invalid;
    return *this;
  }
  bool operator==(const Counts&) const = default;
};

/// Outcome counts per (image, question), summed over augmentations.
class TallyTable {
 public:
  /// `cells` is row-major [image][question]; every cell must total n_aug.
  TallyTable(std::vector<std::string> image_ids, std::vector<bool> labels, std::size_t n_questions,
             std::size_t n_aug, std::vector<Counts> cells);

  std::size_t n_images() const { return image_ids_.size(); }
  std::size_t n_questions() const { return n_questions_; }
  std::size_t n_aug() const { return n_aug_; }
  const std::string& image_id(std::size_t image) const { return image_ids_[image]; }
  bool label(std::size_t image) const { return labels_[image]; }
  const Counts& cell(std::size_t image, std::size_t question) const {
    return cells_[image * n_questions_ + question];
  }
  std::optional<std::size_t> index_of(std::string_view image_id) const;

 private:
  std::vector<std::string> image_ids_;
  std::vector<bool> labels_;
  std::size_t n_questions_;
  std::size_t n_aug_;
  std::vector<Counts> cells_;
};

TallyTable tally(const AnswerMatrix& matrix);

/// Which questions are ensembled: bit i set means question i is asked.
class SelectionVector {
 public:
  SelectionVector() = default;
  explicit SelectionVector(std::size_t n_questions) : bits_(n_questions, 0) {}

  static SelectionVector all(std::size_t n_questions);
  static SelectionVector from_indices(std::size_t n_questions, std::span<const std::size_t> indices);
  /// Character i is question i ('1' selected, '0' not).
  static SelectionVector from_bitstring(std::string_view bits);

  std::size_t size() const { return bits_.size(); }
  std::size_t count() const;
  bool none() const { return count() == 0; }
  bool test(std::size_t i) const { return bits_[i] != 0; }
  void set(std::size_t i, bool value = true) { bits_[i] = value ? 1 : 0; }
  void flip(std::size_t i) { bits_[i] ^= 1; }

  std::vector<std::size_t> indices() const;
  std::string bitstring() const;

  bool operator==(const SelectionVector&) const = default;

 private:
  std::vector<std::uint8_t> bits_;
};

/// Deterministic tie-break order: fewer selected questions first, then the
/// selection whose lowest differing question index is set.
bool precedes(const SelectionVector& a, const SelectionVector& b);

/// R^i and R'^i for one image.
struct ImageRates {
  double correct = 0.0;               // C / (C + W); 0 when every answer was invalid
  double correct_with_invalid = 0.0;  // C / (C + W + I)

  bool operator==(const ImageRates&) const = default;
};

ImageRates rates_from_counts(const Counts& c);
/// R^i > 0.5, evaluated exactly on the integer counts (C > W).
bool recognized(const Counts& c);
/// R'^i > 0.5, evaluated exactly on the integer counts (2C > C + W + I).
bool recognized_with_invalid(const Counts& c);

/// Sum of the selected questions' cells for one image.
Counts selected_counts(const TallyTable& table, const SelectionVector& s, std::size_t image);

ImageRates image_rates(const TallyTable& table, const SelectionVector& s, std::string_view image_id);

struct Metrics {
  std::vector<double> image_correct;               // R^i per image
  std::vector<double> image_correct_with_invalid;  // R'^i per image
  std::size_t n_images = 0;
  std::size_t n_img_correct = 0;        // images with R^i > 0.5
  std::size_t n_img_correct_prime = 0;  // images with R'^i > 0.5
  double r_img = 0.0;
  double r_ave = 0.0;
  double r_img_prime = 0.0;
  double r_ave_prime = 0.0;
  double r_invalid = 0.0;
  double r_q = 0.0;
  std::size_t n_selected = 0;
  std::size_t n_questions = 0;
};

/// Statistics from per-image selected-question sums. Every other metrics
/// path funnels through here.
Metrics metrics_from_sums(std::span<const Counts> per_image, std::size_t n_selected,
                          std::size_t n_questions);

/// Throws std::invalid_argument on an empty or wrongly sized selection.
Metrics metrics(const TallyTable& table, const SelectionVector& s);

enum class Variant { e_plus, e_prime_plus, e_minus, e_prime_minus };

inline constexpr std::array<Variant, 4> kAllVariants = {Variant::e_plus, Variant::e_prime_plus,
                                                        Variant::e_minus, Variant::e_prime_minus};

/// CLI spelling: "e-plus", "e-prime-plus", "e-minus", "e-prime-minus".
std::string_view to_string(Variant v);
Variant parse_variant(std::string_view text);
/// Table label of the selection optimized under `v`: s_+, s'_+, s_-, s'_-.
std::string_view selection_label(Variant v);
bool uses_invalid_as_wrong(Variant v);

inline constexpr double kDefaultAlpha = 100.0;
inline constexpr double kDefaultBeta = 0.1;

/// E = alpha * R_img + R_ave +/- beta * R_q, using the primed image
/// statistics for the primed variants.
double evaluate(const Metrics& m, Variant v, double alpha = kDefaultAlpha,
                double beta = kDefaultBeta);

/// Whether one more recognized image always outweighs any R_ave and R_q
/// change: alpha / n_images > 1 + beta. Holds for n_images <= 90 at defaults.
bool image_count_dominates(std::size_t n_images, double alpha = kDefaultAlpha,
                           double beta = kDefaultBeta);

}  // namespace qsel
