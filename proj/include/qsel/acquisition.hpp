#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsel/answer_matrix.hpp"
#include "qsel/dataset.hpp"
#include "qsel/error.hpp"
#include "qsel/oracle.hpp"
#include "qsel/question_grid.hpp"

namespace qsel {

inline constexpr std::size_t kDefaultAugmentations = 6;

struct AugmentedImage {
  std::string image_id;
  std::size_t aug_index = 0;
  std::string png_base64;
};

/// Loads every manifest image (paths relative to `image_root`) and renders
/// n_aug RGBShift variants of each. The random stream is consumed strictly in
/// manifest order, then augmentation order, so the pixels depend on the seed
/// alone. Result is indexed [image * n_aug + aug].
std::vector<AugmentedImage> prepare_augmentations(const DatasetManifest& manifest,
                                                  const std::filesystem::path& image_root,
                                                  std::size_t n_aug, std::uint64_t seed);

struct CollectOptions {
  std::size_t n_aug = kDefaultAugmentations;
  std::uint64_t seed = 0;
  std::filesystem::path image_root;
  std::size_t max_in_flight = 4;
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{200};  // doubled after each failed attempt
};

struct FailedQuery {
  std::string image_id;
  std::size_t aug_index = 0;
  std::size_t question_id = 0;
  std::string message;
};

/// Raised when any triple still fails after all retries. No matrix is produced.
class CollectionError : public OracleError {
 public:
  explicit CollectionError(std::vector<FailedQuery> failures);
  const std::vector<FailedQuery>& failures() const { return failures_; }

 private:
  std::vector<FailedQuery> failures_;
};

/// Queries the oracle once per (image, augmentation, question) triple with up
/// to `max_in_flight` concurrent requests and classifies every reply.
AnswerMatrix collect_answers(const DatasetManifest& manifest, std::span<const Question> questions,
                             AnswerOracle& oracle, const CollectOptions& options);

/// Per-question answer distribution for the synthetic oracle.
struct SyntheticProfile {
  struct Entry {
    double p_correct = 0.0;
    double p_invalid = 0.0;
    bool operator==(const Entry&) const = default;
  };
  std::vector<Entry> questions;  // indexed by question id
  std::uint64_t seed = 0;

  bool operator==(const SyntheticProfile&) const = default;
};

void validate_profile(const SyntheticProfile& profile, std::size_t n_questions);
SyntheticProfile uniform_profile(std::size_t n_questions, double p_correct, double p_invalid,
                                 std::uint64_t seed);
/// p_correct ~ U[0.2, 0.95], p_invalid ~ U[0, 0.4] capped at 1 - p_correct.
SyntheticProfile random_profile(std::size_t n_questions, std::uint64_t seed);

nlohmann::json profile_to_json(const SyntheticProfile& profile);
SyntheticProfile profile_from_json(const nlohmann::json& doc);
void save_profile(const SyntheticProfile& profile, const std::filesystem::path& path);
SyntheticProfile load_profile(const std::filesystem::path& path);

/// Raw reply a synthetic oracle gives to realize `outcome`.
std::string synthetic_answer(Outcome outcome, Polarity polarity, bool label);

/// Draws each record independently: Correct with p_correct, Invalid with
/// p_invalid, Wrong otherwise. Bit-reproducible for a fixed profile seed.
AnswerMatrix synth_matrix(const DatasetManifest& manifest, std::span<const Question> questions,
                          const SyntheticProfile& profile, std::size_t n_aug);

}  // namespace qsel
