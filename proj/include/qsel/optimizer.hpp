#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qsel/fitness.hpp"
#include "qsel/question_grid.hpp"

namespace qsel {

struct GAConfig {
  std::size_t population_size = 1000;
  std::size_t generations = 200;
  double crossover_prob = 0.5;     // per adjacent pair, two-point crossover
  double mutation_prob = 0.2;      // per individual
  double per_bit_flip_prob = 0.05;  // per bit of a mutated individual
  std::size_t tournament_size = 5;
  std::uint64_t seed = 0;
  Variant variant = Variant::e_plus;
  double alpha = kDefaultAlpha;
  double beta = kDefaultBeta;
  /// Worker threads for fitness evaluation. Never affects results.
  std::size_t threads = 1;

  /// Throws ConfigError.
  void validate() const;

  bool operator==(const GAConfig&) const = default;
};

/// Config fields that determine the result (everything except `threads`).
nlohmann::json config_to_json(const GAConfig& cfg);

struct OptimizationResult {
  SelectionVector best_selection;
  double best_fitness = 0.0;
  /// Best-ever fitness after the initial population and after each generation.
  std::vector<double> per_generation_best;
  std::size_t evaluations_count = 0;
};

/// Fitness assigned to the empty selection; worse than any real selection.
inline constexpr double kEmptySelectionFitness = -std::numeric_limits<double>::infinity();

double selection_fitness(const TallyTable& table, const SelectionVector& s, Variant variant,
                         double alpha, double beta);

/// Generational GA: tournament selection, two-point crossover on adjacent
/// pairs and independent bit-flip mutation, returning the best individual ever
/// evaluated. All draws come from one stream seeded with cfg.seed.
OptimizationResult ga_optimize(const TallyTable& table, const GAConfig& cfg);

inline constexpr std::size_t kDefaultBruteForceLimit = 20;

/// Enumerates all 2^Nq - 1 non-empty selections (Gray-code order, O(N_data)
/// update per step). Ties go to the selection that `precedes` the other.
OptimizationResult brute_force(const TallyTable& table, Variant variant,
                               double alpha = kDefaultAlpha, double beta = kDefaultBeta,
                               std::size_t max_nq = kDefaultBruteForceLimit);

enum class BaselineKind { does, is, all };

std::string_view selection_label(BaselineKind kind);  // s_does, s_is, s_all
SelectionVector baseline_selection(std::span<const Question> questions, BaselineKind kind);

/// On-disk optimization result.
struct ResultDocument {
  std::string method;  // "ga" or "brute_force"
  Variant variant = Variant::e_plus;
  OptimizationResult result;
  nlohmann::json config;
  std::string question_hash;
  std::size_t n_train_images = 0;
};

nlohmann::json result_to_json(const ResultDocument& doc);
ResultDocument result_from_json(const nlohmann::json& j);
void save_result(const ResultDocument& doc, const std::filesystem::path& path);
ResultDocument load_result(const std::filesystem::path& path);

}  // namespace qsel
