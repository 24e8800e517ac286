#include "qsel/optimizer.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <thread>

#include <fmt/format.h>

#include "qsel/error.hpp"
#include "qsel/random.hpp"

namespace qsel {

namespace {

struct Individual {
  SelectionVector genes;
  double fitness = kEmptySelectionFitness;
  bool evaluated = false;
};

void check_probability(double p, std::string_view name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ConfigError(fmt::format("GA config: {} = {} is outside [0, 1]", name, p));
  }
}

// cxTwoPoint semantics: first cut in [1, n], second in [1, n-1] shifted past
// the first, then the genes in [lo, hi) are exchanged.
void two_point_crossover(SelectionVector& a, SelectionVector& b, Rng& rng) {
  const std::size_t n = a.size();
  if (n < 2) return;
  std::size_t lo = 1 + rng.below(n);
  std::size_t hi = 1 + rng.below(n - 1);
  if (hi >= lo) {
    ++hi;
  } else {
    std::swap(lo, hi);
  }
  hi = std::min(hi, n);
  for (std::size_t i = lo; i < hi; ++i) {
    const bool tmp = a.test(i);
    a.set(i, b.test(i));
    b.set(i, tmp);
  }
}

void flip_bits(SelectionVector& s, double per_bit, Rng& rng) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (rng.uniform01() < per_bit) s.flip(i);
  }
}

std::size_t tournament(const std::vector<Individual>& pop, std::size_t k, Rng& rng) {
  std::size_t best = rng.below(pop.size());
  for (std::size_t i = 1; i < k; ++i) {
    const std::size_t c = rng.below(pop.size());
    if (pop[c].fitness > pop[best].fitness) best = c;
  }
  return best;
}

std::size_t evaluate_pending(std::vector<Individual>& pop, const TallyTable& table,
                             const GAConfig& cfg) {
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    if (!pop[i].evaluated) pending.push_back(i);
  }
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      auto& ind = pop[pending[j]];
      ind.fitness = selection_fitness(table, ind.genes, cfg.variant, cfg.alpha, cfg.beta);
      ind.evaluated = true;
    }
  };
  const std::size_t workers = std::min(cfg.threads, pending.size());
  if (workers <= 1) {
    run(0, pending.size());
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (pending.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(pending.size(), begin + chunk);
      if (begin < end) pool.emplace_back(run, begin, end);
    }
  }
  return pending.size();
}

}  // namespace

void GAConfig::validate() const {
  check_probability(crossover_prob, "crossover_prob");
  check_probability(mutation_prob, "mutation_prob");
  check_probability(per_bit_flip_prob, "per_bit_flip_prob");
  if (tournament_size < 1) throw ConfigError("GA config: tournament_size must be at least 1");
  if (population_size < tournament_size) {
    throw ConfigError(fmt::format("GA config: population_size {} is smaller than tournament_size {}",
                                  population_size, tournament_size));
  }
  if (threads < 1) throw ConfigError("GA config: threads must be at least 1");
}

nlohmann::json config_to_json(const GAConfig& cfg) {
  return {{"population_size", cfg.population_size},
          {"generations", cfg.generations},
          {"crossover_prob", cfg.crossover_prob},
          {"mutation_prob", cfg.mutation_prob},
          {"per_bit_flip_prob", cfg.per_bit_flip_prob},
          {"tournament_size", cfg.tournament_size},
          {"seed", cfg.seed},
          {"variant", to_string(cfg.variant)},
          {"alpha", cfg.alpha},
          {"beta", cfg.beta}};
}

double selection_fitness(const TallyTable& table, const SelectionVector& s, Variant variant,
                         double alpha, double beta) {
  if (s.none()) return kEmptySelectionFitness;
  return evaluate(metrics(table, s), variant, alpha, beta);
}

OptimizationResult ga_optimize(const TallyTable& table, const GAConfig& cfg) {
  cfg.validate();
  const std::size_t nq = table.n_questions();
  Rng rng(cfg.seed);

  // Initial individuals are redrawn until non-empty so the hall of fame
  // always holds a valid selection.
  std::vector<Individual> pop(cfg.population_size);
  for (auto& ind : pop) {
    do {
      ind.genes = SelectionVector(nq);
      for (std::size_t i = 0; i < nq; ++i) ind.genes.set(i, rng.bernoulli(0.5));
    } while (ind.genes.none());
  }

  OptimizationResult result;
  result.evaluations_count += evaluate_pending(pop, table, cfg);

  auto update_best = [&](const std::vector<Individual>& generation) {
    for (const auto& ind : generation) {
      if (result.best_selection.size() == 0 || ind.fitness > result.best_fitness) {
        result.best_selection = ind.genes;
        result.best_fitness = ind.fitness;
      }
    }
    result.per_generation_best.push_back(result.best_fitness);
  };
  update_best(pop);

  std::vector<Individual> offspring(cfg.population_size);
  for (std::size_t gen = 0; gen < cfg.generations; ++gen) {
    for (auto& child : offspring) {
      child = pop[tournament(pop, cfg.tournament_size, rng)];
    }
    for (std::size_t i = 1; i < offspring.size(); i += 2) {
      if (rng.uniform01() < cfg.crossover_prob) {
        two_point_crossover(offspring[i - 1].genes, offspring[i].genes, rng);
        offspring[i - 1].evaluated = false;
        offspring[i].evaluated = false;
      }
    }
    for (auto& child : offspring) {
      if (rng.uniform01() < cfg.mutation_prob) {
        flip_bits(child.genes, cfg.per_bit_flip_prob, rng);
        child.evaluated = false;
      }
    }
    result.evaluations_count += evaluate_pending(offspring, table, cfg);
    std::swap(pop, offspring);
    update_best(pop);
  }
  return result;
}

OptimizationResult brute_force(const TallyTable& table, Variant variant, double alpha,
                               double beta, std::size_t max_nq) {
  const std::size_t nq = table.n_questions();
  if (nq > max_nq) {
    throw ConfigError(fmt::format(
        "brute force refused: N_q = {} exceeds the limit of {} (raise it with --max-nq; run time "
        "doubles with every extra question)",
        nq, max_nq));
  }
  if (nq >= 64) throw ConfigError("brute force: N_q must be below 64");

  const std::size_t n_images = table.n_images();
  std::vector<Counts> sums(n_images);
  SelectionVector current(nq);
  OptimizationResult result;

  const std::uint64_t combos = std::uint64_t{1} << nq;
  for (std::uint64_t k = 1; k < combos; ++k) {
    const auto bit = static_cast<std::size_t>(std::countr_zero(k));
    const bool adding = !current.test(bit);
    current.flip(bit);
    for (std::size_t i = 0; i < n_images; ++i) {
      if (adding) {
        sums[i] += table.cell(i, bit);
      } else {
        sums[i] -= table.cell(i, bit);
      }
    }
    const double f = evaluate(metrics_from_sums(sums, current.count(), nq), variant, alpha, beta);
    ++result.evaluations_count;
    if (result.best_selection.size() == 0 || f > result.best_fitness ||
        (f == result.best_fitness && precedes(current, result.best_selection))) {
      result.best_selection = current;
      result.best_fitness = f;
    }
  }
  return result;
}

std::string_view selection_label(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::does: return "s_does";
    case BaselineKind::is: return "s_is";
    case BaselineKind::all: return "s_all";
  }
  return "s_all";
}

SelectionVector baseline_selection(std::span<const Question> questions, BaselineKind kind) {
  if (questions.empty()) throw SpecError("baseline: empty question grid");
  SelectionVector s(questions.size());
  for (const auto& q : questions) {
    const bool match = kind == BaselineKind::all ||
                       (kind == BaselineKind::does && q.style == Style::does) ||
                       (kind == BaselineKind::is && q.style == Style::is);
    s.set(q.id, match);
  }
  if (s.none()) {
    throw SpecError(fmt::format("baseline {}: the grid has no question of that style",
                                selection_label(kind)));
  }
  return s;
}

nlohmann::json result_to_json(const ResultDocument& doc) {
  const auto& r = doc.result;
  return {{"method", doc.method},
          {"variant", to_string(doc.variant)},
          {"question_hash", doc.question_hash},
          {"n_questions", r.best_selection.size()},
          {"n_train_images", doc.n_train_images},
          {"selected_question_ids", r.best_selection.indices()},
          {"bitstring", r.best_selection.bitstring()},
          {"fitness", r.best_fitness},
          {"evaluations", r.evaluations_count},
          {"config", doc.config},
          {"per_generation_best", r.per_generation_best}};
}

ResultDocument result_from_json(const nlohmann::json& j) {
  ResultDocument doc;
  try {
    doc.method = j.at("method").get<std::string>();
    doc.variant = parse_variant(j.at("variant").get<std::string>());
    doc.question_hash = j.at("question_hash").get<std::string>();
    doc.n_train_images = j.at("n_train_images").get<std::size_t>();
    doc.result.best_selection =
        SelectionVector::from_bitstring(j.at("bitstring").get<std::string>());
    if (doc.result.best_selection.size() != j.at("n_questions").get<std::size_t>()) {
      throw ConfigError("result file: bitstring length disagrees with n_questions");
    }
    if (doc.result.best_selection.indices() !=
        j.at("selected_question_ids").get<std::vector<std::size_t>>()) {
      throw ConfigError("result file: selected_question_ids disagree with bitstring");
    }
    doc.result.best_fitness = j.at("fitness").get<double>();
    doc.result.evaluations_count = j.at("evaluations").get<std::size_t>();
    doc.result.per_generation_best = j.at("per_generation_best").get<std::vector<double>>();
    doc.config = j.at("config");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("result file: {}", e.what()));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("result file: {}", e.what()));
  }
  return doc;
}

void save_result(const ResultDocument& doc, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write result file {}", path.string()));
  out << result_to_json(doc).dump(2) << '\n';
}

ResultDocument load_result(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open result file {}", path.string()));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(fmt::format("cannot parse result file {}: {}", path.string(), e.what()));
  }
  return result_from_json(j);
}

}  // namespace qsel
