#include "qsel/acquisition.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "qsel/image.hpp"
#include "qsel/random.hpp"

namespace qsel {

namespace {

constexpr std::uint64_t kAugmentationStream = 1;
constexpr std::uint64_t kSyntheticStream = 2;

std::string describe_failures(const std::vector<FailedQuery>& failures) {
  std::string msg = fmt::format("oracle failed for {} quer{} after retries", failures.size(),
                                failures.size() == 1 ? "y" : "ies");
  const std::size_t shown = std::min<std::size_t>(failures.size(), 5);
  for (std::size_t i = 0; i < shown; ++i) {
    const auto& f = failures[i];
    msg += fmt::format("\n  ({}, aug {}, q {}): {}", f.image_id, f.aug_index, f.question_id,
                       f.message);
  }
  if (failures.size() > shown) msg += fmt::format("\n  ... and {} more", failures.size() - shown);
  return msg;
}

void check_probability(double p, std::string_view what, std::size_t id) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ConfigError(fmt::format("synthetic profile: {} for question {} is {} (outside [0, 1])",
                                  what, id, p));
  }
}

}  // namespace

CollectionError::CollectionError(std::vector<FailedQuery> failures)
    : OracleError(describe_failures(failures)), failures_(std::move(failures)) {}

std::vector<AugmentedImage> prepare_augmentations(const DatasetManifest& manifest,
                                                  const std::filesystem::path& image_root,
                                                  std::size_t n_aug, std::uint64_t seed) {
  Rng rng(derive_seed(seed, kAugmentationStream));
  std::vector<AugmentedImage> out;
  out.reserve(manifest.entries.size() * n_aug);
  for (const auto& entry : manifest.entries) {
    const Image source = load_image(image_root / entry.path);
    for (std::size_t a = 0; a < n_aug; ++a) {
      const auto png = encode_png(rgb_shift(source, rng));
      out.push_back({entry.image_id, a, base64_encode(png)});
    }
  }
  return out;
}

AnswerMatrix collect_answers(const DatasetManifest& manifest, std::span<const Question> questions,
                             AnswerOracle& oracle, const CollectOptions& options) {
  validate_manifest(manifest);
  if (questions.empty()) throw MatrixError("collect: empty question list");
  if (options.n_aug == 0) throw ConfigError("collect: n_aug must be at least 1");
  if (options.max_attempts < 1) throw ConfigError("collect: max_attempts must be at least 1");

  const std::size_t n_images = manifest.entries.size();
  const std::size_t nq = questions.size();
  const std::size_t total = n_images * options.n_aug * nq;

  // All pixels are fixed before the first query is issued.
  std::vector<AugmentedImage> augmented;
  if (oracle.needs_pixels()) {
    augmented = prepare_augmentations(manifest, options.image_root, options.n_aug, options.seed);
  }

  std::vector<std::string> answers(total);
  std::vector<FailedQuery> failures;
  std::mutex failures_mutex;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t t = next++; t < total; t = next++) {
      const std::size_t q = t % nq;
      const std::size_t pair = t / nq;  // image * n_aug + aug
      const std::size_t image = pair / options.n_aug;
      const std::size_t aug = pair % options.n_aug;
      OracleQuery query{manifest.entries[image].image_id, aug, &questions[q],
                        augmented.empty() ? std::string_view{} : augmented[pair].png_base64};
      std::string last_error;
      bool ok = false;
      for (int attempt = 0; attempt < options.max_attempts && !ok; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(options.initial_backoff * (1 << (attempt - 1)));
        try {
          answers[t] = oracle.answer(query);
          ok = true;
        } catch (const std::exception& e) {
          last_error = e.what();
        }
      }
      if (!ok) {
        std::lock_guard lock(failures_mutex);
        failures.push_back({manifest.entries[image].image_id, aug, q, last_error});
      }
    }
  };

  const std::size_t n_workers = std::clamp<std::size_t>(options.max_in_flight, 1, total);
  {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }

  if (!failures.empty()) {
    std::sort(failures.begin(), failures.end(), [&](const FailedQuery& a, const FailedQuery& b) {
      const auto ia = *manifest.index_of(a.image_id);
      const auto ib = *manifest.index_of(b.image_id);
      return std::tie(ia, a.aug_index, a.question_id) < std::tie(ib, b.aug_index, b.question_id);
    });
    throw CollectionError(std::move(failures));
  }

  std::vector<AnswerRecord> records;
  records.reserve(total);
  for (std::size_t t = 0; t < total; ++t) {
    const std::size_t q = t % nq;
    const std::size_t image = t / nq / options.n_aug;
    const auto& entry = manifest.entries[image];
    records.push_back({entry.image_id, (t / nq) % options.n_aug, q, answers[t],
                       classify_raw(answers[t], questions[q].polarity, entry.label)});
  }
  return AnswerMatrix(manifest, std::vector<Question>(questions.begin(), questions.end()),
                      options.n_aug, std::move(records));
}

void validate_profile(const SyntheticProfile& profile, std::size_t n_questions) {
  if (profile.questions.size() != n_questions) {
    throw ConfigError(fmt::format("synthetic profile covers {} questions, grid has {}",
                                  profile.questions.size(), n_questions));
  }
  for (std::size_t i = 0; i < profile.questions.size(); ++i) {
    const auto& e = profile.questions[i];
    check_probability(e.p_correct, "p_correct", i);
    check_probability(e.p_invalid, "p_invalid", i);
    if (e.p_correct + e.p_invalid > 1.0 + 1e-12) {
      throw ConfigError(
          fmt::format("synthetic profile: p_correct + p_invalid > 1 for question {}", i));
    }
  }
}

SyntheticProfile uniform_profile(std::size_t n_questions, double p_correct, double p_invalid,
                                 std::uint64_t seed) {
  SyntheticProfile profile{std::vector<SyntheticProfile::Entry>(n_questions, {p_correct, p_invalid}),
                           seed};
  validate_profile(profile, n_questions);
  return profile;
}

SyntheticProfile random_profile(std::size_t n_questions, std::uint64_t seed) {
  Rng rng(seed);
  SyntheticProfile profile;
  profile.seed = seed;
  for (std::size_t i = 0; i < n_questions; ++i) {
    const double pc = rng.uniform(0.2, 0.95);
    const double pi = std::min(rng.uniform(0.0, 0.4), 1.0 - pc);
    profile.questions.push_back({pc, pi});
  }
  return profile;
}

nlohmann::json profile_to_json(const SyntheticProfile& profile) {
  auto questions = nlohmann::json::array();
  for (std::size_t i = 0; i < profile.questions.size(); ++i) {
    questions.push_back({{"id", i},
                         {"p_correct", profile.questions[i].p_correct},
                         {"p_invalid", profile.questions[i].p_invalid}});
  }
  return {{"seed", profile.seed}, {"questions", std::move(questions)}};
}

SyntheticProfile profile_from_json(const nlohmann::json& doc) {
  SyntheticProfile profile;
  try {
    profile.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& q : doc.at("questions")) {
      if (q.at("id").get<std::size_t>() != profile.questions.size()) {
        throw ConfigError("synthetic profile: question ids must be dense and ordered");
      }
      profile.questions.push_back({q.at("p_correct").get<double>(), q.at("p_invalid").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("synthetic profile: {}", e.what()));
  }
  validate_profile(profile, profile.questions.size());
  return profile;
}

void save_profile(const SyntheticProfile& profile, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write synthetic profile {}", path.string()));
  out << profile_to_json(profile).dump(2) << '\n';
}

SyntheticProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open synthetic profile {}", path.string()));
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(fmt::format("cannot parse synthetic profile {}: {}", path.string(), e.what()));
  }
  return profile_from_json(doc);
}

std::string synthetic_answer(Outcome outcome, Polarity polarity, bool label) {
  const Answer expected = expected_answer(polarity, label);
  switch (outcome) {
    case Outcome::correct: return std::string(to_string(expected));
    case Outcome::wrong: return expected == Answer::yes ? "no" : "yes";
    case Outcome::invalid: break;
  }
  return "not sure";
}

AnswerMatrix synth_matrix(const DatasetManifest& manifest, std::span<const Question> questions,
                          const SyntheticProfile& profile, std::size_t n_aug) {
  validate_manifest(manifest);
  validate_profile(profile, questions.size());
  if (n_aug == 0) throw ConfigError("synth: n_aug must be at least 1");

  Rng rng(derive_seed(profile.seed, kSyntheticStream));
  std::vector<AnswerRecord> records;
  records.reserve(manifest.entries.size() * n_aug * questions.size());
  for (const auto& entry : manifest.entries) {
    for (std::size_t a = 0; a < n_aug; ++a) {
      for (const auto& q : questions) {
        const auto& p = profile.questions[q.id];
        const double u = rng.uniform01();
        Outcome outcome = Outcome::wrong;
        if (u < p.p_correct) {
          outcome = Outcome::correct;
        } else if (u < p.p_correct + p.p_invalid) {
          outcome = Outcome::invalid;
        }
        records.push_back({entry.image_id, a, q.id, synthetic_answer(outcome, q.polarity, entry.label),
                           outcome});
      }
    }
  }
  return AnswerMatrix(manifest, std::vector<Question>(questions.begin(), questions.end()), n_aug,
                      std::move(records));
}

}  // namespace qsel
