// Acceptance suite: one [PASS]/[FAIL] line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include "qsel/acquisition.hpp"
#include "qsel/cli.hpp"
#include "qsel/fitness.hpp"
#include "qsel/image.hpp"
#include "qsel/mock_vqa_server.hpp"
#include "qsel/optimizer.hpp"
#include "qsel/question_grid.hpp"
#include "test_support.hpp"

using namespace qsel;

namespace {

constexpr double kFormulaTolerance = 1e-12;

struct Verdict {
  bool pass;
  std::string detail;
};

Verdict pass(std::string detail) { return {true, std::move(detail)}; }
Verdict fail(std::string detail) { return {false, std::move(detail)}; }

int cli(const std::vector<std::string>& args, std::string* out_text = nullptr) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  if (out_text) *out_text = out.str();
  if (code != 0) throw std::runtime_error(fmt::format("qsel {} failed: {}", args.front(), err.str()));
  return code;
}

std::string p(const std::filesystem::path& path) { return path.string(); }

// 1 -------------------------------------------------------------------------
Verdict formula_exactness() {
  Metrics m;
  m.r_img = 1.0;
  m.r_ave = 1.0;
  m.r_q = 0.5;
  const double ep = evaluate(m, Variant::e_plus, 100.0, 0.1);
  const double em = evaluate(m, Variant::e_minus, 100.0, 0.1);
  const auto t = test::make_table(1, 1, 6, [](auto, auto) { return Counts{3, 1, 2}; });
  const auto r = image_rates(t, SelectionVector::all(1), t.image_id(0));
  const bool ok = std::abs(ep - 101.05) <= kFormulaTolerance &&
                  std::abs(em - 100.95) <= kFormulaTolerance && r.correct == 0.75 &&
                  r.correct_with_invalid == 0.5;
  return {ok, fmt::format("E+ = {:.15g}, E- = {:.15g}, image_rates = ({}, {})", ep, em, r.correct,
                          r.correct_with_invalid)};
}

// 2 -------------------------------------------------------------------------
Verdict strict_threshold() {
  // image 0 sits exactly at 0.5 (with and without invalids), image 1 above it
  const auto t = test::make_table(2, 2, 4, [](std::size_t i, std::size_t q) {
    if (i == 0) return q == 0 ? Counts{3, 1, 0} : Counts{1, 3, 0};
    return Counts{3, 1, 0};
  });
  const auto m = metrics(t, SelectionVector::all(2));
  const bool ok = m.image_correct[0] == 0.5 && m.n_img_correct == 1 &&
                  m.image_correct_with_invalid[0] == 0.5 && m.n_img_correct_prime == 1;
  return {ok, fmt::format("R^0 = {}, N_img_correct = {} of 2", m.image_correct[0], m.n_img_correct)};
}

// 3 -------------------------------------------------------------------------
Verdict lexicographic_dominance() {
  std::mt19937_64 gen(20240603);
  std::size_t violations = 0;
  std::size_t comparisons = 0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t nq = 1 + static_cast<std::size_t>(gen() % 16);
    const auto t = test::random_table(gen, 20, nq);
    const auto s1 = test::random_selection(gen, nq);
    const auto s2 = test::random_selection(gen, nq);
    const auto m1 = metrics(t, s1);
    const auto m2 = metrics(t, s2);
    for (auto v : kAllVariants) {
      const auto n1 = uses_invalid_as_wrong(v) ? m1.n_img_correct_prime : m1.n_img_correct;
      const auto n2 = uses_invalid_as_wrong(v) ? m2.n_img_correct_prime : m2.n_img_correct;
      for (const auto& [a, b, ma, mb] : {std::tuple{n1, n2, &m1, &m2}, std::tuple{n2, n1, &m2, &m1}}) {
        if (a > b) {
          ++comparisons;
          if (!(evaluate(*ma, v) > evaluate(*mb, v))) ++violations;
        }
      }
    }
  }
  return {violations == 0 && comparisons > 0,
          fmt::format("{} violations over {} ordered comparisons", violations, comparisons)};
}

// 4 -------------------------------------------------------------------------
Verdict oracle_equivalence() {
  std::mt19937_64 gen(404);
  std::size_t mismatches = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const std::size_t n_data = 1 + seed % 20;
    const std::size_t nq = 1 + (seed * 7) % 16;
    const auto m = synth_matrix(test::make_manifest(n_data), test::make_questions(nq),
                                random_profile(nq, seed), 6);
    const auto table = tally(m);
    for (int k = 0; k < 3; ++k) {
      const auto s = k == 0 ? SelectionVector::all(nq) : test::random_selection(gen, nq);
      const auto got = metrics(table, s);
      const auto want = test::recount(m, s);
      const bool same =
          got.n_images == want.n_images && got.n_img_correct == want.n_img_correct &&
          got.n_img_correct_prime == want.n_img_correct_prime && got.r_ave == want.r_ave &&
          got.r_ave_prime == want.r_ave_prime && got.r_invalid == want.r_invalid &&
          got.image_correct == want.per_image &&
          got.r_img == static_cast<double>(want.n_img_correct) / static_cast<double>(n_data) &&
          got.r_img_prime ==
              static_cast<double>(want.n_img_correct_prime) / static_cast<double>(n_data);
      if (!same) ++mismatches;
    }
  }
  return {mismatches == 0, fmt::format("{} mismatching selections over 100 matrices", mismatches)};
}

// 5 -------------------------------------------------------------------------
Verdict ga_vs_exhaustive() {
  const auto start = std::chrono::steady_clock::now();
  std::size_t hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = synth_matrix(test::make_manifest(20), test::make_questions(12),
                                random_profile(12, 1000 + seed), 6);
    const auto table = tally(m);
    GAConfig cfg;
    cfg.population_size = 200;
    cfg.generations = 50;
    cfg.seed = seed;
    const auto ga = ga_optimize(table, cfg);
    const auto bf = brute_force(table, cfg.variant, cfg.alpha, cfg.beta);
    if (ga.best_fitness == bf.best_fitness) ++hits;
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {hits >= 19 && secs < 60.0, fmt::format("{}/20 optimal, {:.2f} s", hits, secs)};
}

// 6 -------------------------------------------------------------------------
Verdict default_config() {
  const GAConfig cfg;
  const CollectOptions collect;
  const bool ok = cfg.population_size == 1000 && cfg.generations == 200 &&
                  cfg.crossover_prob == 0.5 && cfg.mutation_prob == 0.2 &&
                  cfg.tournament_size == 5 && cfg.alpha == 100.0 && cfg.beta == 0.1 &&
                  collect.n_aug == 6 && kDefaultAugmentations == 6;
  return {ok, config_to_json(cfg).dump() + fmt::format(", n_aug={}", collect.n_aug)};
}

// 7 -------------------------------------------------------------------------
Verdict grid_sizes() {
  const auto door = expand_grid(load_spec(test::data_path("specs/door.json"))).size();
  const auto elevator = expand_grid(load_spec(test::data_path("specs/elevator.json"))).size();
  const auto cabinet = expand_grid(load_spec(test::data_path("specs/cabinet.json"))).size();
  return {door == 16 && elevator == 32 && cabinet == 64,
          fmt::format("door {}, elevator {}, cabinet {}", door, elevator, cabinet)};
}

// 8 -------------------------------------------------------------------------
Verdict determinism() {
  test::TempDir root;
  const auto spec = p(test::data_path("specs/door.json"));
  auto pipeline = [&](const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    cli({"gen-questions", "--spec", spec, "--out", p(dir / "grid.json")});
    cli({"--seed", "17", "synth-profile", "--grid", p(dir / "grid.json"), "--out",
         p(dir / "profile.json"), "--manifest-out", p(dir / "manifest.json")});
    cli({"--seed", "17", "collect", "--manifest", p(dir / "manifest.json"), "--grid",
         p(dir / "grid.json"), "--oracle", "synth", "--profile", p(dir / "profile.json"), "--out",
         p(dir / "matrix.jsonl")});
    cli({"--seed", "17", "optimize", "--matrix", p(dir / "matrix.jsonl"), "--variant", "e-plus",
         "--out", p(dir / "result.json"), "--population", "100", "--generations", "20"});
    cli({"evaluate", "--matrix", p(dir / "matrix.jsonl"), "--result", p(dir / "result.json"),
         "--baselines", "--json-out", p(dir / "report.json")});
  };
  pipeline(root / "a");
  pipeline(root / "b");
  std::vector<std::string> differing;
  for (const char* name : {"matrix.jsonl", "result.json", "report.json"}) {
    const auto a = test::read_file(root / "a" / name);
    if (a.empty() || a != test::read_file(root / "b" / name)) differing.emplace_back(name);
  }
  if (!differing.empty()) return fail(fmt::format("differing files: {}", fmt::join(differing, ", ")));
  return pass("matrix, result and report identical across two runs");
}

// 9 -------------------------------------------------------------------------
Verdict end_to_end() {
  const auto start = std::chrono::steady_clock::now();
  test::TempDir dir;
  constexpr std::size_t kImages = 20;
  constexpr std::size_t kAug = 6;
  constexpr std::uint64_t kSeed = 99;

  // 20 distinct images: a bright marker pixel at a different spot in each
  const auto manifest = test::make_manifest(kImages, "open");
  save_manifest(manifest, dir / "manifest.json");
  for (std::size_t i = 0; i < kImages; ++i) {
    Image img = make_image(8, 8, {0.45F, 0.5F, 0.55F});
    for (std::size_t c = 0; c < 3; ++c) img.at(i / 8, i % 8, c) = 1.0F;
    save_png(img, dir / manifest.entries[i].path);
  }
  cli({"gen-questions", "--spec", p(test::data_path("specs/door.json")), "--out",
       p(dir / "grid.json")});
  const auto grid = load_grid(dir / "grid.json");

  // seeded recording with a mix of clean, decorated and non-yes/no replies
  const std::vector<std::string> phrases = {"yes", "no",     "Yes.", " NO!",   "yes,",
                                            "No",  "maybe", "a door", "",      "I am not sure"};
  std::mt19937_64 gen(kSeed);
  std::map<std::tuple<std::string, std::size_t, std::size_t>, std::string> answers;
  {
    std::ofstream rec(dir / "recording.jsonl");
    for (const auto& e : manifest.entries) {
      for (std::size_t a = 0; a < kAug; ++a) {
        for (const auto& q : grid) {
          // bias towards the right answer so selections differ in quality
          const bool truth = q.polarity == Polarity::positive ? e.label : !e.label;
          const auto roll = gen() % 100;
          std::string answer;
          if (roll < 15) {
            answer = phrases[6 + gen() % 4];
          } else if (roll < 15 + 30 + (q.id % 4) * 10) {
            answer = phrases[(truth ? 0 : 1) + 2 * (gen() % 3)];
          } else {
            answer = phrases[(truth ? 1 : 0) + 2 * (gen() % 3)];
          }
          answers[{e.image_id, a, q.id}] = answer;
          rec << nlohmann::json{{"image_id", e.image_id},
                                {"aug_index", a},
                                {"question_id", q.id},
                                {"answer", answer}}
                     .dump()
              << '\n';
        }
      }
    }
  }

  MockVqaServer server(replay_responder(manifest, dir.path(), grid,
                                        std::make_shared<ReplayOracle>(dir / "recording.jsonl"),
                                        kAug, kSeed));
  server.start();
  cli({"--seed", std::to_string(kSeed), "collect", "--manifest", p(dir / "manifest.json"), "--grid",
       p(dir / "grid.json"), "--oracle", "http", "--endpoint", server.endpoint(), "--out",
       p(dir / "matrix.jsonl")});
  const auto requests = server.request_count();
  server.stop();
  cli({"--seed", "1", "optimize", "--matrix", p(dir / "matrix.jsonl"), "--variant", "all", "--out",
       p(dir / "result.json"), "--population", "100", "--generations", "20"});
  std::vector<std::string> eval = {"evaluate", "--matrix", p(dir / "matrix.jsonl")};
  for (auto v : kAllVariants) {
    eval.push_back("--result");
    eval.push_back(p(dir / fmt::format("result.{}.json", to_string(v))));
  }
  eval.insert(eval.end(), {"--baselines", "--json-out", p(dir / "report.json")});
  std::string table_text;
  cli(eval, &table_text);

  // expected rows straight from the recording
  std::vector<std::pair<std::string, bool>> images;
  for (const auto& e : manifest.entries) images.emplace_back(e.image_id, e.label);
  std::vector<bool> positive;
  for (const auto& q : grid) positive.push_back(q.polarity == Polarity::positive);
  std::vector<std::pair<std::string, SelectionVector>> expected;
  for (auto v : kAllVariants) {
    const auto doc = nlohmann::json::parse(
        test::read_file(dir / fmt::format("result.{}.json", to_string(v))));
    expected.emplace_back(std::string(selection_label(v)),
                          SelectionVector::from_bitstring(doc.at("bitstring").get<std::string>()));
  }
  for (const auto& [name, style] : {std::pair{"s_does", Style::does}, std::pair{"s_is", Style::is}}) {
    SelectionVector s(grid.size());
    for (const auto& q : grid) s.set(q.id, q.style == style);
    expected.emplace_back(name, s);
  }
  expected.emplace_back("s_all", SelectionVector::all(grid.size()));

  const auto report = nlohmann::json::parse(test::read_file(dir / "report.json"));
  const auto& rows = report.at("rows");
  if (rows.size() != expected.size()) {
    return fail(fmt::format("{} rows, expected {}", rows.size(), expected.size()));
  }
  std::size_t bad_cells = 0;
  for (std::size_t k = 0; k < expected.size(); ++k) {
    const auto& [name, s] = expected[k];
    const auto want = test::recount(images, positive, answers, s);
    const auto& row = rows[k];
    const auto cells = fmt::format("{} / {} | {:.3f} | {:.3f} | {} / {}", want.n_img_correct,
                                   want.n_images, want.r_ave, want.r_invalid, s.count(), grid.size());
    bad_cells += row.at("selection") != name;
    bad_cells += row.at("n_img_correct") != want.n_img_correct;
    bad_cells += row.at("n_images") != want.n_images;
    bad_cells += row.at("r_ave_correct").get<double>() != want.r_ave;
    bad_cells += row.at("r_invalid").get<double>() != want.r_invalid;
    bad_cells += row.at("n_selected") != s.count();
    bad_cells += row.at("n_questions") != grid.size();
    bad_cells += row.at("cells") != cells;
    bad_cells += table_text.find(cells) == std::string::npos;
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool ok = bad_cells == 0 && requests == kImages * kAug * grid.size() && secs < 30.0;
  return {ok, fmt::format("{} rows, {} mismatching cells, {} HTTP requests, {:.2f} s",
                          rows.size(), bad_cells, requests, secs)};
}

// 10 ------------------------------------------------------------------------
Verdict plus_minus_identity() {
  std::mt19937_64 gen(10);
  std::uniform_real_distribution<double> weight(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t nq = 1 + static_cast<std::size_t>(gen() % 16);
    const auto t = test::random_table(gen, 20, nq);
    const auto m = metrics(t, test::random_selection(gen, nq));
    const double alpha = k % 2 == 0 ? kDefaultAlpha : 200.0 * weight(gen);
    const double beta = k % 2 == 0 ? kDefaultBeta : weight(gen);
    const double diff = evaluate(m, Variant::e_plus, alpha, beta) -
                        evaluate(m, Variant::e_minus, alpha, beta);
    worst = std::max(worst, std::abs(diff - 2.0 * beta * m.r_q));
  }
  return {worst <= kFormulaTolerance, fmt::format("max deviation {:.3g}", worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"AC1 formula exactness", formula_exactness},
      {"AC2 strict 0.5 threshold", strict_threshold},
      {"AC3 lexicographic dominance", lexicographic_dominance},
      {"AC4 tally/recount equivalence", oracle_equivalence},
      {"AC5 GA reaches exhaustive optimum", ga_vs_exhaustive},
      {"AC6 default configuration", default_config},
      {"AC7 grid cardinalities", grid_sizes},
      {"AC8 pipeline determinism", determinism},
      {"AC9 end-to-end over mock HTTP", end_to_end},
      {"AC10 E+ - E- = 2 beta R_q", plus_minus_identity},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Verdict o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = fail(fmt::format("exception: {}", e.what()));
    }
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << name << ": " << o.detail << std::endl;
    failures += o.pass ? 0 : 1;
  }
  std::cout << fmt::format("{} of {} criteria passed", criteria.size() - failures, criteria.size())
            << std::endl;
  return failures == 0 ? 0 : 1;
}
