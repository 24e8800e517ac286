#include "qsel/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "qsel/acquisition.hpp"
#include "qsel/error.hpp"
#include "qsel/fitness.hpp"
#include "qsel/optimizer.hpp"
#include "qsel/question_grid.hpp"
#include "qsel/report.hpp"

namespace qsel {

namespace {

// Keys accepted in a --config JSON file. Command-line flags take precedence.
const std::set<std::string> kConfigKeys = {
    "seed",        "population_size", "generations",       "crossover_prob",
    "mutation_prob", "per_bit_flip_prob", "tournament_size", "alpha",
    "beta",        "threads",         "n_aug",             "grid_cap",
    "max_in_flight", "max_nq"};

class Settings {
 public:
  void load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open config file {}", path));
    try {
      in >> doc_;
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError(fmt::format("cannot parse config file {}: {}", path, e.what()));
    }
    if (!doc_.is_object()) throw ConfigError("config file must hold a JSON object");
    for (const auto& [key, value] : doc_.items()) {
      if (!kConfigKeys.contains(key)) throw ConfigError(fmt::format("unknown config key \"{}\"", key));
    }
  }

  template <typename T>
  T get(const std::optional<T>& flag, const char* key, T fallback) const {
    if (flag) return *flag;
    if (doc_.contains(key)) {
      try {
        return doc_.at(key).get<T>();
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(fmt::format("config key \"{}\": {}", key, e.what()));
      }
    }
    return fallback;
  }

  template <typename T>
  std::optional<T> find(const std::optional<T>& flag, const char* key) const {
    if (flag) return flag;
    if (doc_.contains(key)) return get<T>(std::nullopt, key, T{});
    return std::nullopt;
  }

 private:
  nlohmann::json doc_ = nlohmann::json::object();
};

struct GlobalFlags {
  std::optional<std::uint64_t> seed;
  std::string config_path;
};

std::uint64_t require_seed(const Settings& settings, const GlobalFlags& g, std::string_view command) {
  const auto seed = settings.find(g.seed, "seed");
  if (!seed) {
    throw ConfigError(fmt::format("{} is stochastic: pass an explicit --seed (or \"seed\" in "
                                  "--config) so the run can be reproduced",
                                  command));
  }
  return *seed;
}

std::filesystem::path variant_output(const std::filesystem::path& out, Variant v) {
  auto stem = out.stem().string();
  return out.parent_path() / fmt::format("{}.{}.json", stem, to_string(v));
}

std::vector<Variant> parse_variants(const std::string& text) {
  if (text == "all") return {kAllVariants.begin(), kAllVariants.end()};
  return {parse_variant(text)};
}

void print_selection(std::ostream& out, const AnswerMatrix& matrix, Variant v,
                     const OptimizationResult& r) {
  out << fmt::format("{} ({}): fitness {:.6f}, {} / {} questions, bitstring {}\n",
                     selection_label(v), to_string(v), r.best_fitness, r.best_selection.count(),
                     r.best_selection.size(), r.best_selection.bitstring());
  for (auto id : r.best_selection.indices()) {
    out << fmt::format("  [{}] {}\n", id, matrix.questions()[id].text);
  }
}

void warn_dominance(std::ostream& err, std::size_t n_images, double alpha, double beta) {
  if (!image_count_dominates(n_images, alpha, beta)) {
    err << fmt::format("warning: with {} images, alpha = {} and beta = {} the recognized-image "
                       "count no longer strictly dominates the other fitness terms\n",
                       n_images, alpha, beta);
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Question-combination search for VQA-based binary state recognition", "qsel"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags global;
  app.add_option("--seed", global.seed, "Seed for stochastic commands (required by them)");
  app.add_option("--config", global.config_path, "JSON file with default settings");

  Settings settings;
  std::function<void()> action;

  // gen-questions
  auto* gen = app.add_subcommand("gen-questions", "Expand a question spec into the question grid");
  std::string spec_path;
  std::string grid_out;
  std::optional<std::size_t> cap;
  gen->add_option("--spec", spec_path, "Question spec JSON")->required();
  gen->add_option("--out", grid_out, "Output grid JSON")->required();
  gen->add_option("--cap", cap, "Maximum grid size (default 64)");
  gen->callback([&] {
    action = [&] {
      const auto spec = load_spec(spec_path);
      const auto grid = expand_grid(spec, settings.get(cap, "grid_cap", kDefaultGridCap));
      save_grid(grid, grid_out);
      out << fmt::format("wrote {} questions to {}\n", grid.size(), grid_out);
    };
  });

  // synth-profile
  auto* sp = app.add_subcommand("synth-profile", "Write a synthetic answer profile (and manifest)");
  std::string sp_grid;
  std::string sp_out;
  std::optional<double> sp_pc;
  std::optional<double> sp_pi;
  std::string sp_manifest_out;
  std::size_t sp_images = 20;
  std::string sp_state = "state";
  sp->add_option("--grid", sp_grid, "Question grid JSON")->required();
  sp->add_option("--out", sp_out, "Output profile JSON")->required();
  sp->add_option("--p-correct", sp_pc, "Same p_correct for every question");
  sp->add_option("--p-invalid", sp_pi, "Same p_invalid for every question");
  sp->add_option("--manifest-out", sp_manifest_out, "Also write a placeholder dataset manifest");
  sp->add_option("--images", sp_images, "Images in the placeholder manifest (half labelled true)")
      ->check(CLI::PositiveNumber);
  sp->add_option("--state-name", sp_state, "state_name of the placeholder manifest");
  sp->callback([&] {
    action = [&] {
      const auto seed = require_seed(settings, global, "synth-profile");
      const auto grid = load_grid(sp_grid);
      if (sp_pc.has_value() != sp_pi.has_value()) {
        throw ConfigError("--p-correct and --p-invalid must be given together");
      }
      const auto profile = sp_pc ? uniform_profile(grid.size(), *sp_pc, *sp_pi, seed)
                                 : random_profile(grid.size(), seed);
      save_profile(profile, sp_out);
      out << fmt::format("wrote profile for {} questions to {}\n", grid.size(), sp_out);
      if (!sp_manifest_out.empty()) {
        DatasetManifest manifest{sp_state, {}};
        for (std::size_t i = 0; i < sp_images; ++i) {
          const auto id = fmt::format("img{:03}", i);
          manifest.entries.push_back({id, id + ".png", i < (sp_images + 1) / 2});
        }
        save_manifest(manifest, sp_manifest_out);
        out << fmt::format("wrote manifest with {} images to {}\n", sp_images, sp_manifest_out);
      }
    };
  });

  // collect
  auto* col = app.add_subcommand("collect", "Query an answer oracle and write an answer matrix");
  std::string col_manifest;
  std::string col_grid;
  std::string col_oracle;
  std::string col_replay;
  std::string col_profile;
  std::optional<std::string> col_endpoint;
  std::optional<std::size_t> col_n_aug;
  std::optional<std::size_t> col_in_flight;
  std::string col_image_root;
  std::string col_out;
  col->add_option("--manifest", col_manifest, "Dataset manifest JSON")->required();
  col->add_option("--grid", col_grid, "Question grid JSON")->required();
  col->add_option("--oracle", col_oracle, "Answer source")
      ->required()
      ->check(CLI::IsMember({"replay", "synth", "http"}));
  col->add_option("--replay", col_replay, "JSON-lines answer recording (--oracle replay)");
  col->add_option("--profile", col_profile, "Synthetic profile JSON (--oracle synth)");
  col->add_option("--endpoint", col_endpoint,
                  fmt::format("VQA endpoint URL (--oracle http; default ${})", kEndpointEnvVar));
  col->add_option("--n-aug", col_n_aug, "Augmented copies per image (default 6)");
  col->add_option("--max-in-flight", col_in_flight, "Concurrent oracle requests (default 4)");
  col->add_option("--image-root", col_image_root,
                  "Directory image paths are relative to (default: the manifest's directory)");
  col->add_option("--out", col_out, "Output answer matrix (JSON lines)")->required();
  col->callback([&] {
    action = [&] {
      const auto manifest = load_manifest(col_manifest);
      const auto grid = load_grid(col_grid);
      const auto n_aug = settings.get(col_n_aug, "n_aug", kDefaultAugmentations);
      if (!manifest.has_both_classes()) {
        err << "warning: manifest labels contain only one class\n";
      }
      std::optional<AnswerMatrix> matrix;
      if (col_oracle == "synth") {
        if (col_profile.empty()) throw ConfigError("--oracle synth requires --profile");
        auto profile = load_profile(col_profile);
        profile.seed = require_seed(settings, global, "collect --oracle synth");
        matrix.emplace(synth_matrix(manifest, grid, profile, n_aug));
      } else {
        CollectOptions options;
        options.n_aug = n_aug;
        options.max_in_flight = settings.get(col_in_flight, "max_in_flight", std::size_t{4});
        options.image_root = col_image_root.empty()
                                 ? std::filesystem::path(col_manifest).parent_path()
                                 : std::filesystem::path(col_image_root);
        std::unique_ptr<AnswerOracle> oracle;
        if (col_oracle == "replay") {
          if (col_replay.empty()) throw ConfigError("--oracle replay requires --replay");
          oracle = std::make_unique<ReplayOracle>(col_replay);
          options.seed = settings.get<std::uint64_t>(global.seed, "seed", 0);
        } else {
          oracle = std::make_unique<HttpOracle>(resolve_endpoint(col_endpoint));
          options.seed = require_seed(settings, global, "collect --oracle http");
        }
        matrix.emplace(collect_answers(manifest, grid, *oracle, options));
      }
      save_matrix(*matrix, col_out);
      out << fmt::format("wrote {} records ({} images x {} augmentations x {} questions) to {}\n",
                         matrix->records().size(), matrix->n_images(), matrix->n_aug(),
                         matrix->n_questions(), col_out);
    };
  });

  // optimize
  auto* opt = app.add_subcommand("optimize", "Search question combinations with the GA");
  std::string opt_matrix;
  std::string opt_variant;
  std::string opt_out;
  std::optional<std::size_t> opt_pop;
  std::optional<std::size_t> opt_gens;
  std::optional<double> opt_cx;
  std::optional<double> opt_mut;
  std::optional<double> opt_flip;
  std::optional<std::size_t> opt_tour;
  std::optional<double> opt_alpha;
  std::optional<double> opt_beta;
  std::optional<std::size_t> opt_threads;
  opt->add_option("--matrix", opt_matrix, "Training answer matrix")->required();
  opt->add_option("--variant", opt_variant, "e-plus | e-prime-plus | e-minus | e-prime-minus | all")
      ->required();
  opt->add_option("--out", opt_out,
                  "Result JSON (with --variant all: <stem>.<variant>.json per variant)")
      ->required();
  opt->add_option("--population", opt_pop, "Population size (default 1000)");
  opt->add_option("--generations", opt_gens, "Generations (default 200)");
  opt->add_option("--crossover", opt_cx, "Two-point crossover probability (default 0.5)");
  opt->add_option("--mutation", opt_mut, "Per-individual mutation probability (default 0.2)");
  opt->add_option("--bit-flip", opt_flip, "Per-bit flip probability in mutation (default 0.05)");
  opt->add_option("--tournament", opt_tour, "Tournament size (default 5)");
  opt->add_option("--alpha", opt_alpha, "Weight of R_img (default 100)");
  opt->add_option("--beta", opt_beta, "Weight of R_q (default 0.1)");
  opt->add_option("--threads", opt_threads, "Fitness evaluation threads (default 1)");
  opt->callback([&] {
    action = [&] {
      const auto variants = parse_variants(opt_variant);
      GAConfig cfg;
      cfg.seed = require_seed(settings, global, "optimize");
      cfg.population_size = settings.get(opt_pop, "population_size", cfg.population_size);
      cfg.generations = settings.get(opt_gens, "generations", cfg.generations);
      cfg.crossover_prob = settings.get(opt_cx, "crossover_prob", cfg.crossover_prob);
      cfg.mutation_prob = settings.get(opt_mut, "mutation_prob", cfg.mutation_prob);
      cfg.per_bit_flip_prob = settings.get(opt_flip, "per_bit_flip_prob", cfg.per_bit_flip_prob);
      cfg.tournament_size = settings.get(opt_tour, "tournament_size", cfg.tournament_size);
      cfg.alpha = settings.get(opt_alpha, "alpha", cfg.alpha);
      cfg.beta = settings.get(opt_beta, "beta", cfg.beta);
      cfg.threads = settings.get(opt_threads, "threads", cfg.threads);
      cfg.validate();

      const auto matrix = load_matrix(opt_matrix);
      const auto table = tally(matrix);
      warn_dominance(err, table.n_images(), cfg.alpha, cfg.beta);
      for (auto v : variants) {
        cfg.variant = v;
        const auto result = ga_optimize(table, cfg);
        const auto path = variants.size() == 1 ? std::filesystem::path(opt_out)
                                               : variant_output(opt_out, v);
        save_result({"ga", v, result, config_to_json(cfg), matrix.question_hash(), table.n_images()},
                    path);
        print_selection(out, matrix, v, result);
        out << fmt::format("  -> {}\n", path.string());
      }
    };
  });

  // brute-force
  auto* bf = app.add_subcommand("brute-force", "Exhaustively search all non-empty combinations");
  std::string bf_matrix;
  std::string bf_variant;
  std::string bf_out;
  std::optional<std::size_t> bf_max;
  std::optional<double> bf_alpha;
  std::optional<double> bf_beta;
  bf->add_option("--matrix", bf_matrix, "Answer matrix")->required();
  bf->add_option("--variant", bf_variant, "e-plus | e-prime-plus | e-minus | e-prime-minus | all")
      ->required();
  bf->add_option("--max-nq", bf_max,
                 "Largest grid to enumerate (default 20; cost doubles per question)");
  bf->add_option("--alpha", bf_alpha, "Weight of R_img (default 100)");
  bf->add_option("--beta", bf_beta, "Weight of R_q (default 0.1)");
  bf->add_option("--out", bf_out, "Optional result JSON");
  bf->callback([&] {
    action = [&] {
      const auto variants = parse_variants(bf_variant);
      const auto alpha = settings.get(bf_alpha, "alpha", kDefaultAlpha);
      const auto beta = settings.get(bf_beta, "beta", kDefaultBeta);
      const auto max_nq = settings.get(bf_max, "max_nq", kDefaultBruteForceLimit);
      const auto matrix = load_matrix(bf_matrix);
      const auto table = tally(matrix);
      warn_dominance(err, table.n_images(), alpha, beta);
      for (auto v : variants) {
        const auto result = brute_force(table, v, alpha, beta, max_nq);
        print_selection(out, matrix, v, result);
        if (!bf_out.empty()) {
          const auto path = variants.size() == 1 ? std::filesystem::path(bf_out)
                                                 : variant_output(bf_out, v);
          const nlohmann::json config = {{"method", "brute_force"},
                                         {"variant", to_string(v)},
                                         {"alpha", alpha},
                                         {"beta", beta},
                                         {"max_nq", max_nq}};
          save_result({"brute_force", v, result, config, matrix.question_hash(), table.n_images()},
                      path);
          out << fmt::format("  -> {}\n", path.string());
        }
      }
    };
  });

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Report selections on a held-out answer matrix");
  std::string ev_matrix;
  std::vector<std::string> ev_results;
  bool ev_baselines = false;
  std::string ev_json;
  ev->add_option("--matrix", ev_matrix, "Test answer matrix")->required();
  ev->add_option("--result", ev_results, "Optimization result JSON (repeatable)");
  ev->add_flag("--baselines", ev_baselines, "Append s_does, s_is and s_all rows");
  ev->add_option("--json-out", ev_json, "Also write the rows as JSON");
  ev->callback([&] {
    action = [&] {
      const auto matrix = load_matrix(ev_matrix);
      std::vector<ResultDocument> results;
      for (const auto& path : ev_results) results.push_back(load_result(path));
      if (results.empty() && !ev_baselines) {
        throw ConfigError("nothing to evaluate: pass --result and/or --baselines");
      }
      const auto report = evaluate_results(matrix, results, ev_baselines);
      for (const auto& w : report.warnings) err << "warning: " << w << '\n';
      out << format_table(report.rows);
      if (!ev_json.empty()) {
        std::ofstream f(ev_json);
        if (!f) throw ConfigError(fmt::format("cannot write {}", ev_json));
        const nlohmann::json doc = {{"question_hash", matrix.question_hash()},
                                    {"n_images", matrix.n_images()},
                                    {"rows", rows_to_json(report.rows)}};
        f << doc.dump(2) << '\n';
      }
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (!global.config_path.empty()) settings.load(global.config_path);
    if (action) action();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace qsel
