#include <doctest.h>

#include "qsel/error.hpp"
#include "qsel/report.hpp"
#include "test_support.hpp"

using namespace qsel;

namespace {

std::vector<Question> door_grid() {
  return expand_grid(load_spec(test::data_path("specs/door.json")));
}

ResultDocument result_for(const AnswerMatrix& m, Variant v, const std::string& bits,
                          std::string method = "ga") {
  ResultDocument doc;
  doc.method = std::move(method);
  doc.variant = v;
  doc.result.best_selection = SelectionVector::from_bitstring(bits);
  doc.question_hash = m.question_hash();
  doc.n_train_images = m.n_images();
  return doc;
}

}  // namespace

TEST_CASE("all-correct matrix gives a perfect s_all row") {
  const auto m = synth_matrix(test::make_manifest(20), door_grid(),
                              uniform_profile(16, 1.0, 0.0, 0), 6);
  const auto report = evaluate_results(m, {}, true);
  REQUIRE(report.rows.size() == 3);
  CHECK(report.rows[2].selection_name == "s_all");
  CHECK(format_cells(report.rows[2]) == "20 / 20 | 1.000 | 0.000 | 16 / 16");
  CHECK(format_cells(report.rows[0]) == "20 / 20 | 1.000 | 0.000 | 8 / 16");
  CHECK(report.warnings.empty());
}

TEST_CASE("table layout") {
  EvaluationRow row{"s_+", 17, 20, 0.81234, 0.0625, 5, 16};
  const auto table = format_table(std::vector<EvaluationRow>{row});
  CHECK(table.find("selection | N_img_correct | R_ave_correct | R_invalid | N_s_q\n") == 0);
  CHECK(table.find("s_+       | 17 / 20 | 0.812 | 0.062 | 5 / 16") != std::string::npos);
  const auto j = rows_to_json(std::vector<EvaluationRow>{row});
  CHECK(j[0]["n_img_correct"] == 17);
  CHECK(j[0]["selection"] == "s_+");
}

TEST_CASE("rows follow the given result order, then baselines") {
  const auto m = synth_matrix(test::make_manifest(10), door_grid(), random_profile(16, 4), 6);
  std::vector<ResultDocument> results{
      result_for(m, Variant::e_minus, "1000000000000000"),
      result_for(m, Variant::e_plus, "1100000000000001", "brute_force")};
  const auto report = evaluate_results(m, results, true);
  REQUIRE(report.rows.size() == 5);
  CHECK(report.rows[0].selection_name == "s_-");
  CHECK(report.rows[1].selection_name == "s_+ (exhaustive)");
  CHECK(report.rows[2].selection_name == "s_does");
  CHECK(report.rows[3].selection_name == "s_is");
  CHECK(report.rows[4].selection_name == "s_all");

  // every cell matches the raw-record recount
  for (std::size_t k = 0; k < 2; ++k) {
    const auto want = test::recount(m, results[k].result.best_selection);
    CHECK(report.rows[k].n_img_correct == want.n_img_correct);
    CHECK(report.rows[k].r_ave_correct == want.r_ave);
    CHECK(report.rows[k].r_invalid == want.r_invalid);
    CHECK(report.rows[k].n_selected == results[k].result.best_selection.count());
  }
}

TEST_CASE("grid mismatch aborts before any row") {
  const auto m = synth_matrix(test::make_manifest(4), door_grid(), random_profile(16, 1), 6);
  auto bad = result_for(m, Variant::e_plus, "1000000000000000");
  bad.question_hash = "0000000000000000";
  std::vector<ResultDocument> results{result_for(m, Variant::e_minus, "1000000000000000"), bad};
  CHECK_THROWS_WITH_AS(evaluate_results(m, results, false),
                       doctest::Contains("question grid mismatch"), MatrixError);
}

TEST_CASE("train/test size difference is a warning") {
  const auto m = synth_matrix(test::make_manifest(4), door_grid(), random_profile(16, 1), 6);
  auto r = result_for(m, Variant::e_plus, "1000000000000000");
  r.n_train_images = 40;
  const auto report = evaluate_results(m, std::vector<ResultDocument>{r}, false);
  CHECK(report.rows.size() == 1);
  CHECK(report.warnings.size() == 1);
}

TEST_CASE("missing style baseline becomes a warning") {
  const auto m = synth_matrix(test::make_manifest(4), test::make_questions(1),
                              uniform_profile(1, 1.0, 0.0, 0), 2);
  const auto report = evaluate_results(m, {}, true);
  CHECK(report.rows.size() == 2);
  CHECK(report.warnings.size() == 1);
}
