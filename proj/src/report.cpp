#include "qsel/report.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "qsel/error.hpp"

namespace qsel {

EvaluationRow evaluation_row(std::string name, const TallyTable& table, const SelectionVector& s) {
  const Metrics m = metrics(table, s);
  return {std::move(name), m.n_img_correct, m.n_images,  m.r_ave,
          m.r_invalid,     m.n_selected,    m.n_questions};
}

std::string format_cells(const EvaluationRow& row) {
  return fmt::format("{} / {} | {:.3f} | {:.3f} | {} / {}", row.n_img_correct, row.n_images,
                     row.r_ave_correct, row.r_invalid, row.n_selected, row.n_questions);
}

std::string format_table(std::span<const EvaluationRow> rows) {
  std::size_t width = std::string_view("selection").size();
  for (const auto& r : rows) width = std::max(width, r.selection_name.size());
  std::string out = fmt::format("{:<{}} | N_img_correct | R_ave_correct | R_invalid | N_s_q\n",
                                "selection", width);
  for (const auto& r : rows) {
    out += fmt::format("{:<{}} | {}\n", r.selection_name, width, format_cells(r));
  }
  return out;
}

nlohmann::json rows_to_json(std::span<const EvaluationRow> rows) {
  auto out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"selection", r.selection_name},
                   {"n_img_correct", r.n_img_correct},
                   {"n_images", r.n_images},
                   {"r_ave_correct", r.r_ave_correct},
                   {"r_invalid", r.r_invalid},
                   {"n_selected", r.n_selected},
                   {"n_questions", r.n_questions},
                   {"cells", format_cells(r)}});
  }
  return out;
}

Report evaluate_results(const AnswerMatrix& test, std::span<const ResultDocument> results,
                        bool include_baselines) {
  for (const auto& r : results) {
    if (r.question_hash != test.question_hash()) {
      throw MatrixError(fmt::format(
          "question grid mismatch: result for {} was optimized on grid {}, test matrix uses {}",
          selection_label(r.variant), r.question_hash, test.question_hash()));
    }
  }
  Report report;
  const TallyTable table = tally(test);
  for (const auto& r : results) {
    std::string name(selection_label(r.variant));
    if (r.method == "brute_force") name += " (exhaustive)";
    if (r.n_train_images != 0 && r.n_train_images != test.n_images()) {
      report.warnings.push_back(fmt::format("{}: trained on {} images, test matrix has {}", name,
                                            r.n_train_images, test.n_images()));
    }
    report.rows.push_back(evaluation_row(std::move(name), table, r.result.best_selection));
  }
  if (include_baselines) {
    for (auto kind : {BaselineKind::does, BaselineKind::is, BaselineKind::all}) {
      try {
        report.rows.push_back(evaluation_row(std::string(selection_label(kind)), table,
                                             baseline_selection(test.questions(), kind)));
      } catch (const SpecError& e) {
        report.warnings.push_back(e.what());
      }
    }
  }
  return report;
}

}  // namespace qsel
