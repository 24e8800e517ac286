#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsel/answer_matrix.hpp"
#include "qsel/fitness.hpp"
#include "qsel/optimizer.hpp"

namespace qsel {

/// One line of a recognition report on a held-out matrix.
struct EvaluationRow {
  std::string selection_name;
  std::size_t n_img_correct = 0;
  std::size_t n_images = 0;
  double r_ave_correct = 0.0;
  double r_invalid = 0.0;
  std::size_t n_selected = 0;
  std::size_t n_questions = 0;
};

/// Unprimed statistics of `s` on `table`, taken directly from metrics().
EvaluationRow evaluation_row(std::string name, const TallyTable& table, const SelectionVector& s);

/// "k / N | 0.000 | 0.000 | k / Nq"
std::string format_cells(const EvaluationRow& row);
std::string format_table(std::span<const EvaluationRow> rows);
nlohmann::json rows_to_json(std::span<const EvaluationRow> rows);

struct Report {
  std::vector<EvaluationRow> rows;
  std::vector<std::string> warnings;
};

/// Rows for each optimized result in the given order, followed by s_does,
/// s_is and s_all when requested. A result trained on a different question
/// grid aborts with MatrixError before any row is computed.
Report evaluate_results(const AnswerMatrix& test, std::span<const ResultDocument> results,
                        bool include_baselines);

}  // namespace qsel
