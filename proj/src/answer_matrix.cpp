#include "qsel/answer_matrix.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "qsel/error.hpp"

namespace qsel {

namespace {

constexpr const char* kMatrixFormat = "qsel-answer-matrix";
constexpr int kMatrixVersion = 1;

}  // namespace

AnswerMatrix::AnswerMatrix(DatasetManifest manifest, std::vector<Question> questions,
                           std::size_t n_aug, std::vector<AnswerRecord> records)
    : manifest_(std::move(manifest)), questions_(std::move(questions)), n_aug_(n_aug) {
  validate_manifest(manifest_);
  if (questions_.empty()) throw MatrixError("answer matrix: empty question list");
  for (std::size_t i = 0; i < questions_.size(); ++i) {
    if (questions_[i].id != i) throw MatrixError("answer matrix: question ids are not dense");
  }
  if (n_aug_ == 0) throw MatrixError("answer matrix: n_aug must be at least 1");
  question_hash_ = question_list_hash(questions_);

  const std::size_t nq = questions_.size();
  const std::size_t expected = manifest_.entries.size() * n_aug_ * nq;
  if (records.size() != expected) {
    throw MatrixError(fmt::format("answer matrix incomplete: {} records, expected {} ({} images x {} "
                                  "augmentations x {} questions)",
                                  records.size(), expected, manifest_.entries.size(), n_aug_, nq));
  }

  std::vector<bool> filled(expected, false);
  std::vector<AnswerRecord> dense(expected);
  for (auto& r : records) {
    const auto image = manifest_.index_of(r.image_id);
    if (!image) throw MatrixError(fmt::format("answer matrix: unknown image_id \"{}\"", r.image_id));
    if (r.aug_index >= n_aug_) {
      throw MatrixError(fmt::format("answer matrix: aug_index {} out of range", r.aug_index));
    }
    if (r.question_id >= nq) {
      throw MatrixError(fmt::format("answer matrix: question_id {} out of range", r.question_id));
    }
    const auto expected_outcome =
        classify_raw(r.raw_answer, questions_[r.question_id].polarity, manifest_.entries[*image].label);
    if (r.outcome != expected_outcome) {
      throw MatrixError(fmt::format("answer matrix: record ({}, {}, {}) has outcome {} but its answer "
                                    "classifies as {}",
                                    r.image_id, r.aug_index, r.question_id, to_string(r.outcome),
                                    to_string(expected_outcome)));
    }
    const std::size_t slot = (*image * n_aug_ + r.aug_index) * nq + r.question_id;
    if (filled[slot]) {
      throw MatrixError(fmt::format("answer matrix: duplicate record ({}, {}, {})", r.image_id,
                                    r.aug_index, r.question_id));
    }
    filled[slot] = true;
    dense[slot] = std::move(r);
  }
  records_ = std::move(dense);
}

void write_matrix(const AnswerMatrix& matrix, std::ostream& out) {
  const nlohmann::json header = {{"format", kMatrixFormat},
                                 {"version", kMatrixVersion},
                                 {"n_aug", matrix.n_aug()},
                                 {"question_hash", matrix.question_hash()},
                                 {"questions", grid_to_json(matrix.questions())},
                                 {"manifest", manifest_to_json(matrix.manifest())}};
  out << header.dump() << '\n';
  for (const auto& r : matrix.records()) {
    const nlohmann::json line = {{"image_id", r.image_id},
                                 {"aug_index", r.aug_index},
                                 {"question_id", r.question_id},
                                 {"raw_answer", r.raw_answer},
                                 {"outcome", to_string(r.outcome)}};
    out << line.dump() << '\n';
  }
}

AnswerMatrix read_matrix(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw MatrixError("answer matrix: missing header line");
  try {
    const auto header = nlohmann::json::parse(line);
    if (header.value("format", "") != kMatrixFormat) {
      throw MatrixError("answer matrix: not a qsel answer matrix file");
    }
    if (header.at("version").get<int>() != kMatrixVersion) {
      throw MatrixError(fmt::format("answer matrix: unsupported version {}",
                                    header.at("version").dump()));
    }
    auto questions = grid_from_json(header.at("questions"));
    const auto embedded_hash = header.at("question_hash").get<std::string>();
    const auto actual_hash = question_list_hash(questions);
    if (embedded_hash != actual_hash) {
      throw MatrixError(fmt::format("answer matrix: question list hash {} does not match embedded "
                                    "hash {}",
                                    actual_hash, embedded_hash));
    }
    auto manifest = manifest_from_json(header.at("manifest"));
    const auto n_aug = header.at("n_aug").get<std::size_t>();

    std::vector<AnswerRecord> records;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      records.push_back({j.at("image_id").get<std::string>(), j.at("aug_index").get<std::size_t>(),
                         j.at("question_id").get<std::size_t>(),
                         j.at("raw_answer").get<std::string>(),
                         parse_outcome(j.at("outcome").get<std::string>())});
    }
    return AnswerMatrix(std::move(manifest), std::move(questions), n_aug, std::move(records));
  } catch (const nlohmann::json::exception& e) {
    throw MatrixError(fmt::format("answer matrix: {}", e.what()));
  } catch (const SpecError& e) {
    throw MatrixError(fmt::format("answer matrix: {}", e.what()));
  }
}

void save_matrix(const AnswerMatrix& matrix, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MatrixError(fmt::format("cannot write answer matrix {}", path.string()));
  write_matrix(matrix, out);
  if (!out) throw MatrixError(fmt::format("write failed for answer matrix {}", path.string()));
}

AnswerMatrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MatrixError(fmt::format("cannot open answer matrix {}", path.string()));
  return read_matrix(in);
}

}  // namespace qsel
