#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qsel/answer_semantics.hpp"
#include "qsel/dataset.hpp"
#include "qsel/question_grid.hpp"

namespace qsel {

struct AnswerRecord {
  std::string image_id;
  std::size_t aug_index = 0;
  std::size_t question_id = 0;
  std::string raw_answer;
  Outcome outcome = Outcome::invalid;

  bool operator==(const AnswerRecord&) const = default;
};

/// Complete, immutable set of classified answers for every
/// (image, augmentation, question) triple.
///
/// Records are stored densely in (manifest order, aug_index, question_id)
/// order regardless of the order they were supplied in. Construction rejects
/// missing or duplicate triples and records whose outcome disagrees with the
/// classification of their raw answer.
class AnswerMatrix {
 public:
  AnswerMatrix(DatasetManifest manifest, std::vector<Question> questions, std::size_t n_aug,
               std::vector<AnswerRecord> records);

  const DatasetManifest& manifest() const { return manifest_; }
  std::span<const Question> questions() const { return questions_; }
  std::size_t n_aug() const { return n_aug_; }
  std::size_t n_images() const { return manifest_.entries.size(); }
  std::size_t n_questions() const { return questions_.size(); }
  const std::string& question_hash() const { return question_hash_; }

  std::span<const AnswerRecord> records() const { return records_; }
  const AnswerRecord& record(std::size_t image, std::size_t aug, std::size_t question) const {
    return records_[(image * n_aug_ + aug) * questions_.size() + question];
  }

  bool operator==(const AnswerMatrix& other) const {
    return manifest_ == other.manifest_ && questions_ == other.questions_ &&
           n_aug_ == other.n_aug_ && records_ == other.records_;
  }

 private:
  DatasetManifest manifest_;
  std::vector<Question> questions_;
  std::size_t n_aug_;
  std::string question_hash_;
  std::vector<AnswerRecord> records_;
};

/// Matrix file: one header line {format, version, n_aug, question_hash,
/// questions, manifest} followed by one JSON line per record.
void write_matrix(const AnswerMatrix& matrix, std::ostream& out);
AnswerMatrix read_matrix(std::istream& in);
void save_matrix(const AnswerMatrix& matrix, const std::filesystem::path& path);
AnswerMatrix load_matrix(const std::filesystem::path& path);

}  // namespace qsel
