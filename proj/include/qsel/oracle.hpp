#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>

#include "qsel/question_grid.hpp"

namespace qsel {

struct OracleQuery {
  std::string_view image_id;
  std::size_t aug_index = 0;
  const Question* question = nullptr;
  /// Base64 PNG of the augmented image; empty when the oracle does not need pixels.
  std::string_view png_base64;
};

/// Source of raw VQA answers. Implementations must be safe to call from
/// several threads at once and signal failures by throwing OracleError.
class AnswerOracle {
 public:
  virtual ~AnswerOracle() = default;
  virtual std::string answer(const OracleQuery& query) = 0;
  virtual bool needs_pixels() const { return false; }
};

/// Answers from a JSON-lines recording of
/// {"image_id", "aug_index", "question_id", "answer"}.
class ReplayOracle : public AnswerOracle {
 public:
  explicit ReplayOracle(const std::filesystem::path& path);

  std::string answer(const OracleQuery& query) override;
  std::size_t size() const { return answers_.size(); }

  /// Lookup without going through a query; nullopt when not recorded.
  std::optional<std::string> find(std::string_view image_id, std::size_t aug_index,
                                  std::size_t question_id) const;

 private:
  std::map<std::tuple<std::string, std::size_t, std::size_t>, std::string, std::less<>> answers_;
};

/// Remote oracle: POST {endpoint}/vqa with {"image", "question"} and read
/// {"answer"} from a 200 response. Any other status is an oracle error.
class HttpOracle : public AnswerOracle {
 public:
  explicit HttpOracle(std::string endpoint,
                      std::chrono::milliseconds timeout = std::chrono::seconds(60));

  std::string answer(const OracleQuery& query) override;
  bool needs_pixels() const override { return true; }

  const std::string& host() const { return scheme_host_port_; }
  const std::string& path() const { return path_; }

 private:
  std::string scheme_host_port_;
  std::string path_;
  std::chrono::milliseconds timeout_;
};

inline constexpr const char* kEndpointEnvVar = "QSEL_VQA_ENDPOINT";

/// The flag value if given, else $QSEL_VQA_ENDPOINT; throws OracleError if neither is set.
std::string resolve_endpoint(const std::optional<std::string>& flag);

}  // namespace qsel
