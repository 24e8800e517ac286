#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>

#include "qsel/dataset.hpp"
#include "qsel/oracle.hpp"
#include "qsel/question_grid.hpp"

namespace httplib {
class Server;
}

namespace qsel {

/// Maps one request (base64 PNG, question text) to an answer. nullopt
/// produces a 404; an exception produces a 500.
using VqaResponder =
    std::function<std::optional<std::string>(std::string_view png_base64, std::string_view question)>;

/// Local stand-in for a VQA endpoint speaking the POST /vqa protocol.
class MockVqaServer {
 public:
  explicit MockVqaServer(VqaResponder responder);
  ~MockVqaServer();
  MockVqaServer(const MockVqaServer&) = delete;
  MockVqaServer& operator=(const MockVqaServer&) = delete;

  /// Binds (port 0 picks a free port) and serves on a background thread.
  /// Returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  /// Serves on the calling thread until stop() is called from elsewhere.
  void serve(const std::string& host, int port);
  void stop();

  std::string endpoint() const;
  std::size_t request_count() const { return requests_.load(); }

 private:
  std::unique_ptr<httplib::Server> server_;
  std::jthread thread_;
  std::string host_;
  int port_ = 0;
  std::atomic<std::size_t> requests_{0};
};

VqaResponder constant_responder(std::string answer);

/// Replays a recording keyed by (image_id, aug_index, question_id). The
/// augmented images are regenerated from the manifest and seed exactly as
/// collect_answers renders them, so each request's PNG identifies its
/// (image, augmentation) pair and its text identifies the question.
VqaResponder replay_responder(const DatasetManifest& manifest,
                              const std::filesystem::path& image_root,
                              std::span<const Question> questions,
                              std::shared_ptr<const ReplayOracle> recording, std::size_t n_aug,
                              std::uint64_t seed);

}  // namespace qsel
