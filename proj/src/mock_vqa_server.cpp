#include "qsel/mock_vqa_server.hpp"

#include <map>
#include <utility>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include "qsel/acquisition.hpp"
#include "qsel/error.hpp"

namespace qsel {

MockVqaServer::MockVqaServer(VqaResponder responder) : server_(std::make_unique<httplib::Server>()) {
  server_->Post("/vqa", [this, responder = std::move(responder)](const httplib::Request& req,
                                                                 httplib::Response& res) {
    ++requests_;
    std::string image;
    std::string question;
    try {
      const auto body = nlohmann::json::parse(req.body);
      image = body.at("image").get<std::string>();
      question = body.at("question").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      res.status = 400;
      res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
      return;
    }
    try {
      const auto answer = responder(image, question);
      if (!answer) {
        res.status = 404;
        res.set_content(R"({"error":"no recorded answer"})", "application/json");
        return;
      }
      res.set_content(nlohmann::json{{"answer", *answer}}.dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
    }
  });
}

MockVqaServer::~MockVqaServer() { stop(); }

int MockVqaServer::start(const std::string& host, int port) {
  host_ = host;
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
  } else if (server_->bind_to_port(host, port)) {
    port_ = port;
  } else {
    port_ = -1;
  }
  if (port_ <= 0) throw OracleError(fmt::format("mock VQA server cannot bind {}:{}", host, port));
  thread_ = std::jthread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void MockVqaServer::serve(const std::string& host, int port) {
  host_ = host;
  port_ = port;
  if (!server_->listen(host, port)) {
    throw OracleError(fmt::format("mock VQA server cannot listen on {}:{}", host, port));
  }
}

void MockVqaServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string MockVqaServer::endpoint() const { return fmt::format("http://{}:{}", host_, port_); }

VqaResponder constant_responder(std::string answer) {
  return [answer = std::move(answer)](std::string_view, std::string_view) {
    return std::optional<std::string>(answer);
  };
}

VqaResponder replay_responder(const DatasetManifest& manifest,
                              const std::filesystem::path& image_root,
                              std::span<const Question> questions,
                              std::shared_ptr<const ReplayOracle> recording, std::size_t n_aug,
                              std::uint64_t seed) {
  std::map<std::string, std::pair<std::string, std::size_t>, std::less<>> by_image;
  for (auto& aug : prepare_augmentations(manifest, image_root, n_aug, seed)) {
    const auto key = std::make_pair(aug.image_id, aug.aug_index);
    if (!by_image.emplace(std::move(aug.png_base64), key).second) {
      throw OracleError(fmt::format(
          "replay server: augmentation {} of {} renders to the same PNG as another image",
          key.second, key.first));
    }
  }
  std::map<std::string, std::size_t, std::less<>> by_text;
  for (const auto& q : questions) {
    if (!by_text.emplace(q.text, q.id).second) {
      throw OracleError(fmt::format("replay server: question text \"{}\" is not unique", q.text));
    }
  }
  return [by_image = std::move(by_image), by_text = std::move(by_text),
          recording = std::move(recording)](std::string_view png,
                                            std::string_view question) -> std::optional<std::string> {
    const auto img = by_image.find(png);
    const auto q = by_text.find(question);
    if (img == by_image.end() || q == by_text.end()) return std::nullopt;
    return recording->find(img->second.first, img->second.second, q->second);
  };
}

}  // namespace qsel
