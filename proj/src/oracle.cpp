#include "qsel/oracle.hpp"

#include <cstdlib>
#include <fstream>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include "qsel/error.hpp"

namespace qsel {

ReplayOracle::ReplayOracle(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw OracleError(fmt::format("cannot open replay file {}", path.string()));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      auto key = std::make_tuple(j.at("image_id").get<std::string>(),
                                 j.at("aug_index").get<std::size_t>(),
                                 j.at("question_id").get<std::size_t>());
      if (!answers_.emplace(std::move(key), j.at("answer").get<std::string>()).second) {
        throw OracleError(fmt::format("{}:{}: duplicate replay entry", path.string(), line_no));
      }
    } catch (const nlohmann::json::exception& e) {
      throw OracleError(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    }
  }
}

std::optional<std::string> ReplayOracle::find(std::string_view image_id, std::size_t aug_index,
                                              std::size_t question_id) const {
  const auto it = answers_.find(std::make_tuple(std::string(image_id), aug_index, question_id));
  if (it == answers_.end()) return std::nullopt;
  return it->second;
}

std::string ReplayOracle::answer(const OracleQuery& query) {
  auto found = find(query.image_id, query.aug_index, query.question->id);
  if (!found) {
    throw OracleError(fmt::format("replay file has no answer for ({}, {}, {})", query.image_id,
                                  query.aug_index, query.question->id));
  }
  return *std::move(found);
}

HttpOracle::HttpOracle(std::string endpoint, std::chrono::milliseconds timeout)
    : timeout_(timeout) {
  if (endpoint.starts_with("https://")) {
    throw OracleError("https endpoints are not supported; use a plain http endpoint");
  }
  if (!endpoint.starts_with("http://")) endpoint = "http://" + endpoint;
  const auto path_start = endpoint.find('/', std::string_view("http://").size());
  if (path_start == std::string::npos) {
    scheme_host_port_ = endpoint;
    path_.clear();
  } else {
    scheme_host_port_ = endpoint.substr(0, path_start);
    path_ = endpoint.substr(path_start);
    while (!path_.empty() && path_.back() == '/') path_.pop_back();
  }
  path_ += "/vqa";
}

std::string HttpOracle::answer(const OracleQuery& query) {
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  const nlohmann::json body = {{"image", query.png_base64}, {"question", query.question->text}};
  auto res = client.Post(path_, body.dump(), "application/json");
  if (!res) {
    throw OracleError(fmt::format("VQA request to {}{} failed: {}", scheme_host_port_, path_,
                                  httplib::to_string(res.error())));
  }
  if (res->status != 200) {
    throw OracleError(fmt::format("VQA endpoint returned HTTP {}", res->status));
  }
  try {
    return nlohmann::json::parse(res->body).at("answer").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw OracleError(fmt::format("malformed VQA response: {}", e.what()));
  }
}

std::string resolve_endpoint(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv(kEndpointEnvVar); env != nullptr && *env != '\0') {
    return env;
  }
  throw OracleError(fmt::format("no VQA endpoint: pass --endpoint or set {}", kEndpointEnvVar));
}

}  // namespace qsel
