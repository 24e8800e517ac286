// Stand-alone mock VQA endpoint for exercising `qsel collect --oracle http`.

#include <csignal>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "qsel/acquisition.hpp"
#include "qsel/mock_vqa_server.hpp"

namespace {
qsel::MockVqaServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server != nullptr) g_server->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mock VQA server speaking POST /vqa", "qsel_mock_vqa"};
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string answer;
  std::string manifest_path;
  std::string grid_path;
  std::string replay_path;
  std::string image_root;
  std::uint64_t seed = 0;
  std::size_t n_aug = qsel::kDefaultAugmentations;
  app.add_option("--host", host, "Bind address");
  app.add_option("--port", port, "Port");
  auto* constant = app.add_option("--answer", answer, "Reply with this answer to every request");
  auto* replay = app.add_option("--replay", replay_path, "JSON-lines recording to replay");
  app.add_option("--manifest", manifest_path, "Dataset manifest (replay mode)");
  app.add_option("--grid", grid_path, "Question grid (replay mode)");
  app.add_option("--image-root", image_root, "Image directory (default: manifest directory)");
  app.add_option("--seed", seed, "Augmentation seed used by the collecting client");
  app.add_option("--n-aug", n_aug, "Augmentations per image used by the collecting client");
  constant->excludes(replay);
  CLI11_PARSE(app, argc, argv);

  try {
    qsel::VqaResponder responder;
    if (!replay_path.empty()) {
      if (manifest_path.empty() || grid_path.empty()) {
        std::cerr << "error: replay mode needs --manifest and --grid\n";
        return 2;
      }
      const auto manifest = qsel::load_manifest(manifest_path);
      const auto grid = qsel::load_grid(grid_path);
      const auto root = image_root.empty() ? std::filesystem::path(manifest_path).parent_path()
                                           : std::filesystem::path(image_root);
      responder = qsel::replay_responder(manifest, root, grid,
                                         std::make_shared<qsel::ReplayOracle>(replay_path), n_aug,
                                         seed);
    } else {
      responder = qsel::constant_responder(answer.empty() ? "yes" : answer);
    }
    qsel::MockVqaServer server(std::move(responder));
    g_server = &server;
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    std::cerr << "serving POST /vqa on http://" << host << ":" << port << "\n";
    server.serve(host, port);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
