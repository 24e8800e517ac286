#include "qsel/image.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "qsel/error.hpp"

namespace qsel {

namespace {

cv::Mat to_bgr8(const Image& image) {
  cv::Mat mat(static_cast<int>(image.height), static_cast<int>(image.width), CV_8UC3);
  for (std::size_t r = 0; r < image.height; ++r) {
    auto* row = mat.ptr<cv::Vec3b>(static_cast<int>(r));
    for (std::size_t c = 0; c < image.width; ++c) {
      for (std::size_t ch = 0; ch < 3; ++ch) {
        const float v = std::clamp(image.at(r, c, ch), 0.0F, 1.0F);
        row[c][static_cast<int>(2 - ch)] = static_cast<std::uint8_t>(std::lround(v * 255.0F));
      }
    }
  }
  return mat;
}

}  // namespace

Image make_image(std::size_t height, std::size_t width, std::array<float, 3> fill) {
  Image image{height, width, std::vector<float>(height * width * 3)};
  for (std::size_t i = 0; i < height * width; ++i) {
    std::copy(fill.begin(), fill.end(), image.pixels.begin() + static_cast<std::ptrdiff_t>(i * 3));
  }
  return image;
}

void check_image(const Image& image) {
  if (image.height == 0 || image.width == 0) {
    throw ImageError(fmt::format("image has zero extent ({}x{})", image.height, image.width));
  }
  if (image.pixels.size() != image.height * image.width * 3) {
    throw ImageError(fmt::format("image buffer holds {} values, expected {}x{}x3",
                                 image.pixels.size(), image.height, image.width));
  }
}

ChannelShift draw_channel_shift(Rng& rng, double limit) {
  ChannelShift shift{};
  for (auto& s : shift) {
    s = static_cast<float>(rng.uniform(-limit, limit));
  }
  return shift;
}

Image apply_channel_shift(const Image& image, const ChannelShift& shift) {
  check_image(image);
  Image out = image;
  for (std::size_t i = 0; i < out.pixels.size(); ++i) {
    out.pixels[i] = std::clamp(out.pixels[i] + shift[i % 3], 0.0F, 1.0F);
  }
  return out;
}

Image rgb_shift(const Image& image, Rng& rng, double limit) {
  check_image(image);
  return apply_channel_shift(image, draw_channel_shift(rng, limit));
}

Image load_image(const std::filesystem::path& path) {
  const cv::Mat mat = cv::imread(path.string(), cv::IMREAD_COLOR | cv::IMREAD_ANYDEPTH);
  if (mat.empty()) throw ImageError(fmt::format("cannot read image {}", path.string()));
  double scale = 1.0;
  switch (mat.depth()) {
    case CV_8U: scale = 1.0 / 255.0; break;
    case CV_16U: scale = 1.0 / 65535.0; break;
    case CV_32F: scale = 1.0; break;
    default: throw ImageError(fmt::format("unsupported pixel depth in {}", path.string()));
  }
  cv::Mat f;
  mat.convertTo(f, CV_32FC3, scale);
  Image image{static_cast<std::size_t>(f.rows), static_cast<std::size_t>(f.cols), {}};
  image.pixels.resize(image.height * image.width * 3);
  for (int r = 0; r < f.rows; ++r) {
    const auto* row = f.ptr<cv::Vec3f>(r);
    for (int c = 0; c < f.cols; ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        image.at(r, c, ch) = std::clamp(row[c][2 - ch], 0.0F, 1.0F);
      }
    }
  }
  return image;
}

void save_png(const Image& image, const std::filesystem::path& path) {
  check_image(image);
  if (!cv::imwrite(path.string(), to_bgr8(image))) {
    throw ImageError(fmt::format("cannot write image {}", path.string()));
  }
}

std::vector<std::uint8_t> encode_png(const Image& image) {
  check_image(image);
  std::vector<std::uint8_t> buffer;
  if (!cv::imencode(".png", to_bgr8(image), buffer)) throw ImageError("PNG encoding failed");
  return buffer;
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  static constexpr char kAlphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(kAlphabet[(v >> 6) & 63]);
    out.push_back(kAlphabet[v & 63]);
  }
  if (i + 1 == bytes.size()) {
    const std::uint32_t v = bytes[i] << 16;
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out += "==";
  } else if (i + 2 == bytes.size()) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(kAlphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

}  // namespace qsel
