#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "qsel/random.hpp"

namespace qsel {

/// Interleaved RGB image with channel values normalized to [0, 1].
struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> pixels;  // row-major, 3 values per pixel

  float& at(std::size_t row, std::size_t col, std::size_t channel) {
    return pixels[(row * width + col) * 3 + channel];
  }
  float at(std::size_t row, std::size_t col, std::size_t channel) const {
    return pixels[(row * width + col) * 3 + channel];
  }

  bool operator==(const Image&) const = default;
};

Image make_image(std::size_t height, std::size_t width, std::array<float, 3> fill);

/// Throws ImageError for zero extent or a pixel buffer of the wrong size.
void check_image(const Image& image);

using ChannelShift = std::array<float, 3>;

inline constexpr double kRgbShiftLimit = 0.1;

/// One offset per channel, uniform in [-limit, limit], drawn in R, G, B order.
ChannelShift draw_channel_shift(Rng& rng, double limit = kRgbShiftLimit);

/// Adds the per-channel offset to every pixel and clamps to [0, 1].
Image apply_channel_shift(const Image& image, const ChannelShift& shift);

/// RGBShift augmentation: draw_channel_shift followed by apply_channel_shift.
Image rgb_shift(const Image& image, Rng& rng, double limit = kRgbShiftLimit);

/// Decodes any format OpenCV reads; 8- and 16-bit depths are normalized.
Image load_image(const std::filesystem::path& path);
void save_png(const Image& image, const std::filesystem::path& path);

/// 8-bit RGB PNG encoding (values rounded to the nearest level).
std::vector<std::uint8_t> encode_png(const Image& image);

std::string base64_encode(std::span<const std::uint8_t> bytes);

}  // namespace qsel
