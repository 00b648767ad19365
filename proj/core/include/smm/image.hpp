#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "smm/model.hpp"
#include "smm/rng.hpp"

namespace smm {

/// 8-bit image with 1 (gray) or 3 (RGB) interleaved channels, rows top to bottom.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int width, int height, int channels);

  std::uint8_t& at(int row, int col, int channel = 0) {
    return pixels[(static_cast<std::size_t>(row) * width + col) * channels + channel];
  }
  std::uint8_t at(int row, int col, int channel = 0) const {
    return pixels[(static_cast<std::size_t>(row) * width + col) * channels + channel];
  }
};

/// Reads binary PGM (P5), PPM (P6) or PNG, detected from the file contents.
Image read_image(const std::filesystem::path& path);
/// Writes PNG for a ".png" extension, otherwise PGM or PPM by channel count.
void write_image(const std::filesystem::path& path, const Image& image);

/// Draws `count` points by choosing a pixel with probability proportional to
/// its intensity and then a uniform position inside it. Pixel (row, col)
/// covers [col, col+1] x [H-1-row, H-row], so y increases upwards. RGB
/// images use the channel mean as intensity.
DataSet sample_image_intensity(const Image& image, std::size_t count, Rng& rng);

/// One point per pixel with channels scaled to [0, 1]; the data set keeps
/// each point's (row, col).
DataSet pixels_to_dataset(const Image& image);

}  // namespace smm
