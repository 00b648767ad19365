#include "smm/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <string>

#include "smm/csv.hpp"
#include "smm/errors.hpp"

namespace smm {
namespace {

class PnmReader {
 public:
  PnmReader(const std::string& bytes, const std::string& name) : bytes_(bytes), name_(name) {}

  int header_value() {
    skip_space_and_comments();
    std::size_t start = pos_;
    long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (1L << 24)) throw InputError(name_ + ": header value too large");
      ++pos_;
    }
    if (pos_ == start) throw InputError(name_ + ": malformed PNM header");
    return static_cast<int>(value);
  }

  std::size_t data_start() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_])))
      throw InputError(name_ + ": malformed PNM header");
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& bytes_;
  const std::string& name_;
  std::size_t pos_ = 2;
};

Image read_pnm(const std::string& bytes, const std::string& name, int channels) {
  PnmReader reader(bytes, name);
  const int width = reader.header_value();
  const int height = reader.header_value();
  const int maxval = reader.header_value();
  if (width < 1 || height < 1) throw InputError(name + ": empty image");
  if (maxval < 1 || maxval > 65535) throw InputError(name + ": unsupported maxval");
  const std::size_t start = reader.data_start();
  const std::size_t sample_bytes = maxval < 256 ? 1 : 2;
  const std::size_t samples = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * channels;
  if (bytes.size() < start + samples * sample_bytes) throw InputError(name + ": truncated pixel data");
  Image image(width, height, channels);
  for (std::size_t i = 0; i < samples; ++i) {
    unsigned value = static_cast<unsigned char>(bytes[start + i * sample_bytes]);
    if (sample_bytes == 2) value = (value << 8) | static_cast<unsigned char>(bytes[start + i * sample_bytes + 1]);
    image.pixels[i] = static_cast<std::uint8_t>((value * 255u + static_cast<unsigned>(maxval) / 2) / maxval);
  }
  return image;
}

Image read_png(const std::string& bytes, const std::string& name) {
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size()))
    throw InputError(name + ": " + png.message);
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  Image image(static_cast<int>(png.width), static_cast<int>(png.height), color ? 3 : 1);
  if (!png_image_finish_read(&png, nullptr, image.pixels.data(), 0, nullptr)) {
    const std::string message = png.message;
    png_image_free(&png);
    throw InputError(name + ": " + message);
  }
  return image;
}

std::string encode_png(const Image& image) {
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = image.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png, nullptr, &size, 0, image.pixels.data(), 0, nullptr))
    throw InputError(std::string("PNG encoding failed: ") + png.message);
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&png, out.data(), &size, 0, image.pixels.data(), 0, nullptr))
    throw InputError(std::string("PNG encoding failed: ") + png.message);
  out.resize(size);
  return out;
}

}  // namespace

Image::Image(int w, int h, int c) : width(w), height(h), channels(c) {
  if (w < 1 || h < 1 || (c != 1 && c != 3)) throw InputError("image needs positive size and 1 or 3 channels");
  pixels.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * static_cast<std::size_t>(c), 0);
}

Image read_image(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  const std::string name = path.string();
  if (bytes.size() >= 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) == 0)
    return read_png(bytes, name);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return read_pnm(bytes, name, 1);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return read_pnm(bytes, name, 3);
  throw InputError(name + ": unsupported image format (expected PNG, P5 or P6)");
}

void write_image(const std::filesystem::path& path, const Image& image) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".png") {
    write_file(path, encode_png(image));
    return;
  }
  std::string out = (image.channels == 3 ? "P6\n" : "P5\n") + std::to_string(image.width) + " " +
                    std::to_string(image.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
  write_file(path, out);
}

DataSet sample_image_intensity(const Image& image, std::size_t count, Rng& rng) {
  if (count == 0) throw InputError("sample count must be positive");
  const std::size_t pixel_count = static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height);
  std::vector<double> cumulative(pixel_count);
  double total = 0.0;
  for (std::size_t i = 0; i < pixel_count; ++i) {
    double intensity = 0.0;
    for (int c = 0; c < image.channels; ++c) intensity += image.pixels[i * image.channels + c];
    total += intensity / image.channels;
    cumulative[i] = total;
  }
  if (!(total > 0.0)) throw InputError("image has zero total intensity");

  Eigen::MatrixXd points(2, static_cast<Eigen::Index>(count));
  for (std::size_t s = 0; s < count; ++s) {
    const double target = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    if (it == cumulative.end()) it = std::lower_bound(cumulative.begin(), cumulative.end(), total);
    const auto index = static_cast<std::size_t>(it - cumulative.begin());
    const int row = static_cast<int>(index / static_cast<std::size_t>(image.width));
    const int col = static_cast<int>(index % static_cast<std::size_t>(image.width));
    const double dx = rng.uniform();
    const double dy = rng.uniform();
    points(0, static_cast<Eigen::Index>(s)) = col + dx;
    points(1, static_cast<Eigen::Index>(s)) = (image.height - 1 - row) + dy;
  }
  return DataSet(std::move(points));
}

DataSet pixels_to_dataset(const Image& image) {
  const std::size_t pixel_count = static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height);
  Eigen::MatrixXd points(image.channels, static_cast<Eigen::Index>(pixel_count));
  std::vector<PixelCoord> coords(pixel_count);
  for (std::size_t i = 0; i < pixel_count; ++i) {
    for (int c = 0; c < image.channels; ++c)
      points(c, static_cast<Eigen::Index>(i)) = image.pixels[i * image.channels + c] / 255.0;
    coords[i] = {static_cast<int>(i / static_cast<std::size_t>(image.width)),
                 static_cast<int>(i % static_cast<std::size_t>(image.width))};
  }
  DataSet data(std::move(points));
  data.set_pixels(std::move(coords), image.height, image.width);
  return data;
}

}  // namespace smm
