#include "smm/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "smm/csv.hpp"
#include "smm/errors.hpp"
#include "smm/image.hpp"

namespace smm {
namespace {

constexpr double kCanvas = 600.0;
constexpr double kMargin = 30.0;

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s(buf);
  return s == "-0.00" ? "0.00" : s;
}

struct Projection {
  double x0 = 0.0, y0 = 0.0, scale = 1.0, offset_x = 0.0, offset_y = 0.0;

  double px(double x) const { return kMargin + offset_x + (x - x0) * scale; }
  double py(double y) const { return kCanvas - (kMargin + offset_y + (y - y0) * scale); }
};

double coord(const Eigen::Ref<const Eigen::VectorXd>& v, int axis) { return axis < v.size() ? v(axis) : 0.0; }

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

std::string edge_plot_svg(const ModelParams& params, const DataSet& data, double threshold) {
  const auto& family = params.family();
  if (family.dimension() > 1) throw InputError("edge plot needs a family of dimension 0 or 1");
  if (data.dim() != params.ambient_dim()) throw InputError("data dimension does not match model");

  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  auto extend = [&](const Eigen::Ref<const Eigen::VectorXd>& v) {
    xmin = std::min(xmin, coord(v, 0));
    xmax = std::max(xmax, coord(v, 0));
    ymin = std::min(ymin, coord(v, 1));
    ymax = std::max(ymax, coord(v, 1));
  };
  for (std::size_t i = 0; i < data.size(); ++i) extend(data.point(i));
  for (int j = 0; j < params.vertex_count(); ++j) extend(params.vertices().col(j));
  const double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
  Projection proj;
  proj.x0 = xmin;
  proj.y0 = ymin;
  proj.scale = (kCanvas - 2.0 * kMargin) / span;
  proj.offset_x = 0.5 * (span - (xmax - xmin)) * proj.scale;
  proj.offset_y = 0.5 * (span - (ymax - ymin)) * proj.scale;

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" viewBox=\"0 0 600 600\">\n";
  out += "<rect width=\"600\" height=\"600\" fill=\"white\"/>\n";
  out += "<g fill=\"#7f7f7f\" fill-opacity=\"0.6\">\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data.point(i);
    out += "<circle cx=\"" + fixed(proj.px(coord(x, 0))) + "\" cy=\"" + fixed(proj.py(coord(x, 1))) + "\" r=\"1.5\"/>\n";
  }
  out += "</g>\n<g stroke=\"#c0392b\" stroke-width=\"2\">\n";
  for (std::size_t s = 0; s < family.size(); ++s) {
    const auto idx = family.indices(s);
    if (idx.front() == idx.back()) continue;
    if (!(params.p()(static_cast<Eigen::Index>(s)) >= threshold)) continue;
    const auto a = params.vertices().col(idx.front());
    const auto b = params.vertices().col(idx.back());
    out += "<line x1=\"" + fixed(proj.px(coord(a, 0))) + "\" y1=\"" + fixed(proj.py(coord(a, 1))) + "\" x2=\"" +
           fixed(proj.px(coord(b, 0))) + "\" y2=\"" + fixed(proj.py(coord(b, 1))) + "\"/>\n";
  }
  out += "</g>\n<g fill=\"#1f4e99\" font-family=\"sans-serif\" font-size=\"12\">\n";
  for (int j = 0; j < params.vertex_count(); ++j) {
    const auto v = params.vertices().col(j);
    const double cx = proj.px(coord(v, 0));
    const double cy = proj.py(coord(v, 1));
    out += "<circle cx=\"" + fixed(cx) + "\" cy=\"" + fixed(cy) + "\" r=\"4\"/>\n";
    out += "<text x=\"" + fixed(cx + 6.0) + "\" y=\"" + fixed(cy - 6.0) + "\">" + std::to_string(j + 1) + "</text>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

void emit_edge_plot(const ModelParams& params, const DataSet& data, double threshold, const std::filesystem::path& path) {
  write_file(path, edge_plot_svg(params, data, threshold));
}

std::vector<std::filesystem::path> emit_channel_maps(const Eigen::MatrixXd& z, const DataSet& data,
                                                     const Eigen::MatrixXd& vertices,
                                                     const std::filesystem::path& out_dir) {
  if (!data.pixels()) throw InputError("channel maps need data with pixel coordinates");
  if (z.rows() != static_cast<Eigen::Index>(data.size())) throw InputError("posterior matrix has the wrong row count");
  if (z.cols() != vertices.cols()) throw InputError("posterior matrix and vertices disagree on m");
  const auto m = static_cast<int>(z.cols());
  std::filesystem::create_directories(out_dir);

  std::vector<Image> channels;
  for (int j = 0; j < m; ++j) channels.emplace_back(data.image_cols(), data.image_rows(), 1);
  const auto& pixels = *data.pixels();
  std::vector<double> scaled(static_cast<std::size_t>(m));
  std::vector<int> level(static_cast<std::size_t>(m));
  std::vector<int> order(static_cast<std::size_t>(m));
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    // Largest-remainder rounding keeps the per-pixel sum at 255 * sum(z).
    double total = 0.0;
    int assigned = 0;
    for (int j = 0; j < m; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      scaled[ju] = std::clamp(z(static_cast<Eigen::Index>(i), j), 0.0, 1.0) * 255.0;
      level[ju] = static_cast<int>(std::floor(scaled[ju]));
      total += scaled[ju];
      assigned += level[ju];
    }
    int remaining = std::min(static_cast<int>(std::lround(total)), 255 * m) - assigned;
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      const auto au = static_cast<std::size_t>(a);
      const auto bu = static_cast<std::size_t>(b);
      return scaled[au] - level[au] > scaled[bu] - level[bu];
    });
    for (int r = 0; r < m && remaining > 0; ++r) {
      auto& l = level[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])];
      if (l < 255) {
        ++l;
        --remaining;
      }
    }
    for (int j = 0; j < m; ++j)
      channels[static_cast<std::size_t>(j)].at(pixels[i].row, pixels[i].col) =
          static_cast<std::uint8_t>(level[static_cast<std::size_t>(j)]);
  }

  std::vector<std::filesystem::path> written;
  for (int j = 0; j < m; ++j) {
    written.push_back(out_dir / ("channel_" + std::to_string(j + 1) + ".png"));
    write_image(written.back(), channels[static_cast<std::size_t>(j)]);
  }
  if (vertices.rows() == 3) {
    constexpr int swatch = 32;
    Image palette(swatch * m, swatch, 3);
    for (int j = 0; j < m; ++j)
      for (int r = 0; r < swatch; ++r)
        for (int c = 0; c < swatch; ++c)
          for (int ch = 0; ch < 3; ++ch) palette.at(r, j * swatch + c, ch) = to_byte(vertices(ch, j));
    written.push_back(out_dir / "palette.png");
    write_image(written.back(), palette);
  }
  return written;
}

}  // namespace smm
