#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "smm/model.hpp"

namespace smm {

/// SVG of the data and vertices projected onto the first two coordinates,
/// with a segment for every non-degenerate edge whose weight is at least
/// `threshold`. Requires a family of dimension <= 1.
std::string edge_plot_svg(const ModelParams& params, const DataSet& data, double threshold = 0.05);
void emit_edge_plot(const ModelParams& params, const DataSet& data, double threshold, const std::filesystem::path& path);

/// Writes channel_<j>.png (1-based j) with pixel value E[Z_j | x] scaled to
/// [0, 255], and palette.png with the vertex colors when n = 3. Each pixel's
/// channel values are rounded so that they sum to exactly 255 when the row
/// of z sums to 1. `z` is N x m; `data` must carry pixel coordinates.
std::vector<std::filesystem::path> emit_channel_maps(const Eigen::MatrixXd& z, const DataSet& data,
                                                     const Eigen::MatrixXd& vertices,
                                                     const std::filesystem::path& out_dir);

}  // namespace smm
