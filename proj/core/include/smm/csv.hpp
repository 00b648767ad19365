#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "smm/model.hpp"

namespace smm {

/// One point per row, numeric cells, optional header. A first row with any
/// non-numeric cell is taken as the header. Errors name the 1-based line.
DataSet parse_points_csv(std::string_view text);
DataSet load_points_csv(const std::filesystem::path& path);

/// Shortest round-trip decimal form of a double.
std::string format_double(double value);

/// Writes rows of `values` (one row per line) under an optional header.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header, const Eigen::MatrixXd& values);
std::string csv_text(const std::vector<std::string>& header, const Eigen::MatrixXd& values);

/// Reads a whole file; throws InputError when it cannot be opened.
std::string read_file(const std::filesystem::path& path);
/// Writes a whole file; throws InputError when it cannot be created.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace smm
