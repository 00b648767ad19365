#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "smm/noise.hpp"
#include "smm/simplex.hpp"

namespace smm {

/// Parameters (p, V, Sigma) of a simplicial mixture model.
///
/// V is stored n x m: column j is the position of vertex j, so a latent
/// point z in the m-simplex maps to V z. p is indexed by family position.
class ModelParams {
 public:
  /// Throws InputError when p has the wrong length, a negative entry, or
  /// sums to 1 with error above 1e-12; deviations above 1e-14 are
  /// renormalized away. V must be finite with n = sigma.dim() rows and m
  /// columns.
  ModelParams(FamilyPtr family, Eigen::VectorXd p, Eigen::MatrixXd vertices, NoiseCovariance sigma);

  const SimplexFamily& family() const { return *family_; }
  const FamilyPtr& family_ptr() const { return family_; }
  const Eigen::VectorXd& p() const { return p_; }
  const Eigen::MatrixXd& vertices() const { return vertices_; }
  const NoiseCovariance& sigma() const { return sigma_; }

  int ambient_dim() const { return static_cast<int>(vertices_.rows()); }
  int vertex_count() const { return static_cast<int>(vertices_.cols()); }

 private:
  FamilyPtr family_;
  Eigen::VectorXd p_;
  Eigen::MatrixXd vertices_;
  NoiseCovariance sigma_;
};

/// Source pixel of a data point in image workflows.
struct PixelCoord {
  int row = 0;
  int col = 0;
};

/// N observations in R^n, stored column-wise (n x N) so each point is a
/// contiguous column.
class DataSet {
 public:
  /// Throws InputError on an empty or non-finite matrix.
  explicit DataSet(Eigen::MatrixXd points_by_column);

  /// Builds from an N x n row-per-point matrix.
  static DataSet from_rows(const Eigen::MatrixXd& rows);

  std::size_t size() const { return static_cast<std::size_t>(points_.cols()); }
  int dim() const { return static_cast<int>(points_.rows()); }
  const Eigen::MatrixXd& points() const { return points_; }
  auto point(std::size_t i) const { return points_.col(static_cast<Eigen::Index>(i)); }

  /// Q_XX = sum_i x_i x_i^T.
  Eigen::MatrixXd second_moment_sum() const;
  Eigen::VectorXd mean() const;
  /// Maximum-likelihood covariance (divides by N).
  Eigen::MatrixXd covariance() const;
  /// Largest coordinate range, or 1 when all points coincide.
  double scale() const;

  const std::optional<std::vector<PixelCoord>>& pixels() const { return pixels_; }
  int image_rows() const { return image_rows_; }
  int image_cols() const { return image_cols_; }
  void set_pixels(std::vector<PixelCoord> pixels, int rows, int cols);

 private:
  Eigen::MatrixXd points_;
  std::optional<std::vector<PixelCoord>> pixels_;
  int image_rows_ = 0;
  int image_cols_ = 0;
};

/// Uniform p over the family, the given vertices, and Sigma set to the data
/// covariance projected onto the mode (floored to stay positive definite).
ModelParams initial_params(const DataSet& data, FamilyPtr family, Eigen::MatrixXd vertices, SigmaMode mode);

}  // namespace smm
