#include "smm/model.hpp"

#include <cmath>

#include "smm/errors.hpp"

namespace smm {

ModelParams::ModelParams(FamilyPtr family, Eigen::VectorXd p, Eigen::MatrixXd vertices, NoiseCovariance sigma)
    : family_(std::move(family)), p_(std::move(p)), vertices_(std::move(vertices)), sigma_(std::move(sigma)) {
  if (!family_) throw InputError("model needs a simplex family");
  if (static_cast<std::size_t>(p_.size()) != family_->size())
    throw InputError("weight vector length does not match the simplex family");
  if (vertices_.cols() != family_->vertex_count()) throw InputError("vertex matrix needs one column per vertex");
  if (vertices_.rows() != sigma_.dim()) throw InputError("vertex dimension does not match noise dimension");
  if (!vertices_.allFinite()) throw InputError("vertex matrix has non-finite entries");

  long double total = 0.0L;
  for (double w : p_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InputError("simplex weights must be finite and non-negative");
    total += w;
  }
  const auto deviation = std::fabs(static_cast<double>(total - 1.0L));
  if (deviation > 1e-12) throw InputError("simplex weights must sum to 1");
  if (deviation > 1e-14) p_ /= static_cast<double>(total);
}

DataSet::DataSet(Eigen::MatrixXd points_by_column) : points_(std::move(points_by_column)) {
  if (points_.cols() < 1 || points_.rows() < 1) throw InputError("data set is empty");
  if (!points_.allFinite()) throw InputError("data set has non-finite entries");
}

DataSet DataSet::from_rows(const Eigen::MatrixXd& rows) { return DataSet(rows.transpose()); }

Eigen::MatrixXd DataSet::second_moment_sum() const { return points_ * points_.transpose(); }

Eigen::VectorXd DataSet::mean() const { return points_.rowwise().mean(); }

Eigen::MatrixXd DataSet::covariance() const {
  const Eigen::MatrixXd centered = points_.colwise() - mean();
  return centered * centered.transpose() / static_cast<double>(size());
}

double DataSet::scale() const {
  const double range = (points_.rowwise().maxCoeff() - points_.rowwise().minCoeff()).maxCoeff();
  return range > 0.0 ? range : 1.0;
}

void DataSet::set_pixels(std::vector<PixelCoord> pixels, int rows, int cols) {
  if (pixels.size() != size()) throw InputError("pixel metadata must have one entry per point");
  pixels_ = std::move(pixels);
  image_rows_ = rows;
  image_cols_ = cols;
}

ModelParams initial_params(const DataSet& data, FamilyPtr family, Eigen::MatrixXd vertices, SigmaMode mode) {
  const auto count = static_cast<double>(family->size());
  Eigen::VectorXd p = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(family->size()), 1.0 / count);

  Eigen::MatrixXd cov = data.covariance();
  const double scale = data.scale();
  const double floor = std::max(1e-12 * cov.trace() / static_cast<double>(data.dim()), 1e-12 * scale * scale);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd values = eig.eigenvalues().cwiseMax(floor);
  cov = eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
  cov = 0.5 * (cov + cov.transpose()).eval();
  return ModelParams(std::move(family), std::move(p), std::move(vertices), NoiseCovariance::from_matrix(cov, mode));
}

}  // namespace smm
