#include "smm/noise.hpp"

#include <cmath>
#include <numbers>

#include "smm/errors.hpp"

namespace smm {

std::string_view to_string(SigmaMode mode) {
  switch (mode) {
    case SigmaMode::Full:
      return "full";
    case SigmaMode::Diagonal:
      return "diagonal";
    case SigmaMode::Isotropic:
      return "isotropic";
  }
  return "unknown";
}

SigmaMode parse_sigma_mode(std::string_view text) {
  if (text == "full") return SigmaMode::Full;
  if (text == "diagonal") return SigmaMode::Diagonal;
  if (text == "isotropic") return SigmaMode::Isotropic;
  throw InputError("unknown sigma mode '" + std::string(text) + "' (expected full, diagonal or isotropic)");
}

NoiseCovariance NoiseCovariance::isotropic(int dim, double variance) {
  if (dim < 1) throw InputError("noise dimension must be positive");
  if (!(variance > 0.0) || !std::isfinite(variance)) throw InputError("isotropic variance must be positive");
  NoiseCovariance out(SigmaMode::Isotropic, dim);
  out.scalar_ = variance;
  out.log_det_ = dim * std::log(variance);
  return out;
}

NoiseCovariance NoiseCovariance::diagonal(Eigen::VectorXd variances) {
  if (variances.size() < 1) throw InputError("noise dimension must be positive");
  NoiseCovariance out(SigmaMode::Diagonal, static_cast<int>(variances.size()));
  for (double v : variances)
    if (!(v > 0.0) || !std::isfinite(v)) throw InputError("diagonal variances must be positive");
  out.log_det_ = variances.array().log().sum();
  out.diag_ = std::move(variances);
  return out;
}

NoiseCovariance NoiseCovariance::full(Eigen::MatrixXd covariance) {
  if (covariance.rows() < 1 || covariance.rows() != covariance.cols())
    throw InputError("covariance must be a non-empty square matrix");
  if (!covariance.allFinite()) throw InputError("covariance has non-finite entries");
  if (!covariance.isApprox(covariance.transpose(), 1e-10)) throw InputError("covariance must be symmetric");
  covariance = 0.5 * (covariance + covariance.transpose()).eval();
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) throw InputError("covariance is not positive definite");
  NoiseCovariance out(SigmaMode::Full, static_cast<int>(covariance.rows()));
  out.chol_ = llt.matrixL();
  if ((out.chol_.diagonal().array() <= 0.0).any()) throw InputError("covariance is not positive definite");
  out.log_det_ = 2.0 * out.chol_.diagonal().array().log().sum();
  out.full_ = std::move(covariance);
  return out;
}

NoiseCovariance NoiseCovariance::from_matrix(const Eigen::MatrixXd& covariance, SigmaMode mode) {
  switch (mode) {
    case SigmaMode::Isotropic:
      return isotropic(static_cast<int>(covariance.rows()), covariance.trace() / static_cast<double>(covariance.rows()));
    case SigmaMode::Diagonal:
      return diagonal(covariance.diagonal());
    case SigmaMode::Full:
      break;
  }
  return full(covariance);
}

Eigen::MatrixXd NoiseCovariance::matrix() const {
  switch (mode_) {
    case SigmaMode::Isotropic:
      return scalar_ * Eigen::MatrixXd::Identity(dim_, dim_);
    case SigmaMode::Diagonal:
      return diag_.asDiagonal();
    case SigmaMode::Full:
      break;
  }
  return full_;
}

Eigen::VectorXd NoiseCovariance::solve(const Eigen::VectorXd& v) const {
  switch (mode_) {
    case SigmaMode::Isotropic:
      return v / scalar_;
    case SigmaMode::Diagonal:
      return v.cwiseQuotient(diag_);
    case SigmaMode::Full:
      break;
  }
  const Eigen::VectorXd y = chol_.triangularView<Eigen::Lower>().solve(v);
  return chol_.transpose().triangularView<Eigen::Upper>().solve(y);
}

double NoiseCovariance::mahalanobis(const Eigen::VectorXd& v) const {
  switch (mode_) {
    case SigmaMode::Isotropic:
      return v.squaredNorm() / scalar_;
    case SigmaMode::Diagonal:
      return (v.array().square() / diag_.array()).sum();
    case SigmaMode::Full:
      break;
  }
  return chol_.triangularView<Eigen::Lower>().solve(v).squaredNorm();
}

Eigen::MatrixXd NoiseCovariance::whiten(const Eigen::MatrixXd& columns) const {
  switch (mode_) {
    case SigmaMode::Isotropic:
      return columns / std::sqrt(scalar_);
    case SigmaMode::Diagonal:
      return diag_.cwiseSqrt().cwiseInverse().asDiagonal() * columns;
    case SigmaMode::Full:
      break;
  }
  return chol_.triangularView<Eigen::Lower>().solve(columns);
}

Eigen::MatrixXd NoiseCovariance::cholesky_factor() const {
  switch (mode_) {
    case SigmaMode::Isotropic:
      return std::sqrt(scalar_) * Eigen::MatrixXd::Identity(dim_, dim_);
    case SigmaMode::Diagonal:
      return diag_.cwiseSqrt().asDiagonal();
    case SigmaMode::Full:
      break;
  }
  return chol_;
}

Eigen::MatrixXd NoiseCovariance::inverse_sqrt() const {
  const Eigen::MatrixXd sigma = matrix();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
  const double floor = 1e-12 * sigma.trace();
  const Eigen::VectorXd values = eig.eigenvalues().cwiseMax(floor);
  return eig.eigenvectors() * values.cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
}

double NoiseCovariance::log_normalizer() const {
  return -0.5 * dim_ * std::log(2.0 * std::numbers::pi) - 0.5 * log_det_;
}

Eigen::VectorXd NoiseCovariance::parameters() const {
  switch (mode_) {
    case SigmaMode::Isotropic:
      return Eigen::VectorXd::Constant(1, scalar_);
    case SigmaMode::Diagonal:
      return diag_;
    case SigmaMode::Full:
      break;
  }
  Eigen::VectorXd out(dim_ * dim_);
  for (int r = 0; r < dim_; ++r)
    for (int c = 0; c < dim_; ++c) out(r * dim_ + c) = full_(r, c);
  return out;
}

}  // namespace smm
