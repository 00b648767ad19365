#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>

namespace smm {

enum class SigmaMode { Full, Diagonal, Isotropic };

std::string_view to_string(SigmaMode mode);
/// Accepts "full", "diagonal", "isotropic". Throws InputError otherwise.
SigmaMode parse_sigma_mode(std::string_view text);

/// Gaussian noise covariance in one of three parametrizations.
///
/// All three modes answer the same queries; full covariances keep a cached
/// Cholesky factor. Values are variances, not standard deviations.
class NoiseCovariance {
 public:
  static NoiseCovariance isotropic(int dim, double variance);
  static NoiseCovariance diagonal(Eigen::VectorXd variances);
  static NoiseCovariance full(Eigen::MatrixXd covariance);
  /// Projects a symmetric matrix onto the requested mode (trace/n, diagonal, or itself).
  static NoiseCovariance from_matrix(const Eigen::MatrixXd& covariance, SigmaMode mode);

  SigmaMode mode() const { return mode_; }
  int dim() const { return dim_; }

  double log_det() const { return log_det_; }
  /// Dense n x n covariance.
  Eigen::MatrixXd matrix() const;
  /// Sigma^{-1} v.
  Eigen::VectorXd solve(const Eigen::VectorXd& v) const;
  /// v^T Sigma^{-1} v.
  double mahalanobis(const Eigen::VectorXd& v) const;
  /// L^{-1} applied to every column, where Sigma = L L^T. After whitening,
  /// Mahalanobis distances become Euclidean.
  Eigen::MatrixXd whiten(const Eigen::MatrixXd& columns) const;
  /// L, the lower Cholesky factor (diagonal for the restricted modes).
  Eigen::MatrixXd cholesky_factor() const;
  /// Symmetric Sigma^{-1/2} via eigendecomposition with eigenvalue floor 1e-12 trace.
  Eigen::MatrixXd inverse_sqrt() const;
  /// log of the N(0, Sigma) density at 0: -n/2 log(2 pi) - 1/2 log det Sigma.
  double log_normalizer() const;

  /// Raw parameters: scalar, n-vector, or n*n entries (row-major) by mode.
  Eigen::VectorXd parameters() const;

 private:
  NoiseCovariance(SigmaMode mode, int dim) : mode_(mode), dim_(dim) {}

  SigmaMode mode_;
  int dim_;
  double scalar_ = 0.0;
  Eigen::VectorXd diag_;
  Eigen::MatrixXd full_;
  Eigen::MatrixXd chol_;
  double log_det_ = 0.0;
};

}  // namespace smm
