#pragma once

#include <Eigen/Dense>

#include "smm/model.hpp"

namespace smm {

/// Terms of the intrinsic encoding rate, all in nats.
struct RateBreakdown {
  double entropy_term = 0.0;
  double expected_rate_term = 0.0;
  double noise_entropy_term = 0.0;
  double total = 0.0;
};

/// -sum p log p with 0 log 0 = 0.
double entropy(const Eigen::VectorXd& p);

/// Gaussian rate-distortion by reverse water-filling: finds theta with
/// sum_j min(theta, lambda_j) = D and returns sum_j 1/2 log(lambda_j / min(theta, lambda_j)).
/// Eigenvalues in [-1e-10, 0) are clamped to 0; more negative ones throw InputError.
double gaussian_rate(const Eigen::VectorXd& eigenvalues, double distortion);

/// Rate at D = 1 of the Gaussian surrogate of V U_S, measured in the
/// Sigma-Mahalanobis distortion.
double simplex_component_rate(const CombinatorialSimplex& simplex, const Eigen::MatrixXd& vertices,
                              const NoiseCovariance& sigma);

/// H(p) + sum_S p_S R_S + 1/2 log((4 pi e)^n det Sigma).
RateBreakdown intrinsic_encoding_rate(const ModelParams& params);

}  // namespace smm
