#pragma once

#include <Eigen/Dense>
#include <span>

namespace smm {

/// log B(alpha) = sum_j log Gamma(alpha_j) - log Gamma(sum_j alpha_j).
/// Throws InputError on an empty vector or a non-positive entry.
double log_multivariate_beta(std::span<const double> alpha);
double multivariate_beta(std::span<const double> alpha);
double log_multivariate_beta(std::span<const int> alpha);

/// Dirichlet density (1/B(alpha)) prod_j z_j^(alpha_j - 1) for integer
/// alpha >= 1, taken against Lebesgue measure on the first c-1 coordinates
/// (the simplex then has volume 1/(c-1)!).
///
/// z must lie on the simplex within 1e-9. A zero coordinate with
/// alpha_j >= 2 gives 0; with alpha_j = 1 it contributes the factor 1.
double dirichlet_density(std::span<const int> alpha, std::span<const double> z);
double log_dirichlet_density(std::span<const int> alpha, std::span<const double> z);

struct DirichletMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Mean alpha/alpha_0 and covariance (alpha_0 diag(mean) - alpha alpha^T/alpha_0) / (alpha_0 (alpha_0 + 1)).
DirichletMoments dirichlet_moments(std::span<const double> alpha);
DirichletMoments dirichlet_moments(std::span<const int> alpha);

}  // namespace smm
