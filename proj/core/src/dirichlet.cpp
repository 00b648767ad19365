#include "smm/dirichlet.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "smm/errors.hpp"

namespace smm {
namespace {

std::vector<double> to_real(std::span<const int> alpha) { return {alpha.begin(), alpha.end()}; }

}  // namespace

double log_multivariate_beta(std::span<const double> alpha) {
  if (alpha.empty()) throw InputError("beta function needs at least one parameter");
  double sum = 0.0;
  double log_num = 0.0;
  for (double a : alpha) {
    if (!(a > 0.0) || !std::isfinite(a)) throw InputError("beta function parameters must be positive");
    sum += a;
    log_num += std::lgamma(a);
  }
  return log_num - std::lgamma(sum);
}

double multivariate_beta(std::span<const double> alpha) { return std::exp(log_multivariate_beta(alpha)); }

double log_multivariate_beta(std::span<const int> alpha) {
  const auto real = to_real(alpha);
  return log_multivariate_beta(std::span<const double>(real));
}

double log_dirichlet_density(std::span<const int> alpha, std::span<const double> z) {
  if (alpha.size() != z.size()) throw InputError("density point has the wrong number of coordinates");
  constexpr double kTol = 1e-9;
  double total = 0.0;
  for (double zj : z) {
    if (!std::isfinite(zj) || zj < -kTol) throw InputError("point is not on the simplex");
    total += zj;
  }
  if (std::fabs(total - 1.0) > kTol) throw InputError("point is not on the simplex");

  double log_value = -log_multivariate_beta(alpha);
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    if (alpha[j] < 1) throw InputError("density parameters must be integers >= 1");
    if (alpha[j] == 1) continue;
    if (z[j] <= 0.0) return -std::numeric_limits<double>::infinity();
    log_value += (alpha[j] - 1) * std::log(z[j]);
  }
  return log_value;
}

double dirichlet_density(std::span<const int> alpha, std::span<const double> z) {
  return std::exp(log_dirichlet_density(alpha, z));
}

DirichletMoments dirichlet_moments(std::span<const double> alpha) {
  if (alpha.empty()) throw InputError("Dirichlet needs at least one parameter");
  const Eigen::Map<const Eigen::VectorXd> a(alpha.data(), static_cast<Eigen::Index>(alpha.size()));
  if (!(a.array() > 0.0).all() || !a.allFinite()) throw InputError("Dirichlet parameters must be positive");
  const double a0 = a.sum();
  DirichletMoments out;
  out.mean = a / a0;
  const double denom = a0 * a0 * (a0 + 1.0);
  out.covariance = -(a * a.transpose()) / denom;
  for (Eigen::Index j = 0; j < a.size(); ++j) out.covariance(j, j) = a(j) * (a0 - a(j)) / denom;
  return out;
}

DirichletMoments dirichlet_moments(std::span<const int> alpha) {
  const auto real = to_real(alpha);
  return dirichlet_moments(std::span<const double>(real));
}

}  // namespace smm
