#include "smm/rate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "smm/dirichlet.hpp"
#include "smm/errors.hpp"

namespace smm {

double entropy(const Eigen::VectorXd& p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

double gaussian_rate(const Eigen::VectorXd& eigenvalues, double distortion) {
  if (!(distortion > 0.0)) throw InputError("distortion budget must be positive");
  Eigen::VectorXd lambda = eigenvalues;
  for (auto& v : lambda) {
    if (!std::isfinite(v)) throw InputError("eigenvalues must be finite");
    if (v < -1e-10) throw InputError("negative eigenvalue in rate computation");
    if (v < 0.0) v = 0.0;
  }
  if (lambda.size() == 0 || lambda.sum() <= distortion) return 0.0;

  double lo = 0.0;
  double hi = lambda.maxCoeff();
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double used = lambda.cwiseMin(mid).sum();
    if (used < distortion) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-12 * hi) break;
  }
  const double theta = 0.5 * (lo + hi);

  double rate = 0.0;
  for (double v : lambda) {
    if (v > theta) rate += 0.5 * std::log(v / theta);
  }
  return rate;
}

namespace {

double component_rate(const std::vector<int>& support, std::span<const int> counts, const Eigen::MatrixXd& vertices,
                      const Eigen::MatrixXd& whitener) {
  if (support.size() < 2) return 0.0;
  std::vector<int> alpha;
  Eigen::MatrixXd sub(vertices.rows(), static_cast<Eigen::Index>(support.size()));
  for (std::size_t j = 0; j < support.size(); ++j) {
    alpha.push_back(counts[static_cast<std::size_t>(support[j])]);
    sub.col(static_cast<Eigen::Index>(j)) = vertices.col(support[j]);
  }
  const auto moments = dirichlet_moments(alpha);
  const Eigen::MatrixXd embedded = whitener * sub;
  Eigen::MatrixXd cov = embedded * moments.covariance * embedded.transpose();
  cov = 0.5 * (cov + cov.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
  Eigen::VectorXd values = eig.eigenvalues();
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  for (auto& v : values) {
    if (v < 0.0 && v > -1e-10 * scale) v = 0.0;
  }
  return gaussian_rate(values, 1.0);
}

}  // namespace

double simplex_component_rate(const CombinatorialSimplex& simplex, const Eigen::MatrixXd& vertices,
                              const NoiseCovariance& sigma) {
  if (simplex.vertex_count() != vertices.cols()) throw InputError("simplex and vertex matrix disagree on m");
  if (sigma.dim() != vertices.rows()) throw InputError("noise and vertex matrix disagree on n");
  return component_rate(simplex.support(), simplex.counts(), vertices, sigma.inverse_sqrt());
}

RateBreakdown intrinsic_encoding_rate(const ModelParams& params) {
  RateBreakdown out;
  const auto& family = params.family();
  const Eigen::MatrixXd whitener = params.sigma().inverse_sqrt();
  std::vector<int> counts(static_cast<std::size_t>(params.vertex_count()));
  for (std::size_t s = 0; s < family.size(); ++s) {
    const double weight = params.p()(static_cast<Eigen::Index>(s));
    if (!(weight > 0.0)) continue;
    std::fill(counts.begin(), counts.end(), 0);
    std::vector<int> support;
    for (int v : family.indices(s)) {
      if (counts[static_cast<std::size_t>(v)]++ == 0) support.push_back(v);
    }
    out.expected_rate_term += weight * component_rate(support, counts, params.vertices(), whitener);
  }
  out.entropy_term = entropy(params.p());
  const double n = params.ambient_dim();
  out.noise_entropy_term = 0.5 * (n * std::log(4.0 * std::numbers::pi * std::numbers::e) + params.sigma().log_det());
  out.total = out.entropy_term + out.expected_rate_term + out.noise_entropy_term;
  return out;
}

}  // namespace smm
