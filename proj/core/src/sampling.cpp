#include "smm/sampling.hpp"

#include <algorithm>

#include "smm/errors.hpp"

namespace smm {

void sample_unit_simplex_into(std::span<double> out, Rng& rng) {
  double total = 0.0;
  for (double& v : out) {
    v = rng.exponential();
    total += v;
  }
  for (double& v : out) v /= total;
}

std::vector<double> sample_unit_simplex(int dimension, SimplexSampler method, Rng& rng) {
  if (dimension < 0) throw InputError("simplex dimension must be non-negative");
  const auto order = static_cast<std::size_t>(dimension + 1);
  std::vector<double> u(order);
  if (dimension == 0) {
    u[0] = 1.0;
    return u;
  }
  if (method == SimplexSampler::Exponential) {
    sample_unit_simplex_into(u, rng);
    return u;
  }
  std::vector<double> cuts(order - 1);
  for (double& c : cuts) c = rng.uniform();
  std::sort(cuts.begin(), cuts.end());
  double previous = 0.0;
  for (std::size_t l = 0; l + 1 < order; ++l) {
    u[l] = cuts[l] - previous;
    previous = cuts[l];
  }
  u[order - 1] = 1.0 - previous;
  return u;
}

CategoricalSampler::CategoricalSampler(const Eigen::VectorXd& weights) {
  cumulative_.resize(static_cast<std::size_t>(weights.size()));
  double running = 0.0;
  for (Eigen::Index s = 0; s < weights.size(); ++s) {
    running += weights(s);
    cumulative_[static_cast<std::size_t>(s)] = running;
  }
  if (!(running > 0.0)) throw InputError("categorical weights must have positive total");
}

std::size_t CategoricalSampler::draw(double uniform01) const {
  const double target = uniform01 * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  if (it == cumulative_.end()) {
    // Rounding pushed the target past the total: take the last positive weight.
    it = std::lower_bound(cumulative_.begin(), cumulative_.end(), cumulative_.back());
  }
  return static_cast<std::size_t>(it - cumulative_.begin());
}

std::size_t CategoricalSampler::operator()(Rng& rng) const { return draw(rng.uniform()); }

SampleOutput sample_model(const ModelParams& params, std::size_t count, bool with_noise, Rng& rng) {
  if (count == 0) throw InputError("sample count must be positive");
  const auto& family = params.family();
  const int n = params.ambient_dim();
  const int m = params.vertex_count();
  const auto order = static_cast<std::size_t>(family.dimension() + 1);
  const CategoricalSampler pick(params.p());
  const Eigen::MatrixXd chol = params.sigma().cholesky_factor();

  Eigen::MatrixXd points(n, static_cast<Eigen::Index>(count));
  Eigen::MatrixXd latent = Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(count));
  std::vector<std::size_t> simplices(count);
  std::vector<double> u(order);
  Eigen::VectorXd noise(n);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t s = pick(rng);
    simplices[i] = s;
    sample_unit_simplex_into(u, rng);
    const auto idx = family.indices(s);
    for (std::size_t l = 0; l < order; ++l) latent(idx[l], static_cast<Eigen::Index>(i)) += u[l];
    points.col(static_cast<Eigen::Index>(i)) = params.vertices() * latent.col(static_cast<Eigen::Index>(i));
    if (with_noise) {
      for (int d = 0; d < n; ++d) noise(d) = rng.normal();
      points.col(static_cast<Eigen::Index>(i)) += chol * noise;
    }
  }
  return {DataSet(std::move(points)), std::move(simplices), std::move(latent)};
}

}  // namespace smm
