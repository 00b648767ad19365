#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "smm/model.hpp"
#include "smm/rng.hpp"
#include "smm/sampling.hpp"

namespace smm::fixture {

/// Square of diameter 1 in the plane with weight on its four sides.
inline ModelParams square_edges(double noise_sd) {
  const double a = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXd v(2, 4);
  v << 0.0, a, a, 0.0,
       0.0, 0.0, a, a;
  auto family = enumerate_simplices(1, 4);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(family->size()));
  const int edges[4][2] = {{0, 1}, {1, 2}, {2, 3}, {0, 3}};
  const double weights[4] = {0.3, 0.25, 0.25, 0.2};
  for (int e = 0; e < 4; ++e) {
    const int idx[2] = {edges[e][0], edges[e][1]};
    p(static_cast<Eigen::Index>(family->index_of(std::span<const int>(idx, 2)))) = weights[e];
  }
  return ModelParams(family, p, v, NoiseCovariance::isotropic(2, noise_sd * noise_sd));
}

/// Regular tetrahedron with unit edges, weight on its four faces.
inline ModelParams tetrahedron_faces(double noise_sd) {
  Eigen::MatrixXd v(3, 4);
  v << 0.0, 1.0, 0.5, 0.5,
       0.0, 0.0, std::sqrt(3.0) / 2.0, std::sqrt(3.0) / 6.0,
       0.0, 0.0, 0.0, std::sqrt(2.0 / 3.0);
  auto family = enumerate_simplices(2, 4);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(family->size()));
  const int faces[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
  const double weights[4] = {0.3, 0.25, 0.25, 0.2};
  for (int f = 0; f < 4; ++f)
    p(static_cast<Eigen::Index>(family->index_of(std::span<const int>(faces[f], 3)))) = weights[f];
  return ModelParams(family, p, v, NoiseCovariance::isotropic(3, noise_sd * noise_sd));
}

/// Random edge model: vertices in [-1, 1]^n, Dirichlet-ish random p over
/// A_1(m), isotropic noise with the given standard deviation.
inline ModelParams random_edge_model(int n, int m, double noise_sd, Rng& rng) {
  auto family = enumerate_simplices(1, m);
  Eigen::MatrixXd v(n, m);
  for (Eigen::Index j = 0; j < v.size(); ++j) v.data()[j] = 2.0 * rng.uniform() - 1.0;
  Eigen::VectorXd p(static_cast<Eigen::Index>(family->size()));
  for (auto& w : p) w = rng.exponential();
  p /= p.sum();
  return ModelParams(family, p, v, NoiseCovariance::isotropic(n, noise_sd * noise_sd));
}

}  // namespace smm::fixture
