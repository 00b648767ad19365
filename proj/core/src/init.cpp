#include "smm/init.hpp"

#include <limits>
#include <numeric>
#include <vector>

#include "smm/errors.hpp"

namespace smm {
namespace {

bool duplicates_column(const Eigen::MatrixXd& chosen, int filled, const Eigen::VectorXd& point) {
  for (int j = 0; j < filled; ++j) {
    if (chosen.col(j) == point) return true;
  }
  return false;
}

}  // namespace

Eigen::MatrixXd init_random(const DataSet& data, int m, Rng& rng) {
  if (m < 1) throw InputError("vertex count must be positive");
  const std::size_t points = data.size();
  Eigen::MatrixXd vertices(data.dim(), m);
  std::vector<std::size_t> pool(points);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  std::size_t used = 0;
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXd pick;
    bool distinct = false;
    for (int attempt = 0; attempt < 100 && used < points; ++attempt) {
      const std::size_t r = used + rng.below(points - used);
      std::swap(pool[used], pool[r]);
      pick = data.point(pool[used]);
      if (!duplicates_column(vertices, j, pick)) {
        ++used;
        distinct = true;
        break;
      }
    }
    if (!distinct) {
      if (pick.size() == 0) pick = data.point(rng.below(points));
      for (auto& v : pick) v += 1e-6 * data.scale() * rng.normal();
    }
    vertices.col(j) = pick;
  }
  return vertices;
}

Eigen::MatrixXd init_farthest_point(const DataSet& data, int m, Rng& rng, int candidates, int rounds) {
  if (m < 1) throw InputError("vertex count must be positive");
  if (data.size() < static_cast<std::size_t>(m)) throw InputError("fewer data points than vertices");
  if (candidates < 1 || rounds < 0) throw InputError("farthest-point search needs candidates >= 1 and rounds >= 0");
  Eigen::MatrixXd vertices = init_random(data, m, rng);
  if (m == 1) return vertices;
  for (int round = 0; round < rounds; ++round) {
    const auto removed = static_cast<Eigen::Index>(rng.below(static_cast<std::size_t>(m)));
    double best_distance = -1.0;
    Eigen::VectorXd best;
    for (int c = 0; c < candidates; ++c) {
      const auto point = data.point(rng.below(data.size()));
      double nearest = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < m; ++j) {
        if (j == removed) continue;
        nearest = std::min(nearest, (vertices.col(j) - point).squaredNorm());
      }
      if (nearest > best_distance) {
        best_distance = nearest;
        best = point;
      }
    }
    vertices.col(removed) = best;
  }
  return vertices;
}

}  // namespace smm
