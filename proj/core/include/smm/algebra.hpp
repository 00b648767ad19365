#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "smm/rng.hpp"
#include "smm/simplex.hpp"

namespace smm {

/// A finite mixture of integer-parameter Dirichlet densities on the
/// simplex with `coords` coordinates.
class DirichletMixture {
 public:
  struct Component {
    double weight = 0.0;
    std::vector<int> alpha;  ///< all entries >= 1, length coords
  };

  /// Throws InputError when weights are negative or do not sum to 1 within
  /// 1e-12, or an alpha has the wrong length or an entry below 1.
  DirichletMixture(int coords, std::vector<Component> components);

  int coords() const { return coords_; }
  const std::vector<Component>& components() const { return components_; }
  std::size_t size() const { return components_.size(); }

  double density(std::span<const double> z) const;
  Eigen::VectorXd mean() const;
  /// Covariance of means plus mean of covariances.
  Eigen::MatrixXd covariance() const;
  double total_weight() const;

  /// Sums weights of identical parameter vectors, drops weights below
  /// `drop_below`, renormalizes, and orders components lexicographically.
  static DirichletMixture merged(int coords, std::vector<Component> components, double drop_below = 1e-15);

 private:
  int coords_;
  std::vector<Component> components_;
};

/// Calls fn(counts) for every vector of `parts` non-negative integers
/// summing to `total`, in lexicographic order of the sorted multiset.
void for_each_composition(int total, int parts, const std::function<void(std::span<const int>)>& fn);

/// log of the multinomial coefficient total! / prod counts_j!.
double log_multinomial(std::span<const int> counts);

/// Rewrites Dir(alpha) as a mixture of Dirichlets whose parameters sum to
/// k_target + 1 by expanding (z_0 + ... + z_c)^(k_target - k).
/// Throws InputError when k_target < sum(alpha) - 1 or the expansion
/// exceeds `cap` components.
DirichletMixture raise_degree(std::span<const int> alpha, int k_target, std::uint64_t cap = kDefaultFamilyCap);

struct RankCheck {
  int rank = 0;
  int expected = 0;
};

/// Numerical rank of the evaluation matrix of the full-support densities
/// with parameters summing to k+1 over `coords` coordinates, sampled at
/// |B|+20 interior points. Singular values below 1e-8 of the largest count
/// as zero.
RankCheck independence_check(int dimension, int coords, Rng& rng, std::uint64_t cap = kDefaultFamilyCap);

/// All parameter vectors with entries >= 1 summing to `total` over `coords` coordinates.
std::vector<std::vector<int>> full_support_parameters(int total, int coords);

/// Matrix with entry (r, c) = dirichlet_density(alphas[c], points.col(r)).
Eigen::MatrixXd evaluation_matrix(const std::vector<std::vector<int>>& alphas, const Eigen::MatrixXd& points);

/// Random points on the simplex with every coordinate at least `min_coord`
/// (one point per column).
Eigen::MatrixXd interior_points(int coords, int count, Rng& rng, double min_coord = 1e-3);

/// The smoothed mixture obtained by drawing alpha ~ Multinomial(l, y) and
/// then Dir(alpha + 1).
DirichletMixture kde_point(std::span<const double> y, int l, std::uint64_t cap = kDefaultFamilyCap);

/// Uniform mixture of kde_point over the samples (columns), merged.
DirichletMixture kde_empirical(const Eigen::MatrixXd& samples, int l, std::uint64_t cap = kDefaultFamilyCap);

struct ConvergenceRow {
  int l = 0;
  double mean_error = 0.0;      ///< max_i |E Yhat_l,i - y_i|
  double max_covariance = 0.0;  ///< largest |covariance entry| of Yhat_l
};

std::vector<ConvergenceRow> convergence_diagnostic(std::span<const double> y, std::span<const int> l_values,
                                                   std::uint64_t cap = kDefaultFamilyCap);

}  // namespace smm
