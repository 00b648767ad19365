#pragma once

#include <Eigen/Dense>

#include "smm/model.hpp"
#include "smm/rng.hpp"

namespace smm {

/// m data points as vertex columns (n x m). Exact duplicates are redrawn up
/// to 100 times; after that the duplicate is kept and jittered by 1e-6 of
/// the data scale. Throws InputError when m < 1.
Eigen::MatrixXd init_random(const DataSet& data, int m, Rng& rng);

/// Starts from init_random, then for `rounds` rounds removes a random vertex
/// and replaces it with the best of `candidates` random data points, where
/// best maximizes the minimum distance to the remaining vertices.
/// Throws InputError when N < m.
Eigen::MatrixXd init_farthest_point(const DataSet& data, int m, Rng& rng, int candidates = 100, int rounds = 100);

}  // namespace smm
