#pragma once

#include <vector>

#include "smm/model.hpp"
#include "smm/rng.hpp"

namespace smm {

enum class SimplexSampler {
  Exponential,    ///< normalize k+1 standard exponentials
  SortedUniform,  ///< gaps between k sorted uniforms padded by 0 and 1
};

/// Uniform point on the standard k-simplex (k+1 coordinates).
std::vector<double> sample_unit_simplex(int dimension, SimplexSampler method, Rng& rng);

/// Fills out[0..k] with a uniform simplex point using exponentials.
void sample_unit_simplex_into(std::span<double> out, Rng& rng);

/// Draws a family position from weights p by inverse CDF.
class CategoricalSampler {
 public:
  explicit CategoricalSampler(const Eigen::VectorXd& weights);
  std::size_t operator()(Rng& rng) const;
  std::size_t draw(double uniform01) const;

 private:
  std::vector<double> cumulative_;
};

struct SampleOutput {
  DataSet data;
  std::vector<std::size_t> simplices;  ///< family position of each draw
  Eigen::MatrixXd latent;              ///< m x N pushforward points z
};

/// Draws N points x = V z (+ N(0, Sigma) when with_noise).
SampleOutput sample_model(const ModelParams& params, std::size_t count, bool with_noise, Rng& rng);

}  // namespace smm
