#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "smm/exact_em.hpp"
#include "smm/model.hpp"
#include "smm/regime.hpp"
#include "smm/rng.hpp"
#include "smm/sampling.hpp"

namespace smm {

/// Parameters prepared for chain moves: whitened data and vertices plus a
/// sampler for p. Rebuilt after every M action.
class ChainModel {
 public:
  ChainModel(const DataSet& data, const ModelParams& params);

  const ModelParams& params() const { return params_; }
  const SimplexFamily& family() const { return params_.family(); }
  int order() const { return params_.family().dimension() + 1; }
  std::uint64_t version() const { return version_; }
  std::size_t size() const { return static_cast<std::size_t>(y_.cols()); }

  /// log rho_Sigma(x_i - V pushforward(S, u)).
  double log_likelihood(std::size_t i, std::size_t simplex, std::span<const double> u) const;
  std::size_t draw_simplex(Rng& rng) const { return sampler_(rng); }

 private:
  ModelParams params_;
  Eigen::MatrixXd y_;
  Eigen::MatrixXd w_;
  double log_norm_;
  CategoricalSampler sampler_;
  std::uint64_t version_;
};

/// Per-point latent pairs (S_i, u_i) with cached log-likelihoods and one
/// random stream per point.
struct ChainState {
  std::vector<std::size_t> simplex;
  std::vector<double> u;  ///< (k+1) x N, point-major
  std::vector<double> log_lik;
  std::vector<Rng> rngs;
  int order = 1;
  std::uint64_t cache_version = 0;

  std::size_t size() const { return simplex.size(); }
  std::span<double> coords(std::size_t i) {
    return {u.data() + i * static_cast<std::size_t>(order), static_cast<std::size_t>(order)};
  }
  std::span<const double> coords(std::size_t i) const {
    return {u.data() + i * static_cast<std::size_t>(order), static_cast<std::size_t>(order)};
  }
  /// pushforward of (S_i, u_i) as an m-vector.
  Eigen::VectorXd latent(std::size_t i, const SimplexFamily& family) const;
};

/// Draws S_i from p and u_i uniformly, with point i's stream seeded from (seed, i).
ChainState init_chain(const ChainModel& model, std::uint64_t seed);

/// Recomputes cached likelihoods if they were computed under other parameters.
void refresh_cache(ChainState& state, const ChainModel& model);

struct Accumulators {
  QValues stats;
  std::size_t q_steps = 0;
  std::uint64_t c_proposed = 0;
  std::uint64_t c_accepted = 0;
  std::uint64_t u_proposed = 0;
  std::uint64_t u_accepted = 0;

  static Accumulators zeros(const ChainModel& model);
  Accumulators& operator+=(const Accumulators& other);
  /// Clears the statistics; acceptance counters are kept.
  void reset_statistics();
};

/// Independence Metropolis-Hastings move with the prior as proposal.
void c_step(ChainState& state, const ChainModel& model, Accumulators& acc);

/// Replaces one vertex slot of S_i by a uniformly drawn vertex, carrying
/// the slot's barycentric weight along.
void c_step_local(ChainState& state, const ChainModel& model, Accumulators& acc);

/// With probability 1/2 proposes u' = (1 - scale) u + scale f with f uniform
/// on the simplex, accepted only when the reverse proposal is feasible.
/// Otherwise takes a symmetric random-walk step in the plane sum(u) = 1 with
/// length log-uniform in [1e-4 scale, scale], rejected outside the simplex.
/// Either way the likelihood ratio decides. scale = 0 leaves the state unchanged.
void u_step(ChainState& state, const ChainModel& model, double scale, Accumulators& acc);

/// Adds z_i z_i^T, z_i x_i^T and an occupancy count for S_i.
void q_step(const ChainState& state, const ChainModel& model, const DataSet& data, Accumulators& acc);

/// Divides the accumulated statistics by the Q-step count and applies the
/// exact M-step. Throws InputError("no statistics accumulated") when no
/// Q action ran since the last M.
MStepResult m_step_stochastic(const Accumulators& acc, const Eigen::MatrixXd& xx, SigmaMode mode, FamilyPtr family,
                              const Eigen::MatrixXd* previous_vertices = nullptr);

struct McemConfig {
  std::uint64_t seed = 0;
  double proposal_scale = 0.3;
  bool local_c_step = false;
  SigmaMode sigma_mode = SigmaMode::Isotropic;
  bool record_encoding_rate = true;
  /// Exact log-likelihood after each M (only for families of dimension <= 1).
  bool record_log_likelihood = false;
};

struct McemReport {
  ModelParams params;
  std::vector<double> encoding_rate;   ///< after each M
  std::vector<double> log_likelihood;  ///< after each M when recorded
  std::vector<double> c_acceptance;    ///< C acceptance rate between consecutive Ms
  std::vector<double> u_acceptance;
  std::size_t m_steps = 0;
  std::size_t ridge_steps = 0;
  std::size_t sigma_floor_steps = 0;
};

/// Executes the regime's actions from `init`.
McemReport run_mcem(const DataSet& data, const ModelParams& init, const Regime& regime, const McemConfig& config);

/// Posterior means E[Z | x_i] as an N x m matrix: `burn_in` sweeps of C and
/// U moves, then the average of z_i over `samples` further sweeps.
Eigen::MatrixXd estimate_posterior_z(const DataSet& data, const ModelParams& params, int burn_in, int samples,
                                     const McemConfig& config);

}  // namespace smm
