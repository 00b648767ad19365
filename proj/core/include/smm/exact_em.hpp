#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "smm/model.hpp"

namespace smm {

/// Posterior sufficient statistics: q_S, Q_ZZ (m x m) and Q_ZX (m x n).
/// Q_XX depends only on the data and lives with the DataSet.
struct QValues {
  Eigen::VectorXd q;
  Eigen::MatrixXd zz;
  Eigen::MatrixXd zx;
  double count = 0.0;

  static QValues zeros(std::size_t family_size, int vertex_count, int ambient_dim);
  QValues& operator+=(const QValues& other);
};

/// Evidence and posterior moments of the barycentric parameter t in [0, 1]
/// along a segment from v_a to v_b.
struct SegmentPosterior {
  double log_mass = 0.0;  ///< log of int_0^1 rho_Sigma(x - v_a - t (v_b - v_a)) dt
  double mean_t = 0.5;
  double second_moment_t = 1.0 / 3.0;

  double mass() const;
};

/// Closed-form evidence and truncated-Gaussian moments. The integral is
/// taken against dt on [0, 1], independent of the segment's length.
/// Throws InputError on non-finite inputs.
SegmentPosterior segment_posterior(const Eigen::VectorXd& x, const Eigen::VectorXd& v_a, const Eigen::VectorXd& v_b,
                                   const NoiseCovariance& sigma);

/// Same computation on whitened vectors: d = L^{-1}(x - v_a), w = L^{-1}(v_b - v_a).
/// log_normalizer is sigma.log_normalizer().
SegmentPosterior segment_posterior_whitened(const Eigen::Ref<const Eigen::VectorXd>& d,
                                            const Eigen::Ref<const Eigen::VectorXd>& w, double log_normalizer);

struct EStepResult {
  QValues stats;
  double log_likelihood = 0.0;
  /// Points whose total evidence was degenerate and that fell back to
  /// uniform responsibilities over the support of p.
  std::size_t underflow_fallbacks = 0;
};

/// Exact E-step for families of dimension <= 1. Also returns the log-likelihood
/// of `params`, which falls out of the same evidence computation.
EStepResult e_step(const DataSet& data, const ModelParams& params);

/// Per-point responsibilities P(C_i = S | x_i) as a |A| x N matrix.
Eigen::MatrixXd responsibilities(const DataSet& data, const ModelParams& params);

/// Per-point posterior means E[Z | x_i] as an N x m matrix (dimension <= 1).
Eigen::MatrixXd posterior_mean_z(const DataSet& data, const ModelParams& params);

/// Sum over points of log sum_S p_S q_{S,i}.
double log_likelihood(const DataSet& data, const ModelParams& params);

struct MStepDiagnostics {
  bool ridge_applied = false;
  bool sigma_floored = false;
};

struct MStepResult {
  ModelParams params;
  MStepDiagnostics diagnostics;
};

/// Maximizes the expected complete-data log-likelihood:
///   p = q / sum q,  V = Q_ZX^T Q_ZZ^{-1} (n x m orientation),
///   Sigma = (Q_XX - V Q_ZX - Q_ZX^T V^T + V Q_ZZ V^T) / N,
/// projected to the trace/n or the diagonal for the restricted modes.
///
/// A near-singular Q_ZZ (smallest eigenvalue below 1e-12 of the largest) is
/// ridge-regularized with lambda = 1e-9 trace(Q_ZZ)/m, pulling unused
/// vertices towards `previous_vertices` when given. Sigma eigenvalues are
/// floored at 1e-12 trace.
MStepResult m_step(const QValues& stats, const Eigen::MatrixXd& xx, SigmaMode mode, FamilyPtr family,
                   const Eigen::MatrixXd* previous_vertices = nullptr);

/// Q(theta, theta_old) assembled from the statistics: the function m_step maximizes.
double expected_complete_log_likelihood(const QValues& stats, const Eigen::MatrixXd& xx, const ModelParams& params);

struct FitConfig {
  int max_iter = 500;
  /// Stop once |L_t - L_{t-1}| < tol * N. Zero runs exactly max_iter steps.
  double tol = 1e-8;
  SigmaMode sigma_mode = SigmaMode::Isotropic;
  bool record_encoding_rate = true;
};

enum class Termination { MaxIterations, Converged, NotStarted, NumericalFailure };
std::string to_string(Termination reason);

/// Outcome of a fit: final parameters and per-iteration traces.
struct FitReport {
  ModelParams params;
  /// log_likelihood[t] is L at the parameters after t updates.
  std::vector<double> log_likelihood;
  /// Intrinsic encoding rate (nats) after each update, starting at t = 0.
  std::vector<double> encoding_rate;
  int iterations = 0;
  Termination termination = Termination::NotStarted;
  std::size_t ridge_steps = 0;
  std::size_t sigma_floor_steps = 0;
  std::size_t underflow_fallbacks = 0;
  /// Messages from numerical failures that stopped the iteration early.
  std::vector<std::string> notes;
};

/// Alternates e_step and m_step from `init` (family dimension <= 1).
FitReport fit(const DataSet& data, const ModelParams& init, const FitConfig& config);

}  // namespace smm
