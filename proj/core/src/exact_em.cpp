#include "smm/exact_em.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "smm/errors.hpp"
#include "smm/parallel.hpp"
#include "smm/rate.hpp"
#include "smm/truncated_normal.hpp"

namespace smm {
namespace {

constexpr double kDegeneratePrecision = 1e-12;
constexpr double kSeriesPrecision = 2.0;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Whitened view of a model with simplices of dimension <= 1.
struct EdgeModel {
  Eigen::MatrixXd y;  // whitened data, n x N
  Eigen::MatrixXd w;  // whitened vertices, n x m
  Eigen::MatrixXd direction;  // per active simplex: w_b - w_a
  std::vector<std::size_t> active;  // family positions with p_S > 0
  std::vector<int> a, b;
  std::vector<double> log_p;
  double log_norm = 0.0;

  EdgeModel(const DataSet& data, const ModelParams& params) {
    const auto& family = params.family();
    if (family.dimension() > 1) throw InputError("exact EM supports simplices of dimension 0 and 1 only");
    if (data.dim() != params.ambient_dim()) throw InputError("data dimension does not match model");
    y = params.sigma().whiten(data.points());
    w = params.sigma().whiten(params.vertices());
    log_norm = params.sigma().log_normalizer();
    for (std::size_t s = 0; s < family.size(); ++s) {
      if (!(params.p()(static_cast<Eigen::Index>(s)) > 0.0)) continue;
      const auto idx = family.indices(s);
      active.push_back(s);
      a.push_back(idx.front());
      b.push_back(idx.back());
      log_p.push_back(std::log(params.p()(static_cast<Eigen::Index>(s))));
    }
    direction.resize(w.rows(), static_cast<Eigen::Index>(active.size()));
    for (std::size_t j = 0; j < active.size(); ++j)
      direction.col(static_cast<Eigen::Index>(j)) = w.col(b[j]) - w.col(a[j]);
  }

  bool is_point(std::size_t j) const { return a[j] == b[j]; }
};

struct Term {
  double log_weight;
  double mean_t;
  double second_t;
  double resp;
};

// Fills terms for point i and returns log sum_S p_S q_{S,i}; sets fallback
// when responsibilities had to be made uniform.
double point_terms(const EdgeModel& model, Eigen::Index i, std::vector<Term>& terms, bool& fallback) {
  const std::size_t count = model.active.size();
  terms.resize(count);
  double max_lw = kNegInf;
  for (std::size_t j = 0; j < count; ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    const Eigen::VectorXd d = model.y.col(i) - model.w.col(model.a[j]);
    SegmentPosterior post;
    if (model.is_point(j)) {
      post.log_mass = model.log_norm - 0.5 * d.squaredNorm();
    } else {
      post = segment_posterior_whitened(d, model.direction.col(col), model.log_norm);
    }
    terms[j] = {model.log_p[j] + post.log_mass, post.mean_t, post.second_moment_t, 0.0};
    if (terms[j].log_weight > max_lw) max_lw = terms[j].log_weight;
  }
  fallback = !std::isfinite(max_lw);
  if (fallback) {
    for (auto& t : terms) t.resp = 1.0 / static_cast<double>(count);
    return max_lw;
  }
  double total = 0.0;
  for (auto& t : terms) {
    t.resp = std::exp(t.log_weight - max_lw);
    total += t.resp;
  }
  for (auto& t : terms) t.resp /= total;
  return max_lw + std::log(total);
}

}  // namespace

double SegmentPosterior::mass() const { return std::exp(log_mass); }

QValues QValues::zeros(std::size_t family_size, int vertex_count, int ambient_dim) {
  QValues out;
  out.q = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(family_size));
  out.zz = Eigen::MatrixXd::Zero(vertex_count, vertex_count);
  out.zx = Eigen::MatrixXd::Zero(vertex_count, ambient_dim);
  return out;
}

QValues& QValues::operator+=(const QValues& other) {
  q += other.q;
  zz += other.zz;
  zx += other.zx;
  count += other.count;
  return *this;
}

SegmentPosterior segment_posterior_whitened(const Eigen::Ref<const Eigen::VectorXd>& d,
                                            const Eigen::Ref<const Eigen::VectorXd>& w, double log_normalizer) {
  const double precision = w.squaredNorm();
  if (precision < kDegeneratePrecision) {
    return {log_normalizer - 0.5 * d.squaredNorm(), 0.5, 1.0 / 3.0};
  }
  const double slope = w.dot(d);
  if (precision < kSeriesPrecision) {
    const auto m = weakly_curved_on_unit_interval(slope, precision);
    return {log_normalizer - 0.5 * d.squaredNorm() + m.log_integral, m.mean, m.second_moment};
  }
  const double center = slope / precision;
  const double residual = (d - center * w).squaredNorm();
  const auto m = gaussian_on_unit_interval(center, precision);
  return {log_normalizer - 0.5 * residual + m.log_integral, m.mean, m.second_moment};
}

SegmentPosterior segment_posterior(const Eigen::VectorXd& x, const Eigen::VectorXd& v_a, const Eigen::VectorXd& v_b,
                                   const NoiseCovariance& sigma) {
  if (!x.allFinite() || !v_a.allFinite() || !v_b.allFinite()) throw InputError("segment posterior inputs must be finite");
  if (x.size() != sigma.dim() || v_a.size() != sigma.dim() || v_b.size() != sigma.dim())
    throw InputError("segment posterior dimension mismatch");
  const Eigen::VectorXd d = sigma.whiten(x - v_a);
  const Eigen::VectorXd w = sigma.whiten(v_b - v_a);
  return segment_posterior_whitened(d, w, sigma.log_normalizer());
}

EStepResult e_step(const DataSet& data, const ModelParams& params) {
  const EdgeModel model(data, params);
  const auto& family = params.family();
  const int m = params.vertex_count();
  const int n = params.ambient_dim();
  const std::size_t points = data.size();
  const std::size_t blocks = block_count(points);

  std::vector<QValues> partial(blocks);
  std::vector<double> partial_ll(blocks, 0.0);
  std::vector<std::size_t> partial_fallbacks(blocks, 0);

  for_each_block(points, [&](std::size_t block, std::size_t begin, std::size_t end) {
    QValues stats = QValues::zeros(family.size(), m, n);
    std::vector<Term> terms;
    Eigen::VectorXd ez(m);
    double ll = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const auto col = static_cast<Eigen::Index>(i);
      bool fallback = false;
      ll += point_terms(model, col, terms, fallback);
      if (fallback) ++partial_fallbacks[block];
      ez.setZero();
      for (std::size_t j = 0; j < terms.size(); ++j) {
        const double r = terms[j].resp;
        if (r == 0.0) continue;
        const int va = model.a[j];
        const int vb = model.b[j];
        stats.q(static_cast<Eigen::Index>(model.active[j])) += r;
        if (model.is_point(j)) {
          stats.zz(va, va) += r;
          ez(va) += r;
          continue;
        }
        const double et = terms[j].mean_t;
        const double et2 = terms[j].second_t;
        stats.zz(va, va) += r * (1.0 - 2.0 * et + et2);
        stats.zz(va, vb) += r * (et - et2);
        stats.zz(vb, va) += r * (et - et2);
        stats.zz(vb, vb) += r * et2;
        ez(va) += r * (1.0 - et);
        ez(vb) += r * et;
      }
      stats.zx.noalias() += ez * data.point(i).transpose();
      stats.count += 1.0;
    }
    partial[block] = std::move(stats);
    partial_ll[block] = ll;
  });

  EStepResult out;
  out.stats = QValues::zeros(family.size(), m, n);
  for (std::size_t b = 0; b < blocks; ++b) {
    out.stats += partial[b];
    out.log_likelihood += partial_ll[b];
    out.underflow_fallbacks += partial_fallbacks[b];
  }
  return out;
}

Eigen::MatrixXd responsibilities(const DataSet& data, const ModelParams& params) {
  const EdgeModel model(data, params);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(params.family().size()),
                                              static_cast<Eigen::Index>(data.size()));
  for_each_block(data.size(), [&](std::size_t, std::size_t begin, std::size_t end) {
    std::vector<Term> terms;
    for (std::size_t i = begin; i < end; ++i) {
      bool fallback = false;
      point_terms(model, static_cast<Eigen::Index>(i), terms, fallback);
      for (std::size_t j = 0; j < terms.size(); ++j)
        out(static_cast<Eigen::Index>(model.active[j]), static_cast<Eigen::Index>(i)) = terms[j].resp;
    }
  });
  return out;
}

Eigen::MatrixXd posterior_mean_z(const DataSet& data, const ModelParams& params) {
  const EdgeModel model(data, params);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(data.size()), params.vertex_count());
  for_each_block(data.size(), [&](std::size_t, std::size_t begin, std::size_t end) {
    std::vector<Term> terms;
    for (std::size_t i = begin; i < end; ++i) {
      const auto col = static_cast<Eigen::Index>(i);
      bool fallback = false;
      point_terms(model, col, terms, fallback);
      for (std::size_t j = 0; j < terms.size(); ++j) {
        const double r = terms[j].resp;
        if (model.is_point(j)) {
          out(col, model.a[j]) += r;
        } else {
          out(col, model.a[j]) += r * (1.0 - terms[j].mean_t);
          out(col, model.b[j]) += r * terms[j].mean_t;
        }
      }
    }
  });
  return out;
}

double log_likelihood(const DataSet& data, const ModelParams& params) {
  const EdgeModel model(data, params);
  std::vector<double> partial(block_count(data.size()), 0.0);
  for_each_block(data.size(), [&](std::size_t block, std::size_t begin, std::size_t end) {
    std::vector<Term> terms;
    double ll = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      bool fallback = false;
      ll += point_terms(model, static_cast<Eigen::Index>(i), terms, fallback);
    }
    partial[block] = ll;
  });
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

MStepResult m_step(const QValues& stats, const Eigen::MatrixXd& xx, SigmaMode mode, FamilyPtr family,
                   const Eigen::MatrixXd* previous_vertices) {
  const auto m = stats.zz.rows();
  const auto n = stats.zx.cols();
  if (!(stats.count > 0.0)) throw InputError("M-step needs statistics from at least one point");
  if (xx.rows() != n || xx.cols() != n) throw InputError("Q_XX dimension does not match statistics");

  MStepDiagnostics diag;
  const double q_total = stats.q.sum();
  if (!(q_total > 0.0)) throw NumericalError("M-step received no posterior mass");
  Eigen::VectorXd p = stats.q / q_total;

  const Eigen::MatrixXd zz = 0.5 * (stats.zz + stats.zz.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(zz, Eigen::EigenvaluesOnly);
  const double largest = eig.eigenvalues().maxCoeff();
  const double smallest = eig.eigenvalues().minCoeff();
  Eigen::MatrixXd vertices;  // n x m
  if (!(largest > 0.0) || smallest <= 1e-12 * largest) {
    diag.ridge_applied = true;
    double lambda = 1e-9 * zz.trace() / static_cast<double>(m);
    if (!(lambda > 0.0)) lambda = 1e-9;
    Eigen::MatrixXd rhs = stats.zx;  // m x n
    if (previous_vertices) rhs += lambda * previous_vertices->transpose();
    const Eigen::MatrixXd ridged = zz + lambda * Eigen::MatrixXd::Identity(m, m);
    vertices = ridged.ldlt().solve(rhs).transpose();
  } else {
    vertices = zz.ldlt().solve(stats.zx).transpose();
  }
  if (!vertices.allFinite()) throw NumericalError("M-step produced non-finite vertices");

  const Eigen::MatrixXd cross = vertices * stats.zx;  // n x n
  Eigen::MatrixXd scatter = xx - cross - cross.transpose() + vertices * zz * vertices.transpose();
  scatter = 0.5 * (scatter + scatter.transpose()).eval();
  Eigen::MatrixXd sigma = scatter / stats.count;

  double floor = 1e-12 * sigma.trace() / static_cast<double>(n);
  if (!(floor > 0.0)) floor = 1e-12 * xx.trace() / (stats.count * static_cast<double>(n));
  if (!(floor > 0.0)) floor = 1e-300;

  NoiseCovariance noise = [&] {
    switch (mode) {
      case SigmaMode::Isotropic: {
        double v = sigma.trace() / static_cast<double>(n);
        if (!(v >= floor)) {
          v = floor;
          diag.sigma_floored = true;
        }
        return NoiseCovariance::isotropic(static_cast<int>(n), v);
      }
      case SigmaMode::Diagonal: {
        Eigen::VectorXd d = sigma.diagonal();
        for (auto& v : d) {
          if (!(v >= floor)) {
            v = floor;
            diag.sigma_floored = true;
          }
        }
        return NoiseCovariance::diagonal(std::move(d));
      }
      case SigmaMode::Full:
        break;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> se(sigma);
    if ((se.eigenvalues().array() < floor).any()) {
      diag.sigma_floored = true;
      const Eigen::VectorXd values = se.eigenvalues().cwiseMax(floor);
      sigma = se.eigenvectors() * values.asDiagonal() * se.eigenvectors().transpose();
      sigma = 0.5 * (sigma + sigma.transpose()).eval();
    }
    return NoiseCovariance::full(sigma);
  }();

  return {ModelParams(std::move(family), std::move(p), std::move(vertices), std::move(noise)), diag};
}

double expected_complete_log_likelihood(const QValues& stats, const Eigen::MatrixXd& xx, const ModelParams& params) {
  const Eigen::MatrixXd& v = params.vertices();
  const Eigen::MatrixXd sigma = params.sigma().matrix();
  const Eigen::LDLT<Eigen::MatrixXd> solver(sigma);
  const Eigen::MatrixXd scatter =
      xx - v * stats.zx - (v * stats.zx).transpose() + v * stats.zz * v.transpose();
  const double quad = solver.solve(scatter).trace();
  double value = stats.count * params.sigma().log_normalizer() - 0.5 * quad;
  for (Eigen::Index s = 0; s < stats.q.size(); ++s) {
    if (stats.q(s) == 0.0) continue;
    value += stats.q(s) * std::log(params.p()(s));
  }
  return value;
}

std::string to_string(Termination reason) {
  switch (reason) {
    case Termination::MaxIterations:
      return "max_iterations";
    case Termination::Converged:
      return "converged";
    case Termination::NotStarted:
      return "not_started";
    case Termination::NumericalFailure:
      return "numerical_failure";
  }
  return "unknown";
}

FitReport fit(const DataSet& data, const ModelParams& init, const FitConfig& config) {
  if (config.max_iter < 0) throw InputError("max_iter must be non-negative");
  FitReport report{init, {}, {}, 0, Termination::MaxIterations, 0, 0, 0, {}};
  const Eigen::MatrixXd xx = data.second_moment_sum();
  const double threshold = config.tol * static_cast<double>(data.size());

  for (int t = 0;; ++t) {
    const EStepResult e = e_step(data, report.params);
    report.underflow_fallbacks += e.underflow_fallbacks;
    report.log_likelihood.push_back(e.log_likelihood);
    if (config.record_encoding_rate) report.encoding_rate.push_back(intrinsic_encoding_rate(report.params).total);
    if (t > 0 && config.tol > 0.0) {
      const double change = std::fabs(report.log_likelihood[static_cast<std::size_t>(t)] -
                                      report.log_likelihood[static_cast<std::size_t>(t - 1)]);
      if (change < threshold) {
        report.termination = Termination::Converged;
        break;
      }
    }
    if (t == config.max_iter) break;
    const Eigen::MatrixXd previous = report.params.vertices();
    std::optional<MStepResult> next;
    try {
      next.emplace(m_step(e.stats, xx, config.sigma_mode, report.params.family_ptr(), &previous));
    } catch (const NumericalError& err) {
      report.notes.push_back("iteration " + std::to_string(t + 1) + ": " + err.what());
      report.termination = Termination::NumericalFailure;
      break;
    }
    report.ridge_steps += next->diagnostics.ridge_applied ? 1 : 0;
    report.sigma_floor_steps += next->diagnostics.sigma_floored ? 1 : 0;
    report.params = std::move(next->params);
    report.iterations = t + 1;
  }
  return report;
}

}  // namespace smm
