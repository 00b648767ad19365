#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace smm::oracle {
namespace {

using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VectorXld = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

// Uniform point on the k-simplex from sorted uniforms.
std::vector<double> simplex_point(int order, Rng& rng) {
  std::vector<double> cuts(static_cast<std::size_t>(order - 1));
  for (auto& c : cuts) c = rng.uniform();
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> u(static_cast<std::size_t>(order));
  double prev = 0.0;
  for (std::size_t j = 0; j + 1 < u.size(); ++j) {
    u[j] = cuts[j] - prev;
    prev = cuts[j];
  }
  u.back() = 1.0 - prev;
  return u;
}

long double q_value(const QValues& stats, const MatrixXld& xx, const VectorXld& p, const MatrixXld& v,
                    const MatrixXld& sigma) {
  const MatrixXld zz = stats.zz.cast<long double>();
  const MatrixXld zx = stats.zx.cast<long double>();
  const long double n = static_cast<long double>(v.rows());
  const long double count = static_cast<long double>(stats.count);
  const MatrixXld inv = sigma.inverse();
  const MatrixXld scatter = xx - v * zx - (v * zx).transpose() + v * zz * v.transpose();
  long double value = -0.5L * n * count * std::log(2.0L * std::numbers::pi_v<long double>) -
                      0.5L * count * std::log(sigma.determinant()) - 0.5L * (inv * scatter).trace();
  for (Eigen::Index s = 0; s < p.size(); ++s) {
    if (stats.q(s) > 0.0) value += static_cast<long double>(stats.q(s)) * std::log(p(s));
  }
  return value;
}

}  // namespace

double gaussian_density(const Eigen::VectorXd& d, const Eigen::MatrixXd& sigma) {
  const double n = static_cast<double>(d.size());
  const double quad = d.dot(sigma.inverse() * d);
  return std::exp(-0.5 * quad) / std::sqrt(std::pow(2.0 * std::numbers::pi, n) * sigma.determinant());
}

SegmentMoments segment_trapezoid(const Eigen::VectorXd& x, const Eigen::VectorXd& v_a, const Eigen::VectorXd& v_b,
                                 const Eigen::MatrixXd& sigma, int nodes) {
  const Eigen::MatrixXd inv = sigma.inverse();
  const double norm = 1.0 / std::sqrt(std::pow(2.0 * std::numbers::pi, static_cast<double>(x.size())) * sigma.determinant());
  const double h = 1.0 / (nodes - 1);
  double m0 = 0.0, m1 = 0.0, m2 = 0.0;
  for (int j = 0; j < nodes; ++j) {
    const double t = j * h;
    const Eigen::VectorXd d = x - v_a - t * (v_b - v_a);
    const double f = norm * std::exp(-0.5 * d.dot(inv * d));
    const double w = (j == 0 || j == nodes - 1) ? 0.5 * h : h;
    m0 += w * f;
    m1 += w * f * t;
    m2 += w * f * t * t;
  }
  return {m0, m1 / m0, m2 / m0};
}

QValues monte_carlo_e_step(const DataSet& data, const ModelParams& params, std::size_t draws, Rng& rng) {
  const auto& family = params.family();
  const int m = params.vertex_count();
  const int n = params.ambient_dim();
  const Eigen::MatrixXd sigma = params.sigma().matrix();
  const Eigen::MatrixXd inv = sigma.inverse();
  std::vector<double> cumulative(family.size());
  std::partial_sum(params.p().begin(), params.p().end(), cumulative.begin());

  QValues out = QValues::zeros(family.size(), m, n);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Eigen::VectorXd x = data.point(i);
    Eigen::VectorXd q = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(family.size()));
    Eigen::MatrixXd zz = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd z_sum = Eigen::VectorXd::Zero(m);
    double total = 0.0;
    for (std::size_t d = 0; d < draws; ++d) {
      const double r = rng.uniform() * cumulative.back();
      const auto s = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), r) - cumulative.begin());
      const auto idx = family.indices(std::min(s, family.size() - 1));
      const auto u = simplex_point(static_cast<int>(idx.size()), rng);
      Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
      for (std::size_t l = 0; l < idx.size(); ++l) z(idx[l]) += u[l];
      const Eigen::VectorXd resid = x - params.vertices() * z;
      const double w = std::exp(-0.5 * resid.dot(inv * resid));
      total += w;
      q(static_cast<Eigen::Index>(std::min(s, family.size() - 1))) += w;
      zz += w * z * z.transpose();
      z_sum += w * z;
    }
    out.q += q / total;
    out.zz += zz / total;
    out.zx += (z_sum / total) * x.transpose();
    out.count += 1.0;
  }
  return out;
}

std::vector<std::vector<int>> brute_force_family(int dimension, int vertex_count) {
  std::vector<std::vector<int>> out;
  std::vector<int> seq(static_cast<std::size_t>(dimension + 1), 0);
  while (true) {
    out.push_back(seq);
    int pos = dimension;
    while (pos >= 0 && seq[static_cast<std::size_t>(pos)] == vertex_count - 1) --pos;
    if (pos < 0) break;
    const int next = seq[static_cast<std::size_t>(pos)] + 1;
    for (int j = pos; j <= dimension; ++j) seq[static_cast<std::size_t>(j)] = next;
  }
  return out;
}

double q_function(const QValues& stats, const Eigen::MatrixXd& xx, const Eigen::VectorXd& p, const Eigen::MatrixXd& v,
                  const Eigen::MatrixXd& sigma) {
  return static_cast<double>(
      q_value(stats, xx.cast<long double>(), p.cast<long double>(), v.cast<long double>(), sigma.cast<long double>()));
}

Eigen::VectorXd q_gradient(const QValues& stats, const Eigen::MatrixXd& xx, const Eigen::VectorXd& p,
                           const Eigen::MatrixXd& v, const Eigen::MatrixXd& sigma, SigmaMode mode, double step) {
  const MatrixXld xx_l = xx.cast<long double>();
  const VectorXld p0 = p.cast<long double>();
  const MatrixXld v0 = v.cast<long double>();
  const MatrixXld s0 = sigma.cast<long double>();
  std::vector<long double> grad;

  // Five-point stencil along a direction with step h.
  auto derivative = [&](auto&& evaluate, long double h) {
    return (-evaluate(2 * h) + 8 * evaluate(h) - 8 * evaluate(-h) + evaluate(-2 * h)) / (12 * h);
  };

  const long double v_scale = std::max(1.0L, v0.cwiseAbs().maxCoeff());
  for (Eigen::Index r = 0; r < v0.rows(); ++r) {
    for (Eigen::Index c = 0; c < v0.cols(); ++c) {
      grad.push_back(derivative(
          [&](long double h) {
            MatrixXld vv = v0;
            vv(r, c) += h;
            return q_value(stats, xx_l, p0, vv, s0);
          },
          step * v_scale));
    }
  }

  std::vector<Eigen::Index> support;
  for (Eigen::Index s = 0; s < p0.size(); ++s)
    if (stats.q(s) > 0.0) support.push_back(s);
  for (std::size_t j = 1; j < support.size(); ++j) {
    const long double h = step * std::min(p0(support[0]), p0(support[j]));
    grad.push_back(derivative(
        [&](long double d) {
          VectorXld pp = p0;
          pp(support[j]) += d;
          pp(support[0]) -= d;
          return q_value(stats, xx_l, pp, v0, s0);
        },
        h));
  }

  const auto n = s0.rows();
  const long double s_scale = s0.diagonal().minCoeff();
  auto sigma_direction = [&](const MatrixXld& dir) {
    grad.push_back(derivative([&](long double h) { return q_value(stats, xx_l, p0, v0, s0 + h * dir); },
                              step * s_scale));
  };
  if (mode == SigmaMode::Isotropic) {
    sigma_direction(MatrixXld::Identity(n, n));
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i; j < n; ++j) {
        if (mode == SigmaMode::Diagonal && i != j) continue;
        MatrixXld dir = MatrixXld::Zero(n, n);
        dir(i, j) = 1.0L;
        dir(j, i) = 1.0L;
        sigma_direction(dir);
      }
    }
  }

  Eigen::VectorXd out(static_cast<Eigen::Index>(grad.size()));
  for (std::size_t j = 0; j < grad.size(); ++j) out(static_cast<Eigen::Index>(j)) = static_cast<double>(grad[j]);
  return out;
}

Eigen::MatrixXd triangle_posterior_histogram(const Eigen::VectorXd& x, const Eigen::MatrixXd& vertices,
                                             const Eigen::MatrixXd& sigma, int resolution, int bins) {
  // Split the simplex into resolution^2 congruent triangles and use the
  // centroid rule on each; bin edges fall on the lattice lines.
  Eigen::MatrixXd hist = Eigen::MatrixXd::Zero(bins, bins);
  const Eigen::MatrixXd inv = sigma.inverse();
  auto add = [&](double u0, double u1) {
    const Eigen::Vector3d u(u0, u1, 1.0 - u0 - u1);
    const Eigen::VectorXd d = x - vertices * u;
    const double f = std::exp(-0.5 * d.dot(inv * d));
    const int b0 = std::min(bins - 1, static_cast<int>(u0 * bins));
    const int b1 = std::min(bins - 1, static_cast<int>(u1 * bins));
    hist(b0, b1) += f;
  };
  const double r = resolution;
  for (int i = 0; i < resolution; ++i) {
    for (int j = 0; i + j < resolution; ++j) {
      add((i + 1.0 / 3.0) / r, (j + 1.0 / 3.0) / r);
      if (i + j + 1 < resolution) add((i + 2.0 / 3.0) / r, (j + 2.0 / 3.0) / r);
    }
  }
  return hist / hist.sum();
}

Matching match_columns(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate) {
  std::vector<int> perm(static_cast<std::size_t>(truth.cols()));
  std::iota(perm.begin(), perm.end(), 0);
  Matching best{perm, std::numeric_limits<double>::infinity()};
  do {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < truth.cols(); ++j)
      worst = std::max(worst, (truth.col(j) - estimate.col(perm[static_cast<std::size_t>(j)])).norm());
    if (worst < best.max_distance) best = {perm, worst};
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace smm::oracle
