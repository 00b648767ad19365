#include "smm/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "smm/dirichlet.hpp"
#include "smm/errors.hpp"
#include "smm/sampling.hpp"

namespace smm {
namespace {

void check_cap(int total, int parts, std::uint64_t cap) {
  // Compositions of `total` into `parts` are multisets of size `total`.
  const std::uint64_t count = total == 0 ? 1 : family_size(total - 1, parts);
  if (count > cap) throw InputError("family too large: expansion exceeds " + std::to_string(cap) + " components");
}

void compose(int remaining, std::size_t part, std::vector<int>& counts,
             const std::function<void(std::span<const int>)>& fn) {
  if (part + 1 == counts.size()) {
    counts[part] = remaining;
    fn(counts);
    return;
  }
  for (int c = remaining; c >= 0; --c) {
    counts[part] = c;
    compose(remaining - c, part + 1, counts, fn);
  }
}

}  // namespace

DirichletMixture::DirichletMixture(int coords, std::vector<Component> components)
    : coords_(coords), components_(std::move(components)) {
  if (coords < 1) throw InputError("mixture needs at least one coordinate");
  if (components_.empty()) throw InputError("mixture needs at least one component");
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight >= 0.0)) throw InputError("mixture weights must be non-negative");
    if (c.alpha.size() != static_cast<std::size_t>(coords)) throw InputError("mixture parameter has wrong length");
    if (std::any_of(c.alpha.begin(), c.alpha.end(), [](int a) { return a < 1; }))
      throw InputError("mixture parameters must be integers >= 1");
    total += c.weight;
  }
  if (std::fabs(total - 1.0) > 1e-12) throw InputError("mixture weights must sum to 1");
}

DirichletMixture DirichletMixture::merged(int coords, std::vector<Component> components, double drop_below) {
  std::map<std::vector<int>, double> sums;
  for (auto& c : components) sums[std::move(c.alpha)] += c.weight;
  std::vector<Component> kept;
  double total = 0.0;
  for (auto& [alpha, weight] : sums) {
    if (weight < drop_below) continue;
    total += weight;
    kept.push_back({weight, alpha});
  }
  if (kept.empty()) throw InputError("mixture has no components above the weight floor");
  for (auto& c : kept) c.weight /= total;
  return DirichletMixture(coords, std::move(kept));
}

double DirichletMixture::density(std::span<const double> z) const {
  double value = 0.0;
  for (const auto& c : components_) value += c.weight * dirichlet_density(c.alpha, z);
  return value;
}

Eigen::VectorXd DirichletMixture::mean() const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(coords_);
  for (const auto& c : components_) out += c.weight * dirichlet_moments(c.alpha).mean;
  return out;
}

Eigen::MatrixXd DirichletMixture::covariance() const {
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(coords_, coords_);
  Eigen::VectorXd first = Eigen::VectorXd::Zero(coords_);
  for (const auto& c : components_) {
    const auto mom = dirichlet_moments(c.alpha);
    second += c.weight * (mom.covariance + mom.mean * mom.mean.transpose());
    first += c.weight * mom.mean;
  }
  return second - first * first.transpose();
}

double DirichletMixture::total_weight() const {
  double total = 0.0;
  for (const auto& c : components_) total += c.weight;
  return total;
}

void for_each_composition(int total, int parts, const std::function<void(std::span<const int>)>& fn) {
  if (total < 0 || parts < 1) throw InputError("composition needs total >= 0 and parts >= 1");
  std::vector<int> counts(static_cast<std::size_t>(parts), 0);
  compose(total, 0, counts, fn);
}

double log_multinomial(std::span<const int> counts) {
  int total = 0;
  double value = 0.0;
  for (int c : counts) {
    total += c;
    value -= std::lgamma(c + 1.0);
  }
  return value + std::lgamma(total + 1.0);
}

DirichletMixture raise_degree(std::span<const int> alpha, int k_target, std::uint64_t cap) {
  const int coords = static_cast<int>(alpha.size());
  int order = 0;
  for (int a : alpha) {
    if (a < 1) throw InputError("degree raising needs parameters >= 1");
    order += a;
  }
  const int raise = k_target - (order - 1);
  if (raise < 0) throw InputError("target degree is below the current degree");
  check_cap(raise, coords, cap);

  const double log_beta = log_multivariate_beta(alpha);
  std::vector<DirichletMixture::Component> components;
  std::vector<int> raised(alpha.size());
  for_each_composition(raise, coords, [&](std::span<const int> beta) {
    for (std::size_t j = 0; j < raised.size(); ++j) raised[j] = alpha[j] + beta[j];
    const double log_w = log_multinomial(beta) + log_multivariate_beta(raised) - log_beta;
    components.push_back({std::exp(log_w), raised});
  });
  return DirichletMixture(coords, std::move(components));
}

std::vector<std::vector<int>> full_support_parameters(int total, int coords) {
  std::vector<std::vector<int>> out;
  if (total < coords) return out;
  for_each_composition(total - coords, coords, [&](std::span<const int> beta) {
    std::vector<int> alpha(beta.begin(), beta.end());
    for (int& a : alpha) ++a;
    out.push_back(std::move(alpha));
  });
  return out;
}

Eigen::MatrixXd interior_points(int coords, int count, Rng& rng, double min_coord) {
  if (min_coord * coords >= 1.0) throw InputError("interior margin too large for the simplex");
  Eigen::MatrixXd points(coords, count);
  std::vector<double> u(static_cast<std::size_t>(coords));
  for (int r = 0; r < count; ++r) {
    do {
      sample_unit_simplex_into(u, rng);
    } while (*std::min_element(u.begin(), u.end()) < min_coord);
    for (int j = 0; j < coords; ++j) points(j, r) = u[static_cast<std::size_t>(j)];
  }
  return points;
}

Eigen::MatrixXd evaluation_matrix(const std::vector<std::vector<int>>& alphas, const Eigen::MatrixXd& points) {
  Eigen::MatrixXd out(points.cols(), static_cast<Eigen::Index>(alphas.size()));
  for (Eigen::Index r = 0; r < points.cols(); ++r) {
    const Eigen::VectorXd z = points.col(r);
    for (std::size_t c = 0; c < alphas.size(); ++c)
      out(r, static_cast<Eigen::Index>(c)) = dirichlet_density(alphas[c], std::span<const double>(z.data(), z.size()));
  }
  return out;
}

RankCheck independence_check(int dimension, int coords, Rng& rng, std::uint64_t cap) {
  if (dimension < 0 || coords < 1) throw InputError("independence check needs k >= 0 and coords >= 1");
  if (dimension + 1 >= coords) check_cap(dimension + 1 - coords, coords, cap);
  const auto basis = full_support_parameters(dimension + 1, coords);
  RankCheck out;
  out.expected = static_cast<int>(basis.size());
  if (basis.empty()) return out;

  const Eigen::MatrixXd points = interior_points(coords, out.expected + 20, rng);
  const Eigen::MatrixXd values = evaluation_matrix(basis, points);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(values);
  const auto& sv = svd.singularValues();
  const double threshold = 1e-8 * sv(0);
  out.rank = static_cast<int>((sv.array() > threshold).count());
  return out;
}

DirichletMixture kde_point(std::span<const double> y, int l, std::uint64_t cap) {
  const int coords = static_cast<int>(y.size());
  if (coords < 1) throw InputError("kde point needs at least one coordinate");
  if (l < 0) throw InputError("smoothing level must be non-negative");
  double total = 0.0;
  for (double v : y) {
    if (!(v >= -1e-9) || !std::isfinite(v)) throw InputError("kde point is not on the simplex");
    total += v;
  }
  if (std::fabs(total - 1.0) > 1e-9) throw InputError("kde point is not on the simplex");
  check_cap(l, coords, cap);

  std::vector<DirichletMixture::Component> components;
  for_each_composition(l, coords, [&](std::span<const int> alpha) {
    double log_w = log_multinomial(alpha);
    for (std::size_t j = 0; j < alpha.size(); ++j) {
      if (alpha[j] == 0) continue;
      if (y[j] <= 0.0) return;
      log_w += alpha[j] * std::log(y[j]);
    }
    std::vector<int> params(alpha.begin(), alpha.end());
    for (int& a : params) ++a;
    components.push_back({std::exp(log_w), std::move(params)});
  });
  return DirichletMixture::merged(coords, std::move(components));
}

DirichletMixture kde_empirical(const Eigen::MatrixXd& samples, int l, std::uint64_t cap) {
  if (samples.cols() < 1) throw InputError("kde needs at least one sample");
  const int coords = static_cast<int>(samples.rows());
  const double share = 1.0 / static_cast<double>(samples.cols());
  std::vector<DirichletMixture::Component> components;
  for (Eigen::Index i = 0; i < samples.cols(); ++i) {
    const Eigen::VectorXd y = samples.col(i);
    const auto point = kde_point(std::span<const double>(y.data(), y.size()), l, cap);
    for (const auto& c : point.components()) components.push_back({share * c.weight, c.alpha});
  }
  return DirichletMixture::merged(coords, std::move(components));
}

std::vector<ConvergenceRow> convergence_diagnostic(std::span<const double> y, std::span<const int> l_values,
                                                   std::uint64_t cap) {
  const Eigen::Map<const Eigen::VectorXd> target(y.data(), static_cast<Eigen::Index>(y.size()));
  std::vector<ConvergenceRow> rows;
  for (int l : l_values) {
    const auto mixture = kde_point(y, l, cap);
    ConvergenceRow row;
    row.l = l;
    row.mean_error = (mixture.mean() - target).cwiseAbs().maxCoeff();
    row.max_covariance = mixture.covariance().cwiseAbs().maxCoeff();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace smm
