#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "smm/dirichlet.hpp"
#include "smm/errors.hpp"
#include "smm/sampling.hpp"
#include "smm/simplex.hpp"

using namespace smm;

namespace {

std::vector<std::vector<int>> family_indices(const SimplexFamily& family) {
  std::vector<std::vector<int>> out;
  for (std::size_t s = 0; s < family.size(); ++s) {
    const auto idx = family.indices(s);
    out.emplace_back(idx.begin(), idx.end());
  }
  return out;
}

// Integer parameter vectors with entries >= 1, `coords` entries, sum <= max_total.
std::vector<std::vector<int>> small_alphas(int coords, int max_total) {
  std::vector<std::vector<int>> out;
  std::vector<int> alpha(static_cast<std::size_t>(coords), 1);
  while (true) {
    if (std::accumulate(alpha.begin(), alpha.end(), 0) <= max_total) out.push_back(alpha);
    std::size_t j = 0;
    while (j < alpha.size() && ++alpha[j] > max_total) alpha[j++] = 1;
    if (j == alpha.size()) break;
  }
  return out;
}

}  // namespace

TEST_SUITE("simplex_core") {
  TEST_CASE("enumeration matches the documented examples") {
    const auto points = enumerate_simplices(0, 3);
    CHECK(family_indices(*points) == std::vector<std::vector<int>>{{0}, {1}, {2}});

    const auto edges = enumerate_simplices(1, 3);
    CHECK(family_indices(*edges) ==
          std::vector<std::vector<int>>{{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}});
    CHECK(edges->simplex(1).label() == "(1,2)");

    CHECK(enumerate_simplices(3, 7)->size() == 210);
  }

  TEST_CASE("enumeration agrees with the odometer and ranks round-trip") {
    for (int k = 0; k <= 4; ++k) {
      for (int m = 1; m <= 6; ++m) {
        const auto family = enumerate_simplices(k, m);
        const auto brute = oracle::brute_force_family(k, m);
        REQUIRE(family_indices(*family) == brute);
        CHECK(family->size() == family_size(k, m));
        for (std::size_t s = 0; s < family->size(); ++s) {
          CHECK(family->index_of(family->indices(s)) == s);
          CHECK(family->index_of(family->simplex(s)) == s);
        }
      }
    }
  }

  TEST_CASE("oversized families are rejected") {
    CHECK_THROWS_WITH_AS(enumerate_simplices(10, 60), doctest::Contains("family too large"), InputError);
    CHECK_THROWS_AS(enumerate_simplices(3, 7, 100), InputError);
    CHECK_NOTHROW(enumerate_simplices(3, 7, 210));
  }

  TEST_CASE("combinatorial simplex views") {
    const CombinatorialSimplex s({2, 0, 1});
    CHECK(s.dimension() == 2);
    CHECK(s.indices() == std::vector<int>{0, 0, 2});
    CHECK(s.support() == std::vector<int>{0, 2});
    CHECK(s.degenerate());
    CHECK_FALSE(s.full_support());
    const int idx[3] = {2, 0, 0};
    CHECK(CombinatorialSimplex::from_indices(idx, 3) == s);
    CHECK_THROWS_AS(CombinatorialSimplex({0, 0}), InputError);
    CHECK_THROWS_AS(CombinatorialSimplex({1, -1}), InputError);
  }

  TEST_CASE("full-support filter") {
    const auto family = enumerate_simplices(2, 2);
    const auto positions = family->full_support_positions();
    REQUIRE(positions.size() == 2);
    for (auto s : positions) CHECK(family->support_size(s) == 2);
  }

  TEST_CASE("pushforward") {
    const std::vector<double> u{0.3, 0.7};
    CHECK(pushforward(CombinatorialSimplex({2, 0, 0}), u) == std::vector<double>{1.0, 0.0, 0.0});
    CHECK(pushforward(CombinatorialSimplex({1, 1, 0}), u) == std::vector<double>{0.3, 0.7, 0.0});
    const auto z = pushforward(CombinatorialSimplex({2, 1}), std::vector<double>{0.2, 0.3, 0.5});
    CHECK(z[0] == doctest::Approx(0.5));
    CHECK(z[1] == doctest::Approx(0.5));
    CHECK_THROWS_AS(pushforward(CombinatorialSimplex({2, 1}), u), InputError);
  }

  TEST_CASE("unit simplex sampling") {
    Rng rng(11);
    CHECK(sample_unit_simplex(0, SimplexSampler::Exponential, rng) == std::vector<double>{1.0});
    CHECK(sample_unit_simplex(0, SimplexSampler::SortedUniform, rng) == std::vector<double>{1.0});

    const int draws = 100000;
    for (auto method : {SimplexSampler::Exponential, SimplexSampler::SortedUniform}) {
      Eigen::Vector3d sum = Eigen::Vector3d::Zero();
      Eigen::Vector3d sq = Eigen::Vector3d::Zero();
      for (int i = 0; i < draws; ++i) {
        const auto u = sample_unit_simplex(2, method, rng);
        CHECK(std::accumulate(u.begin(), u.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
        for (int j = 0; j < 3; ++j) {
          sum(j) += u[static_cast<std::size_t>(j)];
          sq(j) += u[static_cast<std::size_t>(j)] * u[static_cast<std::size_t>(j)];
        }
      }
      const double var_true = 1.0 / 18.0;
      const double mean_se = std::sqrt(var_true / draws);
      for (int j = 0; j < 3; ++j) {
        const double mean = sum(j) / draws;
        CHECK(std::fabs(mean - 1.0 / 3.0) <= 3.0 * mean_se);
        const double var = sq(j) / draws - mean * mean;
        // Var of (u - mean)^2 for Beta(1, 2) is E(u-mu)^4 - var^2 = 1/135 - 1/324.
        const double var_se = std::sqrt((1.0 / 135.0 - 1.0 / 324.0) / draws);
        CHECK(std::fabs(var - var_true) <= 3.0 * var_se);
      }
    }
  }

  TEST_CASE("both simplex samplers agree in a two-sample KS test") {
    Rng rng(5);
    const int n = 10000;
    std::vector<double> a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[static_cast<std::size_t>(i)] = sample_unit_simplex(3, SimplexSampler::Exponential, rng)[0];
      b[static_cast<std::size_t>(i)] = sample_unit_simplex(3, SimplexSampler::SortedUniform, rng)[0];
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
      if (a[i] <= b[j]) {
        ++i;
      } else {
        ++j;
      }
      d = std::max(d, std::fabs(static_cast<double>(i) / n - static_cast<double>(j) / n));
    }
    const double critical = 1.949 * std::sqrt(2.0 / n);  // alpha = 1e-3
    CHECK(d < critical);
  }

  TEST_CASE("pushforward samples match Dirichlet moments for small families") {
    Rng rng(2024);
    const int draws = 100000;
    for (int k = 0; k <= 3; ++k) {
      for (int m = 1; m <= 4; ++m) {
        const auto family = enumerate_simplices(k, m);
        for (std::size_t s = 0; s < family->size(); ++s) {
          const auto simplex = family->simplex(s);
          const auto support = simplex.support();
          std::vector<int> alpha;
          for (int v : support) alpha.push_back(simplex.count(v));
          const auto moments = dirichlet_moments(std::span<const int>(alpha));
          const auto c = static_cast<Eigen::Index>(support.size());
          Eigen::MatrixXd samples(c, draws);
          for (int i = 0; i < draws; ++i) {
            const auto u = sample_unit_simplex(k, SimplexSampler::Exponential, rng);
            const auto z = pushforward(simplex, u);
            for (Eigen::Index j = 0; j < c; ++j) samples(j, i) = z[static_cast<std::size_t>(support[static_cast<std::size_t>(j)])];
          }
          const Eigen::VectorXd mean = samples.rowwise().mean();
          const Eigen::MatrixXd centered = samples.colwise() - mean;
          const Eigen::MatrixXd cov = centered * centered.transpose() / draws;
          for (Eigen::Index a = 0; a < c; ++a) {
            const double se = std::sqrt(std::max(moments.covariance(a, a), 1e-300) / draws);
            CHECK(std::fabs(mean(a) - moments.mean(a)) <= 4.0 * se + 1e-12);
            for (Eigen::Index b = 0; b < c; ++b) {
              const Eigen::ArrayXd prod = centered.row(a).array() * centered.row(b).array();
              const double prod_se = std::sqrt((prod - prod.mean()).square().mean() / draws);
              CHECK(std::fabs(cov(a, b) - moments.covariance(a, b)) <= 4.0 * prod_se + 1e-12);
            }
          }
        }
      }
    }
  }

  TEST_CASE("sample_model moments") {
    auto family = enumerate_simplices(1, 3);
    Eigen::MatrixXd v(2, 3);
    v << 0.0, 1.0, 0.0,
         0.0, 0.0, 2.0;
    Rng rng(99);

    SUBCASE("point mass on a vertex") {
      Eigen::VectorXd p = Eigen::VectorXd::Zero(6);
      p(3) = 1.0;  // (2,2)
      const ModelParams params(family, p, v, NoiseCovariance::isotropic(2, 1.0));
      const auto out = sample_model(params, 100, false, rng);
      for (std::size_t i = 0; i < 100; ++i) CHECK((out.data.point(i) - v.col(1)).norm() <= 1e-15);
    }

    SUBCASE("single edge mean") {
      Eigen::VectorXd p = Eigen::VectorXd::Zero(6);
      p(2) = 1.0;  // (1,3)
      const ModelParams params(family, p, v, NoiseCovariance::isotropic(2, 1.0));
      const auto out = sample_model(params, 100000, false, rng);
      const Eigen::VectorXd mean = out.data.mean();
      const Eigen::VectorXd expected = 0.5 * (v.col(0) + v.col(2));
      const Eigen::VectorXd sd = out.data.covariance().diagonal().cwiseSqrt() / std::sqrt(100000.0);
      for (int j = 0; j < 2; ++j) CHECK(std::fabs(mean(j) - expected(j)) <= 3.0 * sd(j) + 1e-12);
    }

    SUBCASE("general weights") {
      Eigen::VectorXd p(6);
      p << 0.1, 0.2, 0.3, 0.05, 0.25, 0.1;
      const ModelParams params(family, p, v, NoiseCovariance::isotropic(2, 1.0));
      const auto out = sample_model(params, 100000, false, rng);
      Eigen::VectorXd ez = Eigen::VectorXd::Zero(3);
      for (std::size_t s = 0; s < family->size(); ++s) {
        const auto simplex = family->simplex(s);
        std::vector<int> counts(simplex.counts().begin(), simplex.counts().end());
        for (int j = 0; j < 3; ++j) ez(j) += p(static_cast<Eigen::Index>(s)) * counts[static_cast<std::size_t>(j)] / 2.0;
      }
      const Eigen::VectorXd expected = v * ez;
      const Eigen::VectorXd sd = out.data.covariance().diagonal().cwiseSqrt() / std::sqrt(100000.0);
      for (int j = 0; j < 2; ++j) CHECK(std::fabs(out.data.mean()(j) - expected(j)) <= 3.0 * sd(j));
    }
  }

  TEST_CASE("multivariate beta") {
    const std::vector<double> a{1, 1}, b{1, 1, 1}, c{2, 1};
    CHECK(multivariate_beta(a) == doctest::Approx(1.0));
    CHECK(multivariate_beta(b) == doctest::Approx(0.5));
    CHECK(multivariate_beta(c) == doctest::Approx(0.5));
    const std::vector<double> bad{1.0, 0.0};
    CHECK_THROWS_AS(multivariate_beta(bad), InputError);
    const std::vector<double> big{400.0, 300.0};
    CHECK(std::isfinite(log_multivariate_beta(big)));
  }

  TEST_CASE("dirichlet density") {
    const std::vector<int> flat{1, 1, 1};
    const std::vector<double> z{0.2, 0.5, 0.3};
    CHECK(dirichlet_density(flat, z) == doctest::Approx(2.0));

    const std::vector<int> linear{2, 1};
    CHECK(dirichlet_density(linear, std::vector<double>{0.0, 1.0}) == 0.0);
    CHECK(dirichlet_density(linear, std::vector<double>{0.3, 0.7}) == doctest::Approx(0.6));
    CHECK(dirichlet_density(std::vector<int>{1, 2}, std::vector<double>{0.0, 1.0}) == doctest::Approx(2.0));

    double integral = 0.0;
    const int grid = 10000;
    for (int i = 0; i < grid; ++i) {
      const double t = (i + 0.5) / grid;
      integral += dirichlet_density(linear, std::vector<double>{t, 1.0 - t}) / grid;
    }
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));

    CHECK_THROWS_AS(dirichlet_density(flat, std::vector<double>{0.2, 0.2, 0.2}), InputError);
  }

  TEST_CASE("dirichlet densities integrate to one under stratified uniform sampling") {
    // One uniform draw per cell of a regular subdivision of the simplex.
    Rng rng(17);
    for (int coords = 1; coords <= 3; ++coords) {
      for (const auto& alpha : small_alphas(coords, 6)) {
        double estimate = 0.0;
        if (coords == 1) {
          estimate = dirichlet_density(alpha, std::vector<double>{1.0});
        } else if (coords == 2) {
          const int cells = 100000;
          for (int i = 0; i < cells; ++i) {
            const double t = (i + rng.uniform()) / cells;
            estimate += dirichlet_density(alpha, std::vector<double>{t, 1.0 - t}) / cells;
          }
        } else {
          const int r = 300;
          double sum = 0.0;
          for (int i = 0; i < r; ++i) {
            for (int j = 0; i + j < r; ++j) {
              for (int upper = 0; upper < 2; ++upper) {
                if (upper && i + j + 1 >= r) continue;
                double a = rng.uniform(), b = rng.uniform();
                if (a + b > 1.0) {
                  a = 1.0 - a;
                  b = 1.0 - b;
                }
                const double u0 = upper ? (i + 1 - a) / r : (i + a) / r;
                const double u1 = upper ? (j + 1 - b) / r : (j + b) / r;
                sum += dirichlet_density(alpha, std::vector<double>{u0, u1, std::max(0.0, 1.0 - u0 - u1)});
              }
            }
          }
          // Each of the r^2 cells has area 1/(2 r^2).
          estimate = sum / (2.0 * r * r);
        }
        CHECK(estimate == doctest::Approx(1.0).epsilon(1e-3));
      }
    }
  }

  TEST_CASE("dirichlet moments") {
    const auto two = dirichlet_moments(std::vector<double>{1, 1});
    CHECK(two.mean(0) == doctest::Approx(0.5));
    CHECK(two.covariance(0, 0) == doctest::Approx(1.0 / 12.0));
    const auto three = dirichlet_moments(std::vector<double>{1, 1, 1});
    CHECK(three.covariance(1, 1) == doctest::Approx(1.0 / 18.0));
    for (const auto& alpha : small_alphas(3, 9)) {
      const auto mom = dirichlet_moments(std::span<const int>(alpha));
      const double a0 = std::accumulate(alpha.begin(), alpha.end(), 0.0);
      CHECK(mom.covariance.cwiseAbs().maxCoeff() <= 1.0 / (a0 + 1.0) + 1e-15);
    }
    CHECK_THROWS_AS(dirichlet_moments(std::vector<double>{1.0, -1.0}), InputError);
  }

  TEST_CASE("model parameters validate p") {
    auto family = enumerate_simplices(0, 2);
    const Eigen::MatrixXd v = Eigen::MatrixXd::Zero(1, 2);
    const auto sigma = NoiseCovariance::isotropic(1, 1.0);
    CHECK_THROWS_AS(ModelParams(family, Eigen::Vector2d(0.5, 0.6), v, sigma), InputError);
    CHECK_THROWS_AS(ModelParams(family, Eigen::Vector2d(1.5, -0.5), v, sigma), InputError);
    const ModelParams ok(family, Eigen::Vector2d(0.5, 0.5 + 5e-13), v, sigma);
    CHECK(ok.p().sum() == doctest::Approx(1.0).epsilon(1e-15));
    Eigen::MatrixXd bad = v;
    bad(0, 0) = std::nan("");
    CHECK_THROWS_AS(ModelParams(family, Eigen::Vector2d(0.5, 0.5), bad, sigma), InputError);
  }
}
