#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "smm/errors.hpp"
#include "smm/exact_em.hpp"
#include "smm/sampling.hpp"

using namespace smm;

namespace {

double relative(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

DataSet noisy_sample(const ModelParams& params, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return sample_model(params, n, true, rng).data;
}

ModelParams with_vertices(const ModelParams& base, Eigen::MatrixXd v) {
  return ModelParams(base.family_ptr(), base.p(), std::move(v), base.sigma());
}

// Edge model with random p and vertices, and an initialization near it.
std::pair<DataSet, ModelParams> random_instance(int n, int m, std::size_t count, Rng& rng) {
  const auto truth = fixture::random_edge_model(n, m, 0.1, rng);
  const DataSet data = noisy_sample(truth, count, rng());
  Eigen::MatrixXd v = truth.vertices();
  for (Eigen::Index j = 0; j < v.size(); ++j) v.data()[j] += 0.3 * rng.normal();
  auto family = truth.family_ptr();
  const Eigen::VectorXd p = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(family->size()), 1.0 / family->size());
  return {data, ModelParams(family, p, v, NoiseCovariance::isotropic(n, 0.05))};
}

}  // namespace

TEST_SUITE("exact_em") {
  TEST_CASE("segment posterior at the midpoint") {
    const Eigen::Vector2d a(0.0, 0.0), b(2.0, 0.0), x(1.0, 0.4);
    const auto post = segment_posterior(x, a, b, NoiseCovariance::isotropic(2, 0.3));
    CHECK(post.mean_t == doctest::Approx(0.5).epsilon(1e-14));
  }

  TEST_CASE("degenerate segment") {
    const Eigen::Vector2d a(0.5, -1.0), x(0.0, 0.2);
    const auto sigma = NoiseCovariance::isotropic(2, 0.7);
    const auto post = segment_posterior(x, a, a, sigma);
    CHECK(post.mass() == doctest::Approx(oracle::gaussian_density(x - a, sigma.matrix())).epsilon(1e-14));
    CHECK(post.mean_t == 0.5);
    CHECK(post.second_moment_t == doctest::Approx(1.0 / 3.0));
  }

  TEST_CASE("segment posterior agrees with quadrature") {
    Rng rng(1);
    for (int trial = 0; trial < 50; ++trial) {
      Eigen::VectorXd a(2), b(2), x(2);
      for (int j = 0; j < 2; ++j) {
        a(j) = rng.uniform() * 2 - 1;
        b(j) = rng.uniform() * 2 - 1;
        x(j) = rng.uniform() * 2 - 1;
      }
      Eigen::Matrix2d l;
      l << 0.2 + rng.uniform(), 0.0, rng.uniform() - 0.5, 0.2 + rng.uniform();
      const Eigen::MatrixXd sigma = 0.3 * l * l.transpose();
      const auto got = segment_posterior(x, a, b, NoiseCovariance::full(sigma));
      const auto ref = oracle::segment_trapezoid(x, a, b, sigma);
      CHECK(relative(got.mass(), ref.mass) <= 1e-6);
      CHECK(relative(got.mean_t, ref.mean) <= 1e-6);
      CHECK(relative(got.second_moment_t, ref.second) <= 1e-6);
      CHECK(got.mean_t >= 0.0);
      CHECK(got.mean_t <= 1.0);
      CHECK(got.second_moment_t >= got.mean_t * got.mean_t);
      CHECK(got.second_moment_t <= got.mean_t);
    }
  }

  TEST_CASE("nearly degenerate segments agree with quadrature") {
    Rng rng(2);
    const auto sigma = NoiseCovariance::isotropic(2, 0.01);
    for (double length : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
      for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Vector2d a(rng.uniform(), rng.uniform());
        const double angle = 6.0 * rng.uniform();
        const Eigen::Vector2d b = a + length * Eigen::Vector2d(std::cos(angle), std::sin(angle));
        const Eigen::Vector2d x(rng.uniform() * 2.0 - 0.5, rng.uniform() * 2.0 - 0.5);
        const auto got = segment_posterior(x, a, b, sigma);
        const auto ref = oracle::segment_trapezoid(x, a, b, sigma.matrix(), 200001);
        CHECK(relative(got.mass(), ref.mass) <= 1e-10);
        CHECK(std::fabs(got.mean_t - ref.mean) <= 1e-10);
        CHECK_MESSAGE(std::fabs(got.second_moment_t - ref.second) <= 1e-10, "length " << length);
      }
    }
  }

  TEST_CASE("segment posterior far from the segment stays finite") {
    const Eigen::Vector2d a(0.0, 0.0), b(1.0, 0.0), x(-200.0, 50.0);
    const auto post = segment_posterior(x, a, b, NoiseCovariance::isotropic(2, 1e-4));
    CHECK(std::isfinite(post.log_mass));
    CHECK(post.mean_t >= 0.0);
    CHECK(post.mean_t < 1e-6);
    const Eigen::Vector2d bad(std::nan(""), 0.0);
    CHECK_THROWS_AS(segment_posterior(bad, a, b, NoiseCovariance::isotropic(2, 1.0)), InputError);
  }

  TEST_CASE("point model e-step") {
    auto family = enumerate_simplices(0, 1);
    Eigen::MatrixXd v(2, 1);
    v << 0.5, 0.5;
    const ModelParams params(family, Eigen::VectorXd::Ones(1), v, NoiseCovariance::isotropic(2, 1.0));
    Eigen::MatrixXd pts(2, 3);
    pts << 0.0, 1.0, 2.0,
           1.0, -1.0, 3.0;
    const DataSet data(pts);
    const auto result = e_step(data, params);
    CHECK(result.stats.q(0) == doctest::Approx(3.0));
    CHECK(result.stats.zz(0, 0) == doctest::Approx(3.0));
    CHECK(result.stats.zx(0, 0) == doctest::Approx(3.0));
    CHECK(result.stats.zx(0, 1) == doctest::Approx(3.0));
  }

  TEST_CASE("separated edges get near-certain responsibilities") {
    auto family = enumerate_simplices(1, 4);
    Eigen::MatrixXd v(2, 4);
    v << 0.0, 1.0, 0.0, 1.0,
         0.0, 0.0, 2.0, 2.0;
    Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(family->size()));
    const int e1[2] = {0, 1}, e2[2] = {2, 3};
    const auto s1 = static_cast<Eigen::Index>(family->index_of(std::span<const int>(e1, 2)));
    const auto s2 = static_cast<Eigen::Index>(family->index_of(std::span<const int>(e2, 2)));
    p(s1) = 0.5;
    p(s2) = 0.5;
    const ModelParams params(family, p, v, NoiseCovariance::isotropic(2, 0.01 * 0.01));
    Eigen::VectorXd one = Eigen::VectorXd::Zero(p.size());
    one(s1) = 1.0;
    Rng rng(4);
    const auto draws = sample_model(ModelParams(family, one, v, params.sigma()), 200, true, rng);
    const auto r = responsibilities(draws.data, params);
    CHECK(r.row(s1).minCoeff() >= 0.99);
  }

  TEST_CASE("e-step matches the Monte Carlo oracle") {
    Rng rng(10);
    for (int trial = 0; trial < 4; ++trial) {
      const int m = 2 + trial % 2;
      const auto params = fixture::random_edge_model(2, m, 0.4, rng);
      const DataSet data = noisy_sample(params, 3, rng());
      const auto exact = e_step(data, params).stats;
      const auto mc = oracle::monte_carlo_e_step(data, params, 1000000, rng);
      CHECK((exact.q - mc.q).cwiseAbs().maxCoeff() <= 0.01 * exact.q.cwiseAbs().maxCoeff());
      CHECK((exact.zz - mc.zz).cwiseAbs().maxCoeff() <= 0.01 * exact.zz.cwiseAbs().maxCoeff());
      CHECK((exact.zx - mc.zx).cwiseAbs().maxCoeff() <= 0.01 * exact.zx.cwiseAbs().maxCoeff());
    }
  }

  TEST_CASE("QValues invariants") {
    Rng rng(6);
    const auto params = fixture::random_edge_model(3, 4, 0.2, rng);
    const DataSet data = noisy_sample(params, 700, 3);
    const auto stats = e_step(data, params).stats;
    CHECK(stats.count == 700.0);
    CHECK(stats.q.sum() == doctest::Approx(700.0).epsilon(1e-9));
    CHECK((stats.zz - stats.zz.transpose()).cwiseAbs().maxCoeff() <= 1e-9);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(stats.zz);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-9);

    const DataSet first(data.points().leftCols(512));
    const DataSet second(data.points().rightCols(188));
    auto merged = e_step(first, params).stats;
    merged += e_step(second, params).stats;
    CHECK((merged.q - stats.q).cwiseAbs().maxCoeff() == 0.0);
    CHECK((merged.zz - stats.zz).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("log-likelihood examples") {
    auto family = enumerate_simplices(0, 1);
    Eigen::MatrixXd pt(3, 1);
    pt << 0.1, 0.2, 0.3;
    const double variance = 0.25;
    const ModelParams params(family, Eigen::VectorXd::Ones(1), pt, NoiseCovariance::isotropic(3, variance));
    CHECK(log_likelihood(DataSet(pt), params) ==
          doctest::Approx(-1.5 * std::log(2.0 * std::numbers::pi * variance)).epsilon(1e-14));
  }

  TEST_CASE("log-likelihood matches a Monte Carlo kernel average") {
    Rng rng(77);
    const auto params = fixture::random_edge_model(2, 3, 0.3, rng);
    const DataSet data = noisy_sample(params, 4, 9);
    const std::size_t draws = 1000000;
    const auto xs = sample_model(params, draws, false, rng);
    const Eigen::MatrixXd sigma = params.sigma().matrix();
    double mc_total = 0.0;
    double var_total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      double sum = 0.0, sq = 0.0;
      for (std::size_t d = 0; d < draws; ++d) {
        const double f = oracle::gaussian_density(xs.data.point(d) - data.point(i), sigma);
        sum += f;
        sq += f * f;
      }
      const double mean = sum / draws;
      mc_total += std::log(mean);
      // Delta method for the log of the kernel average.
      var_total += (sq / draws - mean * mean) / draws / (mean * mean);
    }
    CHECK(std::fabs(log_likelihood(data, params) - mc_total) <= 3.0 * std::sqrt(var_total));
  }

  TEST_CASE("m-step examples") {
    auto family = enumerate_simplices(0, 2);
    QValues stats = QValues::zeros(2, 2, 1);
    stats.q << 2.0, 2.0;
    stats.zz << 2.0, 0.0, 0.0, 2.0;
    // Clusters {-1, -3} on vertex 0 and {4, 6} on vertex 1.
    stats.zx << -4.0, 10.0;
    stats.count = 4.0;
    Eigen::MatrixXd xx(1, 1);
    xx << 1.0 + 9.0 + 16.0 + 36.0;
    const auto result = m_step(stats, xx, SigmaMode::Isotropic, family);
    CHECK(result.params.p()(0) == doctest::Approx(0.5));
    CHECK(result.params.vertices()(0, 0) == doctest::Approx(-2.0));
    CHECK(result.params.vertices()(0, 1) == doctest::Approx(5.0));
    // Each point is one unit from its cluster mean.
    CHECK(result.params.sigma().matrix()(0, 0) == doctest::Approx(1.0));
    CHECK_FALSE(result.diagnostics.ridge_applied);
  }

  TEST_CASE("m-step is a stationary point of Q") {
    Rng rng(31);
    for (auto mode : {SigmaMode::Isotropic, SigmaMode::Diagonal, SigmaMode::Full}) {
      for (int trial = 0; trial < 5; ++trial) {
        auto [data, init] = random_instance(2, 3, 60, rng);
        const auto stats = e_step(data, init).stats;
        const Eigen::MatrixXd xx = data.second_moment_sum();
        const auto next = m_step(stats, xx, mode, init.family_ptr()).params;
        const auto grad = oracle::q_gradient(stats, xx, next.p(), next.vertices(), next.sigma().matrix(), mode);
        CHECK(grad.norm() <= 1e-6 * stats.count);
        CHECK(expected_complete_log_likelihood(stats, xx, next) ==
              doctest::Approx(oracle::q_function(stats, xx, next.p(), next.vertices(), next.sigma().matrix()))
                  .epsilon(1e-10));
      }
    }
  }

  TEST_CASE("m-step ridge and floor") {
    auto family = enumerate_simplices(0, 2);
    QValues stats = QValues::zeros(2, 2, 1);
    stats.q << 3.0, 0.0;
    stats.zz << 3.0, 0.0, 0.0, 0.0;
    stats.zx << 3.0, 0.0;
    stats.count = 3.0;
    Eigen::MatrixXd xx(1, 1);
    xx << 3.0;
    Eigen::MatrixXd prev(1, 2);
    prev << 0.0, 7.0;
    const auto result = m_step(stats, xx, SigmaMode::Isotropic, family, &prev);
    CHECK(result.diagnostics.ridge_applied);
    CHECK(result.diagnostics.sigma_floored);
    CHECK(result.params.vertices()(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(result.params.vertices()(0, 1) == doctest::Approx(7.0));
    CHECK(result.params.sigma().matrix()(0, 0) > 0.0);
  }

  TEST_CASE("fit recovers a single edge") {
    auto family = enumerate_simplices(1, 2);
    Eigen::MatrixXd v(2, 2);
    v << 0.0, 1.0,
         0.0, 0.5;
    Eigen::VectorXd p = Eigen::VectorXd::Zero(3);
    p(1) = 1.0;
    const double sd = 0.01;
    const ModelParams truth(family, p, v, NoiseCovariance::isotropic(2, sd * sd));
    const DataSet data = noisy_sample(truth, 2000, 5);
    Eigen::MatrixXd start(2, 2);
    start << 0.2, 0.7,
             0.3, 0.1;
    const auto init = initial_params(data, family, start, SigmaMode::Isotropic);
    const auto report = fit(data, init, FitConfig{});
    const auto match = oracle::match_columns(v, report.params.vertices());
    CHECK(match.max_distance <= 5.0 * sd);
    CHECK(report.termination != Termination::NumericalFailure);
  }

  TEST_CASE("max_iter zero returns the initialization") {
    Rng rng(2);
    auto [data, init] = random_instance(2, 3, 50, rng);
    FitConfig config;
    config.max_iter = 0;
    const auto report = fit(data, init, config);
    CHECK(report.iterations == 0);
    REQUIRE(report.log_likelihood.size() == 1);
    CHECK(report.log_likelihood[0] == log_likelihood(data, init));
    CHECK(report.params.vertices() == init.vertices());
    CHECK(report.params.p() == init.p());
    CHECK(report.termination == Termination::MaxIterations);
  }

  TEST_CASE("log-likelihood never decreases") {
    Rng rng(100);
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 1 + trial % 3;
      const int m = 2 + trial % 4;
      auto [data, init] = random_instance(n, m, 40 + 8 * static_cast<std::size_t>(trial), rng);
      FitConfig config;
      config.max_iter = 60;
      config.tol = 0.0;
      config.sigma_mode = static_cast<SigmaMode>(trial % 3);
      const auto report = fit(data, init, config);
      for (std::size_t t = 1; t < report.log_likelihood.size(); ++t)
        CHECK(report.log_likelihood[t] >= report.log_likelihood[t - 1] - 1e-9);
    }
  }

  TEST_CASE("permutation equivariance") {
    Rng rng(55);
    auto [data, init] = random_instance(2, 3, 150, rng);
    const std::vector<int> perm{2, 0, 1};  // new vertex j is old vertex perm[j]
    Eigen::MatrixXd v(2, 3);
    for (int j = 0; j < 3; ++j) v.col(j) = init.vertices().col(perm[static_cast<std::size_t>(j)]);
    const auto& family = init.family();
    std::vector<int> inverse(3);
    for (int j = 0; j < 3; ++j) inverse[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])] = j;
    auto relabel = [&](std::size_t s) {
      const auto idx = family.indices(s);
      std::vector<int> mapped{inverse[static_cast<std::size_t>(idx[0])], inverse[static_cast<std::size_t>(idx[1])]};
      std::sort(mapped.begin(), mapped.end());
      return family.index_of(mapped);
    };
    Eigen::VectorXd p(init.p().size());
    for (std::size_t s = 0; s < family.size(); ++s) p(static_cast<Eigen::Index>(relabel(s))) = init.p()(static_cast<Eigen::Index>(s));
    const ModelParams permuted(init.family_ptr(), p, v, init.sigma());

    FitConfig config;
    config.max_iter = 30;
    config.tol = 0.0;
    const auto a = fit(data, init, config);
    const auto b = fit(data, permuted, config);
    for (int j = 0; j < 3; ++j)
      CHECK((b.params.vertices().col(j) - a.params.vertices().col(perm[static_cast<std::size_t>(j)])).norm() <= 1e-9);
    for (std::size_t s = 0; s < family.size(); ++s)
      CHECK(std::fabs(b.params.p()(static_cast<Eigen::Index>(relabel(s))) - a.params.p()(static_cast<Eigen::Index>(s))) <= 1e-9);
  }

  TEST_CASE("translation equivariance") {
    Rng rng(56);
    auto [data, init] = random_instance(2, 3, 150, rng);
    const Eigen::Vector2d shift(3.0, -2.0);
    const DataSet moved(data.points().colwise() + shift);
    const auto moved_init = with_vertices(init, init.vertices().colwise() + shift);
    FitConfig config;
    config.max_iter = 30;
    config.tol = 0.0;
    const auto a = fit(data, init, config);
    const auto b = fit(moved, moved_init, config);
    const Eigen::MatrixXd back = b.params.vertices().colwise() - shift;
    CHECK((back - a.params.vertices()).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((b.params.p() - a.params.p()).cwiseAbs().maxCoeff() <= 1e-8);
  }

  TEST_CASE("higher-dimensional families are rejected") {
    auto family = enumerate_simplices(2, 3);
    Eigen::VectorXd p = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(family->size()), 1.0 / family->size());
    const ModelParams params(family, p, Eigen::MatrixXd::Identity(3, 3), NoiseCovariance::isotropic(3, 1.0));
    CHECK_THROWS_AS(e_step(DataSet(Eigen::MatrixXd::Identity(3, 3)), params), InputError);
  }
}
