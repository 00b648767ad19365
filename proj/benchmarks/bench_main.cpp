#include <benchmark/benchmark.h>

#include "fixtures.hpp"
#include "smm/algebra.hpp"
#include "smm/exact_em.hpp"
#include "smm/mcem.hpp"
#include "smm/simplex.hpp"

using namespace smm;

namespace {

DataSet draw(const ModelParams& params, std::size_t count) {
  Rng rng(1);
  return sample_model(params, count, true, rng).data;
}

void BM_SegmentPosterior(benchmark::State& state) {
  const auto sigma = NoiseCovariance::isotropic(3, 0.01);
  const Eigen::Vector3d a(0.0, 0.0, 0.0), b(1.0, 0.5, -0.2), x(0.4, 0.3, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(segment_posterior(x, a, b, sigma));
}
BENCHMARK(BM_SegmentPosterior);

void BM_EStep(benchmark::State& state) {
  const auto params = fixture::square_edges(0.02);
  const DataSet data = draw(params, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(e_step(data, params));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EStep)->Arg(500)->Arg(5000);

void BM_McemSweep(benchmark::State& state) {
  const auto params = fixture::tetrahedron_faces(0.02);
  const DataSet data = draw(params, static_cast<std::size_t>(state.range(0)));
  const ChainModel model(data, params);
  ChainState chain = init_chain(model, 3);
  Accumulators acc = Accumulators::zeros(model);
  for (auto _ : state) {
    c_step(chain, model, acc);
    u_step(chain, model, 0.3, acc);
    q_step(chain, model, data, acc);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_McemSweep)->Arg(2000);

void BM_Enumerate(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_simplices(static_cast<int>(state.range(0)), 12));
}
BENCHMARK(BM_Enumerate)->Arg(1)->Arg(3);

void BM_KdePoint(benchmark::State& state) {
  const std::vector<double> y{0.2, 0.3, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(kde_point(y, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_KdePoint)->Arg(8)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
