#include "smm/mcem.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>

#include "smm/errors.hpp"
#include "smm/parallel.hpp"
#include "smm/rate.hpp"

namespace smm {
namespace {

std::atomic<std::uint64_t> next_version{1};

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kWalkDecades = 4.0;

bool accept_log(double log_ratio, Rng& rng) {
  if (log_ratio >= 0.0) return true;
  return std::log(rng.uniform_open()) < log_ratio;
}

struct Counters {
  std::uint64_t proposed = 0;
  std::uint64_t accepted = 0;
};

// Runs fn(i, counters) for each point and folds per-block counters in block order.
template <typename Fn>
Counters sweep(std::size_t points, Fn&& fn) {
  std::vector<Counters> partial(block_count(points));
  for_each_block(points, [&](std::size_t block, std::size_t begin, std::size_t end) {
    Counters local;
    for (std::size_t i = begin; i < end; ++i) fn(i, local);
    partial[block] = local;
  });
  Counters total;
  for (const auto& c : partial) {
    total.proposed += c.proposed;
    total.accepted += c.accepted;
  }
  return total;
}

}  // namespace

ChainModel::ChainModel(const DataSet& data, const ModelParams& params)
    : params_(params),
      y_(params.sigma().whiten(data.points())),
      w_(params.sigma().whiten(params.vertices())),
      log_norm_(params.sigma().log_normalizer()),
      sampler_(params.p()),
      version_(next_version.fetch_add(1)) {
  if (data.dim() != params.ambient_dim()) throw InputError("data dimension does not match model");
}

double ChainModel::log_likelihood(std::size_t i, std::size_t simplex, std::span<const double> u) const {
  const auto idx = params_.family().indices(simplex);
  const auto col = static_cast<Eigen::Index>(i);
  double sq = 0.0;
  for (Eigen::Index r = 0; r < y_.rows(); ++r) {
    double diff = y_(r, col);
    for (std::size_t l = 0; l < idx.size(); ++l) diff -= u[l] * w_(r, idx[l]);
    sq += diff * diff;
  }
  return log_norm_ - 0.5 * sq;
}

Eigen::VectorXd ChainState::latent(std::size_t i, const SimplexFamily& family) const {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(family.vertex_count());
  const auto idx = family.indices(simplex[i]);
  const auto c = coords(i);
  for (std::size_t l = 0; l < idx.size(); ++l) z(idx[l]) += c[l];
  return z;
}

ChainState init_chain(const ChainModel& model, std::uint64_t seed) {
  const std::size_t points = model.size();
  ChainState state;
  state.order = model.order();
  state.simplex.resize(points);
  state.u.resize(points * static_cast<std::size_t>(state.order));
  state.log_lik.resize(points);
  state.rngs.reserve(points);
  for (std::size_t i = 0; i < points; ++i) state.rngs.emplace_back(mix_seed(seed, i));
  for_each_block(points, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng& rng = state.rngs[i];
      state.simplex[i] = model.draw_simplex(rng);
      sample_unit_simplex_into(state.coords(i), rng);
      state.log_lik[i] = model.log_likelihood(i, state.simplex[i], state.coords(i));
    }
  });
  state.cache_version = model.version();
  return state;
}

void refresh_cache(ChainState& state, const ChainModel& model) {
  if (state.cache_version == model.version()) return;
  for_each_block(state.size(), [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      state.log_lik[i] = model.log_likelihood(i, state.simplex[i], state.coords(i));
  });
  state.cache_version = model.version();
}

Accumulators Accumulators::zeros(const ChainModel& model) {
  Accumulators acc;
  acc.stats = QValues::zeros(model.family().size(), model.params().vertex_count(), model.params().ambient_dim());
  return acc;
}

Accumulators& Accumulators::operator+=(const Accumulators& other) {
  stats += other.stats;
  q_steps += other.q_steps;
  c_proposed += other.c_proposed;
  c_accepted += other.c_accepted;
  u_proposed += other.u_proposed;
  u_accepted += other.u_accepted;
  return *this;
}

void Accumulators::reset_statistics() {
  stats.q.setZero();
  stats.zz.setZero();
  stats.zx.setZero();
  stats.count = 0.0;
  q_steps = 0;
}

void c_step(ChainState& state, const ChainModel& model, Accumulators& acc) {
  refresh_cache(state, model);
  const auto order = static_cast<std::size_t>(model.order());
  const Counters counts = sweep(state.size(), [&](std::size_t i, Counters& local) {
    thread_local std::vector<double> proposal;
    proposal.resize(order);
    Rng& rng = state.rngs[i];
    const std::size_t candidate = model.draw_simplex(rng);
    sample_unit_simplex_into(proposal, rng);
    const double ll = model.log_likelihood(i, candidate, proposal);
    ++local.proposed;
    const double current = state.log_lik[i];
    if (current == kNegInf || accept_log(ll - current, rng)) {
      state.simplex[i] = candidate;
      std::copy(proposal.begin(), proposal.end(), state.coords(i).begin());
      state.log_lik[i] = ll;
      ++local.accepted;
    }
  });
  acc.c_proposed += counts.proposed;
  acc.c_accepted += counts.accepted;
}

void c_step_local(ChainState& state, const ChainModel& model, Accumulators& acc) {
  refresh_cache(state, model);
  const auto& family = model.family();
  const auto& p = model.params().p();
  const auto order = static_cast<std::size_t>(model.order());
  const auto m = static_cast<std::size_t>(family.vertex_count());
  const Counters counts = sweep(state.size(), [&](std::size_t i, Counters& local) {
    thread_local std::vector<int> indices;
    thread_local std::vector<int> sorted;
    thread_local std::vector<double> proposal;
    thread_local std::vector<std::size_t> perm;
    Rng& rng = state.rngs[i];
    ++local.proposed;
    const auto current_idx = family.indices(state.simplex[i]);
    const std::size_t slot = rng.below(order);
    const int replacement = static_cast<int>(rng.below(m));
    const int removed = current_idx[slot];
    if (replacement == removed) {
      ++local.accepted;
      return;
    }
    indices.assign(current_idx.begin(), current_idx.end());
    indices[slot] = replacement;
    perm.resize(order);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return indices[a] < indices[b]; });
    sorted.resize(order);
    proposal.resize(order);
    const auto u = state.coords(i);
    for (std::size_t l = 0; l < order; ++l) {
      sorted[l] = indices[perm[l]];
      proposal[l] = u[perm[l]];
    }
    const std::size_t candidate = family.index_of(sorted);
    const double p_new = p(static_cast<Eigen::Index>(candidate));
    if (!(p_new > 0.0)) return;
    const auto removed_count = std::count(current_idx.begin(), current_idx.end(), removed);
    const auto added_count = std::count(sorted.begin(), sorted.end(), replacement);
    const double ll = model.log_likelihood(i, candidate, proposal);
    const double current = state.log_lik[i];
    const double log_ratio = std::log(p_new) - std::log(p(static_cast<Eigen::Index>(state.simplex[i]))) +
                             std::log(static_cast<double>(added_count)) -
                             std::log(static_cast<double>(removed_count)) + ll - current;
    if (current == kNegInf || accept_log(log_ratio, rng)) {
      state.simplex[i] = candidate;
      std::copy(proposal.begin(), proposal.end(), u.begin());
      state.log_lik[i] = ll;
      ++local.accepted;
    }
  });
  acc.c_proposed += counts.proposed;
  acc.c_accepted += counts.accepted;
}

void u_step(ChainState& state, const ChainModel& model, double scale, Accumulators& acc) {
  if (!(scale >= 0.0 && scale <= 1.0)) throw InputError("proposal scale must lie in [0, 1]");
  refresh_cache(state, model);
  const auto order = static_cast<std::size_t>(model.order());
  const Counters counts = sweep(state.size(), [&](std::size_t i, Counters& local) {
    ++local.proposed;
    if (scale == 0.0) {
      ++local.accepted;
      return;
    }
    thread_local std::vector<double> fresh;
    thread_local std::vector<double> proposal;
    fresh.resize(order);
    proposal.resize(order);
    Rng& rng = state.rngs[i];
    const auto u = state.coords(i);
    if (rng.uniform() < 0.5) {
      sample_unit_simplex_into(fresh, rng);
      double total = 0.0;
      for (std::size_t l = 0; l < order; ++l) {
        proposal[l] = (1.0 - scale) * u[l] + scale * fresh[l];
        total += proposal[l];
      }
      for (auto& v : proposal) v /= total;
      // The reverse move needs a fresh point f' = (u - (1 - scale) u') / scale on the simplex.
      for (std::size_t l = 0; l < order; ++l) {
        if ((u[l] - (1.0 - scale) * proposal[l]) / scale < -1e-12) return;
      }
    } else {
      // Symmetric random walk in the plane sum(u) = 1, step length log-uniform
      // over four decades below `scale`.
      const double step = scale * std::exp(-kWalkDecades * std::log(10.0) * rng.uniform());
      double mean = 0.0;
      for (auto& g : fresh) {
        g = rng.normal();
        mean += g;
      }
      mean /= static_cast<double>(order);
      double head = 0.0;
      for (std::size_t l = 0; l + 1 < order; ++l) {
        proposal[l] = u[l] + step * (fresh[l] - mean);
        if (proposal[l] < 0.0) return;
        head += proposal[l];
      }
      proposal[order - 1] = 1.0 - head;
      if (proposal[order - 1] < 0.0) return;
    }
    const double ll = model.log_likelihood(i, state.simplex[i], proposal);
    const double current = state.log_lik[i];
    if (current == kNegInf || accept_log(ll - current, rng)) {
      std::copy(proposal.begin(), proposal.end(), u.begin());
      state.log_lik[i] = ll;
      ++local.accepted;
    }
  });
  acc.u_proposed += counts.proposed;
  acc.u_accepted += counts.accepted;
}

void q_step(const ChainState& state, const ChainModel& model, const DataSet& data, Accumulators& acc) {
  const auto& family = model.family();
  const int m = family.vertex_count();
  const int n = data.dim();
  if (data.size() != state.size()) throw InputError("chain state and data disagree on N");
  std::vector<QValues> partial(block_count(state.size()));
  for_each_block(state.size(), [&](std::size_t block, std::size_t begin, std::size_t end) {
    QValues stats = QValues::zeros(family.size(), m, n);
    std::vector<int> vertex;
    std::vector<double> weight;
    for (std::size_t i = begin; i < end; ++i) {
      const auto idx = family.indices(state.simplex[i]);
      const auto u = state.coords(i);
      vertex.clear();
      weight.clear();
      for (std::size_t l = 0; l < idx.size(); ++l) {
        if (!vertex.empty() && vertex.back() == idx[l]) {
          weight.back() += u[l];
        } else {
          vertex.push_back(idx[l]);
          weight.push_back(u[l]);
        }
      }
      for (std::size_t a = 0; a < vertex.size(); ++a) {
        for (std::size_t b = 0; b < vertex.size(); ++b) stats.zz(vertex[a], vertex[b]) += weight[a] * weight[b];
        stats.zx.row(vertex[a]) += weight[a] * data.point(i).transpose();
      }
      stats.q(static_cast<Eigen::Index>(state.simplex[i])) += 1.0;
      stats.count += 1.0;
    }
    partial[block] = std::move(stats);
  });
  for (const auto& s : partial) acc.stats += s;
  ++acc.q_steps;
}

MStepResult m_step_stochastic(const Accumulators& acc, const Eigen::MatrixXd& xx, SigmaMode mode, FamilyPtr family,
                              const Eigen::MatrixXd* previous_vertices) {
  if (acc.q_steps == 0) throw InputError("no statistics accumulated");
  const double steps = static_cast<double>(acc.q_steps);
  QValues stats = acc.stats;
  stats.q /= steps;
  stats.zz /= steps;
  stats.zx /= steps;
  stats.count /= steps;
  return m_step(stats, xx, mode, std::move(family), previous_vertices);
}

McemReport run_mcem(const DataSet& data, const ModelParams& init, const Regime& regime, const McemConfig& config) {
  const bool exact_likelihood = config.record_log_likelihood && init.family().dimension() <= 1;
  McemReport report{init, {}, {}, {}, {}, 0, 0, 0};
  auto model = std::make_unique<ChainModel>(data, init);
  ChainState state = init_chain(*model, config.seed);
  Accumulators acc = Accumulators::zeros(*model);
  const Eigen::MatrixXd xx = data.second_moment_sum();
  Accumulators since_m;

  auto cursor = regime.cursor();
  Action action{};
  while (cursor.next(action)) {
    switch (action) {
      case Action::C:
        if (config.local_c_step) {
          c_step_local(state, *model, acc);
        } else {
          c_step(state, *model, acc);
        }
        break;
      case Action::U:
        u_step(state, *model, config.proposal_scale, acc);
        break;
      case Action::Q:
        q_step(state, *model, data, acc);
        break;
      case Action::M: {
        const Eigen::MatrixXd previous = report.params.vertices();
        MStepResult next = m_step_stochastic(acc, xx, config.sigma_mode, report.params.family_ptr(), &previous);
        report.ridge_steps += next.diagnostics.ridge_applied ? 1 : 0;
        report.sigma_floor_steps += next.diagnostics.sigma_floored ? 1 : 0;
        report.params = std::move(next.params);
        ++report.m_steps;
        const auto rate = [](std::uint64_t accepted, std::uint64_t proposed) {
          return proposed == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposed);
        };
        report.c_acceptance.push_back(rate(acc.c_accepted - since_m.c_accepted, acc.c_proposed - since_m.c_proposed));
        report.u_acceptance.push_back(rate(acc.u_accepted - since_m.u_accepted, acc.u_proposed - since_m.u_proposed));
        acc.reset_statistics();
        since_m = acc;
        model = std::make_unique<ChainModel>(data, report.params);
        if (config.record_encoding_rate) report.encoding_rate.push_back(intrinsic_encoding_rate(report.params).total);
        if (exact_likelihood) report.log_likelihood.push_back(log_likelihood(data, report.params));
        break;
      }
    }
  }
  return report;
}

Eigen::MatrixXd estimate_posterior_z(const DataSet& data, const ModelParams& params, int burn_in, int samples,
                                     const McemConfig& config) {
  if (burn_in < 0 || samples < 1) throw InputError("posterior estimation needs burn_in >= 0 and samples >= 1");
  const ChainModel model(data, params);
  ChainState state = init_chain(model, config.seed);
  Accumulators acc = Accumulators::zeros(model);
  const auto move = [&] {
    if (config.local_c_step) {
      c_step_local(state, model, acc);
    } else {
      c_step(state, model, acc);
    }
    u_step(state, model, config.proposal_scale, acc);
  };
  for (int s = 0; s < burn_in; ++s) move();

  const auto& family = model.family();
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(data.size()), family.vertex_count());
  for (int s = 0; s < samples; ++s) {
    move();
    for_each_block(state.size(), [&](std::size_t, std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const auto idx = family.indices(state.simplex[i]);
        const auto u = state.coords(i);
        for (std::size_t l = 0; l < idx.size(); ++l) sums(static_cast<Eigen::Index>(i), idx[l]) += u[l];
      }
    });
  }
  return sums / static_cast<double>(samples);
}

}  // namespace smm
