#include "smm/protocol.hpp"

#include <cmath>
#include <optional>

#include "smm/errors.hpp"
#include "smm/init.hpp"

namespace smm {

ProtocolReport restart_protocol(const DataSet& data, FamilyPtr family, const ProtocolConfig& config) {
  if (config.restarts < 1) throw InputError("restarts must be at least 1");
  if (config.pilot_iters < 0 || config.final_iters < 0) throw InputError("iteration counts must be non-negative");
  if (!family) throw InputError("missing simplex family");

  FitConfig pilot_config;
  pilot_config.max_iter = config.pilot_iters;
  pilot_config.tol = 0.0;
  pilot_config.sigma_mode = config.sigma_mode;

  std::vector<double> rates;
  std::size_t winner = 0;
  std::optional<FitReport> best;
  for (int r = 0; r < config.restarts; ++r) {
    Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(r), 1));
    const Eigen::MatrixXd vertices = config.init == InitMethod::FarthestPoint
                                         ? init_farthest_point(data, family->vertex_count(), rng)
                                         : init_random(data, family->vertex_count(), rng);
    FitReport pilot = fit(data, initial_params(data, family, vertices, config.sigma_mode), pilot_config);
    const double rate = pilot.encoding_rate.back();
    rates.push_back(rate);
    const bool better = !best || (std::isfinite(rate) && !(rates[winner] <= rate));
    if (better) {
      winner = static_cast<std::size_t>(r);
      best = std::move(pilot);
    }
  }

  FitConfig final_config = pilot_config;
  final_config.max_iter = config.final_iters;
  FitReport cont = fit(data, best->params, final_config);

  FitReport& joined = *best;
  joined.params = std::move(cont.params);
  joined.log_likelihood.insert(joined.log_likelihood.end(), cont.log_likelihood.begin() + 1, cont.log_likelihood.end());
  joined.encoding_rate.insert(joined.encoding_rate.end(), cont.encoding_rate.begin() + 1, cont.encoding_rate.end());
  joined.iterations += cont.iterations;
  joined.termination = cont.termination;
  joined.ridge_steps += cont.ridge_steps;
  joined.sigma_floor_steps += cont.sigma_floor_steps;
  joined.underflow_fallbacks += cont.underflow_fallbacks;
  joined.notes.insert(joined.notes.end(), cont.notes.begin(), cont.notes.end());
  return {std::move(joined), std::move(rates), winner};
}

}  // namespace smm
