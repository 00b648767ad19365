#pragma once

#include <cstdint>
#include <vector>

#include "smm/exact_em.hpp"

namespace smm {

enum class InitMethod { Random, FarthestPoint };

struct ProtocolConfig {
  int restarts = 10;
  int pilot_iters = 40;
  int final_iters = 500;
  SigmaMode sigma_mode = SigmaMode::Isotropic;
  InitMethod init = InitMethod::Random;
  std::uint64_t seed = 0;
};

struct ProtocolReport {
  /// The winner's run: pilot and continuation traces joined.
  FitReport fit;
  /// Intrinsic encoding rate of every pilot fit, in restart order.
  std::vector<double> pilot_rates;
  std::size_t winner = 0;
};

/// Pilot fits from `restarts` initializations (fixed step counts), picks
/// the lowest encoding rate, and continues it for final_iters steps.
/// Restart r draws its initialization from stream (seed, r).
ProtocolReport restart_protocol(const DataSet& data, FamilyPtr family, const ProtocolConfig& config);

}  // namespace smm
