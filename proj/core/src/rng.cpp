#include "smm/rng.hpp"

#include <cmath>
#include <numbers>

namespace smm {
namespace {

std::uint64_t finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

__extension__ using Uint128 = unsigned __int128;

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream) {
  std::uint64_t h = finalize(seed + kGolden);
  h = finalize(h ^ (stream + 0x632be59bd9b4e019ULL));
  h = finalize(h ^ (substream + 0x85157af5ULL * kGolden));
  return h;
}

Rng::result_type Rng::operator()() {
  state_ += kGolden;
  return finalize(state_);
}

double Rng::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double Rng::uniform_open() {
  return (static_cast<double>((*this)() >> 12) + 0.5) * 0x1.0p-52;
}

double Rng::exponential() { return -std::log(uniform_open()); }

double Rng::normal() {
  const double r = std::sqrt(-2.0 * std::log(uniform_open()));
  return r * std::cos(2.0 * std::numbers::pi * uniform());
}

std::size_t Rng::below(std::size_t n) {
  const auto product = static_cast<Uint128>((*this)()) * n;
  return static_cast<std::size_t>(product >> 64);
}

Rng Rng::derive(std::uint64_t stream) const { return Rng(mix_seed(state_, stream)); }

}  // namespace smm
