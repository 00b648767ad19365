#include "smm/simplex.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "smm/errors.hpp"

namespace smm {
namespace {

__extension__ using Uint128 = unsigned __int128;

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t binomial(std::uint64_t n, std::uint64_t r) {
  if (r > n) return 0;
  r = std::min(r, n - r);
  Uint128 result = 1;
  for (std::uint64_t i = 1; i <= r; ++i) {
    result = result * (n - r + i) / i;
    if (result > kSaturated) return kSaturated;
  }
  return static_cast<std::uint64_t>(result);
}

// Multisets of size r from n symbols.
std::uint64_t multichoose(std::uint64_t n, std::uint64_t r) {
  if (r == 0) return 1;
  if (n == 0) return 0;
  return binomial(n + r - 1, r);
}

}  // namespace

CombinatorialSimplex::CombinatorialSimplex(std::vector<int> counts) : counts_(std::move(counts)) {
  if (counts_.empty()) throw InputError("simplex needs at least one vertex");
  for (int c : counts_) {
    if (c < 0) throw InputError("simplex counts must be non-negative");
    order_ += c;
  }
  if (order_ < 1) throw InputError("simplex counts must sum to at least 1");
}

CombinatorialSimplex CombinatorialSimplex::from_indices(std::span<const int> indices, int vertex_count) {
  if (vertex_count < 1) throw InputError("vertex count must be positive");
  std::vector<int> counts(static_cast<std::size_t>(vertex_count), 0);
  for (int i : indices) {
    if (i < 0 || i >= vertex_count) throw InputError("vertex index out of range");
    ++counts[static_cast<std::size_t>(i)];
  }
  return CombinatorialSimplex(std::move(counts));
}

std::vector<int> CombinatorialSimplex::indices() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(order_));
  for (int j = 0; j < vertex_count(); ++j) out.insert(out.end(), static_cast<std::size_t>(count(j)), j);
  return out;
}

std::vector<int> CombinatorialSimplex::support() const {
  std::vector<int> out;
  for (int j = 0; j < vertex_count(); ++j)
    if (count(j) > 0) out.push_back(j);
  return out;
}

bool CombinatorialSimplex::degenerate() const {
  return std::any_of(counts_.begin(), counts_.end(), [](int c) { return c >= 2; });
}

bool CombinatorialSimplex::full_support() const {
  return std::all_of(counts_.begin(), counts_.end(), [](int c) { return c >= 1; });
}

std::string CombinatorialSimplex::label() const {
  std::string out = "(";
  bool first = true;
  for (int i : indices()) {
    if (!first) out += ',';
    out += std::to_string(i + 1);
    first = false;
  }
  return out + ")";
}

std::uint64_t family_size(int dimension, int vertex_count) {
  if (dimension < 0 || vertex_count < 1) return 0;
  return multichoose(static_cast<std::uint64_t>(vertex_count), static_cast<std::uint64_t>(dimension) + 1);
}

SimplexFamily::SimplexFamily(int dimension, int vertex_count, std::uint64_t cap)
    : dimension_(dimension), vertex_count_(vertex_count) {
  if (dimension < 0) throw InputError("simplex dimension must be non-negative");
  if (vertex_count < 1) throw InputError("vertex count must be positive");
  const std::uint64_t total = family_size(dimension, vertex_count);
  if (total > cap) {
    throw InputError("family too large: A_" + std::to_string(dimension) + "(" + std::to_string(vertex_count) +
                     ") has more than " + std::to_string(cap) + " simplices");
  }
  size_ = static_cast<std::size_t>(total);
  const auto order = static_cast<std::size_t>(dimension + 1);
  flat_.reserve(size_ * order);

  std::vector<int> seq(order, 0);
  for (std::size_t s = 0; s < size_; ++s) {
    flat_.insert(flat_.end(), seq.begin(), seq.end());
    // Next non-decreasing sequence in lexicographic order.
    std::size_t pos = order;
    while (pos > 0 && seq[pos - 1] == vertex_count - 1) --pos;
    if (pos == 0) break;
    const int value = seq[pos - 1] + 1;
    std::fill(seq.begin() + static_cast<std::ptrdiff_t>(pos - 1), seq.end(), value);
  }
}

CombinatorialSimplex SimplexFamily::simplex(std::size_t s) const {
  return CombinatorialSimplex::from_indices(indices(s), vertex_count_);
}

std::size_t SimplexFamily::index_of(std::span<const int> sorted) const {
  const auto order = static_cast<std::size_t>(dimension_ + 1);
  if (sorted.size() != order) throw InputError("simplex dimension does not match family");
  std::uint64_t rank = 0;
  int lower = 0;
  for (std::size_t j = 0; j < order; ++j) {
    const int value = sorted[j];
    if (value < lower || value >= vertex_count_) throw InputError("indices are not a sorted simplex of this family");
    const std::uint64_t remaining = order - j - 1;
    for (int v = lower; v < value; ++v)
      rank += multichoose(static_cast<std::uint64_t>(vertex_count_ - v), remaining);
    lower = value;
  }
  return static_cast<std::size_t>(rank);
}

std::size_t SimplexFamily::index_of(const CombinatorialSimplex& simplex) const {
  if (simplex.vertex_count() != vertex_count_) throw InputError("simplex vertex count does not match family");
  const auto idx = simplex.indices();
  return index_of(std::span<const int>(idx));
}

std::vector<std::size_t> SimplexFamily::full_support_positions() const {
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < size_; ++s)
    if (support_size(s) == vertex_count_) out.push_back(s);
  return out;
}

int SimplexFamily::support_size(std::size_t s) const {
  const auto idx = indices(s);
  int distinct = 1;
  for (std::size_t l = 1; l < idx.size(); ++l)
    if (idx[l] != idx[l - 1]) ++distinct;
  return distinct;
}

FamilyPtr enumerate_simplices(int dimension, int vertex_count, std::uint64_t cap) {
  return std::make_shared<const SimplexFamily>(dimension, vertex_count, cap);
}

std::vector<double> pushforward(const CombinatorialSimplex& simplex, std::span<const double> u) {
  if (u.size() != static_cast<std::size_t>(simplex.order()))
    throw InputError("barycentric coordinate length does not match simplex dimension");
  std::vector<double> z(static_cast<std::size_t>(simplex.vertex_count()), 0.0);
  const auto idx = simplex.indices();
  for (std::size_t l = 0; l < idx.size(); ++l) z[static_cast<std::size_t>(idx[l])] += u[l];
  return z;
}

}  // namespace smm
