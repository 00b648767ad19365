#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace smm {

/// Default cap on the number of simplices in an enumerated family.
inline constexpr std::uint64_t kDefaultFamilyCap = 10'000'000;

/// A multiset of k+1 vertices out of m, stored as its count vector alpha.
///
/// Vertices are 0-based internally. User-facing views (model files, CLI
/// output) print them 1-based.
class CombinatorialSimplex {
 public:
  /// Throws InputError unless all counts are non-negative and sum to >= 1.
  explicit CombinatorialSimplex(std::vector<int> counts);

  /// Builds the simplex from vertex indices in any order.
  static CombinatorialSimplex from_indices(std::span<const int> indices, int vertex_count);

  int vertex_count() const { return static_cast<int>(counts_.size()); }
  int dimension() const { return order_ - 1; }
  /// Number of vertices with multiplicity, k+1.
  int order() const { return order_; }

  std::span<const int> counts() const { return counts_; }
  int count(int vertex) const { return counts_[static_cast<std::size_t>(vertex)]; }

  /// Sorted vertex sequence i_0 <= ... <= i_k.
  std::vector<int> indices() const;
  /// Vertices with non-zero count, ascending.
  std::vector<int> support() const;
  bool degenerate() const;
  bool full_support() const;

  /// "(1,1,2)"-style label with 1-based vertices.
  std::string label() const;

  friend bool operator==(const CombinatorialSimplex&, const CombinatorialSimplex&) = default;
  friend auto operator<=>(const CombinatorialSimplex& a, const CombinatorialSimplex& b) {
    return a.indices() <=> b.indices();
  }

 private:
  std::vector<int> counts_;
  int order_ = 0;
};

/// All combinatorial k-simplices on m vertices, A_k(m), in lexicographic
/// order of their sorted index sequences.
class SimplexFamily {
 public:
  SimplexFamily(int dimension, int vertex_count, std::uint64_t cap = kDefaultFamilyCap);

  int dimension() const { return dimension_; }
  int vertex_count() const { return vertex_count_; }
  std::size_t size() const { return size_; }

  /// Sorted vertex sequence of the simplex at position s (length k+1).
  std::span<const int> indices(std::size_t s) const {
    const auto order = static_cast<std::size_t>(dimension_ + 1);
    return {flat_.data() + s * order, order};
  }
  CombinatorialSimplex simplex(std::size_t s) const;

  /// Position of a simplex given as sorted indices. Throws InputError when
  /// the sequence is not a member of the family.
  std::size_t index_of(std::span<const int> sorted_indices) const;
  std::size_t index_of(const CombinatorialSimplex& simplex) const;

  /// Positions of simplices whose support is all m vertices (B_k(m)).
  std::vector<std::size_t> full_support_positions() const;

  /// Number of distinct vertices of the simplex at position s.
  int support_size(std::size_t s) const;

 private:
  int dimension_;
  int vertex_count_;
  std::size_t size_;
  std::vector<int> flat_;
};

using FamilyPtr = std::shared_ptr<const SimplexFamily>;

/// Number of multisets of size k+1 drawn from m symbols, binomial(m+k, k+1).
/// Saturates at UINT64_MAX.
std::uint64_t family_size(int dimension, int vertex_count);

/// Throws InputError("family too large") when family_size exceeds cap.
FamilyPtr enumerate_simplices(int dimension, int vertex_count, std::uint64_t cap = kDefaultFamilyCap);

/// Sums coordinates of u that share a vertex: z_j = sum_{l : i_l = j} u_l.
/// Throws InputError on length mismatch.
std::vector<double> pushforward(const CombinatorialSimplex& simplex, std::span<const double> u);

}  // namespace smm
