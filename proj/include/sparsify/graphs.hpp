#pragma once

#include <set>
#include <utility>
#include <vector>

#include "sparsify/common.hpp"

namespace sparsify {

/// Symmetric support pattern of a d x d matrix family. Indices are 0-based
/// in memory and 1-based on the wire. Off-diagonal pairs are stored with
/// i < j.
struct SparsityPattern {
  int d = 0;
  std::set<std::pair<int, int>> off_diag;
  std::set<int> diag;

  SparsityPattern() = default;
  explicit SparsityPattern(int dim) : d(dim) {}

  /// Inserts {i, j} (any order). i == j goes to the diagonal set.
  void add(int i, int j);
  bool has_edge(int i, int j) const;

  /// Number of nonzero entries of a matrix with this support,
  /// i.e. 2 |off_diag| + |diag|.
  int ordered_count() const { return 2 * static_cast<int>(off_diag.size()) + static_cast<int>(diag.size()); }
  int unordered_count() const { return static_cast<int>(off_diag.size() + diag.size()); }

  bool operator==(const SparsityPattern&) const = default;
};

/// Partition of [d] into groups, largest first, ties by smallest index.
struct BlockStructure {
  int d = 0;
  std::vector<std::vector<int>> groups;
  std::vector<int> profile;  // group sizes, descending

  /// Concatenation of the groups: position k of the block-contiguous order
  /// holds original index permutation()[k].
  std::vector<int> permutation() const;

  /// Column-permutation matrix P with (P)_{perm[k], k} = 1, so that
  /// P^T H P lists the groups contiguously.
  Matrix permutation_matrix() const;
};

/// H_bar = (1/N) sum |H_n|; {i,j} is an edge iff H_bar_ij > eta, i is in
/// the diagonal support iff H_bar_ii > eta.
SparsityPattern pattern_from_matrix_set(const SymmetricMatrixSet& mats, double eta);

/// Entrywise mean of |H_n|.
Matrix mean_abs_matrix(const SymmetricMatrixSet& mats);

BlockStructure connected_components(const SparsityPattern& p);

/// Builds a BlockStructure from arbitrary groups, normalizing the order.
BlockStructure make_block_structure(int d, std::vector<std::vector<int>> groups);

enum class ProfileOrder { finer, coarser, equal, incomparable };

const char* to_string(ProfileOrder o);

/// Compares two block-size profiles in the refinement preorder: a is finer
/// than b when a's entries can be grouped so that the group sums give b.
ProfileOrder profile_preceq(std::vector<int> a, std::vector<int> b);

/// True iff the multiset a can be partitioned into groups summing to b.
bool profile_refines(const std::vector<int>& a, const std::vector<int>& b);

/// All maximal cliques of the graph whose vertices are the diagonal support
/// plus every edge endpoint. Each clique is sorted; the list is sorted
/// lexicographically. Limited to d <= 25.
std::vector<std::vector<int>> maximal_cliques(const SparsityPattern& p);

}  // namespace sparsify
