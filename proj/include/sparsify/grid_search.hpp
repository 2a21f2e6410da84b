#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparsify/common.hpp"
#include "sparsify/loss.hpp"

namespace sparsify {

enum class GridSelector { l_half_two, l_eps };

const char* to_string(GridSelector s);
GridSelector selector_from_string(const std::string& s);

struct GridConfig {
  double h = 0.25;
  /// Lattice points materialized at once by the reference search.
  std::int64_t block_size = 1 << 14;
  GridSelector selector = GridSelector::l_half_two;
  /// Loss used when selector == l_eps.
  LossConfig loss = family_loss_config();
  /// Refuse grids with more points than this.
  double max_points = 2e9;

  void validate() const;
};

struct GridResult {
  Matrix U;
  Vector angles;                    // flat layout of AngleLayout
  std::vector<int> lattice_index;   // per factor, product order
  double loss = 0.0;
  double points = 0.0;              // |Theta(h)|
};

/// Selector values within this relative distance count as ties, so that
/// points tied up to rounding resolve by lattice order in both searches.
inline constexpr double kGridTieTol = 1e-12;

/// argmin of the selector over Gamma(h) = {U(alpha) : alpha in Theta(h)}.
/// Ties go to the first lattice point in lexicographic order of the
/// per-factor lattice indices (factor 0 most significant).
///
/// Walks the lattice depth first and conjugates by one Jacobi factor per
/// level, so a leaf costs O(N d) instead of O(N d^3). Subtrees below the
/// leading factors are distributed over OpenMP threads; the reduction is
/// by (loss, lattice order) and so does not depend on the thread count.
GridResult grid_search(const SymmetricMatrixSet& mats, const GridConfig& cfg);

/// Serial reference: materializes U(alpha) for each chunk of block_size
/// lattice points and evaluates the selector from scratch. Kept for tests
/// and benchmarks.
GridResult grid_search_reference(const SymmetricMatrixSet& mats, const GridConfig& cfg);

/// Selector value of U.
double grid_selector_loss(const Matrix& U, const SymmetricMatrixSet& mats, const GridConfig& cfg);

/// Throws StageFailure when |Theta(h)| exceeds cfg.max_points; the message
/// carries the cardinality formula and the smallest admissible h.
void check_grid_budget(int d, const GridConfig& cfg);

}  // namespace sparsify
