#include <cmath>
#include <limits>

#include "sparsify/grid_search.hpp"
#include "sparsify/rotations.hpp"

namespace sparsify {

GridResult grid_search_reference(const SymmetricMatrixSet& mats, const GridConfig& cfg) {
  cfg.validate();
  if (mats.empty()) throw InvalidInput("grid_search: no matrices");
  const int d = mats.dim();
  check_grid_budget(d, cfg);
  const AngleLayout layout(d);
  const int m = layout.count();

  std::vector<int> sizes(m);
  std::vector<std::uint64_t> stride(m, 1);
  std::uint64_t total = 1;
  for (int k = 0; k < m; ++k) {
    sizes[k] = lattice_size(layout.range(k), cfg.h);
    total *= static_cast<std::uint64_t>(sizes[k]);
  }
  for (int k = m - 2; k >= 0; --k) stride[k] = stride[k + 1] * sizes[k + 1];

  auto angles_of = [&](std::uint64_t flat) {
    Vector alpha = Vector::Zero(m);
    for (int k = 0; k < m; ++k) alpha(layout.slot(k)) = static_cast<double>((flat / stride[k]) % sizes[k]) * cfg.h;
    return alpha;
  };

  double best = std::numeric_limits<double>::infinity();
  std::uint64_t best_flat = 0;
  std::vector<Matrix> chunk;
  for (std::uint64_t start = 0; start < total; start += cfg.block_size) {
    const std::uint64_t stop = std::min<std::uint64_t>(total, start + cfg.block_size);
    chunk.clear();
    for (std::uint64_t f = start; f < stop; ++f) chunk.push_back(angles_to_rotation(angles_of(f), d));
    for (std::uint64_t f = start; f < stop; ++f) {
      const double v = grid_selector_loss(chunk[f - start], mats, cfg);
      if (!std::isfinite(best) || v < best - kGridTieTol * std::abs(best)) {
        best = v;
        best_flat = f;
      }
    }
  }

  GridResult res;
  res.angles = angles_of(best_flat);
  res.lattice_index.resize(m);
  for (int k = 0; k < m; ++k) res.lattice_index[k] = static_cast<int>((best_flat / stride[k]) % sizes[k]);
  res.U = angles_to_rotation(res.angles, d);
  res.loss = best;
  res.points = grid_cardinality(d, cfg.h);
  return res;
}

}  // namespace sparsify
