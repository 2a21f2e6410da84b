#include "sparsify/grid_search.hpp"

#include <omp.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "sparsify/rotations.hpp"

namespace sparsify {

const char* to_string(GridSelector s) { return s == GridSelector::l_half_two ? "l_half_two" : "l_eps"; }

GridSelector selector_from_string(const std::string& s) {
  if (s == "l_half_two") return GridSelector::l_half_two;
  if (s == "l_eps") return GridSelector::l_eps;
  throw InvalidInput("unknown grid selector '" + s + "' (expected l_half_two or l_eps)");
}

void GridConfig::validate() const {
  if (!(h > 0) || h > 1) throw InvalidInput("grid: h must lie in (0, 1]");
  if (block_size <= 0) throw InvalidInput("grid: block_size must be positive");
  loss.validate();
}

void check_grid_budget(int d, const GridConfig& cfg) {
  const double points = grid_cardinality(d, cfg.h);
  if (points <= cfg.max_points) return;
  // smallest h on a fine scan whose grid fits the budget
  double suggested = cfg.h;
  while (suggested < 1.0 && grid_cardinality(d, suggested) > cfg.max_points) suggested *= 1.05;
  std::ostringstream msg;
  msg << "grid too large: |Theta(h)| = ceil(2pi/h)^(d-1) * ceil(pi/h)^((d-1)(d-2)/2) = " << points
      << " for d=" << d << ", h=" << cfg.h << " exceeds the budget of " << cfg.max_points
      << " points; use h >= " << std::min(1.0, suggested);
  throw StageFailure("grid_search", msg.str());
}

double grid_selector_loss(const Matrix& U, const SymmetricMatrixSet& mats, const GridConfig& cfg) {
  return cfg.selector == GridSelector::l_half_two ? loss_half_two(U, mats) : loss_eps(U, mats, cfg.loss);
}

namespace {

struct Candidate {
  double loss = std::numeric_limits<double>::infinity();
  std::uint64_t flat = std::numeric_limits<std::uint64_t>::max();

  bool better_than(const Candidate& o) const {
    if (!std::isfinite(o.loss)) return std::isfinite(loss) || flat < o.flat;
    const double tol = kGridTieTol * std::abs(o.loss);
    if (loss < o.loss - tol) return true;
    if (loss > o.loss + tol) return false;
    return flat < o.flat;
  }
};

struct Lattice {
  explicit Lattice(int d, double h) : layout(d) {
    const int m = layout.count();
    sizes.resize(m);
    cosv.resize(m);
    sinv.resize(m);
    stride.assign(m, 1);
    for (int k = 0; k < m; ++k) {
      sizes[k] = lattice_size(layout.range(k), h);
      for (int i = 0; i < sizes[k]; ++i) {
        cosv[k].push_back(std::cos(i * h));
        sinv[k].push_back(std::sin(i * h));
      }
    }
    for (int k = m - 2; k >= 0; --k) stride[k] = stride[k + 1] * static_cast<std::uint64_t>(sizes[k + 1]);
  }

  AngleLayout layout;
  std::vector<int> sizes;
  std::vector<std::vector<double>> cosv;
  std::vector<std::vector<double>> sinv;
  std::vector<std::uint64_t> stride;
};

// Depth-first walker over one subtree of the lattice. state[k] holds the N
// matrices conjugated by factors 0..k-1, column-major, back to back.
class Walker {
 public:
  Walker(const Lattice& lat, const SymmetricMatrixSet& mats, const GridConfig& cfg)
      : lat_(lat), cfg_(cfg), d_(mats.dim()), n_(static_cast<int>(mats.size())) {
    const int m = lat.layout.count();
    const std::size_t block = static_cast<std::size_t>(n_) * d_ * d_;
    state_.assign(m + 1, std::vector<double>(block));
    for (int n = 0; n < n_; ++n)
      Eigen::Map<Matrix>(state_[0].data() + static_cast<std::size_t>(n) * d_ * d_, d_, d_) = mats[n];
    const double N = n_;
    if (cfg.loss.normalization == Normalization::mean_over_N) {
      inner_ = 1.0 / N;
      outer_ = 1.0;
    } else {
      inner_ = 1.0;
      outer_ = 1.0 / std::sqrt(N);
    }
  }

  // Fixes factors 0..level-1 to idx[0..level-1] and walks the rest.
  void run_subtree(const std::vector<int>& prefix) {
    const int level = static_cast<int>(prefix.size());
    std::uint64_t flat = 0;
    for (int k = 0; k < level; ++k) {
      conjugate(k, prefix[k]);
      flat += prefix[k] * lat_.stride[k];
    }
    descend(level, flat);
  }

  const Candidate& best() const { return best_; }

 private:
  void conjugate(int k, int i) {
    const int ax = lat_.layout.axis(k);
    const double c = lat_.cosv[k][i];
    const double s = lat_.sinv[k][i];
    const std::vector<double>& src = state_[k];
    std::vector<double>& dst = state_[k + 1];
    std::copy(src.begin(), src.end(), dst.begin());
    const int d = d_;
    for (int n = 0; n < n_; ++n) {
      double* S = dst.data() + static_cast<std::size_t>(n) * d * d;
      double* ca = S + ax * d;
      double* cb = S + (ax + 1) * d;
      for (int r = 0; r < d; ++r) {  // S <- S R
        const double a = ca[r];
        const double b = cb[r];
        ca[r] = c * a + s * b;
        cb[r] = c * b - s * a;
      }
      for (int col = 0; col < d; ++col) {  // S <- R^T S
        double* p = S + col * d;
        const double a = p[ax];
        const double b = p[ax + 1];
        p[ax] = c * a + s * b;
        p[ax + 1] = c * b - s * a;
      }
    }
  }

  double leaf_loss(const std::vector<double>& S) const {
    const int d = d_;
    const std::size_t block = static_cast<std::size_t>(d) * d;
    double total = 0.0;
    for (int j = 0; j < d; ++j) {
      for (int i = 0; i <= j; ++i) {
        double sq = 0.0;
        for (int n = 0; n < n_; ++n) {
          const double v = S[n * block + i + j * d];
          sq += v * v;
        }
        const double w = (i == j) ? 1.0 : 2.0;
        if (cfg_.selector == GridSelector::l_half_two) {
          total += w * std::sqrt(std::sqrt(sq));
        } else if (i != j || cfg_.loss.include_diagonal) {
          total += w * std::sqrt(inner_ * sq + cfg_.loss.eps);
        }
      }
    }
    if (cfg_.selector == GridSelector::l_half_two) return total * total / std::sqrt(static_cast<double>(n_));
    return outer_ * total;
  }

  void descend(int level, std::uint64_t flat) {
    const int m = lat_.layout.count();
    if (level == m) {
      const Candidate cand{leaf_loss(state_[m]), flat};
      if (cand.better_than(best_)) best_ = cand;
      return;
    }
    for (int i = 0; i < lat_.sizes[level]; ++i) {
      conjugate(level, i);
      descend(level + 1, flat + i * lat_.stride[level]);
    }
  }

  const Lattice& lat_;
  const GridConfig& cfg_;
  int d_;
  int n_;
  double inner_ = 1.0;
  double outer_ = 1.0;
  std::vector<std::vector<double>> state_;
  Candidate best_;
};

GridResult finish(const Lattice& lat, const SymmetricMatrixSet& mats, const GridConfig& cfg, std::uint64_t flat,
                  double loss) {
  const int d = mats.dim();
  const int m = lat.layout.count();
  GridResult res;
  res.lattice_index.resize(m);
  res.angles = Vector::Zero(m);
  for (int k = 0; k < m; ++k) {
    res.lattice_index[k] = static_cast<int>((flat / lat.stride[k]) % lat.sizes[k]);
    res.angles(lat.layout.slot(k)) = res.lattice_index[k] * cfg.h;
  }
  res.U = angles_to_rotation(res.angles, d);
  res.loss = loss;
  res.points = grid_cardinality(d, cfg.h);
  return res;
}

}  // namespace

GridResult grid_search(const SymmetricMatrixSet& mats, const GridConfig& cfg) {
  cfg.validate();
  if (mats.empty()) throw InvalidInput("grid_search: no matrices");
  const int d = mats.dim();
  check_grid_budget(d, cfg);
  const Lattice lat(d, cfg.h);
  const int m = lat.layout.count();

  // Split off enough leading factors to give every thread several subtrees.
  const int threads = omp_get_max_threads();
  int split = 0;
  std::uint64_t units = 1;
  while (split < m && units < static_cast<std::uint64_t>(8 * threads)) units *= lat.sizes[split++];
  std::vector<std::uint64_t> unit_stride(split, 1);
  for (int k = split - 2; k >= 0; --k) unit_stride[k] = unit_stride[k + 1] * lat.sizes[k + 1];

  Candidate best;
#pragma omp parallel
  {
    Candidate local;
#pragma omp for schedule(dynamic, 1)
    for (std::int64_t u = 0; u < static_cast<std::int64_t>(units); ++u) {
      std::vector<int> prefix(split);
      for (int k = 0; k < split; ++k) prefix[k] = static_cast<int>((u / unit_stride[k]) % lat.sizes[k]);
      Walker w(lat, mats, cfg);
      w.run_subtree(prefix);
      if (w.best().better_than(local)) local = w.best();
    }
#pragma omp critical
    if (local.better_than(best)) best = local;
  }
  return finish(lat, mats, cfg, best.flat, best.loss);
}

}  // namespace sparsify
