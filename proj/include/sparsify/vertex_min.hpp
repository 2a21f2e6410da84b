#pragma once

#include <vector>

#include "sparsify/common.hpp"

namespace sparsify {

/// Gradients of f at N sample points, one per column.
struct GradientSample {
  Matrix B;                    // d x N
  std::vector<Vector> points;  // may be empty when locations are unknown

  int dim() const { return static_cast<int>(B.rows()); }
  int count() const { return static_cast<int>(B.cols()); }
};

struct VertexReduction {
  Matrix U_V;              // left singular vectors, active directions first
  int d1 = 0;              // active dimension
  Vector singular_values;  // descending, length d (zero padded)
  double tau_abs = 0.0;    // absolute threshold used for d1
};

/// Relative threshold used when the caller passes none: 1e-8 for clean
/// data, 1e-3 sqrt(d) for noisy data.
double default_tau_rel(int d, bool noisy);

/// SVD of B; d1 counts singular values above tau_rel * sigma_max.
VertexReduction vertex_minimize(const GradientSample& g, double tau_rel);

struct ReducedHessians {
  SymmetricMatrixSet mats;        // top-left d1 x d1 blocks of U_V^T H_n U_V
  double border_residual = 0.0;   // max |entry| of the discarded border
  bool border_warning = false;    // residual > 10 tau_abs
};

ReducedHessians reduce_hessians(const SymmetricMatrixSet& h, const VertexReduction& red);

}  // namespace sparsify
