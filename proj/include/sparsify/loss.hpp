#pragma once

#include "sparsify/common.hpp"

namespace sparsify {

/// How the per-slot sums are scaled.
///  - mean_over_N:     sum_slots sqrt( (1/N) sum_n M_ij^2 + eps )
///  - inv_sqrt_count:  (1/sqrt(N)) sum_slots sqrt( sum_n M_ij^2 + eps )
/// with M_n = U^T H_n U.
enum class Normalization { mean_over_N, inv_sqrt_count };

struct LossConfig {
  double eps = 1e-8;
  bool include_diagonal = false;
  Normalization normalization = Normalization::mean_over_N;

  void validate() const;
};

/// The diagonal-inclusive, 1/sqrt(|H|)-normalized variant used for the
/// matrix-family experiments.
inline LossConfig family_loss_config(double eps = 1e-8) {
  return LossConfig{eps, true, Normalization::inv_sqrt_count};
}

/// Smoothed l0 surrogate of the joint support of {U^T H_n U}.
double loss_eps(const Matrix& U, const SymmetricMatrixSet& mats, const LossConfig& cfg);

/// Same loss evaluated on already-transformed matrices M_n.
double loss_eps_transformed(const SymmetricMatrixSet& transformed, const LossConfig& cfg);

/// loss_eps(V) - loss_eps(U) evaluated from V - U, so the result keeps
/// relative accuracy when V is close to U.
double loss_difference(const Matrix& U, const Matrix& V, const SymmetricMatrixSet& mats, const LossConfig& cfg);

/// (1/sqrt(N)) ( sum_{i,j} (sum_n M_ij^2)^{1/4} )^2 ; the grid/restart
/// selector, closer to the joint l0 count than loss_eps.
double loss_half_two(const Matrix& U, const SymmetricMatrixSet& mats);

/// Euclidean gradient of loss_eps with respect to the entries of U
/// (U need not be orthogonal).
Matrix euclidean_gradient(const Matrix& U, const SymmetricMatrixSet& mats, const LossConfig& cfg);

/// Loss and gradient in one pass.
double loss_and_gradient(const Matrix& U, const SymmetricMatrixSet& mats, const LossConfig& cfg,
                         Matrix& grad);

/// Number of slots entering loss_eps: d(d-1) or d^2.
int loss_slot_count(int d, const LossConfig& cfg);

}  // namespace sparsify
