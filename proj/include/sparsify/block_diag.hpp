#pragma once

#include <cstdint>
#include <vector>

#include "sparsify/common.hpp"
#include "sparsify/graphs.hpp"

namespace sparsify {

/// Spectrum of T = sum_n K_n^T K_n with K_n = H_n^T (x) I - I (x) H_n acting
/// on column-major vec(A), so that K_n vec(A) = vec(A H_n - H_n A).
struct CommutantSpectrum {
  Vector eigenvalues;             // ascending, length d^2
  std::vector<Matrix> eigenmatrices;  // unit Frobenius norm, same order
};

/// Largest d with d^2 <= 4096.
constexpr int kMaxCommutantDim = 64;

/// Spectrum of T. The eigenpairs come from an SVD of the stacked operators
/// of an exact square-root factor of T (the span of {H_n} weighted by its
/// singular values), so near-zero eigenvalues keep full relative accuracy.
CommutantSpectrum commutant_operator(const SymmetricMatrixSet& h);

struct BlockDiagOptions {
  double gamma = 1e-3;        // relative eigenvalue gap that separates blocks
  double merge_factor = 10.0; // merge blocks whose coupling exceeds merge_factor * delta
};

struct BlockDiagResult {
  Matrix U;                   // block-contiguous: U^T H_n U is block diagonal
  BlockStructure structure;   // contiguous groups in the transformed basis
  double off_block_residual = 0.0;
  std::vector<double> eigen_gaps;  // consecutive differences of the sorted mu
  Vector mu;                  // eigenvalues of the random commutant element
  int commutant_dim = 0;      // eigenvalues of T below delta^2
};

/// Error-controlled finest joint block diagonalization.
BlockDiagResult error_controlled_blockdiag(const SymmetricMatrixSet& h, double delta, std::uint64_t seed,
                                           const BlockDiagOptions& opts = {});

/// Block-diagonal pieces of U^T H_n U for one result, one set per group.
std::vector<SymmetricMatrixSet> extract_blocks(const SymmetricMatrixSet& h, const BlockDiagResult& r);

/// Checks that two block diagonalizations agree up to block permutation and
/// orthogonal conjugation inside blocks, by comparing the spectra of a fixed
/// random combination sum_n c_n H_n restricted to each block.
bool blocks_equivalent(const BlockDiagResult& a, const SymmetricMatrixSet& ha, const BlockDiagResult& b,
                       const SymmetricMatrixSet& hb, double tol, std::uint64_t seed = 0);

}  // namespace sparsify
