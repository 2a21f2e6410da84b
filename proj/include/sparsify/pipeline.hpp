#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sparsify/block_diag.hpp"
#include "sparsify/decomposition.hpp"
#include "sparsify/graphs.hpp"
#include "sparsify/grid_search.hpp"
#include "sparsify/loss.hpp"
#include "sparsify/manifold.hpp"
#include "sparsify/vertex_min.hpp"

namespace sparsify {

enum class InitKind { grid, random, identity };

const char* to_string(InitKind k);
InitKind init_from_string(const std::string& s);

struct PipelineConfig {
  double tau_rel = 1e-8;        // vertex SVD threshold, relative to sigma_max
  double delta = 1e-8;          // block-diagonalization tolerance
  bool block_diag = true;       // run the block split before optimizing
  double span_tol_rel = 1e-8;   // basis of span{H_n} used by init and optimizer
  LossConfig loss = family_loss_config();
  OptimizerConfig opt;
  InitKind init = InitKind::grid;
  GridConfig grid;
  int grid_max_block = 5;       // larger blocks fall back to random init
  int random_candidates = 5;
  int random_iters = 5000;
  std::vector<double> etas = {1e-9, 1e-4};
  std::uint64_t seed = 0;

  void validate() const;
};

/// Inputs of one run. Without gradients the vertex step is skipped.
struct PipelineInput {
  std::optional<GradientSample> gradients;
  SymmetricMatrixSet hessians;
  std::optional<SparsityPattern> truth;           // enables chi
  std::optional<SymmetricMatrixSet> eval_hessians; // patterns and chi use these when set
  std::optional<Matrix> truth_rotation;           // R with U = R^T optimal; enables the loss gap
};

struct BlockRun {
  int size = 0;
  std::vector<int> indices;  // coordinates of the block-diagonalized basis
  InitKind init = InitKind::identity;
  double grid_h = 0.0;
  double init_loss = 0.0;
  double final_loss = 0.0;
  int iterations = 0;
  std::string stop_reason;
  int span_dim = 0;
  Trajectory trajectory;
};

struct PipelineResult {
  Matrix U_total;
  Matrix U_V;
  int d = 0;
  int d1 = 0;
  Vector singular_values;
  double border_residual = 0.0;
  BlockDiagResult blocks;
  std::vector<BlockRun> per_block;
  std::vector<double> etas;
  std::vector<SparsityPattern> patterns;  // one per eta
  std::vector<int> chi;                   // one per eta, empty without truth
  std::optional<double> optimality_gap;   // l(U_total) - l(R^T) on the input span basis
  std::uint64_t seed = 0;
};

PipelineResult run_pipeline(const PipelineInput& in, const PipelineConfig& cfg);

/// Gradients and Hessians of f at N points drawn uniformly from its domain.
PipelineInput sample_function(const SampledFunction& f, int N, std::uint64_t seed);

/// x -> f(U x) with transformed derivatives; the domain must be a ball.
SampledFunction rotate_function(const SampledFunction& f, const Matrix& U);

/// Ordered nonzero count of mean |U^T H_n U| above eta minus the ordered
/// count 2|J_off| + |J_diag| of the truth.
int sparsity_gap(const Matrix& U, const SymmetricMatrixSet& mats, const SparsityPattern& truth, double eta);

/// Fraction of trials with chi != 0; over-sparsified trials (chi < 0)
/// count as failures.
double failure_ratio(const std::vector<int>& gaps);

}  // namespace sparsify
