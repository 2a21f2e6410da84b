#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparsify/common.hpp"
#include "sparsify/loss.hpp"

namespace sparsify {

enum class Method { rgd, landing };

const char* to_string(Method m);
Method method_from_string(const std::string& s);

struct OptimizerConfig {
  Method method = Method::rgd;
  double step = 1e-2;            // nu
  double landing_lambda = 1.0;   // lambda
  int max_iters = 20000;
  double grad_tol = 1e-8;
  bool backtracking = true;      // Armijo halving (rgd only)
  double armijo_c = 1e-4;
  double defect_tol = 1e-8;      // landing stop condition
  std::uint64_t seed = 0;

  void validate() const;
};

struct IterateRecord {
  double loss = 0.0;
  double grad_norm = 0.0;
  double defect = 0.0;  // ||U U^T - I||_F
};

struct Trajectory {
  std::vector<IterateRecord> records;
  Matrix U;
  int iterations = 0;
  bool converged = false;
  std::string stop_reason;

  double final_loss() const { return records.empty() ? 0.0 : records.back().loss; }
};

/// Projection of a Euclidean gradient onto the tangent space of SO(d) at U:
/// (G - U G^T U) / 2.
Matrix riemannian_gradient(const Matrix& U, const Matrix& G);

/// Q factor of U - V with diag(R) > 0.
Matrix qr_retraction(const Matrix& U, const Matrix& V);

/// Riemannian gradient descent U <- Retr(U, -nu grad). With backtracking the
/// step starts at nu each iteration and is halved until the Armijo condition
/// holds, so the loss sequence is non-increasing.
Trajectory rgd_minimize(const SymmetricMatrixSet& mats, const Matrix& U0, const OptimizerConfig& opt,
                        const LossConfig& cfg);

/// Landing iteration U <- U - nu (grad + lambda (U U^T - I) U); iterates are
/// only attracted to the orthogonal group.
Trajectory landing_minimize(const SymmetricMatrixSet& mats, const Matrix& U0, const OptimizerConfig& opt,
                            const LossConfig& cfg);

/// Dispatches on opt.method.
Trajectory minimize(const SymmetricMatrixSet& mats, const Matrix& U0, const OptimizerConfig& opt,
                    const LossConfig& cfg);

/// Nearest orthogonal matrix (polar factor), moved into SO(d).
Matrix nearest_rotation(const Matrix& A);

struct RandomInitResult {
  Matrix U;
  int candidates = 0;
  std::vector<double> candidate_scores;  // loss_half_two of each candidate
  int chosen = 0;
};

/// Draws `candidates` uniform angle vectors, runs the optimizer for
/// `iters_per_candidate` iterations from each and keeps the one with the
/// smallest loss_half_two.
RandomInitResult random_init(const SymmetricMatrixSet& mats, std::uint64_t seed, const OptimizerConfig& opt,
                             const LossConfig& cfg, int candidates = 5, int iters_per_candidate = 5000);

enum class Optimality { certified_optimal, unknown };

struct OptimalityReport {
  Optimality status = Optimality::unknown;
  int ordered_count = 0;    // k over ordered (i, j)
  int unordered_count = 0;  // k over i <= j
  int span_dim = 0;
  int max_rank = 0;
  int bound = 0;            // max(span_dim, max_rank)
};

/// Certifies that U reaches the joint-l0 lower bound max{dim span, max rank}
/// for zero-diagonal families. Certification compares the ordered count.
OptimalityReport sufficient_optimality_check(const SymmetricMatrixSet& mats, const Matrix& U, double count_tol,
                                             double rank_tol = 1e-9);

/// Orthonormal basis (Frobenius inner product) of span{H_n}: right singular
/// vectors of the stacked vec(H_n) with singular value > tol_rel * s_max.
SymmetricMatrixSet span_basis(const SymmetricMatrixSet& mats, double tol_rel);

/// Numerical dimension of span{H_n}.
int span_dimension(const SymmetricMatrixSet& mats, double tol_rel);

}  // namespace sparsify
