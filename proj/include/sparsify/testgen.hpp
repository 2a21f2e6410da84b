#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparsify/common.hpp"
#include "sparsify/decomposition.hpp"
#include "sparsify/graphs.hpp"

namespace sparsify {

// ---- jointly sparsifiable matrix families ---------------------------------

struct MatrixInstanceSpec {
  int d = 0;
  SparsityPattern J;  // target support, diagonal entries included
  int N = 0;
  std::uint64_t rotation_seed = 0;
  std::uint64_t entry_seed = 0;
  double sigma = 0.0;  // Gaussian noise std, 0 for clean data
};

struct MatrixInstance {
  MatrixInstanceSpec spec;
  SymmetricMatrixSet mats;   // R^T H~_n R (+ noise)
  SymmetricMatrixSet clean;  // R^T H~_n R
  Matrix R;                  // U = R^T recovers the support J
};

/// Largest |J| (unordered pairs, diagonal included) used for matrix
/// families of dimension d: 3, 6, 7, 11 for d = 2..5, d(d+1)/2 beyond.
int max_pattern_size(int d);

/// Uniformly random support with exactly `size` unordered slots (i <= j).
SparsityPattern random_pattern(int d, int size, std::uint64_t seed);

MatrixInstance gen_matrix_set(const MatrixInstanceSpec& spec);

/// Seeded protocol instance: |J| uniform in [1, max_pattern_size(d)],
/// N = d(d+1)/2, rotation and entries derived from seed.
MatrixInstance protocol_instance(int d, double sigma, std::uint64_t seed);

// ---- sparse additive test functions ----------------------------------------

enum class FactorKind { shift, power, cbrt_quad, sine, cosine, gauss };

/// One member of the factor family:
/// x+t, x^t, cbrt(x^2+t^2), sin(tx), cos(tx), exp(-(x-t)^2).
struct Factor {
  FactorKind kind = FactorKind::shift;
  int t = 1;

  double value(double x) const;
  double d1(double x) const;
  double d2(double x) const;
  bool linear() const { return kind == FactorKind::shift || (kind == FactorKind::power && t == 1); }
};

const char* to_string(FactorKind k);
FactorKind factor_kind_from_string(const std::string& s);

/// c * g1(x_j) * g2(x_k), j != k.
struct ProductTerm {
  double c = 1.0;
  int j = 0, k = 1;
  Factor g1, g2;
};

struct FunctionSpec {
  int d = 0;
  double radius = 1.0;
  std::vector<std::vector<int>> components;  // groups of coupled variables
  std::vector<ProductTerm> terms;
  Matrix R;            // f(x) = f~(R x); identity when unrotated
  bool noisy = false;  // adds the Gaussian-mixture noise function
  std::uint64_t seed = 0;
  std::string name;

  /// Off-diagonal support of the Hessian of f~ plus the diagonal entries
  /// that are not identically zero.
  SparsityPattern pattern() const;
};

/// Random function: components of size 2..4 with a random spanning tree plus
/// extra edges, coefficients in [5, 20], factors drawn from the family with
/// t in {1, 2, 3}, Haar rotation R.
FunctionSpec random_function_spec(int d, std::uint64_t seed, bool noisy, bool rotate = true);

/// Function handle with analytic gradient and Hessian.
SampledFunction make_function(const FunctionSpec& spec);

struct NoiseValue {
  double value = 0.0;
  Vector grad;
  Matrix hess;
};

/// (1/2000) sum over mu in {-1/2, 3/2}^d of exp(-1/2 (x-mu)^T Z^{-1} (x-mu)),
/// Z = I/2. Costs 2^d terms, so d <= 16.
NoiseValue noise_function(const Vector& x);

/// The two 7-dimensional benchmarks on the ball of radius r.
///   f1 = 5 exp(-(x1-1)^2)(x4+1) + 7 sin(2 x1) x7^3 + 10 cos(2 x2)(x5+3)
///   f2 = 5 exp(-(x1-1)^2) cos(3 x4) + 10 x1 x7^3 + 8 sin(x2) cos(x7)
///        + 12 cos(2 x3) sin(3 x5) + 6 x5 x6
/// `rotate` composes with a Haar rotation drawn from seed; `noisy` adds the
/// noise function.
FunctionSpec builtin_spec(const std::string& which, bool rotate = false, bool noisy = false, std::uint64_t seed = 0,
                          double radius = 1.0);

}  // namespace sparsify
