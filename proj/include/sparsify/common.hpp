#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sparsify {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Raised for malformed input: bad dimensions, out-of-range parameters,
/// unreadable files. The CLI maps it to exit code 2.
class InvalidInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a numerical stage cannot complete (non-finite loss,
/// degenerate retraction, budget exceeded). The CLI maps it to exit code 3.
class StageFailure : public std::runtime_error {
 public:
  StageFailure(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// A collection of N symmetric d x d matrices sharing one dimension.
class SymmetricMatrixSet {
 public:
  SymmetricMatrixSet() = default;
  explicit SymmetricMatrixSet(std::vector<Matrix> mats);

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return mats_.size(); }
  bool empty() const noexcept { return mats_.empty(); }
  const Matrix& operator[](std::size_t n) const { return mats_[n]; }
  const std::vector<Matrix>& matrices() const noexcept { return mats_; }

  auto begin() const { return mats_.begin(); }
  auto end() const { return mats_.end(); }

  /// Returns {U^T H_n U}.
  SymmetricMatrixSet conjugated(const Matrix& U) const;

 private:
  int dim_ = 0;
  std::vector<Matrix> mats_;
};

// ---- orthogonal-matrix helpers ------------------------------------------

/// ||U U^T - I||_F
double orthogonality_defect(const Matrix& U);

/// Flips the sign of the first column when det(U) < 0 so the result lies in
/// SO(d). Loss values are unchanged since they only see squared entries.
Matrix to_special_orthogonal(Matrix U);

// ---- seeded randomness ----------------------------------------------------

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  return Rng(mix_seed(seed, stream));
}

/// Uniform point on the unit sphere S^{k-1}.
Vector random_unit_vector(int k, Rng& rng);

/// Uniform point in the Euclidean ball of radius r in R^d.
Vector random_point_in_ball(int d, double r, Rng& rng);

/// Haar-distributed rotation in SO(d): QR of a Gaussian matrix with
/// diag(R) > 0, then a column flip when the determinant is negative.
Matrix haar_rotation(int d, Rng& rng);

}  // namespace sparsify
