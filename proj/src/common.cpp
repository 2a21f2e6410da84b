#include "sparsify/common.hpp"

#include <cmath>

namespace sparsify {

SymmetricMatrixSet::SymmetricMatrixSet(std::vector<Matrix> mats) : mats_(std::move(mats)) {
  if (mats_.empty()) return;
  dim_ = static_cast<int>(mats_.front().rows());
  for (const auto& m : mats_) {
    if (m.rows() != dim_ || m.cols() != dim_) {
      throw InvalidInput("matrix set: all matrices must be square with a common dimension");
    }
    if (!m.allFinite()) throw InvalidInput("matrix set: non-finite entry");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
      throw InvalidInput("matrix set: matrix is not symmetric");
    }
  }
}

SymmetricMatrixSet SymmetricMatrixSet::conjugated(const Matrix& U) const {
  std::vector<Matrix> out;
  out.reserve(mats_.size());
  for (const auto& m : mats_) {
    Matrix c = U.transpose() * m * U;
    out.push_back(0.5 * (c + c.transpose()));
  }
  return SymmetricMatrixSet(std::move(out));
}

double orthogonality_defect(const Matrix& U) {
  return (U * U.transpose() - Matrix::Identity(U.rows(), U.rows())).norm();
}

Matrix to_special_orthogonal(Matrix U) {
  if (U.rows() > 0 && U.determinant() < 0) U.col(0) *= -1.0;
  return U;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Vector random_unit_vector(int k, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(k);
  do {
    for (int i = 0; i < k; ++i) v(i) = normal(rng);
  } while (v.norm() == 0.0);
  return v / v.norm();
}

Vector random_point_in_ball(int d, double r, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Vector dir = random_unit_vector(d, rng);
  const double radius = r * std::pow(unif(rng), 1.0 / d);
  return radius * dir;
}

Matrix haar_rotation(int d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return to_special_orthogonal(std::move(q));
}

}  // namespace sparsify
