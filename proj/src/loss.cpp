#include "sparsify/loss.hpp"

#include <algorithm>
#include <cmath>

namespace sparsify {

void LossConfig::validate() const {
  if (!(eps > 0)) throw InvalidInput("loss: eps must be positive");
}

int loss_slot_count(int d, const LossConfig& cfg) {
  return cfg.include_diagonal ? d * d : d * (d - 1);
}

namespace {

struct Scales {
  double inner;  // multiplies sum_n M_ij^2
  double outer;  // multiplies the slot sum
};

Scales scales_for(std::size_t n, const LossConfig& cfg) {
  const double N = static_cast<double>(n);
  if (cfg.normalization == Normalization::mean_over_N) return {1.0 / N, 1.0};
  return {1.0, 1.0 / std::sqrt(N)};
}

// sum_n M_n .^2
Matrix squared_sum(const Matrix& U, const SymmetricMatrixSet& mats, std::vector<Matrix>* transformed) {
  const int d = mats.dim();
  Matrix acc = Matrix::Zero(d, d);
  if (transformed) transformed->clear();
  for (const auto& h : mats) {
    Matrix m = U.transpose() * h * U;
    acc += m.cwiseAbs2();
    if (transformed) transformed->push_back(std::move(m));
  }
  return acc;
}

double slot_sum(const Matrix& sq, const Scales& sc, const LossConfig& cfg) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < sq.cols(); ++j)
    for (Eigen::Index i = 0; i < sq.rows(); ++i) {
      if (i == j && !cfg.include_diagonal) continue;
      total += std::sqrt(sc.inner * sq(i, j) + cfg.eps);
    }
  return sc.outer * total;
}

}  // namespace

double loss_eps(const Matrix& U, const SymmetricMatrixSet& mats, const LossConfig& cfg) {
  if (mats.empty()) throw InvalidInput("loss: no matrices");
  if (U.rows() != mats.dim() || U.cols() != mats.dim()) throw InvalidInput("loss: dimension mismatch");
  return slot_sum(squared_sum(U, mats, nullptr), scales_for(mats.size(), cfg), cfg);
}

double loss_eps_transformed(const SymmetricMatrixSet& transformed, const LossConfig& cfg) {
  if (transformed.empty()) throw InvalidInput("loss: no matrices");
  Matrix acc = Matrix::Zero(transformed.dim(), transformed.dim());
  for (const auto& m : transformed) acc += m.cwiseAbs2();
  return slot_sum(acc, scales_for(transformed.size(), cfg), cfg);
}

double loss_difference(const Matrix& U, const Matrix& V, const SymmetricMatrixSet& mats, const LossConfig& cfg) {
  if (mats.empty()) throw InvalidInput("loss: no matrices");
  if (U.rows() != mats.dim() || U.cols() != mats.dim() || V.rows() != U.rows() || V.cols() != U.cols())
    throw InvalidInput("loss: dimension mismatch");
  const int d = mats.dim();
  const Matrix D = V - U;
  Matrix su = Matrix::Zero(d, d);
  Matrix ds = Matrix::Zero(d, d);
  for (const auto& h : mats) {
    const Matrix A = U.transpose() * h * U;
    const Matrix HD = h * D;
    // V^T H V - U^T H U = D^T H U + U^T H D + D^T H D
    const Matrix UtHD = U.transpose() * HD;
    const Matrix E = UtHD + UtHD.transpose() + D.transpose() * HD;
    su += A.cwiseAbs2();
    ds += (2.0 * A + E).cwiseProduct(E);
  }
  const Scales sc = scales_for(mats.size(), cfg);
  double total = 0.0;
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) {
      if (i == j && !cfg.include_diagonal) continue;
      const double a = sc.inner * su(i, j) + cfg.eps;
      const double b = std::max(sc.inner * (su(i, j) + ds(i, j)), 0.0) + cfg.eps;
      total += sc.inner * ds(i, j) / (std::sqrt(a) + std::sqrt(b));
    }
  return sc.outer * total;
}

double loss_half_two(const Matrix& U, const SymmetricMatrixSet& mats) {
  if (mats.empty()) throw InvalidInput("loss: no matrices");
  const Matrix sq = squared_sum(U, mats, nullptr);
  double s = 0.0;
  for (Eigen::Index j = 0; j < sq.cols(); ++j)
    for (Eigen::Index i = 0; i < sq.rows(); ++i) s += std::sqrt(std::sqrt(sq(i, j)));
  return s * s / std::sqrt(static_cast<double>(mats.size()));
}

double loss_and_gradient(const Matrix& U, const SymmetricMatrixSet& mats, const LossConfig& cfg,
                         Matrix& grad) {
  if (mats.empty()) throw InvalidInput("loss: no matrices");
  const int d = mats.dim();
  std::vector<Matrix> transformed;
  const Matrix sq = squared_sum(U, mats, &transformed);
  const Scales sc = scales_for(mats.size(), cfg);

  // dL/dM_n = W .* M_n with W_ij = outer * inner / sqrt(inner S_ij + eps)
  Matrix W(d, d);
  double total = 0.0;
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) {
      if (i == j && !cfg.include_diagonal) {
        W(i, j) = 0.0;
        continue;
      }
      const double root = std::sqrt(sc.inner * sq(i, j) + cfg.eps);
      total += root;
      W(i, j) = sc.outer * sc.inner / root;
    }

  // d/dU sum_ij G_ij (U^T H U)_ij = 2 H U G for symmetric H and G.
  grad = Matrix::Zero(d, d);
  for (std::size_t n = 0; n < mats.size(); ++n) {
    const Matrix G = W.cwiseProduct(transformed[n]);
    grad.noalias() += 2.0 * mats[n] * (U * G);
  }
  return sc.outer * total;
}

Matrix euclidean_gradient(const Matrix& U, const SymmetricMatrixSet& mats, const LossConfig& cfg) {
  Matrix g;
  loss_and_gradient(U, mats, cfg, g);
  return g;
}

}  // namespace sparsify
