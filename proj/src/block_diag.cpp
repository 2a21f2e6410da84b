#include "sparsify/block_diag.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>


namespace sparsify {

namespace {

// K vec(A) = vec(A H - H A) for symmetric H, column-major vec.
Matrix commutator_operator(const Matrix& H) {
  const Eigen::Index d = H.rows();
  Matrix K = Matrix::Zero(d * d, d * d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) {
      const Eigen::Index row = i + j * d;
      // (A H)_ij = sum_k A_ik H_kj ; (H A)_ij = sum_k H_ik A_kj
      for (Eigen::Index k = 0; k < d; ++k) {
        K(row, i + k * d) += H(k, j);
        K(row, k + j * d) -= H(i, k);
      }
    }
  return K;
}

Matrix stacked_vecs(const SymmetricMatrixSet& h) {
  const int d = h.dim();
  Matrix S(static_cast<Eigen::Index>(h.size()), d * d);
  for (std::size_t n = 0; n < h.size(); ++n)
    S.row(static_cast<Eigen::Index>(n)) = Eigen::Map<const Eigen::RowVectorXd>(h[n].data(), d * d);
  return S;
}

}  // namespace

CommutantSpectrum commutant_operator(const SymmetricMatrixSet& h) {
  if (h.empty()) throw InvalidInput("commutant: no matrices");
  const int d = h.dim();
  if (d > kMaxCommutantDim)
    throw InvalidInput("commutant: d^2 = " + std::to_string(d * d) +
                       " exceeds 4096; split the input into smaller components first");
  const int dd = d * d;

  // With vec(H_n) = sum_k W_nk s_k vec(B_k) and orthonormal W, T equals
  // sum_k s_k^2 K(B_k)^T K(B_k), so stacking s_k K(B_k) factors T exactly.
  Eigen::BDCSVD<Matrix> vsvd(stacked_vecs(h), Eigen::ComputeThinV);
  const auto& s = vsvd.singularValues();
  std::vector<Matrix> factors;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (s(k) == 0.0) continue;
    Matrix B = Eigen::Map<const Matrix>(vsvd.matrixV().col(k).data(), d, d);
    B = (0.5 * (B + B.transpose())).eval();
    factors.push_back(s(k) * commutator_operator(B));
  }

  CommutantSpectrum out;
  out.eigenvalues = Vector::Zero(dd);
  Matrix V = Matrix::Identity(dd, dd);
  if (!factors.empty()) {
    Matrix stacked(static_cast<Eigen::Index>(factors.size()) * dd, dd);
    for (std::size_t k = 0; k < factors.size(); ++k) stacked.middleRows(static_cast<Eigen::Index>(k) * dd, dd) = factors[k];
    Eigen::BDCSVD<Matrix> svd(stacked, Eigen::ComputeThinV);
    // Singular values come descending; reverse for ascending eigenvalues.
    const auto& sv = svd.singularValues();
    for (int i = 0; i < dd; ++i) {
      const int src = dd - 1 - i;
      out.eigenvalues(i) = sv(src) * sv(src);
      V.col(i) = svd.matrixV().col(src);
    }
  }
  for (int i = 0; i < dd; ++i) out.eigenmatrices.push_back(Eigen::Map<const Matrix>(V.col(i).data(), d, d));
  return out;
}

BlockDiagResult error_controlled_blockdiag(const SymmetricMatrixSet& h, double delta, std::uint64_t seed,
                                           const BlockDiagOptions& opts) {
  if (!(delta > 0)) throw InvalidInput("blockdiag: delta must be positive");
  if (h.empty()) throw InvalidInput("blockdiag: no matrices");
  const int d = h.dim();
  const CommutantSpectrum spec = commutant_operator(h);

  std::vector<int> selected;
  for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i)
    if (spec.eigenvalues(i) < delta * delta) selected.push_back(static_cast<int>(i));
  if (selected.empty()) throw StageFailure("blockdiag", "delta too small: no eigenvalue of T below delta^2");

  Rng rng = make_rng(seed, 0x424c4b44);  // "BLKD"
  const Vector c = random_unit_vector(static_cast<int>(selected.size()), rng);
  Matrix V = Matrix::Zero(d, d);
  for (std::size_t k = 0; k < selected.size(); ++k) V += c(static_cast<Eigen::Index>(k)) * spec.eigenmatrices[selected[k]];
  V = (0.5 * (V + V.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(V);
  const Vector mu = es.eigenvalues();
  const Matrix Ueig = es.eigenvectors();

  // Cut the sorted eigenvalues at large gaps.
  BlockDiagResult res;
  res.mu = mu;
  res.commutant_dim = static_cast<int>(selected.size());
  const double spread = d > 1 ? std::abs(mu(d - 1) - mu(0)) : 0.0;
  const double gap_tol = opts.gamma * std::max(1.0, spread) / d;
  std::vector<int> label(d, 0);
  for (int i = 1; i < d; ++i) {
    const double gap = mu(i) - mu(i - 1);
    res.eigen_gaps.push_back(gap);
    label[i] = label[i - 1] + (gap > gap_tol ? 1 : 0);
  }
  const int nblocks = d > 0 ? label[d - 1] + 1 : 0;

  // Merge blocks that stay coupled in the transformed matrices.
  std::vector<Matrix> M;
  for (const auto& H : h) M.push_back(Ueig.transpose() * H * Ueig);
  Matrix coupling = Matrix::Zero(nblocks, nblocks);
  for (const auto& m : M)
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < d; ++i)
        if (label[i] != label[j])
          coupling(label[i], label[j]) = std::max(coupling(label[i], label[j]), std::abs(m(i, j)));
  std::vector<int> parent(nblocks);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int a = 0; a < nblocks; ++a)
    for (int b = a + 1; b < nblocks; ++b)
      if (coupling(a, b) > opts.merge_factor * delta) parent[find(a)] = find(b);

  std::vector<std::vector<int>> groups;
  std::vector<int> root_slot(nblocks, -1);
  for (int i = 0; i < d; ++i) {
    const int r = find(label[i]);
    if (root_slot[r] < 0) {
      root_slot[r] = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[root_slot[r]].push_back(i);
  }
  const BlockStructure eig_blocks = make_block_structure(d, groups);
  const std::vector<int> perm = eig_blocks.permutation();

  res.U = Matrix(d, d);
  for (int k = 0; k < d; ++k) res.U.col(k) = Ueig.col(perm[k]);
  res.U = to_special_orthogonal(res.U);

  std::vector<std::vector<int>> contiguous;
  int next = 0;
  for (int size : eig_blocks.profile) {
    contiguous.emplace_back(size);
    std::iota(contiguous.back().begin(), contiguous.back().end(), next);
    next += size;
  }
  res.structure = make_block_structure(d, contiguous);

  std::vector<int> owner(d);
  for (std::size_t g = 0; g < contiguous.size(); ++g)
    for (int i : contiguous[g]) owner[i] = static_cast<int>(g);
  for (const auto& H : h) {
    const Matrix T = res.U.transpose() * H * res.U;
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < d; ++i)
        if (owner[i] != owner[j]) res.off_block_residual = std::max(res.off_block_residual, std::abs(T(i, j)));
  }
  return res;
}

std::vector<SymmetricMatrixSet> extract_blocks(const SymmetricMatrixSet& h, const BlockDiagResult& r) {
  std::vector<std::vector<Matrix>> parts(r.structure.groups.size());
  for (const auto& H : h) {
    Matrix T = r.U.transpose() * H * r.U;
    T = (0.5 * (T + T.transpose())).eval();
    for (std::size_t g = 0; g < r.structure.groups.size(); ++g) {
      const auto& idx = r.structure.groups[g];
      const int k = static_cast<int>(idx.size());
      parts[g].push_back(T.block(idx.front(), idx.front(), k, k));
    }
  }
  std::vector<SymmetricMatrixSet> out;
  for (auto& p : parts) out.emplace_back(std::move(p));
  return out;
}

namespace {

std::vector<Vector> block_spectra(const BlockDiagResult& r, const SymmetricMatrixSet& h, const Vector& c) {
  const int d = h.dim();
  Matrix A = Matrix::Zero(d, d);
  for (std::size_t n = 0; n < h.size(); ++n) A += c(static_cast<Eigen::Index>(n)) * h[n];
  const Matrix T = r.U.transpose() * A * r.U;
  std::vector<Vector> out;
  for (const auto& idx : r.structure.groups) {
    const int k = static_cast<int>(idx.size());
    Matrix B(k, k);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) B(a, b) = T(idx[a], idx[b]);
    out.push_back(Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (B + B.transpose()), Eigen::EigenvaluesOnly).eigenvalues());
  }
  return out;
}

}  // namespace

bool blocks_equivalent(const BlockDiagResult& a, const SymmetricMatrixSet& ha, const BlockDiagResult& b,
                       const SymmetricMatrixSet& hb, double tol, std::uint64_t seed) {
  if (ha.dim() != hb.dim() || ha.size() != hb.size()) return false;
  if (a.structure.groups.size() != b.structure.groups.size()) return false;
  std::vector<int> pa = a.structure.profile, pb = b.structure.profile;
  std::sort(pa.begin(), pa.end());
  std::sort(pb.begin(), pb.end());
  if (pa != pb) return false;

  Rng rng = make_rng(seed, 0x45515556);  // "EQUV"
  const Vector c = random_unit_vector(static_cast<int>(ha.size()), rng);
  const std::vector<Vector> sa = block_spectra(a, ha, c);
  const std::vector<Vector> sb = block_spectra(b, hb, c);
  std::vector<bool> used(sb.size(), false);
  for (const auto& x : sa) {
    int best = -1;
    double best_dist = 0.0;
    for (std::size_t j = 0; j < sb.size(); ++j) {
      if (used[j] || sb[j].size() != x.size()) continue;
      const double dist = (sb[j] - x).cwiseAbs().maxCoeff();
      if (best < 0 || dist < best_dist) {
        best = static_cast<int>(j);
        best_dist = dist;
      }
    }
    if (best < 0 || best_dist > tol) return false;
    used[best] = true;
  }
  return true;
}

}  // namespace sparsify
