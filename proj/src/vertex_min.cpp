#include "sparsify/vertex_min.hpp"

#include <cmath>

namespace sparsify {

double default_tau_rel(int d, bool noisy) { return noisy ? 1e-3 * std::sqrt(static_cast<double>(d)) : 1e-8; }

VertexReduction vertex_minimize(const GradientSample& g, double tau_rel) {
  if (g.count() == 0) throw InvalidInput("vertex_minimize: no gradient samples");
  if (g.dim() == 0) throw InvalidInput("vertex_minimize: zero dimension");
  if (!(tau_rel >= 0)) throw InvalidInput("vertex_minimize: tau must be nonnegative");
  if (!g.B.allFinite()) throw InvalidInput("vertex_minimize: non-finite gradient");
  const int d = g.dim();

  Eigen::BDCSVD<Matrix> svd(g.B, Eigen::ComputeFullU);
  VertexReduction red;
  red.U_V = to_special_orthogonal(svd.matrixU());
  red.singular_values = Vector::Zero(d);
  const auto& s = svd.singularValues();
  red.singular_values.head(s.size()) = s;
  const double smax = s.size() ? s(0) : 0.0;
  red.tau_abs = tau_rel * smax;
  red.d1 = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > red.tau_abs) ++red.d1;
  // Flipping column 0 keeps the active span; only the sign of one direction
  // changes, so d1 is unaffected.
  return red;
}

ReducedHessians reduce_hessians(const SymmetricMatrixSet& h, const VertexReduction& red) {
  if (h.empty()) throw InvalidInput("reduce_hessians: no matrices");
  const int d = h.dim();
  if (red.U_V.rows() != d) throw InvalidInput("reduce_hessians: dimension mismatch");
  const int d1 = red.d1;
  ReducedHessians out;
  std::vector<Matrix> blocks;
  for (const auto& H : h) {
    Matrix M = red.U_V.transpose() * H * red.U_V;
    M = (0.5 * (M + M.transpose())).eval();
    if (d1 < d) {
      out.border_residual = std::max(out.border_residual, M.rightCols(d - d1).cwiseAbs().maxCoeff());
    }
    blocks.push_back(M.topLeftCorner(d1, d1));
  }
  out.border_warning = out.border_residual > 10.0 * red.tau_abs;
  if (d1 > 0) out.mats = SymmetricMatrixSet(std::move(blocks));
  return out;
}

}  // namespace sparsify
