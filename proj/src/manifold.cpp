#include "sparsify/manifold.hpp"

#include <cmath>
#include <numbers>

#include "sparsify/rotations.hpp"

namespace sparsify {

const char* to_string(Method m) { return m == Method::rgd ? "rgd" : "landing"; }

Method method_from_string(const std::string& s) {
  if (s == "rgd") return Method::rgd;
  if (s == "landing") return Method::landing;
  throw InvalidInput("unknown method '" + s + "' (expected rgd or landing)");
}

void OptimizerConfig::validate() const {
  if (!(step > 0)) throw InvalidInput("optimizer: step must be positive");
  if (method == Method::landing && !(landing_lambda > 0)) throw InvalidInput("optimizer: lambda must be positive");
  if (max_iters < 0) throw InvalidInput("optimizer: max_iters must be nonnegative");
  if (grad_tol < 0) throw InvalidInput("optimizer: grad_tol must be nonnegative");
}

Matrix riemannian_gradient(const Matrix& U, const Matrix& G) {
  return 0.5 * G - 0.5 * U * G.transpose() * U;
}

Matrix qr_retraction(const Matrix& U, const Matrix& V) {
  const Matrix A = U - V;
  const Eigen::Index d = A.rows();
  Eigen::HouseholderQR<Matrix> qr(A);
  Matrix Q = qr.householderQ() * Matrix::Identity(d, d);
  const auto& R = qr.matrixQR();
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < d; ++j) {
    if (std::abs(R(j, j)) < 1e-14 * scale) throw StageFailure("retraction", "degenerate retraction step (reduce nu)");
    if (R(j, j) < 0) Q.col(j) *= -1.0;
  }
  return Q;
}

namespace {

void check_start(const SymmetricMatrixSet& mats, const Matrix& U0, const OptimizerConfig& opt,
                 const LossConfig& cfg) {
  opt.validate();
  cfg.validate();
  if (mats.empty()) throw InvalidInput("optimizer: no matrices");
  if (U0.rows() != mats.dim() || U0.cols() != mats.dim()) throw InvalidInput("optimizer: dimension mismatch");
}

}  // namespace

Trajectory rgd_minimize(const SymmetricMatrixSet& mats, const Matrix& U0, const OptimizerConfig& opt,
                        const LossConfig& cfg) {
  check_start(mats, U0, opt, cfg);
  if (orthogonality_defect(U0) > 1e-8) throw InvalidInput("rgd: initial point must be orthogonal");
  Trajectory tr;
  Matrix U = to_special_orthogonal(U0);
  Matrix G;
  double loss = loss_and_gradient(U, mats, cfg, G);

  for (int r = 0;; ++r) {
    if (!std::isfinite(loss)) throw StageFailure("rgd", "non-finite loss at iteration " + std::to_string(r));
    const Matrix X = riemannian_gradient(U, G);
    const double gn = X.norm();
    tr.records.push_back({loss, gn, orthogonality_defect(U)});
    tr.iterations = r;
    if (gn <= opt.grad_tol) {
      tr.converged = true;
      tr.stop_reason = "grad_tol";
      break;
    }
    if (r >= opt.max_iters) {
      tr.stop_reason = "max_iters";
      break;
    }

    // The tracked loss moves by differences computed from next - U. The
    // rounding that leaves next slightly off O(d) is removed to first order:
    // with K = U^T (V - U), V^T V - I = K + K^T + K^T K, and projecting V
    // back moves it by about -U (V^T V - I) / 2. Near a minimizer this keeps
    // decreases resolvable after loss_eps itself has hit rounding level.
    const auto step_change = [&](const Matrix& V) {
      const Matrix K = U.transpose() * (V - U);
      const Matrix S = K + K.transpose() + K.transpose() * K;
      return loss_difference(U, V, mats, cfg) - 0.5 * G.cwiseProduct(U * S).sum();
    };
    double t = opt.step;
    Matrix next = qr_retraction(U, t * X);
    double change = 0.0;
    if (opt.backtracking) {
      change = step_change(next);
      while (change > -opt.armijo_c * t * gn * gn) {
        t *= 0.5;
        if (t < 1e-30) break;
        next = qr_retraction(U, t * X);
        change = step_change(next);
      }
      if (t < 1e-30) {
        // No representable decrease along -grad: a numerical stationary point.
        tr.converged = true;
        tr.stop_reason = "no_decrease";
        break;
      }
    } else {
      change = step_change(next);
    }
    U = std::move(next);
    loss_and_gradient(U, mats, cfg, G);
    loss += change;
  }
  tr.U = U;
  return tr;
}

Trajectory landing_minimize(const SymmetricMatrixSet& mats, const Matrix& U0, const OptimizerConfig& opt,
                            const LossConfig& cfg) {
  check_start(mats, U0, opt, cfg);
  const Eigen::Index d = U0.rows();
  const Matrix I = Matrix::Identity(d, d);
  Trajectory tr;
  Matrix U = U0;
  if (orthogonality_defect(U) < 1e-8) U = to_special_orthogonal(U);
  Matrix G;
  for (int r = 0;; ++r) {
    const double loss = loss_and_gradient(U, mats, cfg, G);
    if (!std::isfinite(loss)) throw StageFailure("landing", "non-finite loss at iteration " + std::to_string(r));
    // relative gradient skew(G U^T) U; equals the Riemannian gradient on O(d)
    const Matrix GU = G * U.transpose();
    const Matrix X = 0.5 * (GU - GU.transpose()) * U;
    const double gn = X.norm();
    const double defect = orthogonality_defect(U);
    tr.records.push_back({loss, gn, defect});
    tr.iterations = r;
    if (defect > 1.0) throw StageFailure("landing", "left attraction region (reduce nu)");
    if (gn <= opt.grad_tol && defect <= opt.defect_tol) {
      tr.converged = true;
      tr.stop_reason = "grad_tol";
      break;
    }
    if (r >= opt.max_iters) {
      tr.stop_reason = "max_iters";
      break;
    }
    U -= opt.step * (X + opt.landing_lambda * (U * U.transpose() - I) * U);
  }
  tr.U = U;
  return tr;
}

Trajectory minimize(const SymmetricMatrixSet& mats, const Matrix& U0, const OptimizerConfig& opt,
                    const LossConfig& cfg) {
  return opt.method == Method::rgd ? rgd_minimize(mats, U0, opt, cfg) : landing_minimize(mats, U0, opt, cfg);
}

Matrix nearest_rotation(const Matrix& A) {
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return to_special_orthogonal(svd.matrixU() * svd.matrixV().transpose());
}

RandomInitResult random_init(const SymmetricMatrixSet& mats, std::uint64_t seed, const OptimizerConfig& opt,
                             const LossConfig& cfg, int candidates, int iters_per_candidate) {
  if (mats.empty()) throw InvalidInput("random_init: no matrices");
  const int d = mats.dim();
  const AngleLayout layout(d);
  Rng rng = make_rng(seed, 0x52494e49);  // "RINI"
  RandomInitResult res;
  res.candidates = candidates;
  OptimizerConfig run = opt;
  run.max_iters = iters_per_candidate;
  double best = std::numeric_limits<double>::infinity();
  for (int c = 0; c < candidates; ++c) {
    Vector alpha(layout.count());
    for (int k = 0; k < layout.count(); ++k) {
      std::uniform_real_distribution<double> unif(0.0, layout.range(k));
      alpha(layout.slot(k)) = unif(rng);
    }
    const Matrix U0 = angles_to_rotation(alpha, d);
    const Trajectory tr = minimize(mats, U0, run, cfg);
    const Matrix U = run.method == Method::rgd ? to_special_orthogonal(tr.U) : nearest_rotation(tr.U);
    const double score = loss_half_two(U, mats);
    res.candidate_scores.push_back(score);
    if (score < best) {
      best = score;
      res.U = U;
      res.chosen = c;
    }
  }
  return res;
}

namespace {

int numerical_rank(const Matrix& A, double tol_rel) {
  if (A.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(A);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol_rel * s(0)) ++r;
  return r;
}

Matrix stacked_vecs(const SymmetricMatrixSet& mats) {
  const int d = mats.dim();
  Matrix S(static_cast<Eigen::Index>(mats.size()), d * d);
  for (std::size_t n = 0; n < mats.size(); ++n)
    S.row(static_cast<Eigen::Index>(n)) = Eigen::Map<const Eigen::RowVectorXd>(mats[n].data(), d * d);
  return S;
}

}  // namespace

int span_dimension(const SymmetricMatrixSet& mats, double tol_rel) {
  if (mats.empty()) return 0;
  return numerical_rank(stacked_vecs(mats), tol_rel);
}

SymmetricMatrixSet span_basis(const SymmetricMatrixSet& mats, double tol_rel) {
  if (mats.empty()) throw InvalidInput("span_basis: no matrices");
  const int d = mats.dim();
  const Matrix S = stacked_vecs(mats);
  Eigen::BDCSVD<Matrix> svd(S, Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  std::vector<Matrix> basis;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (s(0) == 0.0 || s(k) <= tol_rel * s(0)) break;
    Matrix b = Eigen::Map<const Matrix>(svd.matrixV().col(k).data(), d, d);
    basis.push_back(0.5 * (b + b.transpose()));
  }
  if (basis.empty()) basis.push_back(Matrix::Zero(d, d));
  return SymmetricMatrixSet(std::move(basis));
}

OptimalityReport sufficient_optimality_check(const SymmetricMatrixSet& mats, const Matrix& U, double count_tol,
                                             double rank_tol) {
  OptimalityReport rep;
  if (mats.empty()) return rep;
  const int d = mats.dim();
  const double N = static_cast<double>(mats.size());
  Matrix sq = Matrix::Zero(d, d);
  bool zero_diag = true;
  for (const auto& b : mats) {
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    if (b.diagonal().cwiseAbs().maxCoeff() > 1e-12 * scale) zero_diag = false;
    sq += (U.transpose() * b * U).cwiseAbs2();
    rep.max_rank = std::max(rep.max_rank, numerical_rank(b, rank_tol));
  }
  sq /= N;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (sq(i, j) > count_tol) {
        ++rep.ordered_count;
        if (i <= j) ++rep.unordered_count;
      }
  rep.span_dim = span_dimension(mats, rank_tol);
  rep.bound = std::max(rep.span_dim, rep.max_rank);
  if (zero_diag && rep.ordered_count == rep.bound) rep.status = Optimality::certified_optimal;
  return rep;
}

}  // namespace sparsify
