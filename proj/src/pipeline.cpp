#include "sparsify/pipeline.hpp"

#include <cmath>

namespace sparsify {

const char* to_string(InitKind k) {
  switch (k) {
    case InitKind::grid:
      return "grid";
    case InitKind::random:
      return "random";
    case InitKind::identity:
      return "identity";
  }
  return "?";
}

InitKind init_from_string(const std::string& s) {
  if (s == "grid") return InitKind::grid;
  if (s == "random") return InitKind::random;
  if (s == "identity") return InitKind::identity;
  throw InvalidInput("unknown init '" + s + "' (expected grid, random or identity)");
}

void PipelineConfig::validate() const {
  if (!(tau_rel >= 0)) throw InvalidInput("pipeline: tau must be nonnegative");
  if (!(delta > 0)) throw InvalidInput("pipeline: delta must be positive");
  if (!(span_tol_rel >= 0)) throw InvalidInput("pipeline: span tolerance must be nonnegative");
  if (random_candidates < 1) throw InvalidInput("pipeline: need at least one random candidate");
  if (etas.empty()) throw InvalidInput("pipeline: need at least one eta");
  for (double eta : etas)
    if (!(eta >= 0)) throw InvalidInput("pipeline: eta must be nonnegative");
  loss.validate();
  opt.validate();
  grid.validate();
}

namespace {

BlockRun optimize_block(const SymmetricMatrixSet& block, const PipelineConfig& cfg, std::uint64_t seed) {
  BlockRun run;
  const int k = block.dim();
  run.size = k;
  if (k == 1) {
    run.trajectory.U = Matrix::Identity(1, 1);
    run.stop_reason = "trivial";
    return run;
  }
  const SymmetricMatrixSet basis = span_basis(block, cfg.span_tol_rel);
  run.span_dim = static_cast<int>(basis.size());

  InitKind init = cfg.init;
  if (init == InitKind::grid && k > cfg.grid_max_block) init = InitKind::random;
  Matrix U0 = Matrix::Identity(k, k);
  if (init == InitKind::grid) {
    GridConfig g = cfg.grid;
    if (k >= 5) g.h = std::max(g.h, 1.0);
    run.grid_h = g.h;
    U0 = grid_search(basis, g).U;
  } else if (init == InitKind::random) {
    OptimizerConfig o = cfg.opt;
    U0 = random_init(basis, seed, o, cfg.loss, cfg.random_candidates, cfg.random_iters).U;
  }
  run.init = init;
  run.init_loss = loss_eps(U0, basis, cfg.loss);
  run.trajectory = minimize(basis, U0, cfg.opt, cfg.loss);
  run.trajectory.U = cfg.opt.method == Method::rgd ? to_special_orthogonal(run.trajectory.U)
                                                   : nearest_rotation(run.trajectory.U);
  run.final_loss = loss_eps(run.trajectory.U, basis, cfg.loss);
  run.iterations = run.trajectory.iterations;
  run.stop_reason = run.trajectory.stop_reason;
  return run;
}

}  // namespace

PipelineResult run_pipeline(const PipelineInput& in, const PipelineConfig& cfg) {
  cfg.validate();
  if (in.hessians.empty()) throw InvalidInput("pipeline: no Hessians");
  const int d = in.hessians.dim();
  PipelineResult res;
  res.d = d;
  res.seed = cfg.seed;
  res.etas = cfg.etas;

  // Vertex minimization.
  SymmetricMatrixSet reduced = in.hessians;
  res.U_V = Matrix::Identity(d, d);
  res.d1 = d;
  if (in.gradients) {
    if (in.gradients->dim() != d) throw InvalidInput("pipeline: gradient and Hessian dimensions differ");
    try {
      const VertexReduction red = vertex_minimize(*in.gradients, cfg.tau_rel);
      const ReducedHessians rh = reduce_hessians(in.hessians, red);
      res.U_V = red.U_V;
      res.d1 = red.d1;
      res.singular_values = red.singular_values;
      res.border_residual = rh.border_residual;
      reduced = rh.mats;
    } catch (const InvalidInput&) {
      throw;
    } catch (const std::exception& e) {
      throw StageFailure("vertex_min", e.what());
    }
  }

  Matrix U_blocks = Matrix::Identity(res.d1, res.d1);
  if (res.d1 > 0) {
    // Finest block split.
    if (cfg.block_diag) {
      try {
        res.blocks = error_controlled_blockdiag(reduced, cfg.delta, mix_seed(cfg.seed, 0xb10c));
      } catch (const StageFailure&) {
        throw;
      } catch (const std::exception& e) {
        throw StageFailure("block_diag", e.what());
      }
    } else {
      res.blocks.U = Matrix::Identity(res.d1, res.d1);
      std::vector<int> all(res.d1);
      for (int i = 0; i < res.d1; ++i) all[i] = i;
      res.blocks.structure = make_block_structure(res.d1, {all});
    }

    // Sparse component decomposition per block.
    const std::vector<SymmetricMatrixSet> parts = extract_blocks(reduced, res.blocks);
    Matrix inner = Matrix::Identity(res.d1, res.d1);
    for (std::size_t b = 0; b < parts.size(); ++b) {
      BlockRun run;
      try {
        run = optimize_block(parts[b], cfg, mix_seed(cfg.seed, 0x1000 + b));
      } catch (const StageFailure&) {
        throw;
      } catch (const InvalidInput& e) {
        throw StageFailure("manifold_opt", e.what());
      }
      run.indices = res.blocks.structure.groups[b];
      const int start = run.indices.front();
      inner.block(start, start, run.size, run.size) = run.trajectory.U;
      res.per_block.push_back(std::move(run));
    }
    U_blocks = res.blocks.U * inner;
  }

  Matrix embed = Matrix::Identity(d, d);
  embed.topLeftCorner(res.d1, res.d1) = U_blocks;
  res.U_total = res.U_V * embed;

  const SymmetricMatrixSet& eval = in.eval_hessians ? *in.eval_hessians : in.hessians;
  const SymmetricMatrixSet transformed = eval.conjugated(res.U_total);
  for (double eta : cfg.etas) {
    res.patterns.push_back(pattern_from_matrix_set(transformed, eta));
    if (in.truth) res.chi.push_back(res.patterns.back().ordered_count() - in.truth->ordered_count());
  }
  if (in.truth_rotation) {
    const SymmetricMatrixSet basis = span_basis(in.hessians, cfg.span_tol_rel);
    res.optimality_gap =
        loss_eps(res.U_total, basis, cfg.loss) - loss_eps(in.truth_rotation->transpose(), basis, cfg.loss);
  }
  return res;
}

PipelineInput sample_function(const SampledFunction& f, int N, std::uint64_t seed) {
  if (N < 1) throw InvalidInput("sample_function: N must be positive");
  if (!f.has_grad() || !f.has_hess()) throw InvalidInput("sample_function: gradient and Hessian required");
  PipelineInput in;
  GradientSample g;
  g.points = f.sample_points(N, seed);
  g.B = Matrix(f.d, N);
  std::vector<Matrix> hs;
  for (int n = 0; n < N; ++n) {
    g.B.col(n) = f.grad(g.points[n]);
    hs.push_back(f.hess(g.points[n]));
  }
  in.gradients = std::move(g);
  in.hessians = SymmetricMatrixSet(std::move(hs));
  if (f.truth) in.truth = f.truth->pattern;
  return in;
}

SampledFunction rotate_function(const SampledFunction& f, const Matrix& U) {
  if (f.domain != DomainKind::ball) throw InvalidInput("rotate_function: only ball domains are rotation invariant");
  if (U.rows() != f.d || U.cols() != f.d) throw InvalidInput("rotate_function: dimension mismatch");
  SampledFunction g = f;
  g.truth.reset();
  const auto eval = f.eval;
  g.eval = [eval, U](const Vector& x) { return eval(U * x); };
  if (f.has_grad()) {
    const auto grad = f.grad;
    g.grad = [grad, U](const Vector& x) { return Vector(U.transpose() * grad(U * x)); };
  }
  if (f.has_hess()) {
    const auto hess = f.hess;
    g.hess = [hess, U](const Vector& x) {
      Matrix H = U.transpose() * hess(U * x) * U;
      return Matrix(0.5 * (H + H.transpose()));
    };
  }
  return g;
}

int sparsity_gap(const Matrix& U, const SymmetricMatrixSet& mats, const SparsityPattern& truth, double eta) {
  if (truth.d != mats.dim()) throw InvalidInput("sparsity_gap: dimension mismatch");
  return pattern_from_matrix_set(mats.conjugated(U), eta).ordered_count() - truth.ordered_count();
}

double failure_ratio(const std::vector<int>& gaps) {
  if (gaps.empty()) throw InvalidInput("failure_ratio: no trials");
  int failures = 0;
  for (int chi : gaps)
    if (chi != 0) ++failures;
  return static_cast<double>(failures) / static_cast<double>(gaps.size());
}

}  // namespace sparsify
