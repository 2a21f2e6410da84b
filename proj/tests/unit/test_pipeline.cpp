#include <cmath>

#include "doctest.h"
#include "sparsify/pipeline.hpp"
#include "sparsify/testgen.hpp"

using namespace sparsify;

namespace {

// g(x1) + g(x2) with g = sin(2 .) on the unit disc
SampledFunction separable() {
  SampledFunction f;
  f.d = 2;
  f.eval = [](const Vector& x) { return std::sin(2 * x(0)) + std::sin(2 * x(1)); };
  f.grad = [](const Vector& x) {
    Vector g(2);
    g << 2 * std::cos(2 * x(0)), 2 * std::cos(2 * x(1));
    return g;
  };
  f.hess = [](const Vector& x) {
    Matrix H = Matrix::Zero(2, 2);
    H(0, 0) = -4 * std::sin(2 * x(0));
    H(1, 1) = -4 * std::sin(2 * x(1));
    return H;
  };
  return f;
}

}  // namespace

TEST_CASE("separable function is already sparse") {
  const PipelineInput in = sample_function(separable(), 50, 1);
  PipelineConfig cfg;
  const PipelineResult r = run_pipeline(in, cfg);
  CHECK(r.d1 == 2);
  CHECK(r.blocks.structure.profile == std::vector<int>{1, 1});
  CHECK(r.patterns[0].off_diag.empty());
  CHECK(r.patterns.size() == 2);
  CHECK(r.chi.empty());
}

TEST_CASE("rotated f1 is sparsified") {
  const SampledFunction f = make_function(builtin_spec("f1", true, false, 11));
  const PipelineInput in = sample_function(f, 700, 11);
  PipelineConfig cfg;
  const PipelineResult r = run_pipeline(in, cfg);
  CHECK(r.d1 == 5);
  CHECK(r.blocks.structure.profile == std::vector<int>{3, 2});
  REQUIRE(r.chi.size() == 2);
  CHECK(r.chi[1] == 0);
  const SampledFunction fu = rotate_function(f, r.U_total);
  const auto pts = fu.sample_points(2000, 5);
  const auto c = derivative_smallness_counts(fu, pts, NormKind::inf, 1e-4);
  CHECK(c.G == 2);
  CHECK(c.H == 18);

  SUBCASE("composition of the staged transforms") {
    CHECK(orthogonality_defect(r.U_total) < 1e-10);
    // U_total^T H U_total restricted to the active block equals the staged product
    const Matrix& UV = r.U_V;
    const Matrix inner = UV.transpose() * r.U_total;  // embeds the block rotations
    for (std::size_t n = 0; n < 5; ++n) {
      const Matrix direct = r.U_total.transpose() * in.hessians[n] * r.U_total;
      const Matrix staged = inner.transpose() * (UV.transpose() * in.hessians[n] * UV) * inner;
      CHECK((direct - staged).norm() <= 1e-10 * (1 + direct.norm()));
    }
  }
  SUBCASE("patterns shrink as eta grows") {
    const SymmetricMatrixSet t = in.hessians.conjugated(r.U_total);
    SparsityPattern prev = pattern_from_matrix_set(t, 1e-12);
    for (double eta : {1e-9, 1e-6, 1e-3, 1e-1, 1.0}) {
      const SparsityPattern p = pattern_from_matrix_set(t, eta);
      for (const auto& e : p.off_diag) CHECK(prev.off_diag.count(e) == 1);
      prev = p;
    }
  }
}

TEST_CASE("random clean function: block profile matches the generator") {
  const FunctionSpec spec = random_function_spec(10, 3, false);
  const SampledFunction f = make_function(spec);
  const PipelineResult r = run_pipeline(sample_function(f, 1000, 3), PipelineConfig{});
  // the vertex step drops coordinates that no term touches
  std::vector<int> expected;
  for (const auto& g : make_block_structure(10, f.truth->components).groups)
    if (g.size() > 1) expected.push_back(static_cast<int>(g.size()));
  std::vector<int> got;
  for (int s : r.blocks.structure.profile)
    if (s > 1) got.push_back(s);
  CHECK(got == expected);
}

TEST_CASE("matrix family without the block split") {
  const MatrixInstance m = protocol_instance(3, 0.0, 2);
  PipelineInput in;
  in.hessians = m.mats;
  in.truth = m.spec.J;
  in.truth_rotation = m.R;
  PipelineConfig cfg;
  cfg.block_diag = false;
  const PipelineResult r = run_pipeline(in, cfg);
  REQUIRE(r.chi.size() == 2);
  CHECK(r.chi[0] == 0);
  REQUIRE(r.optimality_gap.has_value());
  CHECK(*r.optimality_gap <= 1e-6);
  CHECK(r.per_block.size() == 1);
  CHECK(r.per_block[0].init == InitKind::grid);
}

TEST_CASE("sparsity_gap and failure_ratio") {
  const MatrixInstance m = protocol_instance(4, 0.0, 9);
  CHECK(sparsity_gap(m.R.transpose(), m.mats, m.spec.J, 1e-9) == 0);
  CHECK(sparsity_gap(Matrix::Identity(4, 4), m.mats, m.spec.J, 1e-9) > 0);
  CHECK(sparsity_gap(m.R.transpose(), m.mats, m.spec.J, 1e12) == -m.spec.J.ordered_count());

  CHECK(failure_ratio({0, 0, 0}) == 0.0);
  std::vector<int> g(100, 0);
  g[17] = 2;
  CHECK(failure_ratio(g) == doctest::Approx(0.01));
  CHECK(failure_ratio({1, 3, 2}) == 1.0);
  CHECK(failure_ratio({-1, 0}) == 0.5);
  CHECK_THROWS_AS(failure_ratio({}), InvalidInput);
}

TEST_CASE("stage failures carry the stage name") {
  const MatrixInstance m = protocol_instance(3, 0.0, 4);
  PipelineInput in;
  in.hessians = m.mats;
  PipelineConfig cfg;
  cfg.delta = 1e-300;
  try {
    run_pipeline(in, cfg);
    FAIL("expected a stage failure");
  } catch (const StageFailure& e) {
    CHECK(e.stage() == "blockdiag");
  }
  cfg = PipelineConfig{};
  cfg.etas = {};
  CHECK_THROWS_AS(run_pipeline(in, cfg), InvalidInput);
}
