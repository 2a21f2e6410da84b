#include <omp.h>

#include <numbers>

#include "doctest.h"
#include "sparsify/grid_search.hpp"
#include "sparsify/rotations.hpp"
#include "sparsify/testgen.hpp"

using namespace sparsify;

constexpr double kPi = std::numbers::pi;

TEST_CASE("grid search on already diagonal matrices returns an exact diagonalizer") {
  const SymmetricMatrixSet s({Matrix(Vector::LinSpaced(2, 1, 2).asDiagonal()),
                              Matrix(Vector::LinSpaced(2, -1, 3).asDiagonal())});
  GridConfig cfg;
  cfg.h = kPi / 4;
  const GridResult r = grid_search(s, cfg);
  CHECK(r.U.isIdentity(1e-15));
  CHECK(r.lattice_index == std::vector<int>{0});
  Matrix M = r.U.transpose() * s[0] * r.U;
  CHECK(std::abs(M(0, 1)) < 1e-15);
}

TEST_CASE("planar rotated matrix: returned angle within h of a diagonalizer") {
  const double theta = 1.1;
  Matrix D = Matrix::Zero(2, 2);
  D(0, 0) = 2.0;
  D(1, 1) = -1.0;
  const Matrix R = jacobi_rotation(0, theta, 2);
  const SymmetricMatrixSet s({R * D * R.transpose()});  // U = R diagonalizes
  GridConfig cfg;
  cfg.h = 0.01;
  const GridResult r = grid_search(s, cfg);
  const double a = r.angles(0);
  // diagonalizers: theta + k pi/2
  double dist = 1e9;
  for (int k = -4; k <= 4; ++k) dist = std::min(dist, std::abs(a - (theta + k * kPi / 2)));
  CHECK(dist <= cfg.h);
  // 1-d scan oracle
  double best = 1e300, best_a = 0;
  for (int i = 0; i < lattice_size(2 * kPi, cfg.h); ++i) {
    Vector al(1);
    al << i * cfg.h;
    const double v = loss_half_two(angles_to_rotation(al, 2), s);
    if (v < best) {
      best = v;
      best_a = i * cfg.h;
    }
  }
  CHECK(a == best_a);
}

TEST_CASE("grid cardinality and budget") {
  const MatrixInstance m = protocol_instance(3, 0.0, 1);
  GridConfig cfg;
  cfg.h = 1.0;
  const GridResult r = grid_search(m.mats, cfg);
  CHECK(r.points == 196.0);
  // the reference enumerates every point; its chunking must not matter
  cfg.block_size = 7;
  const GridResult ref = grid_search_reference(m.mats, cfg);
  CHECK(ref.lattice_index == r.lattice_index);

  cfg.h = 0.01;
  cfg.max_points = 1e6;
  try {
    grid_search(m.mats, cfg);
    FAIL("expected a budget failure");
  } catch (const StageFailure& e) {
    const std::string msg = e.what();
    CHECK(msg.find("ceil(2pi/h)^(d-1) * ceil(pi/h)^((d-1)(d-2)/2)") != std::string::npos);
    CHECK(msg.find("use h >=") != std::string::npos);
  }
  cfg.h = 0.0;
  CHECK_THROWS_AS(grid_search(m.mats, cfg), InvalidInput);
}

TEST_CASE("parallel kernel matches the serial reference") {
  for (int d = 2; d <= 4; ++d) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const MatrixInstance m = protocol_instance(d, seed == 2 ? 1e-3 : 0.0, 50 + seed);
      for (GridSelector sel : {GridSelector::l_half_two, GridSelector::l_eps}) {
        GridConfig cfg;
        cfg.h = d == 2 ? 0.05 : (d == 3 ? 0.3 : 0.9);
        cfg.selector = sel;
        cfg.block_size = 1000;
        const GridResult a = grid_search(m.mats, cfg);
        const GridResult b = grid_search_reference(m.mats, cfg);
        CHECK(a.lattice_index == b.lattice_index);
        CHECK(a.loss == doctest::Approx(b.loss).epsilon(1e-12));
        CHECK((a.U - b.U).norm() == 0.0);
        CHECK(grid_selector_loss(a.U, m.mats, cfg) == doctest::Approx(a.loss).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("ties go to the first lattice point; thread count does not matter") {
  // zero set: every point ties, so the answer is lattice point 0
  const SymmetricMatrixSet zero({Matrix::Zero(3, 3)});
  GridConfig cfg;
  cfg.h = 0.5;
  const GridResult z = grid_search(zero, cfg);
  CHECK(z.lattice_index == std::vector<int>{0, 0, 0});

  const MatrixInstance m = protocol_instance(3, 0.0, 7);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const GridResult one = grid_search(m.mats, cfg);
  omp_set_num_threads(4);
  const GridResult four = grid_search(m.mats, cfg);
  omp_set_num_threads(saved);
  CHECK(one.lattice_index == four.lattice_index);
  CHECK(one.loss == four.loss);
}
