#include "doctest.h"
#include "sparsify/graphs.hpp"
#include "sparsify/testgen.hpp"

using namespace sparsify;

namespace {

SparsityPattern edges(int d, std::initializer_list<std::pair<int, int>> es) {
  SparsityPattern p(d);
  for (auto [i, j] : es) p.add(i - 1, j - 1);  // 1-based in the tests
  return p;
}

}  // namespace

TEST_CASE("pattern_from_matrix_set thresholds the mean absolute matrix") {
  SUBCASE("zero matrix gives the empty pattern") {
    const SymmetricMatrixSet s({Matrix::Zero(3, 3)});
    const auto p = pattern_from_matrix_set(s, 0.0);
    CHECK(p.off_diag.empty());
    CHECK(p.diag.empty());
  }
  SUBCASE("single exchange pair") {
    Matrix E = Matrix::Zero(2, 2);
    E(0, 1) = E(1, 0) = 1.0;
    const auto p = pattern_from_matrix_set(SymmetricMatrixSet({E}), 0.5);
    CHECK(p.off_diag == std::set<std::pair<int, int>>{{0, 1}});
    CHECK(p.diag.empty());
  }
  SUBCASE("conjugating a rotated family back recovers J") {
    MatrixInstanceSpec spec;
    spec.d = 3;
    spec.J = edges(3, {{1, 2}, {3, 3}, {1, 1}});
    spec.N = 6;
    spec.rotation_seed = 4;
    spec.entry_seed = 5;
    const MatrixInstance inst = gen_matrix_set(spec);
    CHECK(pattern_from_matrix_set(inst.mats.conjugated(inst.R.transpose()), 1e-9) == spec.J);
  }
  SUBCASE("mean over the set, not max") {
    Matrix A = Matrix::Zero(2, 2), B = Matrix::Zero(2, 2);
    A(0, 1) = A(1, 0) = 1.0;
    const auto s = SymmetricMatrixSet({A, B});
    CHECK(mean_abs_matrix(s)(0, 1) == doctest::Approx(0.5));
    CHECK(pattern_from_matrix_set(s, 0.4).has_edge(0, 1));
    CHECK_FALSE(pattern_from_matrix_set(s, 0.6).has_edge(0, 1));
  }
  CHECK_THROWS_AS(pattern_from_matrix_set(SymmetricMatrixSet{}, 0.0), InvalidInput);
}

TEST_CASE("connected_components") {
  SUBCASE("two disjoint edges") {
    const auto b = connected_components(edges(4, {{1, 2}, {3, 4}}));
    CHECK(b.groups == std::vector<std::vector<int>>{{0, 1}, {2, 3}});
    CHECK(b.profile == std::vector<int>{2, 2});
  }
  SUBCASE("empty graph gives singletons") {
    const auto b = connected_components(SparsityPattern(3));
    CHECK(b.profile == std::vector<int>{1, 1, 1});
  }
  SUBCASE("path plus isolated vertices") {
    const auto b = connected_components(edges(5, {{1, 2}, {2, 3}}));
    CHECK(b.groups == std::vector<std::vector<int>>{{0, 1, 2}, {3}, {4}});
    CHECK(b.profile == std::vector<int>{3, 1, 1});
  }
  SUBCASE("larger groups first, ties by smallest index") {
    const auto b = connected_components(edges(6, {{5, 6}, {2, 4}, {1, 3}, {3, 5}}));
    CHECK(b.groups == std::vector<std::vector<int>>{{0, 2, 4, 5}, {1, 3}});
  }
  SUBCASE("restricting the pattern to one group keeps it whole") {
    const auto p = edges(7, {{1, 4}, {4, 7}, {2, 5}, {3, 6}, {6, 3}});
    for (const auto& g : connected_components(p).groups) {
      SparsityPattern sub(static_cast<int>(g.size()));
      for (std::size_t a = 0; a < g.size(); ++a)
        for (std::size_t b = a + 1; b < g.size(); ++b)
          if (p.has_edge(g[a], g[b])) sub.add(static_cast<int>(a), static_cast<int>(b));
      CHECK(connected_components(sub).groups.size() == 1);
    }
  }
  SUBCASE("permutation matrix lists the groups contiguously") {
    const auto b = connected_components(edges(4, {{1, 3}}));
    const Matrix P = b.permutation_matrix();
    Matrix H = Matrix::Zero(4, 4);
    H(0, 2) = H(2, 0) = 1.0;
    const Matrix T = P.transpose() * H * P;
    CHECK(T(0, 1) == 1.0);
    CHECK(T.cwiseAbs().sum() == 2.0);
  }
}

TEST_CASE("profile_preceq") {
  CHECK(profile_preceq({1, 1, 1, 1}, {2, 2}) == ProfileOrder::finer);
  CHECK(profile_preceq({2, 2}, {1, 1, 1, 1}) == ProfileOrder::coarser);
  CHECK(profile_preceq({3, 1}, {2, 2}) == ProfileOrder::incomparable);
  CHECK(profile_preceq({2, 2}, {2, 2}) == ProfileOrder::equal);
  CHECK(profile_preceq({3, 2, 1}, {4, 2}) == ProfileOrder::finer);
  CHECK(profile_preceq({2, 2, 2}, {3, 3}) == ProfileOrder::incomparable);
  CHECK_THROWS_AS(profile_preceq({2, 1}, {2, 2}), InvalidInput);

  SUBCASE("preorder axioms on sampled profiles") {
    const std::vector<std::vector<int>> ps = {{1, 1, 1, 1, 1, 1}, {2, 1, 1, 1, 1}, {2, 2, 1, 1}, {3, 1, 1, 1},
                                              {2, 2, 2},          {3, 2, 1},       {4, 1, 1},    {3, 3},
                                              {4, 2},             {5, 1},          {6}};
    for (const auto& a : ps) {
      CHECK(profile_refines(a, a));
      for (const auto& b : ps)
        for (const auto& c : ps)
          if (profile_refines(a, b) && profile_refines(b, c)) CHECK(profile_refines(a, c));
    }
  }
}

TEST_CASE("maximal_cliques") {
  using L = std::vector<std::vector<int>>;
  CHECK(maximal_cliques(edges(3, {{1, 2}, {2, 3}, {1, 3}})) == L{{0, 1, 2}});
  CHECK(maximal_cliques(edges(3, {{1, 2}, {2, 3}})) == L{{0, 1}, {1, 2}});
  CHECK(maximal_cliques(edges(4, {{1, 2}, {2, 3}, {3, 4}, {1, 4}})) == L{{0, 1}, {0, 3}, {1, 2}, {2, 3}});
  SUBCASE("diagonal-only vertices are singleton cliques") {
    SparsityPattern p(3);
    p.add(1, 1);
    CHECK(maximal_cliques(p) == L{{1}});
  }
  SUBCASE("brute force on a random graph") {
    Rng rng = make_rng(3);
    SparsityPattern p(7);
    for (int i = 0; i < 7; ++i)
      for (int j = i + 1; j < 7; ++j)
        if (std::uniform_real_distribution<double>(0, 1)(rng) < 0.5) p.add(i, j);
    L brute;
    for (int mask = 1; mask < (1 << 7); ++mask) {
      std::vector<int> s;
      for (int i = 0; i < 7; ++i)
        if (mask >> i & 1) s.push_back(i);
      auto clique = [&](int m) {
        for (int i = 0; i < 7; ++i)
          for (int j = i + 1; j < 7; ++j)
            if ((m >> i & 1) && (m >> j & 1) && !p.has_edge(i, j)) return false;
        return true;
      };
      if (!clique(mask)) continue;
      // vertices must be in the graph: an endpoint of some edge
      bool ok = true;
      for (int v : s) {
        bool deg = false;
        for (int w = 0; w < 7; ++w) deg = deg || (w != v && p.has_edge(v, w));
        ok = ok && deg;
      }
      if (!ok) continue;
      bool maximal = true;
      for (int v = 0; v < 7; ++v)
        if (!(mask >> v & 1) && clique(mask | 1 << v)) maximal = false;
      if (maximal) brute.push_back(s);
    }
    std::sort(brute.begin(), brute.end());
    CHECK(maximal_cliques(p) == brute);
  }
}
