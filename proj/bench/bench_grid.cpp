// Grid search: OpenMP depth-first kernel vs serial materializing reference.
//   bench_grid [--reps R] [--full]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "sparsify/grid_search.hpp"
#include "sparsify/testgen.hpp"

using namespace sparsify;

namespace {

template <class F>
double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  int reps = 3;
  bool full = false;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--reps") == 0 && i + 1 < argc) reps = std::stoi(argv[++i]);
    else if (std::strcmp(argv[i], "--full") == 0) full = true;
  }

  struct Case {
    int d;
    double h;
  };
  std::vector<Case> cases = {{2, 0.01}, {3, 0.1}, {3, 0.05}, {4, 0.5}};
  // the reference needs minutes on these
  if (full) cases.insert(cases.end(), {{4, 0.25}, {4, 0.2}});
  std::printf("threads=%d reps=%d\n", omp_get_max_threads(), reps);
  std::printf("%3s %6s %12s %12s %12s %9s %s\n", "d", "h", "points", "reference_s", "parallel_s", "speedup",
              "match");
  bool all_match = true;
  for (const Case& c : cases) {
    const MatrixInstance inst = protocol_instance(c.d, 0.0, 100 + c.d);
    GridConfig cfg;
    cfg.h = c.h;
    GridResult ref, par;
    const double t_ref = best_of(reps, [&] { ref = grid_search_reference(inst.mats, cfg); });
    const double t_par = best_of(reps, [&] { par = grid_search(inst.mats, cfg); });
    const bool match = ref.lattice_index == par.lattice_index && std::abs(ref.loss - par.loss) <= 1e-10 * (1 + ref.loss);
    all_match = all_match && match;
    std::printf("%3d %6.3f %12.0f %12.4f %12.4f %9.2f %s\n", c.d, c.h, ref.points, t_ref, t_par, t_ref / t_par,
                match ? "yes" : "NO");
  }
  return all_match ? 0 : 1;
}
