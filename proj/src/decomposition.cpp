#include "sparsify/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace sparsify {

double SampledFunction::lower(int i) const { return domain == DomainKind::ball ? -radius : lo(i); }
double SampledFunction::upper(int i) const { return domain == DomainKind::ball ? radius : hi(i); }

bool SampledFunction::contains(const Vector& x, double slack) const {
  if (x.size() != d) return false;
  if (domain == DomainKind::ball) return x.norm() <= radius + slack;
  for (int i = 0; i < d; ++i)
    if (x(i) < lo(i) - slack || x(i) > hi(i) + slack) return false;
  return true;
}

Vector SampledFunction::sample(Rng& rng) const {
  if (domain == DomainKind::ball) return random_point_in_ball(d, radius, rng);
  Vector x(d);
  for (int i = 0; i < d; ++i) x(i) = std::uniform_real_distribution<double>(lo(i), hi(i))(rng);
  return x;
}

std::vector<Vector> SampledFunction::sample_points(int count, std::uint64_t seed) const {
  Rng rng = make_rng(seed, 0x504f494e);  // "POIN"
  std::vector<Vector> pts;
  pts.reserve(count);
  for (int k = 0; k < count; ++k) pts.push_back(sample(rng));
  return pts;
}

SampledFunction make_box_function(int d, double lo, double hi, std::function<double(const Vector&)> eval) {
  if (d < 1 || !(lo < hi)) throw InvalidInput("box function: need d >= 1 and lo < hi");
  SampledFunction f;
  f.d = d;
  f.domain = DomainKind::box;
  f.lo = Vector::Constant(d, lo);
  f.hi = Vector::Constant(d, hi);
  f.eval = std::move(eval);
  return f;
}

DerivativeCheck derivative_self_check(const SampledFunction& f, const std::vector<Vector>& points) {
  DerivativeCheck out;
  const int d = f.d;
  for (const auto& x : points) {
    if (f.has_grad()) {
      Vector fd(d);
      for (int i = 0; i < d; ++i) {
        const double h = 1e-5 * std::max(1.0, std::abs(x(i)));
        Vector p = x, m = x;
        p(i) += h;
        m(i) -= h;
        fd(i) = (f.eval(p) - f.eval(m)) / (2 * h);
      }
      out.grad_rel_error = std::max(out.grad_rel_error, (f.grad(x) - fd).norm() / std::max(1.0, fd.norm()));
    }
    if (f.has_hess() && f.has_grad()) {
      Matrix fd(d, d);
      for (int i = 0; i < d; ++i) {
        const double h = 1e-5 * std::max(1.0, std::abs(x(i)));
        Vector p = x, m = x;
        p(i) += h;
        m(i) -= h;
        fd.col(i) = (f.grad(p) - f.grad(m)) / (2 * h);
      }
      out.hess_rel_error = std::max(out.hess_rel_error, (f.hess(x) - fd).norm() / std::max(1.0, fd.norm()));
    }
  }
  return out;
}

void gauss_legendre(int n, double a, double b, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw InvalidInput("gauss_legendre: need at least one node");
  // Golub-Welsch on the Legendre Jacobi matrix.
  Matrix J = Matrix::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double beta = k / std::sqrt(4.0 * k * k - 1.0);
    J(k, k - 1) = J(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(J);
  nodes.resize(n);
  weights.resize(n);
  for (int k = 0; k < n; ++k) {
    nodes[k] = a + (b - a) * 0.5 * (es.eigenvalues()(k) + 1.0);
    const double v = es.eigenvectors()(0, k);
    weights[k] = v * v;  // 2 v^2 on [-1,1], halved for the normalized measure
  }
}

std::string subset_label(const IndexSet& u) {
  std::string s = "{";
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (k) s += ",";
    s += std::to_string(u[k] + 1);
  }
  return s + "}";
}

namespace {

void check_subset(const SampledFunction& f, const IndexSet& u) {
  if (u.size() > 20) throw InvalidInput("subset too large");
  for (int i : u)
    if (i < 0 || i >= f.d) throw InvalidInput("subset index out of range");
}

std::uint64_t subset_key(const IndexSet& u) {
  std::uint64_t key = 0;
  for (int i : u) key = mix_seed(key, static_cast<std::uint64_t>(i) + 1);
  return key;
}

// Integrates g over the coordinates `free` of the domain with the
// normalized tensor Gauss rule; other coordinates are taken from base.
double tensor_integral(const SampledFunction& f, const std::vector<int>& free, const Vector& base, int nodes,
                       const std::function<double(const Vector&)>& g) {
  const int m = static_cast<int>(free.size());
  std::vector<std::vector<double>> t(m), w(m);
  for (int k = 0; k < m; ++k) gauss_legendre(nodes, f.lower(free[k]), f.upper(free[k]), t[k], w[k]);
  std::vector<int> idx(m, 0);
  Vector z = base;
  double total = 0.0;
  for (;;) {
    double weight = 1.0;
    for (int k = 0; k < m; ++k) {
      z(free[k]) = t[k][idx[k]];
      weight *= w[k][idx[k]];
    }
    total += weight * g(z);
    int k = m - 1;
    while (k >= 0 && ++idx[k] == nodes) idx[k--] = 0;
    if (k < 0) break;
  }
  return total;
}

}  // namespace

double anchored_term(const SampledFunction& f, const IndexSet& u, const AnchorConfig& cfg, const Vector& x) {
  check_subset(f, u);
  if (cfg.c.size() != f.d || x.size() != f.d) throw InvalidInput("anchored_term: dimension mismatch");
  const int k = static_cast<int>(u.size());
  double total = 0.0;
  for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
    Vector z = cfg.c;
    int bits = 0;
    for (int b = 0; b < k; ++b)
      if (mask & (1u << b)) {
        z(u[b]) = x(u[b]);
        ++bits;
      }
    total += ((k - bits) % 2 ? -1.0 : 1.0) * f.eval(z);
  }
  return total;
}

Estimate anova_term(const SampledFunction& f, const IndexSet& u, const Vector& x, const QuadratureSpec& q) {
  check_subset(f, u);
  if (x.size() != f.d) throw InvalidInput("anova_term: dimension mismatch");
  if (q.samples_or_nodes < 1) throw InvalidInput("anova_term: need at least one sample");
  const int k = static_cast<int>(u.size());
  Estimate est;
  if (q.kind == QuadratureKind::tensor_gauss) {
    if (f.d > 4) throw InvalidInput("anova_term: tensor Gauss rule needs integration dimension <= 4");
    for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
      std::vector<bool> fixed(f.d, false);
      int bits = 0;
      for (int b = 0; b < k; ++b)
        if (mask & (1u << b)) {
          fixed[u[b]] = true;
          ++bits;
        }
      std::vector<int> free;
      for (int i = 0; i < f.d; ++i)
        if (!fixed[i]) free.push_back(i);
      est.value += ((k - bits) % 2 ? -1.0 : 1.0) * tensor_integral(f, free, x, q.samples_or_nodes, f.eval);
    }
    return est;
  }

  Rng rng = make_rng(q.seed, subset_key(u));
  const int M = q.samples_or_nodes;
  double mean = 0.0, m2 = 0.0;
  Vector y(f.d);
  for (int m = 0; m < M; ++m) {
    for (int i = 0; i < f.d; ++i) y(i) = std::uniform_real_distribution<double>(f.lower(i), f.upper(i))(rng);
    double g = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
      Vector z = y;
      int bits = 0;
      for (int b = 0; b < k; ++b)
        if (mask & (1u << b)) {
          z(u[b]) = x(u[b]);
          ++bits;
        }
      g += ((k - bits) % 2 ? -1.0 : 1.0) * f.eval(z);
    }
    const double delta = g - mean;
    mean += delta / (m + 1);
    m2 += delta * (g - mean);
  }
  est.value = mean;
  est.std_error = M > 1 ? std::sqrt(m2 / (M - 1) / M) : 0.0;
  return est;
}

namespace {

double mixed_partial(const SampledFunction& f, const IndexSet& u, const Vector& z) {
  switch (u.size()) {
    case 0:
      return f.eval(z);
    case 1:
      return f.grad(z)(u[0]);
    case 2:
      return f.hess(z)(u[0], u[1]);
    default: {
      const int k = u[2];
      const double h = 1e-4 * std::max(1.0, std::abs(z(k)));
      Vector p = z, m = z;
      p(k) += h;
      m(k) -= h;
      return (f.hess(p)(u[0], u[1]) - f.hess(m)(u[0], u[1])) / (2 * h);
    }
  }
}

}  // namespace

double anchored_term_via_derivative(const SampledFunction& f, const IndexSet& u, const AnchorConfig& cfg,
                                    const Vector& x, const QuadratureSpec& q) {
  check_subset(f, u);
  if (u.size() > 3) throw InvalidInput("anchored_term_via_derivative: |u| must be at most 3");
  if (cfg.c.size() != f.d || x.size() != f.d) throw InvalidInput("anchored_term_via_derivative: dimension mismatch");
  if (u.size() == 1 && !f.has_grad()) throw InvalidInput("anchored_term_via_derivative: gradient required");
  if (u.size() >= 2 && !f.has_hess()) throw InvalidInput("anchored_term_via_derivative: Hessian required");
  if (q.samples_or_nodes < 1) throw InvalidInput("anchored_term_via_derivative: need at least one node");
  if (u.empty()) return f.eval(cfg.c);

  // Signed volume of the box between c_u and x_u times the mean of d_u f.
  double signed_vol = 1.0;
  for (int i : u) signed_vol *= x(i) - cfg.c(i);
  if (signed_vol == 0.0) return 0.0;
  const int k = static_cast<int>(u.size());
  double mean = 0.0;
  if (q.kind == QuadratureKind::tensor_gauss) {
    const int n = q.samples_or_nodes;
    std::vector<std::vector<double>> t(k), w(k);
    for (int b = 0; b < k; ++b) gauss_legendre(n, cfg.c(u[b]), x(u[b]), t[b], w[b]);
    std::vector<int> idx(k, 0);
    Vector z = cfg.c;
    for (;;) {
      double weight = 1.0;
      for (int b = 0; b < k; ++b) {
        z(u[b]) = t[b][idx[b]];
        weight *= w[b][idx[b]];
      }
      mean += weight * mixed_partial(f, u, z);
      int b = k - 1;
      while (b >= 0 && ++idx[b] == n) idx[b--] = 0;
      if (b < 0) break;
    }
  } else {
    Rng rng = make_rng(q.seed, subset_key(u));
    Vector z = cfg.c;
    for (int m = 0; m < q.samples_or_nodes; ++m) {
      for (int i : u) z(i) = cfg.c(i) + (x(i) - cfg.c(i)) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      mean += mixed_partial(f, u, z);
    }
    mean /= q.samples_or_nodes;
  }
  return signed_vol * mean;
}

double term_bound(const IndexSet& u, const IndexSet& v, double deriv_norm, const BoundVolumes& vols, BoundKind which) {
  for (int i : v)
    if (std::find(u.begin(), u.end(), i) == u.end()) throw InvalidInput("term_bound: v must be a subset of u");
  if (deriv_norm < 0) throw InvalidInput("term_bound: negative derivative norm");
  const double factor = std::ldexp(1.0, static_cast<int>(u.size() - v.size())) * deriv_norm;
  switch (which) {
    case BoundKind::anchored_inf:
      return factor * vols.vol_v;
    case BoundKind::anova_inf:
      return factor * vols.vol_v * vols.vol_D;
    case BoundKind::anova_one:
      return factor * vols.vol_u * vols.vol_v;
  }
  return 0.0;
}

const char* to_string(NormKind p) { return p == NormKind::inf ? "inf" : "1"; }

void derivative_norms(const SampledFunction& f, const std::vector<Vector>& points, NormKind p, Vector& first,
                      Matrix& second) {
  if (points.empty()) throw InvalidInput("derivative norms: empty point list");
  if (!f.has_grad() || !f.has_hess()) throw InvalidInput("derivative norms: gradient and Hessian required");
  first = Vector::Zero(f.d);
  second = Matrix::Zero(f.d, f.d);
  for (const auto& x : points) {
    const Vector g = f.grad(x).cwiseAbs();
    const Matrix H = f.hess(x).cwiseAbs();
    if (p == NormKind::inf) {
      first = first.cwiseMax(g);
      second = second.cwiseMax(H);
    } else {
      first += g;
      second += H;
    }
  }
  if (p == NormKind::one) {
    first /= static_cast<double>(points.size());
    second /= static_cast<double>(points.size());
  }
}

SmallnessCounts derivative_smallness_counts(const SampledFunction& f, const std::vector<Vector>& points, NormKind p,
                                            double tol) {
  if (!(tol > 0)) throw InvalidInput("derivative counts: tol must be positive");
  Vector first;
  Matrix second;
  derivative_norms(f, points, p, first, second);
  SmallnessCounts c;
  for (int i = 0; i < f.d; ++i) {
    if (first(i) <= tol) ++c.G;
    for (int j = i + 1; j < f.d; ++j)
      if (second(i, j) <= tol) ++c.H;
  }
  return c;
}

namespace {

void subsets_of_order(int d, int order, int start, IndexSet& cur, std::vector<IndexSet>& out) {
  if (static_cast<int>(cur.size()) == order) {
    out.push_back(cur);
    return;
  }
  for (int i = start; i < d; ++i) {
    cur.push_back(i);
    subsets_of_order(d, order, i + 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace

std::vector<TermNormRow> term_norms(const SampledFunction& f, TermKind kind, int max_order,
                                    const std::vector<Vector>& points, const QuadratureSpec& q,
                                    const AnchorConfig& anchor) {
  if (points.empty()) throw InvalidInput("term norms: empty point list");
  if (max_order < 1 || max_order > f.d) throw InvalidInput("term norms: max_order must lie in [1, d]");
  std::vector<IndexSet> subsets;
  for (int order = 1; order <= max_order; ++order) {
    IndexSet cur;
    subsets_of_order(f.d, order, 0, cur, subsets);
  }
  Vector first_sup;
  Matrix second_sup;
  const bool have_derivs = f.has_grad() && f.has_hess();
  if (have_derivs) derivative_norms(f, points, NormKind::inf, first_sup, second_sup);
  double vol_D = 1.0;
  for (int i = 0; i < f.d; ++i) vol_D *= f.upper(i) - f.lower(i);

  std::vector<TermNormRow> rows;
  for (const auto& u : subsets) {
    double sup = 0.0, mean = 0.0;
    for (const auto& x : points) {
      const double v =
          kind == TermKind::anchored ? anchored_term(f, u, anchor, x) : anova_term(f, u, x, q).value;
      sup = std::max(sup, std::abs(v));
      mean += std::abs(v);
    }
    mean /= static_cast<double>(points.size());

    double bound = std::numeric_limits<double>::quiet_NaN();
    if (have_derivs && u.size() <= 2) {
      const double dn = u.size() == 1 ? first_sup(u[0]) : second_sup(u[0], u[1]);
      BoundVolumes vols;
      vols.vol_v = 1.0;
      for (int i : u) vols.vol_v *= f.upper(i) - f.lower(i);
      vols.vol_u = vols.vol_v;
      vols.vol_D = vol_D;
      bound = term_bound(u, u, dn, vols, kind == TermKind::anchored ? BoundKind::anchored_inf : BoundKind::anova_inf);
    }
    const int n = static_cast<int>(points.size());
    rows.push_back({u, NormKind::inf, sup, bound, n, q.seed});
    rows.push_back({u, NormKind::one, mean, bound, n, q.seed});
  }
  return rows;
}

double superset_max(const std::vector<TermNormRow>& rows, const IndexSet& u, NormKind p) {
  double best = 0.0;
  for (const auto& r : rows) {
    if (r.p != p) continue;
    bool contains = true;
    for (int i : u)
      if (std::find(r.subset.begin(), r.subset.end(), i) == r.subset.end()) contains = false;
    if (contains) best = std::max(best, r.estimate);
  }
  return best;
}

void write_term_norm_csv(std::ostream& os, const std::vector<TermNormRow>& rows) {
  os << "subset,p,estimate,bound,n_samples,seed\n";
  os << std::setprecision(17);
  for (const auto& r : rows)
    os << '"' << subset_label(r.subset) << "\"," << to_string(r.p) << ',' << r.estimate << ',' << r.bound << ','
       << r.n_samples << ',' << r.seed << '\n';
}

}  // namespace sparsify
