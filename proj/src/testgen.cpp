#include "sparsify/testgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sparsify {

int max_pattern_size(int d) {
  switch (d) {
    case 1:
      return 1;
    case 2:
      return 3;
    case 3:
      return 6;
    case 4:
      return 7;
    case 5:
      return 11;
    default:
      return d * (d + 1) / 2;
  }
}

SparsityPattern random_pattern(int d, int size, std::uint64_t seed) {
  if (d < 1) throw InvalidInput("random_pattern: d must be positive");
  if (size < 0 || size > d * (d + 1) / 2) throw InvalidInput("random_pattern: size out of range");
  std::vector<std::pair<int, int>> slots;
  for (int j = 0; j < d; ++j)
    for (int i = 0; i <= j; ++i) slots.emplace_back(i, j);
  Rng rng = make_rng(seed, 0x50415454);  // "PATT"
  std::shuffle(slots.begin(), slots.end(), rng);
  SparsityPattern p(d);
  for (int k = 0; k < size; ++k) p.add(slots[k].first, slots[k].second);
  return p;
}

MatrixInstance gen_matrix_set(const MatrixInstanceSpec& spec) {
  if (spec.d < 1) throw InvalidInput("gen_matrix_set: d must be positive");
  if (spec.N < 1) throw InvalidInput("gen_matrix_set: N must be positive");
  if (spec.J.d != spec.d) throw InvalidInput("gen_matrix_set: pattern dimension mismatch");
  if (spec.sigma < 0) throw InvalidInput("gen_matrix_set: sigma must be nonnegative");
  const int d = spec.d;
  MatrixInstance inst;
  inst.spec = spec;
  Rng rot_rng = make_rng(spec.rotation_seed, 0x524f5441);  // "ROTA"
  inst.R = haar_rotation(d, rot_rng);
  Rng entry_rng = make_rng(spec.entry_seed, 0x454e5452);  // "ENTR"
  Rng noise_rng = make_rng(spec.entry_seed, 0x4e4f4953);  // "NOIS"
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<Matrix> clean, noisy;
  for (int n = 0; n < spec.N; ++n) {
    Matrix Ht = Matrix::Zero(d, d);
    for (const auto& [i, j] : spec.J.off_diag) Ht(i, j) = Ht(j, i) = unif(entry_rng);
    for (int i : spec.J.diag) Ht(i, i) = unif(entry_rng);
    Matrix H = inst.R.transpose() * Ht * inst.R;
    H = (0.5 * (H + H.transpose())).eval();
    clean.push_back(H);
    if (spec.sigma > 0) {
      for (int j = 0; j < d; ++j)
        for (int i = 0; i <= j; ++i) {
          const double z = spec.sigma * gauss(noise_rng);
          H(i, j) += z;
          if (i != j) H(j, i) += z;
        }
    }
    noisy.push_back(H);
  }
  inst.clean = SymmetricMatrixSet(std::move(clean));
  inst.mats = SymmetricMatrixSet(std::move(noisy));
  return inst;
}

MatrixInstance protocol_instance(int d, double sigma, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0x50524f54);  // "PROT"
  MatrixInstanceSpec spec;
  spec.d = d;
  spec.N = d * (d + 1) / 2;
  const int size = std::uniform_int_distribution<int>(1, max_pattern_size(d))(rng);
  spec.J = random_pattern(d, size, mix_seed(seed, 1));
  spec.rotation_seed = mix_seed(seed, 2);
  spec.entry_seed = mix_seed(seed, 3);
  spec.sigma = sigma;
  return gen_matrix_set(spec);
}

// ---- factor family -----------------------------------------------------------

double Factor::value(double x) const {
  switch (kind) {
    case FactorKind::shift:
      return x + t;
    case FactorKind::power:
      return std::pow(x, t);
    case FactorKind::cbrt_quad:
      return std::cbrt(x * x + t * t);
    case FactorKind::sine:
      return std::sin(t * x);
    case FactorKind::cosine:
      return std::cos(t * x);
    case FactorKind::gauss:
      return std::exp(-(x - t) * (x - t));
  }
  return 0.0;
}

double Factor::d1(double x) const {
  switch (kind) {
    case FactorKind::shift:
      return 1.0;
    case FactorKind::power:
      return t * std::pow(x, t - 1);
    case FactorKind::cbrt_quad: {
      const double q = x * x + t * t;
      return 2.0 * x / (3.0 * std::cbrt(q * q));
    }
    case FactorKind::sine:
      return t * std::cos(t * x);
    case FactorKind::cosine:
      return -t * std::sin(t * x);
    case FactorKind::gauss:
      return -2.0 * (x - t) * std::exp(-(x - t) * (x - t));
  }
  return 0.0;
}

double Factor::d2(double x) const {
  switch (kind) {
    case FactorKind::shift:
      return 0.0;
    case FactorKind::power:
      return t < 2 ? 0.0 : t * (t - 1) * std::pow(x, t - 2);
    case FactorKind::cbrt_quad: {
      const double q = x * x + t * t;
      const double q23 = std::cbrt(q * q);
      return 2.0 / (3.0 * q23) - 8.0 * x * x / (9.0 * q23 * q);
    }
    case FactorKind::sine:
      return -t * t * std::sin(t * x);
    case FactorKind::cosine:
      return -t * t * std::cos(t * x);
    case FactorKind::gauss: {
      const double s = x - t;
      return (4.0 * s * s - 2.0) * std::exp(-s * s);
    }
  }
  return 0.0;
}

const char* to_string(FactorKind k) {
  switch (k) {
    case FactorKind::shift:
      return "shift";
    case FactorKind::power:
      return "power";
    case FactorKind::cbrt_quad:
      return "cbrt_quad";
    case FactorKind::sine:
      return "sin";
    case FactorKind::cosine:
      return "cos";
    case FactorKind::gauss:
      return "gauss";
  }
  return "?";
}

FactorKind factor_kind_from_string(const std::string& s) {
  for (FactorKind k : {FactorKind::shift, FactorKind::power, FactorKind::cbrt_quad, FactorKind::sine,
                       FactorKind::cosine, FactorKind::gauss})
    if (s == to_string(k)) return k;
  throw InvalidInput("unknown factor kind '" + s + "'");
}

SparsityPattern FunctionSpec::pattern() const {
  SparsityPattern p(d);
  std::vector<bool> curved(d, false);
  for (const auto& term : terms) {
    p.add(term.j, term.k);
    if (!term.g1.linear()) curved[term.j] = true;
    if (!term.g2.linear()) curved[term.k] = true;
  }
  for (int i = 0; i < d; ++i)
    if (curved[i]) p.diag.insert(i);
  return p;
}

FunctionSpec random_function_spec(int d, std::uint64_t seed, bool noisy, bool rotate) {
  if (d < 2) throw InvalidInput("random function: d must be at least 2");
  Rng rng = make_rng(seed, 0x46554e43);  // "FUNC"
  FunctionSpec spec;
  spec.d = d;
  spec.noisy = noisy;
  spec.seed = seed;
  spec.name = "random";

  // Component sizes in 2..4 that sum to d.
  std::vector<int> sizes;
  int left = d;
  while (left > 0) {
    std::vector<int> options;
    for (int s = 2; s <= 4; ++s)
      if (s == left || left - s >= 2) options.push_back(s);
    const int s = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
    sizes.push_back(s);
    left -= s;
  }
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  auto random_factor = [&]() {
    Factor f;
    f.kind = static_cast<FactorKind>(std::uniform_int_distribution<int>(0, 5)(rng));
    f.t = std::uniform_int_distribution<int>(1, 3)(rng);
    return f;
  };

  int next = 0;
  for (int s : sizes) {
    std::vector<int> comp(order.begin() + next, order.begin() + next + s);
    next += s;
    // Random spanning tree, then extra edges up to a random total.
    std::set<std::pair<int, int>> edges;
    for (int a = 1; a < s; ++a) {
      const int b = std::uniform_int_distribution<int>(0, a - 1)(rng);
      edges.insert(std::minmax(comp[a], comp[b]));
    }
    const int target = std::uniform_int_distribution<int>(s - 1, s * (s - 1) / 2)(rng);
    std::vector<std::pair<int, int>> missing;
    for (int a = 0; a < s; ++a)
      for (int b = a + 1; b < s; ++b) {
        const auto e = std::minmax(comp[a], comp[b]);
        if (!edges.count(e)) missing.push_back(e);
      }
    std::shuffle(missing.begin(), missing.end(), rng);
    for (int k = 0; static_cast<int>(edges.size()) < target; ++k) edges.insert(missing[k]);
    for (const auto& [j, k] : edges) {
      ProductTerm term;
      term.c = std::uniform_real_distribution<double>(5.0, 20.0)(rng);
      term.j = j;
      term.k = k;
      term.g1 = random_factor();
      term.g2 = random_factor();
      spec.terms.push_back(term);
    }
    std::sort(comp.begin(), comp.end());
    spec.components.push_back(comp);
  }
  std::sort(spec.components.begin(), spec.components.end());
  spec.R = rotate ? haar_rotation(d, rng) : Matrix::Identity(d, d);
  return spec;
}

NoiseValue noise_function(const Vector& x) {
  const int d = static_cast<int>(x.size());
  if (d < 1) throw InvalidInput("noise function: empty point");
  if (d > 16) throw InvalidInput("noise function: 2^d mixture terms; d must be at most 16");
  NoiseValue out;
  out.grad = Vector::Zero(d);
  out.hess = Matrix::Zero(d, d);
  Vector r(d);
  for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
    for (int i = 0; i < d; ++i) r(i) = x(i) - ((mask >> i) & 1u ? 1.5 : -0.5);
    // -1/2 r^T (I/2)^{-1} r = -|r|^2
    const double e = std::exp(-r.squaredNorm()) / 2000.0;
    out.value += e;
    out.grad -= 2.0 * e * r;
    out.hess += e * (4.0 * r * r.transpose() - 2.0 * Matrix::Identity(d, d));
  }
  return out;
}

namespace {

struct SparseDerivs {
  double value;
  Vector grad;
  Matrix hess;
};

SparseDerivs eval_terms(const std::vector<ProductTerm>& terms, const Vector& y, bool need_derivs) {
  const int d = static_cast<int>(y.size());
  SparseDerivs out{0.0, Vector(), Matrix()};
  if (need_derivs) {
    out.grad = Vector::Zero(d);
    out.hess = Matrix::Zero(d, d);
  }
  for (const auto& t : terms) {
    const double a = t.g1.value(y(t.j)), b = t.g2.value(y(t.k));
    out.value += t.c * a * b;
    if (!need_derivs) continue;
    const double a1 = t.g1.d1(y(t.j)), b1 = t.g2.d1(y(t.k));
    out.grad(t.j) += t.c * a1 * b;
    out.grad(t.k) += t.c * a * b1;
    out.hess(t.j, t.j) += t.c * t.g1.d2(y(t.j)) * b;
    out.hess(t.k, t.k) += t.c * a * t.g2.d2(y(t.k));
    out.hess(t.j, t.k) += t.c * a1 * b1;
    out.hess(t.k, t.j) += t.c * a1 * b1;
  }
  return out;
}

}  // namespace

SampledFunction make_function(const FunctionSpec& spec) {
  if (spec.d < 1) throw InvalidInput("make_function: d must be positive");
  if (spec.R.rows() != spec.d || spec.R.cols() != spec.d) throw InvalidInput("make_function: rotation has wrong size");
  for (const auto& t : spec.terms)
    if (t.j < 0 || t.k < 0 || t.j >= spec.d || t.k >= spec.d || t.j == t.k)
      throw InvalidInput("make_function: term indices out of range");
  if (spec.noisy && spec.d > 16) throw InvalidInput("make_function: noise function needs d <= 16");

  SampledFunction f;
  f.d = spec.d;
  f.domain = DomainKind::ball;
  f.radius = spec.radius;
  const auto terms = spec.terms;
  const Matrix R = spec.R;
  const bool noisy = spec.noisy;
  f.eval = [terms, R, noisy](const Vector& x) {
    double v = eval_terms(terms, R * x, false).value;
    if (noisy) v += noise_function(x).value;
    return v;
  };
  f.grad = [terms, R, noisy](const Vector& x) {
    Vector g = R.transpose() * eval_terms(terms, R * x, true).grad;
    if (noisy) g += noise_function(x).grad;
    return g;
  };
  f.hess = [terms, R, noisy](const Vector& x) {
    Matrix H = R.transpose() * eval_terms(terms, R * x, true).hess * R;
    H = (0.5 * (H + H.transpose())).eval();
    if (noisy) H += noise_function(x).hess;
    return H;
  };
  GroundTruth truth;
  truth.rotation = R;
  truth.pattern = spec.pattern();
  truth.components = spec.components;
  f.truth = truth;
  return f;
}

FunctionSpec builtin_spec(const std::string& which, bool rotate, bool noisy, std::uint64_t seed, double radius) {
  FunctionSpec spec;
  spec.d = 7;
  spec.radius = radius;
  spec.noisy = noisy;
  spec.seed = seed;
  spec.name = which;
  auto term = [](double c, int j, Factor g1, int k, Factor g2) { return ProductTerm{c, j - 1, k - 1, g1, g2}; };
  const Factor gauss1{FactorKind::gauss, 1};
  if (which == "f1") {
    spec.terms = {term(5, 1, gauss1, 4, {FactorKind::shift, 1}),
                  term(7, 1, {FactorKind::sine, 2}, 7, {FactorKind::power, 3}),
                  term(10, 2, {FactorKind::cosine, 2}, 5, {FactorKind::shift, 3})};
    spec.components = {{0, 3, 6}, {1, 4}};
  } else if (which == "f2") {
    spec.terms = {term(5, 1, gauss1, 4, {FactorKind::cosine, 3}),
                  term(10, 1, {FactorKind::power, 1}, 7, {FactorKind::power, 3}),
                  term(8, 2, {FactorKind::sine, 1}, 7, {FactorKind::cosine, 1}),
                  term(12, 3, {FactorKind::cosine, 2}, 5, {FactorKind::sine, 3}),
                  term(6, 5, {FactorKind::power, 1}, 6, {FactorKind::power, 1})};
    spec.components = {{0, 1, 3, 6}, {2, 4, 5}};
  } else {
    throw InvalidInput("unknown builtin '" + which + "' (expected f1 or f2)");
  }
  if (rotate) {
    Rng rng = make_rng(seed, 0x4255494c);  // "BUIL"
    spec.R = haar_rotation(spec.d, rng);
  } else {
    spec.R = Matrix::Identity(spec.d, spec.d);
  }
  return spec;
}

}  // namespace sparsify
