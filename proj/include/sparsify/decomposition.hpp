#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sparsify/common.hpp"
#include "sparsify/graphs.hpp"

namespace sparsify {

enum class DomainKind { ball, box };

struct GroundTruth {
  Matrix rotation;  // f(x) = f_sparse(rotation x), so U = rotation^T sparsifies
  SparsityPattern pattern;
  std::vector<std::vector<int>> components;
};

/// A function handle with optional analytic derivatives and its domain:
/// either the centered ball of radius r or the box prod [lo_i, hi_i].
struct SampledFunction {
  int d = 0;
  DomainKind domain = DomainKind::ball;
  double radius = 1.0;
  Vector lo, hi;  // box bounds (box domain only)

  std::function<double(const Vector&)> eval;
  std::function<Vector(const Vector&)> grad;
  std::function<Matrix(const Vector&)> hess;
  std::optional<GroundTruth> truth;

  bool has_grad() const { return static_cast<bool>(grad); }
  bool has_hess() const { return static_cast<bool>(hess); }

  /// Lower/upper bound of coordinate i of the domain (the enclosing cube
  /// for the ball).
  double lower(int i) const;
  double upper(int i) const;
  bool contains(const Vector& x, double slack = 1e-12) const;

  /// Uniform sample from the domain.
  Vector sample(Rng& rng) const;
  std::vector<Vector> sample_points(int count, std::uint64_t seed) const;
};

/// Box-domain function on prod [lo_i, hi_i].
SampledFunction make_box_function(int d, double lo, double hi, std::function<double(const Vector&)> eval);

struct DerivativeCheck {
  double grad_rel_error = 0.0;
  double hess_rel_error = 0.0;
};

/// Compares grad/hess with central differences of eval (grad) and of grad
/// (hess) at the given points; errors are max_k ||a - fd|| / max(1, ||fd||).
DerivativeCheck derivative_self_check(const SampledFunction& f, const std::vector<Vector>& points);

enum class QuadratureKind { monte_carlo, tensor_gauss };

struct QuadratureSpec {
  QuadratureKind kind = QuadratureKind::monte_carlo;
  int samples_or_nodes = 10000;  // MC samples, or Gauss nodes per axis
  std::uint64_t seed = 0;
};

struct AnchorConfig {
  Vector c;  // anchor inside the domain
};

/// Gauss-Legendre nodes/weights on [a, b], weights summing to 1.
void gauss_legendre(int n, double a, double b, std::vector<double>& nodes, std::vector<double>& weights);

/// Index set helpers (0-based indices).
using IndexSet = std::vector<int>;
std::string subset_label(const IndexSet& u);  // "{1,3}" with 1-based indices

/// Anchored term sum_{v subset u} (-1)^{|u|-|v|} f(x_v, c_rest).
double anchored_term(const SampledFunction& f, const IndexSet& u, const AnchorConfig& cfg, const Vector& x);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;  // zero for deterministic rules
};

/// ANOVA term with the mean projections of the (box) domain; ball domains
/// integrate over their enclosing cube. Monte Carlo shares one stream of y
/// across all 2^|u| projections.
Estimate anova_term(const SampledFunction& f, const IndexSet& u, const Vector& x, const QuadratureSpec& q);

/// Integral representation of the anchored term:
///   f_{u,c}(x) = int over the box between c_u and x_u of d_u f(t_u, c_rest) dt_u
/// (signed). Needs grad for |u| = 1 and hess for |u| >= 2; |u| = 3 uses
/// central differences of hess.
double anchored_term_via_derivative(const SampledFunction& f, const IndexSet& u, const AnchorConfig& cfg,
                                    const Vector& x, const QuadratureSpec& q);

enum class BoundKind { anchored_inf, anova_inf, anova_one };

struct BoundVolumes {
  double vol_v = 1.0;  // lambda_v(D_v)
  double vol_D = 1.0;  // lambda(D)
  double vol_u = 1.0;  // lambda_u(D_u)
};

double term_bound(const IndexSet& u, const IndexSet& v, double deriv_norm, const BoundVolumes& vols, BoundKind which);

enum class NormKind { one, inf };
const char* to_string(NormKind p);

struct SmallnessCounts {
  int G = 0;  // first partials with small empirical norm
  int H = 0;  // unordered off-diagonal second partials with small norm
};

/// Empirical inf-norm is the max of |.| over points, the 1-norm the mean.
SmallnessCounts derivative_smallness_counts(const SampledFunction& f, const std::vector<Vector>& points, NormKind p,
                                            double tol);

/// Empirical norms of first and mixed second partials (d-vector, d x d).
void derivative_norms(const SampledFunction& f, const std::vector<Vector>& points, NormKind p, Vector& first,
                      Matrix& second);

enum class TermKind { anchored, anova };

struct TermNormRow {
  IndexSet subset;
  NormKind p = NormKind::inf;
  double estimate = 0.0;
  double bound = 0.0;
  int n_samples = 0;
  std::uint64_t seed = 0;
};

/// Empirical p-norms of the terms f_u over the points for every u with
/// 1 <= |u| <= max_order. For anchored terms the bound column is the
/// anchored sup bound with v = u and the empirical sup of d_u f (|u| <= 2,
/// otherwise NaN); for ANOVA terms it is the ANOVA sup bound.
std::vector<TermNormRow> term_norms(const SampledFunction& f, TermKind kind, int max_order,
                                    const std::vector<Vector>& points, const QuadratureSpec& q,
                                    const AnchorConfig& anchor);

/// ||f||_{u,p}: max of the term norms over all supersets w of u present in rows.
double superset_max(const std::vector<TermNormRow>& rows, const IndexSet& u, NormKind p);

void write_term_norm_csv(std::ostream& os, const std::vector<TermNormRow>& rows);

}  // namespace sparsify
