#include "sparsify/rotations.hpp"

#include <cmath>
#include <numbers>

namespace sparsify {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

Matrix jacobi_rotation(int axis, double angle, int d) {
  if (axis < 0 || axis + 1 >= d) throw InvalidInput("jacobi_rotation: axis out of range");
  Matrix R = Matrix::Identity(d, d);
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  R(axis, axis) = c;
  R(axis, axis + 1) = -s;
  R(axis + 1, axis) = s;
  R(axis + 1, axis + 1) = c;
  return R;
}

void apply_jacobi_right(Matrix& A, int axis, double c, double s) {
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    const double a = A(i, axis);
    const double b = A(i, axis + 1);
    A(i, axis) = c * a + s * b;
    A(i, axis + 1) = c * b - s * a;
  }
}

AngleLayout::AngleLayout(int d) : d_(d) {
  if (d < 1) throw InvalidInput("angle layout: d must be positive");
  const int m = d * (d - 1) / 2;
  factor_of_slot_.assign(m, -1);
  int next_pi_slot = d - 1;
  for (int r = 1; r <= d - 1; ++r) {
    for (int j = 1; j <= r; ++j) {
      axis_.push_back(d - 1 - r + j - 1);
      const int s = (j == 1) ? r - 1 : next_pi_slot++;
      slot_.push_back(s);
      range_.push_back(j == 1 ? kTwoPi : std::numbers::pi);
      factor_of_slot_[s] = static_cast<int>(axis_.size()) - 1;
    }
  }
}

Matrix angles_to_rotation(const Vector& alpha, int d) {
  const AngleLayout layout(d);
  if (alpha.size() != layout.count()) throw InvalidInput("angles_to_rotation: expected d(d-1)/2 angles");
  Matrix U = Matrix::Identity(d, d);
  for (int k = 0; k < layout.count(); ++k) {
    const double a = alpha(layout.slot(k));
    apply_jacobi_right(U, layout.axis(k), std::cos(a), std::sin(a));
  }
  return U;
}

Vector rotation_to_angles(const Matrix& V) {
  const int d = static_cast<int>(V.rows());
  const AngleLayout layout(d);
  Vector alpha = Vector::Zero(layout.count());
  Matrix W = V;
  // At local dimension m the rightmost group r = m-1 is peeled off; it is
  // R(1,a_1)...R(m-1,a_{m-1}) on the trailing m coordinates and fixes the
  // first row of the trailing block.
  for (int m = d; m >= 2; --m) {
    const int off = d - m;
    const Vector x = W.block(off, off, 1, m).transpose();
    std::vector<double> rest(m, 0.0);  // rest[k] = ||x_{k+1..m-1}||
    for (int k = m - 2; k >= 0; --k) rest[k] = std::hypot(rest[k + 1], x(k + 1));

    std::vector<double> a(m - 1, 0.0);
    // y_{k+1} alternates sign for k >= 1 and must end at x_{m-1}.
    double sign_y2 = (x(m - 1) >= 0 ? 1.0 : -1.0) * ((m - 2) % 2 == 0 ? 1.0 : -1.0);
    double y = sign_y2 * rest[0];
    a[0] = std::atan2(-y, x(0));
    if (a[0] < 0) a[0] += kTwoPi;
    for (int k = 1; k < m - 1; ++k) {
      const double sy = (y >= 0 ? 1.0 : -1.0);
      a[k] = std::atan2(rest[k], sy * x(k));
      y = -sy * rest[k];
    }

    const int r = m - 1;
    Matrix G = Matrix::Identity(d, d);
    // group r occupies factors r(r-1)/2 .. r(r-1)/2 + r - 1
    const int first = r * (r - 1) / 2;
    for (int j = 1; j <= r; ++j) {
      apply_jacobi_right(G, off + j - 1, std::cos(a[j - 1]), std::sin(a[j - 1]));
      alpha(layout.slot(first + j - 1)) = a[j - 1];
    }
    W = W * G.transpose();
  }
  return alpha;
}

int lattice_size(double range, double h) {
  if (!(h > 0)) throw InvalidInput("lattice: h must be positive");
  return static_cast<int>(std::ceil(range / h - 1e-9));
}

double snap_to_lattice(double angle, double range, double h) {
  const int n = lattice_size(range, h);
  long k = std::lround(angle / h);
  if (k >= n) {
    // Past the last lattice point: a full period wraps to 0, a half period
    // clamps to the last point.
    if (range == kTwoPi) {
      const double wrap = kTwoPi - angle;
      const double last = angle - (n - 1) * h;
      k = (wrap < last) ? 0 : n - 1;
    } else {
      k = n - 1;
    }
  }
  if (k < 0) k = 0;
  return k * h;
}

double grid_cardinality(int d, double h) {
  const double full = lattice_size(kTwoPi, h);
  const double half = lattice_size(std::numbers::pi, h);
  return std::pow(full, d - 1) * std::pow(half, (d - 1) * (d - 2) / 2.0);
}

}  // namespace sparsify
