#pragma once

#include <cstdint>
#include <vector>

#include "sparsify/common.hpp"

namespace sparsify {

/// Planar (Givens/Jacobi) rotation acting on coordinates (axis, axis+1),
/// axis 0-based:
///   R(axis,axis) = cos a   R(axis,axis+1) = -sin a
///   R(axis+1,axis) = sin a R(axis+1,axis+1) = cos a
Matrix jacobi_rotation(int axis, double angle, int d);

/// A <- A * R(axis, angle); touches only two columns.
void apply_jacobi_right(Matrix& A, int axis, double c, double s);

/// Layout of the d(d-1)/2 angles parametrizing SO(d) as a product of
/// Jacobi rotations
///   U(alpha) = prod_{r=1}^{d-1} prod_{j=1}^{r} R(d-1-r+j, alpha^r_j)   (1-based axes).
///
/// The flat angle vector stores alpha^1_1, ..., alpha^{d-1}_1 first (each in
/// [0, 2pi)), then alpha^r_j for r = 2..d-1, j = 2..r (each in [0, pi)).
/// "Factor k" is the k-th rotation in product order.
class AngleLayout {
 public:
  explicit AngleLayout(int d);

  int dim() const noexcept { return d_; }
  int count() const noexcept { return static_cast<int>(axis_.size()); }
  /// 0-based axis rotated by factor k.
  int axis(int k) const { return axis_[k]; }
  /// Slot of the flat angle vector used by factor k.
  int slot(int k) const { return slot_[k]; }
  /// Angle range of factor k: 2pi or pi.
  double range(int k) const { return range_[k]; }
  /// Factor index that reads flat slot s.
  int factor_of_slot(int s) const { return factor_of_slot_[s]; }

 private:
  int d_;
  std::vector<int> axis_;
  std::vector<int> slot_;
  std::vector<double> range_;
  std::vector<int> factor_of_slot_;
};

Matrix angles_to_rotation(const Vector& alpha, int d);

/// Inverse of angles_to_rotation for V in SO(d); angles land in the
/// canonical ranges.
Vector rotation_to_angles(const Matrix& V);

/// Number of lattice points ceil(range / h) in {k h : k = 0, 1, ...}.
int lattice_size(double range, double h);

/// Nearest lattice angle. 2pi-periodic ranges wrap around.
double snap_to_lattice(double angle, double range, double h);

/// |Theta(h)| = ceil(2pi/h)^(d-1) * ceil(pi/h)^((d-1)(d-2)/2), as a double
/// so that overflow is visible.
double grid_cardinality(int d, double h);

}  // namespace sparsify
