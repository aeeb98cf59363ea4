#pragma once

#include "etalab/common.hpp"

namespace etalab::opcore {

// Finite model of a smoothing operator: an N x N complex matrix.
using SmoothingOp = Matrix;

void check_finite(const SmoothingOp& a, const char* what = "SmoothingOp");
double smallest_singular_value(const Matrix& m);

// Element Id + A of the group G, stored through its perturbation A.
class GroupElement {
 public:
  explicit GroupElement(SmoothingOp perturbation,
                        double margin_floor = kDefaultMarginFloor);
  static GroupElement identity(int n, double margin_floor = kDefaultMarginFloor);

  int dim() const { return static_cast<int>(a_.rows()); }
  const SmoothingOp& perturbation() const { return a_; }
  Matrix full() const;  // Id + A
  double inv_margin() const { return margin_; }
  double margin_floor() const { return floor_; }

 private:
  SmoothingOp a_;
  double margin_;
  double floor_;
};

GroupElement compose(const GroupElement& g, const GroupElement& h);
GroupElement group_inverse(const GroupElement& g);
Complex fredholm_det(const GroupElement& g);

// Sorted real eigenvalues of a Hermitian matrix (eta oracle support).
std::vector<double> hermitian_spectrum(const SmoothingOp& a,
                                       double herm_tol = 1e-12);

}  // namespace etalab::opcore
