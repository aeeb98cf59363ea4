#include "etalab/opcore.hpp"

#include <algorithm>

namespace etalab::opcore {

void check_finite(const SmoothingOp& a, const char* what) {
  if (!a.allFinite()) throw EtalabError(std::string(what) + ": non-finite entries");
}

double smallest_singular_value(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

GroupElement::GroupElement(SmoothingOp perturbation, double margin_floor)
    : a_(std::move(perturbation)), floor_(margin_floor) {
  check_finite(a_, "GroupElement");
  require(a_.rows() == a_.cols(), "GroupElement: matrix must be square");
  margin_ = smallest_singular_value(full());
  require(margin_ > floor_, "GroupElement: Id + A singular to tolerance (margin " +
                                std::to_string(margin_) + ")");
}

GroupElement GroupElement::identity(int n, double margin_floor) {
  return GroupElement(Matrix::Zero(n, n), margin_floor);
}

Matrix GroupElement::full() const {
  return Matrix::Identity(a_.rows(), a_.cols()) + a_;
}

GroupElement compose(const GroupElement& g, const GroupElement& h) {
  require(g.dim() == h.dim(), "compose: dimension mismatch");
  const SmoothingOp& a = g.perturbation();
  const SmoothingOp& b = h.perturbation();
  return GroupElement(a + b + a * b, g.margin_floor());
}

GroupElement group_inverse(const GroupElement& g) {
  Matrix inv = g.full().partialPivLu().solve(Matrix::Identity(g.dim(), g.dim()));
  return GroupElement(inv - Matrix::Identity(g.dim(), g.dim()), g.margin_floor());
}

Complex fredholm_det(const GroupElement& g) { return g.full().determinant(); }

std::vector<double> hermitian_spectrum(const SmoothingOp& a, double herm_tol) {
  check_finite(a, "hermitian_spectrum");
  require((a - a.adjoint()).cwiseAbs().maxCoeff() <= herm_tol,
          "hermitian_spectrum: input not Hermitian to tolerance");
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  std::vector<double> ev(es.eigenvalues().data(),
                         es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(ev.begin(), ev.end());
  return ev;
}

}  // namespace etalab::opcore
