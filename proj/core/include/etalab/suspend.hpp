#pragma once

#include <functional>
#include <memory>

#include "etalab/opcore.hpp"

namespace etalab::suspend {

using opcore::GroupElement;
using opcore::SmoothingOp;

// Compactified grid tau = L*tan(theta), theta uniform in (-pi/2, pi/2).
// Interior nodes theta_j = -pi/2 + (j+1)*h, h = pi/(n_nodes+1); the two
// half-line ends map to the single periodic point theta = -pi/2 (~ +pi/2).
class TauGrid {
 public:
  static std::shared_ptr<const TauGrid> make(int n_nodes = 128, double L = 4.0,
                                             double tail_tol = kDefaultTailTol);

  int n() const { return n_; }
  double scale() const { return L_; }
  double tail_tol() const { return tail_tol_; }
  double theta_step() const { return h_; }
  const std::vector<double>& nodes() const { return tau_; }
  const std::vector<double>& weights() const { return w_; }
  double node(int j) const { return tau_[j]; }

  // theta-space operators on the m = n+1 periodic samples (index 0 is the
  // compactified endpoint); both are dense m x m real matrices.
  const Eigen::MatrixXd& theta_derivative_matrix() const { return dtheta_; }
  const Eigen::MatrixXd& theta_cumulative_matrix() const { return cumul_; }

  // d/dtau of Schwartz samples (endpoint value 0 implied).
  std::vector<Complex> tau_derivative(const std::vector<Complex>& f) const;
  std::vector<Matrix> tau_derivative(const std::vector<Matrix>& f) const;

  // Quadrature over the whole line; the endpoint contribution is recovered by
  // Richardson extrapolation of tau^2*f so mildly decaying integrands (e.g.
  // 1/(1+tau^2)) are handled as well.
  Complex quadrature(const std::vector<Complex>& f) const;

  // Cumulative integral from the -infinity end, sampled at the nodes;
  // also returns the total integral (value at +infinity).
  std::pair<std::vector<Matrix>, Matrix> cumulative(
      const std::vector<Matrix>& f) const;

  // Smooth interpolation at arbitrary tau of Schwartz samples (zero at ends).
  Complex interpolate(const std::vector<Complex>& f, double tau) const;
  Matrix interpolate(const std::vector<Matrix>& f, double tau) const;

 private:
  TauGrid(int n_nodes, double L, double tail_tol);
  int n_;
  double L_, tail_tol_, h_;
  std::vector<double> tau_, w_, theta_;
  Eigen::MatrixXd dtheta_, cumul_;
};

using GridPtr = std::shared_ptr<const TauGrid>;

// Schwartz loop: tau -> A(tau) with Id + A(tau) invertible at every node.
struct SuspendedElement {
  GridPtr grid;
  std::vector<Matrix> samples;

  int dim() const { return samples.empty() ? 0 : (int)samples[0].rows(); }
  Matrix value_at(double tau) const;             // the perturbation A(tau)
  std::vector<Matrix> tau_derivative() const;    // spectral
  double tail_norm() const;
  double min_margin() const;  // min over nodes of smin(Id + A)

  void validate(double margin_floor = kDefaultMarginFloor) const;
};

SuspendedElement pointwise_compose(const SuspendedElement& a,
                                   const SuspendedElement& b);
SuspendedElement pointwise_inverse(const SuspendedElement& a);

// Path vanishing at -infinity and flat to g_inf at +infinity.
struct HalfOpenElement {
  GridPtr grid;
  std::vector<Matrix> samples;     // A(tau_j)
  Matrix limit_perturbation;       // A(+infinity) = g_inf - Id
  std::vector<Matrix> derivative;  // dA/dtau samples (always populated)

  int dim() const { return limit_perturbation.rows(); }
  void validate(double margin_floor = kDefaultMarginFloor) const;
  double min_margin() const;
};

// dA/dtau for flat-to-constant samples: one-sided ghost padding in theta.
std::vector<Matrix> flat_tau_derivative(const TauGrid& grid,
                                        const std::vector<Matrix>& samples,
                                        const Matrix& left_value,
                                        const Matrix& right_value);

GroupElement restrict_infinity(const HalfOpenElement& a);
HalfOpenElement embed(const SuspendedElement& s);

struct PathOptions {
  int margin_scan = 129;
  double margin_accept = 1e-4;
  int retry_budget = 8;
  std::uint64_t seed = 7;
};

HalfOpenElement make_path(const GroupElement& g, const GridPtr& grid,
                          const PathOptions& opts = {});

HalfOpenElement reconstruct_from_derivative(const GridPtr& grid,
                                            const std::vector<Matrix>& d);

// Deformation retraction: reparametrize by psi_t in the [0,1] picture.
HalfOpenElement contraction_homotopy(const HalfOpenElement& a, double t);

double contraction_cutoff(double x);           // rho
double contraction_profile(double t, double x);  // psi_t(x)

// Polynomial part sum C_k tau^k plus a Schwartz part.
struct ProductSuspendedElement {
  std::vector<Matrix> poly_coeffs;
  SuspendedElement schwartz_part;

  int dim() const { return poly_coeffs.empty() ? schwartz_part.dim()
                                               : (int)poly_coeffs[0].rows(); }
  Matrix value_at(double tau) const;
  Matrix derivative_at(double tau) const;
  double min_margin() const;  // over grid nodes
};

}  // namespace etalab::suspend
