#include "etalab/suspend.hpp"

#include <cmath>

namespace etalab::suspend {

namespace {

// Pack m per-node matrices as an m x N^2 array, apply a theta-space operator,
// and unpack.
std::vector<Matrix> apply_theta_op(const Eigen::MatrixXd& op,
                                   const std::vector<Matrix>& rows) {
  const int m = (int)rows.size();
  const int nr = (int)rows[0].rows(), nc = (int)rows[0].cols();
  Eigen::MatrixXcd s(m, nr * nc);
  for (int k = 0; k < m; ++k)
    s.row(k) = Eigen::Map<const Eigen::VectorXcd>(rows[k].data(), nr * nc);
  Eigen::MatrixXcd out = op * s;
  std::vector<Matrix> res(m);
  for (int k = 0; k < m; ++k) {
    res[k].resize(nr, nc);
    Eigen::Map<Eigen::VectorXcd>(res[k].data(), nr * nc) = out.row(k);
  }
  return res;
}

}  // namespace

TauGrid::TauGrid(int n_nodes, double L, double tail_tol)
    : n_(n_nodes), L_(L), tail_tol_(tail_tol) {
  require(n_ >= 8, "TauGrid: too few nodes");
  require(L_ > 0, "TauGrid: scale must be positive");
  const int m = n_ + 1;
  h_ = kPi / m;
  theta_.resize(n_);
  tau_.resize(n_);
  w_.resize(n_);
  for (int j = 0; j < n_; ++j) {
    theta_[j] = -kPi / 2 + (j + 1) * h_;
    tau_[j] = L_ * std::tan(theta_[j]);
    const double c = std::cos(theta_[j]);
    w_[j] = h_ * L_ / (c * c);
  }

  // Spectral differentiation in phi = theta + pi/2 (period pi) on the m
  // periodic samples; closed-form trig entries.
  dtheta_.setZero(m, m);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k) {
      if (j == k) continue;
      const double d = (j - k) * kPi / m;
      double v;
      if (m % 2 == 1)
        v = ((j - k) % 2 ? -1.0 : 1.0) / (2.0 * std::sin(d));
      else
        v = ((j - k) % 2 ? -1.0 : 1.0) * 0.5 / std::tan(d);
      dtheta_(j, k) = 2.0 * v;  // period pi, not 2*pi
    }

  // Cumulative integration from phi = 0 via the Fourier antiderivative.
  Eigen::MatrixXcd cum = Eigen::MatrixXcd::Zero(m, m);
  for (int l = 0; l < m; ++l) {
    // contribution of sample l through each Fourier mode
    for (int k = -(m - 1) / 2; k <= m / 2; ++k) {
      for (int j = 0; j < m; ++j) {
        const double phi_j = j * h_;
        const Complex coef =
            std::exp(Complex(0, -2.0 * k * l * h_)) / double(m);
        if (k == 0)
          cum(j, l) += coef * phi_j;
        else
          cum(j, l) += coef *
                       (std::exp(Complex(0, 2.0 * k * phi_j)) - 1.0) /
                       Complex(0, 2.0 * k);
      }
    }
  }
  cumul_ = cum.real();
}

std::shared_ptr<const TauGrid> TauGrid::make(int n_nodes, double L,
                                             double tail_tol) {
  return std::shared_ptr<const TauGrid>(new TauGrid(n_nodes, L, tail_tol));
}

std::vector<Complex> TauGrid::tau_derivative(const std::vector<Complex>& f) const {
  require((int)f.size() == n_, "tau_derivative: sample count mismatch");
  const int m = n_ + 1;
  Eigen::VectorXcd g = Eigen::VectorXcd::Zero(m);
  for (int j = 0; j < n_; ++j) g(j + 1) = f[j];
  Eigen::VectorXcd dg = dtheta_ * g;
  std::vector<Complex> out(n_);
  for (int j = 0; j < n_; ++j) {
    const double c = std::cos(theta_[j]);
    out[j] = dg(j + 1) * c * c / L_;
  }
  return out;
}

std::vector<Matrix> TauGrid::tau_derivative(const std::vector<Matrix>& f) const {
  require((int)f.size() == n_, "tau_derivative: sample count mismatch");
  const int m = n_ + 1;
  std::vector<Matrix> g(m, Matrix::Zero(f[0].rows(), f[0].cols()));
  for (int j = 0; j < n_; ++j) g[j + 1] = f[j];
  std::vector<Matrix> dg = apply_theta_op(dtheta_, g);
  std::vector<Matrix> out(n_);
  for (int j = 0; j < n_; ++j) {
    const double c = std::cos(theta_[j]);
    out[j] = dg[j + 1] * (c * c / L_);
  }
  return out;
}

Complex TauGrid::quadrature(const std::vector<Complex>& f) const {
  require((int)f.size() == n_, "quadrature: sample count mismatch");
  double maxabs = 0;
  for (const auto& v : f) maxabs = std::max(maxabs, std::abs(v));
  const double edge = std::max(std::abs(f.front()), std::abs(f.back()));
  if (maxabs > 0 && edge > 1e-2 * maxabs && edge > tail_tol_)
    throw EtalabError("quadrature: integrand not decaying at the ends");

  Complex acc = 0;
  for (int j = 0; j < n_; ++j) acc += w_[j] * f[j];

  // Endpoint of the periodic theta-integrand: lim tau^2 f / L, Richardson from
  // the two outermost nodes on each side.
  auto endlim = [&](int j1, int j2) {
    const double t1 = tau_[j1], t2 = tau_[j2];
    const Complex v1 = t1 * t1 * f[j1], v2 = t2 * t2 * f[j2];
    return (v1 * t1 * t1 - v2 * t2 * t2) / (t1 * t1 - t2 * t2);
  };
  const Complex gend = 0.5 * (endlim(n_ - 1, n_ - 2) + endlim(0, 1)) / L_;
  return acc + h_ * gend;
}

std::pair<std::vector<Matrix>, Matrix> TauGrid::cumulative(
    const std::vector<Matrix>& f) const {
  require((int)f.size() == n_, "cumulative: sample count mismatch");
  const int m = n_ + 1;
  const int nr = (int)f[0].rows(), nc = (int)f[0].cols();
  std::vector<Matrix> g(m, Matrix::Zero(nr, nc));
  for (int j = 0; j < n_; ++j) {
    const double c = std::cos(theta_[j]);
    g[j + 1] = f[j] * (L_ / (c * c));
  }
  std::vector<Matrix> G = apply_theta_op(cumul_, g);
  // total integral = mean * period
  Matrix total = Matrix::Zero(nr, nc);
  for (int k = 0; k < m; ++k) total += g[k];
  total *= h_;
  std::vector<Matrix> out(n_);
  for (int j = 0; j < n_; ++j) out[j] = G[j + 1];
  return {out, total};
}

namespace {
// 8-point Lagrange interpolation on the closed phi-grid.
template <typename V>
V lagrange_closed(const std::vector<V>& closed, double s, int m) {
  int base = (int)std::floor(s) - 3;
  base = std::max(0, std::min(base, m - 7));
  double w[8];
  for (int i = 0; i < 8; ++i) {
    w[i] = 1.0;
    for (int k = 0; k < 8; ++k)
      if (k != i) w[i] *= (s - (base + k)) / double(i - k);
  }
  V acc = w[0] * closed[base];
  for (int i = 1; i < 8; ++i) acc += w[i] * closed[base + i];
  return acc;
}
}  // namespace

Complex TauGrid::interpolate(const std::vector<Complex>& f, double tau) const {
  const int m = n_ + 1;
  std::vector<Complex> closed(m + 1, Complex(0));
  for (int j = 0; j < n_; ++j) closed[j + 1] = f[j];
  const double s = (std::atan(tau / L_) + kPi / 2) / h_;
  return lagrange_closed(closed, s, m);
}

Matrix TauGrid::interpolate(const std::vector<Matrix>& f, double tau) const {
  const int m = n_ + 1;
  std::vector<Matrix> closed(m + 1, Matrix::Zero(f[0].rows(), f[0].cols()));
  for (int j = 0; j < n_; ++j) closed[j + 1] = f[j];
  const double s = (std::atan(tau / L_) + kPi / 2) / h_;
  return lagrange_closed(closed, s, m);
}

Matrix SuspendedElement::value_at(double tau) const {
  return grid->interpolate(samples, tau);
}

std::vector<Matrix> SuspendedElement::tau_derivative() const {
  return grid->tau_derivative(samples);
}

double SuspendedElement::tail_norm() const {
  return std::max(samples.front().norm(), samples.back().norm());
}

double SuspendedElement::min_margin() const {
  double m = std::numeric_limits<double>::infinity();
  const int N = dim();
  for (const auto& a : samples)
    m = std::min(m, opcore::smallest_singular_value(Matrix::Identity(N, N) + a));
  return m;
}

void SuspendedElement::validate(double margin_floor) const {
  require((int)samples.size() == grid->n(), "SuspendedElement: sample count");
  require(tail_norm() < grid->tail_tol(),
          "SuspendedElement: tails exceed tail_tol");
  require(min_margin() > margin_floor,
          "SuspendedElement: Id + A singular at a node");
}

SuspendedElement pointwise_compose(const SuspendedElement& a,
                                   const SuspendedElement& b) {
  require(a.grid == b.grid && a.dim() == b.dim(), "pointwise_compose: mismatch");
  SuspendedElement out{a.grid, {}};
  out.samples.reserve(a.samples.size());
  for (size_t j = 0; j < a.samples.size(); ++j)
    out.samples.push_back(a.samples[j] + b.samples[j] +
                          a.samples[j] * b.samples[j]);
  return out;
}

SuspendedElement pointwise_inverse(const SuspendedElement& a) {
  const int N = a.dim();
  SuspendedElement out{a.grid, {}};
  out.samples.reserve(a.samples.size());
  const Matrix id = Matrix::Identity(N, N);
  for (const auto& s : a.samples)
    out.samples.push_back((id + s).partialPivLu().solve(id) - id);
  return out;
}

std::vector<Matrix> flat_tau_derivative(const TauGrid& grid,
                                        const std::vector<Matrix>& samples,
                                        const Matrix& left_value,
                                        const Matrix& right_value) {
  // 6th-order central stencil in theta with constant ghost padding; valid for
  // flat-to-constant tails.
  static const double c[3] = {3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0};
  const int n = grid.n();
  const double h = grid.theta_step();
  auto at = [&](int j) -> const Matrix& {
    if (j < 0) return left_value;
    if (j >= n) return right_value;
    return samples[j];
  };
  std::vector<Matrix> out(n);
  for (int j = 0; j < n; ++j) {
    Matrix d = Matrix::Zero(left_value.rows(), left_value.cols());
    for (int k = 1; k <= 3; ++k) d += c[k - 1] * (at(j + k) - at(j - k));
    const double cs = std::cos(-kPi / 2 + (j + 1) * h);
    out[j] = d * (cs * cs / (h * grid.scale()));
  }
  return out;
}

void HalfOpenElement::validate(double margin_floor) const {
  require((int)samples.size() == grid->n(), "HalfOpenElement: sample count");
  const double tol = grid->tail_tol();
  require(samples.front().norm() < tol,
          "HalfOpenElement: nonzero tail at the -infinity end");
  require((samples.back() - limit_perturbation).norm() < tol,
          "HalfOpenElement: not flat to the limit at the +infinity end");
  require(derivative.size() == samples.size(), "HalfOpenElement: derivative");
  require(std::max(derivative.front().norm(), derivative.back().norm()) < tol,
          "HalfOpenElement: derivative tails not Schwartz");
  require(min_margin() > margin_floor, "HalfOpenElement: singular node");
}

double HalfOpenElement::min_margin() const {
  double m = std::numeric_limits<double>::infinity();
  const int N = dim();
  const Matrix id = Matrix::Identity(N, N);
  for (const auto& a : samples)
    m = std::min(m, opcore::smallest_singular_value(id + a));
  m = std::min(m, opcore::smallest_singular_value(id + limit_perturbation));
  return m;
}

GroupElement restrict_infinity(const HalfOpenElement& a) {
  return GroupElement(a.limit_perturbation);
}

HalfOpenElement embed(const SuspendedElement& s) {
  HalfOpenElement out;
  out.grid = s.grid;
  out.samples = s.samples;
  out.limit_perturbation = Matrix::Zero(s.dim(), s.dim());
  out.derivative = s.tau_derivative();
  return out;
}

namespace {
double ramp(double tau) { return 0.5 * (1.0 + std::tanh(tau)); }
double ramp_deriv(double tau) {
  const double c = std::cosh(tau);
  return 0.5 / (c * c);
}

double segment_min_margin(const Matrix& pert, int scan) {
  const int N = (int)pert.rows();
  const Matrix id = Matrix::Identity(N, N);
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= scan; ++i) {
    const double r = double(i) / scan;
    m = std::min(m, opcore::smallest_singular_value(id + r * pert));
  }
  return m;
}
}  // namespace

HalfOpenElement make_path(const GroupElement& g, const GridPtr& grid,
                          const PathOptions& opts) {
  const int N = g.dim();
  const Matrix id = Matrix::Identity(N, N);
  const int n = grid->n();

  auto build_single = [&](const Matrix& pert) {
    HalfOpenElement out;
    out.grid = grid;
    out.samples.resize(n);
    out.derivative.resize(n);
    for (int j = 0; j < n; ++j) {
      const double tau = grid->node(j);
      out.samples[j] = ramp(tau) * pert;
      out.derivative[j] = ramp_deriv(tau) * pert;
    }
    out.limit_perturbation = pert;
    return out;
  };

  const double m0 = segment_min_margin(g.perturbation(), opts.margin_scan);
  if (m0 > opts.margin_accept) return build_single(g.perturbation());

  Rng rng(opts.seed, "make_path");
  double worst = m0;
  for (int attempt = 0; attempt < opts.retry_budget; ++attempt) {
    Matrix r = rng.matrix(N);
    Matrix p1 = 0.25 * r / std::max(1.0, r.norm());
    Matrix h1 = id + p1;
    Matrix h2 = h1.partialPivLu().solve(g.full());
    const double ma = segment_min_margin(p1, opts.margin_scan);
    const double mb = segment_min_margin(h2 - id, opts.margin_scan);
    worst = std::max(worst, std::min(ma, mb));
    if (std::min(ma, mb) <= opts.margin_accept) continue;

    HalfOpenElement out;
    out.grid = grid;
    out.samples.resize(n);
    out.derivative.resize(n);
    const Matrix p2 = h2 - id;
    for (int j = 0; j < n; ++j) {
      const double tau = grid->node(j);
      const Matrix f1 = id + ramp(tau) * p1;
      const Matrix f2 = id + ramp(tau) * p2;
      out.samples[j] = f1 * f2 - id;
      out.derivative[j] =
          ramp_deriv(tau) * (p1 * f2 + f1 * p2);
    }
    out.limit_perturbation = g.perturbation();
    return out;
  }
  throw EtalabError("make_path: retry budget exhausted (best margin " +
                    std::to_string(worst) + ")");
}

HalfOpenElement reconstruct_from_derivative(const GridPtr& grid,
                                            const std::vector<Matrix>& d) {
  require((int)d.size() == grid->n(), "reconstruct_from_derivative: samples");
  require(std::max(d.front().norm(), d.back().norm()) < grid->tail_tol(),
          "reconstruct_from_derivative: derivative not decaying");
  auto [cum, total] = grid->cumulative(d);
  HalfOpenElement out;
  out.grid = grid;
  out.samples = std::move(cum);
  out.limit_perturbation = total;
  out.derivative = d;
  return out;
}

double contraction_cutoff(double x) {
  if (x >= 0.8) return 1.0;
  if (x <= 0.0) return 0.0;
  const double u = x / 0.8;
  auto f = [](double v) { return v > 0 ? std::exp(-1.0 / v) : 0.0; };
  return f(u) / (f(u) + f(1.0 - u));
}

double contraction_profile(double t, double x) {
  const double rho = contraction_cutoff(x);
  if (t <= 0.5) return 2.0 * t * rho;
  return rho + 2.0 * (t - 0.5) * (x - rho);
}

namespace {
// Catmull-Rom evaluation on the closed x-grid (x_k = k/m).
Matrix eval_closed_cubic(const std::vector<Matrix>& closed, double x, int m) {
  double s = x * m;
  s = std::max(0.0, std::min(s, double(m)));
  int k = (int)std::floor(s);
  k = std::min(k, m - 1);
  const double u = s - k;
  if (u < 1e-13) return closed[k];
  if (u > 1 - 1e-13) return closed[k + 1];
  const Matrix& p1 = closed[k];
  const Matrix& p2 = closed[k + 1];
  const Matrix p0 = k > 0 ? closed[k - 1] : (2.0 * p1 - p2).eval();
  const Matrix p3 = k + 2 <= m ? closed[k + 2] : (2.0 * p2 - p1).eval();
  const Matrix m1 = 0.5 * (p2 - p0);
  const Matrix m2 = 0.5 * (p3 - p1);
  const double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * p1 + (u3 - 2 * u2 + u) * m1 +
         (-2 * u3 + 3 * u2) * p2 + (u3 - u2) * m2;
}
}  // namespace

HalfOpenElement contraction_homotopy(const HalfOpenElement& a, double t) {
  require(t >= 0.0 && t <= 1.0, "contraction_homotopy: t outside [0,1]");
  const int n = a.grid->n();
  const int m = n + 1;
  const int N = a.dim();
  std::vector<Matrix> closed(m + 1, Matrix::Zero(N, N));
  for (int j = 0; j < n; ++j) closed[j + 1] = a.samples[j];
  closed[m] = a.limit_perturbation;

  HalfOpenElement out;
  out.grid = a.grid;
  out.samples.resize(n);
  for (int j = 0; j < n; ++j) {
    const double x = double(j + 1) / m;
    out.samples[j] = eval_closed_cubic(closed, contraction_profile(t, x), m);
  }
  out.limit_perturbation = eval_closed_cubic(closed, contraction_profile(t, 1.0), m);
  out.derivative = flat_tau_derivative(*a.grid, out.samples,
                                       Matrix::Zero(N, N),
                                       out.limit_perturbation);
  return out;
}

Matrix ProductSuspendedElement::value_at(double tau) const {
  const int N = dim();
  Matrix v = Matrix::Zero(N, N);
  for (int k = (int)poly_coeffs.size() - 1; k >= 0; --k)
    v = v * tau + poly_coeffs[k];
  if (!schwartz_part.samples.empty()) v += schwartz_part.value_at(tau);
  return v;
}

Matrix ProductSuspendedElement::derivative_at(double tau) const {
  const int N = dim();
  Matrix v = Matrix::Zero(N, N);
  for (int k = (int)poly_coeffs.size() - 1; k >= 1; --k)
    v = v * tau + double(k) * poly_coeffs[k];
  if (!schwartz_part.samples.empty()) {
    auto d = schwartz_part.tau_derivative();
    v += schwartz_part.grid->interpolate(d, tau);
  }
  return v;
}

double ProductSuspendedElement::min_margin() const {
  const auto& grid = schwartz_part.grid;
  require(grid != nullptr, "ProductSuspendedElement: needs a grid");
  double m = std::numeric_limits<double>::infinity();
  for (int j = 0; j < grid->n(); ++j)
    m = std::min(m, opcore::smallest_singular_value(value_at(grid->node(j))));
  return m;
}

}  // namespace etalab::suspend
