#include "etalab/chern.hpp"

#include <cmath>

namespace etalab::chern {

std::vector<int> ParamDomain::unflatten(int flat) const {
  std::vector<int> idx(axes.size());
  for (int a = (int)axes.size() - 1; a >= 0; --a) {
    idx[a] = flat % axes[a].n;
    flat /= axes[a].n;
  }
  return idx;
}

int ParamDomain::flatten(const std::vector<int>& idx) const {
  int flat = 0;
  for (size_t a = 0; a < axes.size(); ++a) flat = flat * axes[a].n + idx[a];
  return flat;
}

int ParamDomain::shift(int flat, int axis, int delta) const {
  auto idx = unflatten(flat);
  int v = idx[axis] + delta;
  const int n = axes[axis].n;
  if (axes[axis].periodic) {
    v = ((v % n) + n) % n;
  } else if (v < 0 || v >= n) {
    return -1;
  }
  idx[axis] = v;
  return flatten(idx);
}

double ParamDomain::coord(int flat, int axis) const {
  return unflatten(flat)[axis] * axes[axis].step();
}

bool ParamDomain::operator==(const ParamDomain& o) const {
  if (axes.size() != o.axes.size()) return false;
  for (size_t i = 0; i < axes.size(); ++i)
    if (axes[i].n != o.axes[i].n || axes[i].periodic != o.axes[i].periodic ||
        std::abs(axes[i].length - o.axes[i].length) > 1e-15)
      return false;
  return true;
}

namespace {

Eigen::MatrixXd periodic_deriv_matrix(int n, double length) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      if (j == k) continue;
      const double ang = (j - k) * kPi / n;
      double v;
      if (n % 2 == 1)
        v = ((j - k) % 2 ? -1.0 : 1.0) / (2.0 * std::sin(ang));
      else
        v = ((j - k) % 2 ? -1.0 : 1.0) * 0.5 / std::tan(ang);
      d(j, k) = v * (2.0 * kPi / length);
    }
  return d;
}

template <typename T>
T scaled(const T& x, double c);
template <>
Matrix scaled<Matrix>(const Matrix& x, double c) { return x * c; }
template <>
Complex scaled<Complex>(const Complex& x, double c) { return x * c; }

template <typename T>
std::vector<T> field_derivative_impl(const ParamDomain& dom,
                                     const std::vector<T>& field, int axis,
                                     DerivMode mode) {
  require((int)field.size() == dom.size(), "field_derivative: size mismatch");
  const Axis& ax = dom.axes[axis];
  const double h = ax.step();
  std::vector<T> out(field.size());

  if (mode == DerivMode::Spectral) {
    require(ax.periodic, "spectral derivative needs a periodic axis");
    Eigen::MatrixXd d = periodic_deriv_matrix(ax.n, ax.length);
    // iterate over lines along `axis`
    for (int flat = 0; flat < dom.size(); ++flat) {
      if (dom.unflatten(flat)[axis] != 0) continue;
      std::vector<int> line(ax.n);
      int p = flat;
      for (int k = 0; k < ax.n; ++k) {
        line[k] = p;
        p = dom.shift(p, axis, 1);
      }
      for (int j = 0; j < ax.n; ++j) {
        T acc = scaled(field[line[0]], d(j, 0));
        for (int k = 1; k < ax.n; ++k) acc += scaled(field[line[k]], d(j, k));
        out[line[j]] = acc;
      }
    }
    return out;
  }

  for (int flat = 0; flat < dom.size(); ++flat) {
    const int ip = dom.shift(flat, axis, 1);
    const int im = dom.shift(flat, axis, -1);
    if (ip >= 0 && im >= 0) {
      out[flat] = scaled(T(field[ip] - field[im]), 0.5 / h);
    } else if (ip >= 0) {  // left end, one-sided second order
      const int ipp = dom.shift(flat, axis, 2);
      out[flat] = scaled(
          T(scaled(field[ip], 4.0) - scaled(field[flat], 3.0) - field[ipp]),
          0.5 / h);
    } else {
      const int imm = dom.shift(flat, axis, -2);
      out[flat] = scaled(
          T(scaled(field[flat], 3.0) - scaled(field[im], 4.0) + field[imm]),
          0.5 / h);
    }
  }
  return out;
}

}  // namespace

std::vector<Matrix> field_derivative(const ParamDomain& dom,
                                     const std::vector<Matrix>& field, int axis,
                                     DerivMode mode) {
  return field_derivative_impl(dom, field, axis, mode);
}
std::vector<Complex> field_derivative(const ParamDomain& dom,
                                      const std::vector<Complex>& field,
                                      int axis, DerivMode mode) {
  return field_derivative_impl(dom, field, axis, mode);
}

std::vector<Matrix> GroupFamily::axis_derivative(int axis) const {
  if (!analytic_derivs.empty()) {
    require((int)analytic_derivs.size() == dom.dim(), "analytic_derivs shape");
    return analytic_derivs[axis];
  }
  return field_derivative(dom, values, axis, mode);
}

void GroupFamily::validate(double margin_floor) const {
  require((int)values.size() == dom.size(), "GroupFamily: value count");
  for (const auto& v : values)
    require(opcore::smallest_singular_value(v) > margin_floor,
            "GroupFamily: non-invertible value");
}

GroupFamily pointwise_family_inverse(const GroupFamily& f) {
  GroupFamily out;
  out.dom = f.dom;
  out.mode = f.mode;
  out.values.reserve(f.values.size());
  const int N = f.matrix_dim();
  const Matrix id = Matrix::Identity(N, N);
  for (const auto& v : f.values) out.values.push_back(v.partialPivLu().solve(id));
  if (!f.analytic_derivs.empty()) {
    out.analytic_derivs.resize(f.dom.dim());
    for (int a = 0; a < f.dom.dim(); ++a) {
      out.analytic_derivs[a].reserve(f.values.size());
      for (size_t p = 0; p < f.values.size(); ++p)
        out.analytic_derivs[a].push_back(-out.values[p] *
                                         f.analytic_derivs[a][p] *
                                         out.values[p]);
    }
  }
  return out;
}

GroupFamily pointwise_family_product(const GroupFamily& f, const GroupFamily& g) {
  require(f.dom == g.dom, "pointwise_family_product: domain mismatch");
  GroupFamily out;
  out.dom = f.dom;
  out.mode = f.mode;
  out.values.reserve(f.values.size());
  for (size_t p = 0; p < f.values.size(); ++p)
    out.values.push_back(f.values[p] * g.values[p]);
  if (!f.analytic_derivs.empty() && !g.analytic_derivs.empty()) {
    out.analytic_derivs.resize(f.dom.dim());
    for (int a = 0; a < f.dom.dim(); ++a)
      for (size_t p = 0; p < f.values.size(); ++p)
        out.analytic_derivs[a].push_back(
            f.analytic_derivs[a][p] * g.values[p] +
            f.values[p] * g.analytic_derivs[a][p]);
  }
  return out;
}

namespace {
std::vector<std::vector<int>> tuples_of(int dim, int degree) {
  std::vector<std::vector<int>> out;
  if (degree == 0) {
    out.push_back({});
    return out;
  }
  std::vector<int> t(degree);
  // iterate sorted tuples
  std::function<void(int, int)> rec = [&](int start, int pos) {
    if (pos == degree) {
      out.push_back(t);
      return;
    }
    for (int i = start; i < dim; ++i) {
      t[pos] = i;
      rec(i + 1, pos + 1);
    }
  };
  rec(0, 0);
  return out;
}
}  // namespace

FormField FormField::zero(int degree, const ParamDomain& dom) {
  FormField f;
  f.degree = degree;
  f.dom = dom;
  f.tuples = tuples_of(dom.dim(), degree);
  f.comps.assign(f.tuples.size(),
                 std::vector<Complex>(dom.size(), Complex(0)));
  return f;
}

int FormField::tuple_index(const std::vector<int>& t) const {
  for (size_t i = 0; i < tuples.size(); ++i)
    if (tuples[i] == t) return (int)i;
  throw EtalabError("FormField: unknown tuple");
}

double FormField::norm_inf() const {
  double m = 0;
  for (const auto& c : comps)
    for (const auto& v : c) m = std::max(m, std::abs(v));
  return m;
}

double FormField::norm_inf_strided(int stride) const {
  double m = 0;
  for (int p = 0; p < dom.size(); ++p) {
    const auto idx = dom.unflatten(p);
    bool on = true;
    for (int i : idx) on = on && (i % stride == 0);
    if (!on) continue;
    for (const auto& c : comps) m = std::max(m, std::abs(c[p]));
  }
  return m;
}

FormField& FormField::operator+=(const FormField& o) {
  require(degree == o.degree && dom == o.dom, "FormField +=: mismatch");
  for (size_t i = 0; i < comps.size(); ++i)
    for (size_t p = 0; p < comps[i].size(); ++p) comps[i][p] += o.comps[i][p];
  return *this;
}
FormField& FormField::operator-=(const FormField& o) {
  require(degree == o.degree && dom == o.dom, "FormField -=: mismatch");
  for (size_t i = 0; i < comps.size(); ++i)
    for (size_t p = 0; p < comps[i].size(); ++p) comps[i][p] -= o.comps[i][p];
  return *this;
}
FormField& FormField::operator*=(Complex c) {
  for (auto& comp : comps)
    for (auto& v : comp) v *= c;
  return *this;
}
FormField operator-(FormField a, const FormField& b) { return a -= b; }
FormField operator+(FormField a, const FormField& b) { return a += b; }

Complex chern_coefficient(int k) {
  double fact_k = 1, fact_2k1 = 1;
  for (int i = 2; i <= k; ++i) fact_k *= i;
  for (int i = 2; i <= 2 * k + 1; ++i) fact_2k1 *= i;
  Complex denom = std::pow(kTwoPiI, k + 1);
  return fact_k / (denom * fact_2k1);
}

namespace {
// signed sum over S3 of Tr(K_{s0} K_{s1} K_{s2})
Complex s3_trace_sum(const Matrix& k0, const Matrix& k1, const Matrix& k2) {
  return (k0 * k1 * k2).trace() + (k1 * k2 * k0).trace() +
         (k2 * k0 * k1).trace() - (k0 * k2 * k1).trace() -
         (k2 * k1 * k0).trace() - (k1 * k0 * k2).trace();
}
}  // namespace

std::vector<FormField> ch_odd(const GroupFamily& f) {
  const int d = f.dom.dim();
  const int P = f.dom.size();
  std::vector<std::vector<Matrix>> b(d);
  for (int a = 0; a < d; ++a) b[a] = f.axis_derivative(a);

  std::vector<FormField> out;
  FormField deg1 = FormField::zero(1, f.dom);
  FormField deg3 = d >= 3 ? FormField::zero(3, f.dom) : FormField{};
  const Complex c0 = chern_coefficient(0);
  const Complex c1 = chern_coefficient(1);

  for (int p = 0; p < P; ++p) {
    Eigen::PartialPivLU<Matrix> lu(f.values[p]);
    std::vector<Matrix> k(d);
    for (int a = 0; a < d; ++a) k[a] = lu.solve(b[a][p]);
    for (int a = 0; a < d; ++a) deg1.comps[a][p] = c0 * k[a].trace();
    if (d >= 3) {
      int ti = 0;
      for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
          for (int l = j + 1; l < d; ++l, ++ti)
            deg3.comps[ti][p] = c1 * s3_trace_sum(k[i], k[j], k[l]);
    }
  }
  out.push_back(std::move(deg1));
  if (d >= 3) out.push_back(std::move(deg3));
  return out;
}

namespace {

// Per-gridpoint tau-resolved view of a suspended/half-open family: full
// values, tau-derivatives, and per-axis directional derivatives.
struct SuspView {
  ParamDomain dom;
  suspend::GridPtr grid;
  int N = 0;
  std::vector<std::vector<Matrix>> vals;   // [point][tau], full matrices
  std::vector<std::vector<Matrix>> dtau;   // [point][tau]
  std::vector<std::vector<std::vector<Matrix>>> dy;  // [axis][point][tau]
};

void fill_dy(SuspView& v, DerivMode mode) {
  const int d = v.dom.dim();
  const int P = v.dom.size();
  const int nt = v.grid->n();
  v.dy.assign(d, std::vector<std::vector<Matrix>>(
                     P, std::vector<Matrix>(nt)));
  std::vector<Matrix> slice(P);
  for (int a = 0; a < d; ++a)
    for (int jt = 0; jt < nt; ++jt) {
      for (int p = 0; p < P; ++p) slice[p] = v.vals[p][jt];
      auto ds = field_derivative(v.dom, slice, a, mode);
      for (int p = 0; p < P; ++p) v.dy[a][p][jt] = ds[p];
    }
}

SuspView make_view(const SuspendedFamily& f) {
  SuspView v;
  v.dom = f.dom;
  v.grid = f.fibres[0].grid;
  v.N = f.fibres[0].dim();
  const int P = f.dom.size();
  const int nt = v.grid->n();
  const Matrix id = Matrix::Identity(v.N, v.N);
  v.vals.resize(P);
  v.dtau.resize(P);
  for (int p = 0; p < P; ++p) {
    v.vals[p].resize(nt);
    for (int jt = 0; jt < nt; ++jt) v.vals[p][jt] = id + f.fibres[p].samples[jt];
    v.dtau[p] = f.fibres[p].tau_derivative();
  }
  fill_dy(v, f.mode);
  return v;
}

SuspView make_view(const HalfOpenFamily& f) {
  SuspView v;
  v.dom = f.dom;
  v.grid = f.fibres[0].grid;
  v.N = f.fibres[0].dim();
  const int P = f.dom.size();
  const int nt = v.grid->n();
  const Matrix id = Matrix::Identity(v.N, v.N);
  v.vals.resize(P);
  v.dtau.resize(P);
  for (int p = 0; p < P; ++p) {
    v.vals[p].resize(nt);
    for (int jt = 0; jt < nt; ++jt) v.vals[p][jt] = id + f.fibres[p].samples[jt];
    v.dtau[p] = f.fibres[p].derivative;
  }
  fill_dy(v, f.mode);
  return v;
}

SuspView inverse_view(const SuspView& v) {
  SuspView w;
  w.dom = v.dom;
  w.grid = v.grid;
  w.N = v.N;
  const int P = (int)v.vals.size();
  const int nt = v.grid->n();
  const Matrix id = Matrix::Identity(v.N, v.N);
  w.vals.resize(P);
  w.dtau.resize(P);
  w.dy.assign(v.dy.size(), std::vector<std::vector<Matrix>>(
                               P, std::vector<Matrix>(nt)));
  for (int p = 0; p < P; ++p) {
    w.vals[p].resize(nt);
    w.dtau[p].resize(nt);
    for (int jt = 0; jt < nt; ++jt) {
      Matrix inv = v.vals[p][jt].partialPivLu().solve(id);
      w.vals[p][jt] = inv;
      w.dtau[p][jt] = -inv * v.dtau[p][jt] * inv;
      for (size_t a = 0; a < v.dy.size(); ++a)
        w.dy[a][p][jt] = -inv * v.dy[a][p][jt] * inv;
    }
  }
  return w;
}

}  // namespace

namespace {
std::vector<FormField> pushforward_view(const SuspView& v) {
  const int d = v.dom.dim();
  const int P = v.dom.size();
  const int nt = v.grid->n();
  const auto& w = v.grid->weights();

  FormField deg0 = FormField::zero(0, v.dom);
  FormField deg2 = d >= 2 ? FormField::zero(2, v.dom) : FormField{};
  const Complex c0 = chern_coefficient(0);
  const Complex c1 = chern_coefficient(1);

  for (int p = 0; p < P; ++p) {
    Complex w0 = 0;
    std::vector<Complex> acc2(deg2.tuples.size(), Complex(0));
    for (int jt = 0; jt < nt; ++jt) {
      Eigen::PartialPivLU<Matrix> lu(v.vals[p][jt]);
      const Matrix kt = lu.solve(v.dtau[p][jt]);
      w0 += w[jt] * kt.trace();
      if (d >= 2) {
        std::vector<Matrix> ky(d);
        for (int a = 0; a < d; ++a) ky[a] = lu.solve(v.dy[a][p][jt]);
        int ti = 0;
        for (int i = 0; i < d; ++i)
          for (int j = i + 1; j < d; ++j, ++ti)
            acc2[ti] += w[jt] * s3_trace_sum(kt, ky[i], ky[j]);
      }
    }
    deg0.comps[0][p] = c0 * w0;
    for (size_t ti = 0; ti < acc2.size(); ++ti)
      deg2.comps[ti][p] = c1 * acc2[ti];
  }
  std::vector<FormField> out;
  out.push_back(std::move(deg0));
  if (d >= 2) out.push_back(std::move(deg2));
  return out;
}
}  // namespace

std::vector<FormField> ch_even(const SuspendedFamily& f) {
  return pushforward_view(make_view(f));
}

std::vector<FormField> tau_pushforward(const HalfOpenFamily& f) {
  return pushforward_view(make_view(f));
}

double winding_number(const GroupFamily& loop) {
  require(loop.dom.dim() == 1 && loop.dom.axes[0].periodic,
          "winding_number: single circle axis required");
  std::vector<Matrix> b;
  if (!loop.analytic_derivs.empty())
    b = loop.analytic_derivs[0];
  else
    b = field_derivative(loop.dom, loop.values, 0, DerivMode::Spectral);
  const double h = loop.dom.axes[0].step();
  Complex acc = 0;
  for (size_t p = 0; p < loop.values.size(); ++p)
    acc += loop.values[p].partialPivLu().solve(b[p]).trace();
  return (acc * h / kTwoPiI).real();
}

FormField exterior_derivative(const FormField& w) {
  const int d = w.dom.dim();
  require(w.degree < d, "exterior_derivative: degree = domain dimension");
  FormField out = FormField::zero(w.degree + 1, w.dom);
  for (size_t to = 0; to < out.tuples.size(); ++to) {
    const auto& t = out.tuples[to];
    for (size_t m = 0; m < t.size(); ++m) {
      std::vector<int> sub;
      for (size_t i = 0; i < t.size(); ++i)
        if (i != m) sub.push_back(t[i]);
      const int ti = w.tuple_index(sub);
      auto dcomp = field_derivative(w.dom, w.comps[ti], t[m],
                                    DerivMode::FiniteDifference);
      const double sgn = (m % 2 == 0) ? 1.0 : -1.0;
      for (int p = 0; p < w.dom.size(); ++p)
        out.comps[to][p] += sgn * dcomp[p];
    }
  }
  return out;
}

std::vector<std::pair<double, double>> gauss_legendre(int n, double a, double b) {
  std::vector<std::pair<double, double>> out(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (x * p1 - p0) / (x * x - 1);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (x * p1 - p0) / (x * x - 1);
    double wgt = 2.0 / ((1 - x * x) * dp * dp);
    out[i] = {0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * wgt};
  }
  return out;
}

namespace {

// Rotation-homotopy state on the doubled model at angle t.
struct RotationPoint {
  Matrix H, dHt;
  std::vector<Matrix> dHdir;
};

Matrix blockdiag(const Matrix& a, int N) {
  Matrix m = Matrix::Identity(2 * N, 2 * N);
  m.topLeftCorner(N, N) = a;
  return m;
}
Matrix blockdiag0(const Matrix& a, int N) {  // [[a,0],[0,0]]
  Matrix m = Matrix::Zero(2 * N, 2 * N);
  m.topLeftCorner(N, N) = a;
  return m;
}

RotationPoint rotation_point(const Matrix& a, const Matrix& b,
                             const std::vector<Matrix>& da,
                             const std::vector<Matrix>& db, double t) {
  const int N = (int)a.rows();
  const double c = std::cos(t), s = std::sin(t);
  Matrix M = Matrix::Zero(2 * N, 2 * N);
  M.topLeftCorner(N, N) = c * Matrix::Identity(N, N);
  M.topRightCorner(N, N) = s * Matrix::Identity(N, N);
  M.bottomLeftCorner(N, N) = -s * Matrix::Identity(N, N);
  M.bottomRightCorner(N, N) = c * Matrix::Identity(N, N);
  Matrix Minv = M.transpose();  // rotation
  Matrix dM = Matrix::Zero(2 * N, 2 * N);
  dM.topLeftCorner(N, N) = -s * Matrix::Identity(N, N);
  dM.topRightCorner(N, N) = c * Matrix::Identity(N, N);
  dM.bottomLeftCorner(N, N) = -c * Matrix::Identity(N, N);
  dM.bottomRightCorner(N, N) = -s * Matrix::Identity(N, N);
  Matrix A = blockdiag(a, N);
  Matrix D = blockdiag(b, N);
  Matrix B = Minv * D * M;
  RotationPoint rp;
  rp.H = A * B;
  rp.dHt = A * (dM.transpose() * D * M + Minv * D * dM);
  rp.dHdir.resize(da.size());
  for (size_t i = 0; i < da.size(); ++i)
    rp.dHdir[i] = blockdiag0(da[i], N) * B +
                  A * (Minv * blockdiag0(db[i], N) * M);
  return rp;
}

// Raw (un-antisymmetrized) rotation transgression at one gridpoint.
// deg0: -int_0^{pi/2} (1/2pi i) Tr(H^{-1} dH/dt) dt
// deg2(i,j): -int c1 * S3(H^{-1}dHt, H^{-1}dHi, H^{-1}dHj) dt
void delta_even_point(const Matrix& a, const Matrix& b,
                      const std::vector<Matrix>& da,
                      const std::vector<Matrix>& db,
                      const std::vector<std::pair<double, double>>& gl,
                      Complex& out0, std::vector<Complex>& out2,
                      const std::vector<std::pair<int, int>>& pairs) {
  const Complex c0 = chern_coefficient(0);
  const Complex c1 = chern_coefficient(1);
  out0 = 0;
  out2.assign(pairs.size(), Complex(0));
  for (const auto& [t, wt] : gl) {
    RotationPoint rp = rotation_point(a, b, da, db, t);
    Eigen::PartialPivLU<Matrix> lu(rp.H);
    const Matrix kt = lu.solve(rp.dHt);
    out0 -= wt * c0 * kt.trace();
    if (!pairs.empty()) {
      std::vector<Matrix> ky(rp.dHdir.size());
      for (size_t i = 0; i < ky.size(); ++i) ky[i] = lu.solve(rp.dHdir[i]);
      for (size_t q = 0; q < pairs.size(); ++q)
        out2[q] -= wt * c1 * s3_trace_sum(kt, ky[pairs[q].first],
                                          ky[pairs[q].second]);
    }
  }
}

}  // namespace

std::vector<FormField> transgression_delta_even(const GroupFamily& a,
                                                const GroupFamily& b) {
  require(a.dom == b.dom, "transgression_delta_even: domain mismatch");
  const int d = a.dom.dim();
  const int P = a.dom.size();
  const auto gl = gauss_legendre(32, 0.0, kPi / 2);

  std::vector<std::vector<Matrix>> da(d), db(d);
  for (int i = 0; i < d; ++i) {
    da[i] = a.axis_derivative(i);
    db[i] = b.axis_derivative(i);
  }
  GroupFamily binv = pointwise_family_inverse(b);
  GroupFamily ainv = pointwise_family_inverse(a);
  const int N = a.matrix_dim();
  const Matrix id = Matrix::Identity(N, N);

  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) pairs.emplace_back(i, j);

  FormField deg0 = FormField::zero(0, a.dom);
  FormField deg2 = d >= 2 ? FormField::zero(2, a.dom) : FormField{};

  std::vector<Matrix> dai(d), dbi(d), dbinv(d), dainv(d);
  for (int p = 0; p < P; ++p) {
    for (int i = 0; i < d; ++i) {
      dai[i] = da[i][p];
      dbi[i] = db[i][p];
      dbinv[i] = -binv.values[p] * db[i][p] * binv.values[p];
      dainv[i] = -ainv.values[p] * da[i][p] * ainv.values[p];
    }
    Complex f0, g0;
    std::vector<Complex> f2, g2;
    delta_even_point(a.values[p], b.values[p], dai, dbi, gl, f0, f2, pairs);
    delta_even_point(binv.values[p], ainv.values[p], dbinv, dainv, gl, g0, g2,
                     pairs);
    deg0.comps[0][p] = 0.5 * (f0 - g0);
    for (size_t q = 0; q < pairs.size(); ++q)
      deg2.comps[q][p] = 0.5 * (f2[q] - g2[q]);
  }
  std::vector<FormField> out;
  out.push_back(std::move(deg0));
  if (d >= 2) out.push_back(std::move(deg2));
  return out;
}

namespace {

FormField delta_odd_from_views(const SuspView& va, const SuspView& vb) {
  const int d = va.dom.dim();
  const int P = va.dom.size();
  const int nt = va.grid->n();
  const auto& w = va.grid->weights();
  const auto gl = gauss_legendre(32, 0.0, kPi / 2);

  SuspView vbinv = inverse_view(vb);
  SuspView vainv = inverse_view(va);

  // directions for the inner delta_even: index 0 is tau, then the axes;
  // the needed degree-2 components are the (tau, axis) pairs.
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < d; ++i) pairs.emplace_back(0, i + 1);

  FormField out = FormField::zero(1, va.dom);
  std::vector<Matrix> da(d + 1), db(d + 1), dbinv(d + 1), dainv(d + 1);
  for (int p = 0; p < P; ++p) {
    std::vector<Complex> acc(d, Complex(0));
    for (int jt = 0; jt < nt; ++jt) {
      da[0] = va.dtau[p][jt];
      db[0] = vb.dtau[p][jt];
      dbinv[0] = vbinv.dtau[p][jt];
      dainv[0] = vainv.dtau[p][jt];
      for (int i = 0; i < d; ++i) {
        da[i + 1] = va.dy[i][p][jt];
        db[i + 1] = vb.dy[i][p][jt];
        dbinv[i + 1] = vbinv.dy[i][p][jt];
        dainv[i + 1] = vainv.dy[i][p][jt];
      }
      Complex f0, g0;
      std::vector<Complex> f2, g2;
      delta_even_point(va.vals[p][jt], vb.vals[p][jt], da, db, gl, f0, f2,
                       pairs);
      delta_even_point(vbinv.vals[p][jt], vainv.vals[p][jt], dbinv, dainv, gl,
                       g0, g2, pairs);
      for (int i = 0; i < d; ++i)
        acc[i] += w[jt] * 0.5 * (f2[i] - g2[i]);
    }
    for (int i = 0; i < d; ++i) out.comps[i][p] = -acc[i];
  }
  return out;
}

}  // namespace

FormField transgression_delta_odd(const SuspendedFamily& a,
                                  const SuspendedFamily& b) {
  require(a.dom == b.dom, "transgression_delta_odd: domain mismatch");
  return delta_odd_from_views(make_view(a), make_view(b));
}

FormField transgression_delta_odd(const HalfOpenFamily& a,
                                  const HalfOpenFamily& b) {
  require(a.dom == b.dom, "transgression_delta_odd: domain mismatch");
  return delta_odd_from_views(make_view(a), make_view(b));
}

SuspendedElement winding_fixture(const suspend::GridPtr& grid, int N, int w) {
  SuspendedElement s;
  s.grid = grid;
  s.samples.resize(grid->n());
  for (int j = 0; j < grid->n(); ++j) {
    const double th = kPi * (1.0 + std::tanh(grid->node(j)));
    Matrix m = Matrix::Zero(N, N);
    m(0, 0) = std::exp(Complex(0, w * th)) - 1.0;
    s.samples[j] = m;
  }
  return s;
}

}  // namespace etalab::chern
