#include "etalab/adiabatic.hpp"

#include <cmath>

#include "etalab/eta.hpp"

namespace etalab::adiabatic {

BiGrid BiGrid::make(int nt, int ntau, double L, double tail_tol) {
  BiGrid g;
  g.t = suspend::TauGrid::make(nt, L, tail_tol);
  g.tau = suspend::TauGrid::make(ntau, L, tail_tol);
  return g;
}

EpsilonElement EpsilonElement::identity(const BiGrid& g, int N) {
  EpsilonElement e;
  e.grid = g;
  e.N = N;
  e.unital = true;
  e.a0.assign(g.size(), Matrix::Zero(N, N));
  e.a1.assign(g.size(), Matrix::Zero(N, N));
  e.left0.assign(g.tau->n(), Matrix::Zero(N, N));
  e.right0.assign(g.tau->n(), Matrix::Zero(N, N));
  return e;
}

void EpsilonElement::validate(double margin_floor) const {
  const int nt = grid.t->n(), ntau = grid.tau->n();
  require((int)a0.size() == nt * ntau && a1.size() == a0.size(),
          "EpsilonElement: field sizes");
  require((int)left0.size() == ntau && (int)right0.size() == ntau,
          "EpsilonElement: slice sizes");
  double flat = 0;
  for (int jt = 0; jt < ntau; ++jt) {
    flat = std::max(flat, (a0[grid.index(0, jt)] - left0[jt]).cwiseAbs().maxCoeff());
    flat = std::max(flat,
                    (a0[grid.index(nt - 1, jt)] - right0[jt]).cwiseAbs().maxCoeff());
  }
  require(flat < 1e-6, "EpsilonElement: t-limit mismatch at the grid edge");
  if (cls == EpsClass::Schwartz) {
    double tail = 0;
    for (const auto& m : left0) tail = std::max(tail, m.cwiseAbs().maxCoeff());
    for (const auto& m : right0) tail = std::max(tail, m.cwiseAbs().maxCoeff());
    require(tail < 1e-8, "EpsilonElement: Schwartz class with nonzero t-limits");
  }
  if (unital) {
    const Matrix id = Matrix::Identity(N, N);
    for (const auto& m : a0)
      require(opcore::smallest_singular_value(id + m) > margin_floor,
              "EpsilonElement: Id + a0 singular at a node");
    for (const auto& m : right0)
      require(opcore::smallest_singular_value(id + m) > margin_floor,
              "EpsilonElement: boundary slice singular");
  }
}

std::vector<Matrix> EpsilonElement::dt0() const {
  const int nt = grid.t->n(), ntau = grid.tau->n();
  std::vector<Matrix> out(a0.size());
  std::vector<Matrix> line(nt);
  for (int jt = 0; jt < ntau; ++jt) {
    for (int it = 0; it < nt; ++it) line[it] = a0[grid.index(it, jt)];
    auto d = suspend::flat_tau_derivative(*grid.t, line, left0[jt], right0[jt]);
    for (int it = 0; it < nt; ++it) out[grid.index(it, jt)] = d[it];
  }
  return out;
}

std::vector<Matrix> EpsilonElement::dtau0() const {
  const int nt = grid.t->n(), ntau = grid.tau->n();
  std::vector<Matrix> out(a0.size());
  std::vector<Matrix> line(ntau);
  for (int it = 0; it < nt; ++it) {
    for (int jt = 0; jt < ntau; ++jt) line[jt] = a0[grid.index(it, jt)];
    auto d = grid.tau->tau_derivative(line);
    for (int jt = 0; jt < ntau; ++jt) out[grid.index(it, jt)] = d[jt];
  }
  return out;
}

namespace {
EpsClass combine_class(EpsClass a, EpsClass b) {
  if (a == EpsClass::DClass || b == EpsClass::DClass) return EpsClass::DClass;
  if (a == EpsClass::HalfOpenT || b == EpsClass::HalfOpenT)
    return EpsClass::HalfOpenT;
  return EpsClass::Schwartz;
}
}  // namespace

EpsilonElement star_multiply(const EpsilonElement& a, const EpsilonElement& b,
                             BracketMode mode) {
  require(a.grid == b.grid && a.N == b.N, "star_multiply: grid/dim mismatch");
  const double ua = a.unital ? 1.0 : 0.0;
  const double ub = b.unital ? 1.0 : 0.0;
  auto adt = a.dt0(), adtau = a.dtau0(), bdt = b.dt0(), bdtau = b.dtau0();

  EpsilonElement c;
  c.grid = a.grid;
  c.N = a.N;
  c.unital = a.unital && b.unital;
  c.cls = combine_class(a.cls, b.cls);
  c.j = a.j + b.j;
  c.a0.resize(a.a0.size());
  c.a1.resize(a.a0.size());
  const Complex half_i = 1.0 / (2.0 * kI);
  for (size_t p = 0; p < a.a0.size(); ++p) {
    c.a0[p] = ua * b.a0[p] + ub * a.a0[p] + a.a0[p] * b.a0[p];
    Matrix br = (mode == BracketMode::Td9)
                    ? Matrix(half_i * (adt[p] * bdtau[p] - adtau[p] * bdt[p]))
                    : Matrix(half_i * (adt[p] * bdtau[p] - adtau[p] * adt[p]));
    c.a1[p] = ua * b.a1[p] + ub * a.a1[p] + a.a0[p] * b.a1[p] +
              a.a1[p] * b.a0[p] - br;
  }
  c.left0.resize(a.left0.size());
  c.right0.resize(a.right0.size());
  for (size_t jt = 0; jt < a.left0.size(); ++jt) {
    c.left0[jt] = ua * b.left0[jt] + ub * a.left0[jt] + a.left0[jt] * b.left0[jt];
    c.right0[jt] =
        ua * b.right0[jt] + ub * a.right0[jt] + a.right0[jt] * b.right0[jt];
  }
  return c;
}

EpsilonElement star_inverse(const EpsilonElement& a, BracketMode mode) {
  require(a.unital, "star_inverse: group elements only");
  const Matrix id = Matrix::Identity(a.N, a.N);
  EpsilonElement b;
  b.grid = a.grid;
  b.N = a.N;
  b.unital = true;
  b.cls = a.cls;
  b.j = -a.j;
  b.a0.resize(a.a0.size());
  b.a1.assign(a.a0.size(), Matrix::Zero(a.N, a.N));
  b.left0.resize(a.left0.size());
  b.right0.resize(a.right0.size());
  for (size_t p = 0; p < a.a0.size(); ++p)
    b.a0[p] = Matrix(id + a.a0[p]).partialPivLu().solve(id) - id;
  for (size_t jt = 0; jt < a.left0.size(); ++jt) {
    b.left0[jt] = Matrix(id + a.left0[jt]).partialPivLu().solve(id) - id;
    b.right0[jt] = Matrix(id + a.right0[jt]).partialPivLu().solve(id) - id;
  }
  auto adt = a.dt0(), adtau = a.dtau0(), bdt = b.dt0(), bdtau = b.dtau0();
  const Complex half_i = 1.0 / (2.0 * kI);
  for (size_t p = 0; p < a.a0.size(); ++p) {
    Matrix A0 = id + a.a0[p];
    Matrix B0 = id + b.a0[p];
    Matrix br = (mode == BracketMode::Td9)
                    ? Matrix(half_i * (adt[p] * bdtau[p] - adtau[p] * bdt[p]))
                    : Matrix(half_i * (adt[p] * bdtau[p] - adtau[p] * adt[p]));
    b.a1[p] = -A0.partialPivLu().solve(Matrix(a.a1[p] * B0 - br));
  }
  return b;
}

EpsilonElement eps_add(const EpsilonElement& a, const EpsilonElement& b,
                       Complex ca, Complex cb) {
  require(a.grid == b.grid && a.N == b.N, "eps_add: grid/dim mismatch");
  const Complex uid = ca * (a.unital ? 1.0 : 0.0) + cb * (b.unital ? 1.0 : 0.0);
  EpsilonElement c;
  c.grid = a.grid;
  c.N = a.N;
  c.unital = std::abs(uid - 1.0) < 1e-14;
  // a leftover identity weight is folded into the stored field so that
  // chained linear combinations stay exact
  const Complex fold = c.unital ? Complex(0) : uid;
  c.cls = combine_class(a.cls, b.cls);
  c.a0.resize(a.a0.size());
  c.a1.resize(a.a1.size());
  const Matrix off = fold * Matrix::Identity(a.N, a.N);
  for (size_t p = 0; p < a.a0.size(); ++p) {
    c.a0[p] = ca * a.a0[p] + cb * b.a0[p] + off;
    c.a1[p] = ca * a.a1[p] + cb * b.a1[p];
  }
  c.left0.resize(a.left0.size());
  c.right0.resize(a.right0.size());
  for (size_t jt = 0; jt < a.left0.size(); ++jt) {
    c.left0[jt] = ca * a.left0[jt] + cb * b.left0[jt] + off;
    c.right0[jt] = ca * a.right0[jt] + cb * b.right0[jt] + off;
  }
  return c;
}

EpsilonElement eps_scale(const EpsilonElement& a, Complex c) {
  EpsilonElement z = EpsilonElement::identity(a.grid, a.N);
  z.unital = false;
  z.cls = a.cls;
  return eps_add(a, z, c, 0.0);
}

Complex adiabatic_trace(const EpsilonElement& a) {
  const int nt = a.grid.t->n(), ntau = a.grid.tau->n();
  std::vector<Complex> per_t(nt);
  std::vector<Complex> row(ntau);
  for (int it = 0; it < nt; ++it) {
    for (int jt = 0; jt < ntau; ++jt) row[jt] = a.a1[a.grid.index(it, jt)].trace();
    per_t[it] = a.grid.tau->quadrature(row);
  }
  return a.grid.t->quadrature(per_t) / (2.0 * kPi);
}

std::pair<Complex, Complex> trace_defect(const EpsilonElement& a,
                                         const EpsilonElement& b,
                                         BracketMode mode) {
  Complex lhs = adiabatic_trace(star_multiply(a, b, mode)) -
                adiabatic_trace(star_multiply(b, a, mode));
  auto dRa = a.grid.tau->tau_derivative(a.right0);
  const double ub = b.unital ? 1.0 : 0.0;
  const Matrix id = Matrix::Identity(a.N, a.N);
  std::vector<Complex> integrand(a.grid.tau->n());
  for (int jt = 0; jt < a.grid.tau->n(); ++jt)
    integrand[jt] = (dRa[jt] * (ub * id + b.right0[jt])).trace();
  Complex rhs = a.grid.tau->quadrature(integrand) / kTwoPiI;
  return {lhs, rhs};
}

std::vector<Complex> alpha_form(const EpsilonElement& a,
                                const std::vector<EpsilonElement>& da,
                                bool symmetrized, BracketMode mode) {
  EpsilonElement ainv = star_inverse(a, mode);
  std::vector<Complex> out;
  out.reserve(da.size());
  for (const auto& d : da) {
    Complex v = adiabatic_trace(star_multiply(ainv, d, mode));
    if (symmetrized)
      v = 0.5 * (v + adiabatic_trace(star_multiply(d, ainv, mode)));
    out.push_back(v);
  }
  return out;
}

namespace {

Complex alpha_at(const EpsilonElement& g, const EpsilonElement& dg,
                 BracketMode mode) {
  return alpha_form(g, {dg}, g.cls != EpsClass::Schwartz, mode)[0];
}

Complex line_integral(const std::function<EpsilonElement(double)>& path,
                      BracketMode mode, int steps, double fd_step) {
  Complex acc = 0;
  for (int k = 0; k < steps; ++k) {
    for (const auto& [s, w] :
         chern::gauss_legendre(4, double(k) / steps, double(k + 1) / steps)) {
      double lo = std::max(0.0, s - fd_step), hi = std::min(1.0, s + fd_step);
      EpsilonElement dg =
          eps_add(path(hi), path(lo), 1.0 / (hi - lo), -1.0 / (hi - lo));
      acc += w * alpha_at(path(s), dg, mode);
    }
  }
  return acc;
}

}  // namespace

Complex adiabatic_determinant(const std::function<EpsilonElement(double)>& path,
                              BracketMode mode, const DetPathOptions& opts) {
  int steps = opts.init_steps;
  Complex prev = line_integral(path, mode, steps, opts.fd_step);
  for (int d = 0; d < opts.max_doublings; ++d) {
    steps *= 2;
    Complex cur = line_integral(path, mode, steps, opts.fd_step);
    if (std::abs(cur - prev) < opts.tol) return std::exp(cur);
    prev = cur;
  }
  throw EtalabError("adiabatic_determinant: path refinement did not converge");
}

namespace {

// straight segment from one group element to another in the stored fields
std::function<EpsilonElement(double)> segment(const EpsilonElement& from,
                                              const EpsilonElement& to) {
  return [from, to](double s) { return eps_add(from, to, 1.0 - s, s); };
}

bool segment_invertible(const EpsilonElement& from, const EpsilonElement& to,
                        int scan = 17) {
  for (int k = 0; k <= scan; ++k) {
    EpsilonElement g = eps_add(from, to, 1.0 - double(k) / scan, double(k) / scan);
    const Matrix id = Matrix::Identity(g.N, g.N);
    for (const auto& m : g.a0)
      if (opcore::smallest_singular_value(id + m) < 1e-6) return false;
    for (const auto& m : g.right0)
      if (opcore::smallest_singular_value(id + m) < 1e-6) return false;
  }
  return true;
}

EpsilonElement random_schwartz_group(const BiGrid& g, int N, Rng& rng,
                                     double amp);

}  // namespace

Complex adiabatic_determinant(const EpsilonElement& g, BracketMode mode,
                              std::uint64_t seed, const DetPathOptions& opts) {
  EpsilonElement id = EpsilonElement::identity(g.grid, g.N);
  id.cls = g.cls;
  if (segment_invertible(id, g))
    return adiabatic_determinant(segment(id, g), mode, opts);
  Rng rng(seed, "detad-fallback");
  for (int attempt = 0; attempt < 8; ++attempt) {
    EpsilonElement mid = random_schwartz_group(g.grid, g.N, rng, 0.2);
    mid.cls = g.cls;
    if (!segment_invertible(id, mid) || !segment_invertible(mid, g)) continue;
    Complex i1 = adiabatic_determinant(segment(id, mid), mode, opts);
    Complex i2 = adiabatic_determinant(segment(mid, g), mode, opts);
    return i1 * i2;
  }
  throw EtalabError("adiabatic_determinant: no invertible path found");
}

namespace {
EpsilonElement random_schwartz_group(const BiGrid& g, int N, Rng& rng,
                                     double amp) {
  EpsilonElement e = EpsilonElement::identity(g, N);
  Matrix c1 = rng.matrix(N, amp), c2 = rng.matrix(N, amp);
  const double wt = 0.6 + rng.uniform(0.0, 0.8);
  const double wtau = 0.6 + rng.uniform(0.0, 0.8);
  for (int it = 0; it < g.t->n(); ++it)
    for (int jt = 0; jt < g.tau->n(); ++jt) {
      const double t = g.t->node(it), tau = g.tau->node(jt);
      const double bump = std::exp(-wt * t * t - wtau * tau * tau);
      e.a0[g.index(it, jt)] = bump * c1;
      e.a1[g.index(it, jt)] = bump * c2;
    }
  return e;
}
}  // namespace

Complex delta_correction(const SuspendedElement& a, const SuspendedElement& da,
                         const SuspendedElement& b, const SuspendedElement& db) {
  const auto& grid = *a.grid;
  const int N = a.dim();
  const Matrix id = Matrix::Identity(N, N);
  auto dta = a.tau_derivative();
  auto dtb = b.tau_derivative();
  std::vector<Complex> integrand(grid.n());
  for (int j = 0; j < grid.n(); ++j) {
    Matrix A = id + a.samples[j];
    Matrix B = id + b.samples[j];
    Eigen::PartialPivLU<Matrix> luA(A);
    Eigen::PartialPivLU<Matrix> luBT(Matrix(B.transpose()));
    auto rsolveB = [&](const Matrix& m) {  // m * B^{-1}
      return Matrix(luBT.solve(Matrix(m.transpose())).transpose());
    };
    Matrix term1 = luA.solve(da.samples[j]) * rsolveB(dtb[j]);
    Matrix term2 = rsolveB(db.samples[j]) * luA.solve(dta[j]);
    integrand[j] = (term1 - term2).trace();
  }
  return -grid.quadrature(integrand) / (4.0 * kPi * kI);
}

std::pair<FormField, FormField> curvature_check(
    const ParamDomain& dom, const std::vector<EpsilonElement>& family,
    BracketMode mode) {
  require(dom.dim() == 2, "curvature_check: 2-axis domain required");
  require((int)family.size() == dom.size(), "curvature_check: family size");
  const int P = dom.size();

  FormField alpha = FormField::zero(1, dom);
  for (int p = 0; p < P; ++p) {
    std::vector<EpsilonElement> dirs;
    for (int axis = 0; axis < 2; ++axis) {
      const double h = dom.axes[axis].step();
      const int ip = dom.shift(p, axis, 1);
      const int im = dom.shift(p, axis, -1);
      if (ip >= 0 && im >= 0) {
        dirs.push_back(eps_add(family[ip], family[im], 0.5 / h, -0.5 / h));
      } else if (ip >= 0) {
        const int ipp = dom.shift(p, axis, 2);
        dirs.push_back(eps_add(eps_add(family[ip], family[p], 2.0 / h, -1.5 / h),
                               family[ipp], 1.0, -0.5 / h));
      } else {
        const int imm = dom.shift(p, axis, -2);
        dirs.push_back(eps_add(eps_add(family[im], family[p], -2.0 / h, 1.5 / h),
                               family[imm], 1.0, 0.5 / h));
      }
    }
    auto v = alpha_form(family[p], dirs, true, mode);
    alpha.comps[0][p] = v[0];
    alpha.comps[1][p] = v[1];
  }
  FormField dalpha = chern::exterior_derivative(alpha);

  chern::SuspendedFamily boundary;
  boundary.dom = dom;
  boundary.fibres.resize(P);
  for (int p = 0; p < P; ++p) {
    boundary.fibres[p].grid = family[p].grid.tau;
    boundary.fibres[p].samples = family[p].right0;
  }
  FormField rhs = chern::ch_even(boundary)[1];
  rhs *= kTwoPiI;
  return {dalpha, rhs};
}

GerbeReport gerbe_bfield_check(const chern::HalfOpenFamily& a,
                               const chern::HalfOpenFamily& b) {
  require(a.dom == b.dom, "gerbe_bfield_check: domain mismatch");
  const int P = a.dom.size();
  for (int p = 0; p < P; ++p)
    require((a.fibres[p].limit_perturbation - b.fibres[p].limit_perturbation)
                    .cwiseAbs()
                    .maxCoeff() < 1e-10,
            "gerbe_bfield_check: fibre-product constraint violated");

  GerbeReport rep{0, 0};
  if (a.dom.dim() == 2) {
    // quotient loop family s = b a^-1, Schwartz since the limits agree
    const auto& grid = a.fibres[0].grid;
    const int N = a.fibres[0].dim();
    const Matrix id = Matrix::Identity(N, N);
    chern::SuspendedFamily s;
    s.dom = a.dom;
    s.fibres.resize(P);
    chern::HalfOpenFamily s_open;
    s_open.dom = a.dom;
    s_open.fibres.resize(P);
    for (int p = 0; p < P; ++p) {
      s.fibres[p].grid = grid;
      s.fibres[p].samples.resize(grid->n());
      for (int j = 0; j < grid->n(); ++j) {
        Matrix A = id + a.fibres[p].samples[j];
        Matrix B = id + b.fibres[p].samples[j];
        Matrix q = A.transpose().partialPivLu().solve(Matrix(B.transpose()));
        s.fibres[p].samples[j] = q.transpose() - id;  // b a^-1 - Id
      }
      s_open.fibres[p] = suspend::embed(s.fibres[p]);
    }
    FormField ch2 = chern::ch_even(s)[1];
    eta::EtaValue ea = eta::universal_eta(a);
    eta::EtaValue eb = eta::universal_eta(b);
    FormField ddelta = chern::exterior_derivative(
        chern::transgression_delta_odd(s_open, a));
    FormField res = ch2 - (eb.forms[0] - ea.forms[0]) + ddelta;
    rep.splitting_residual = res.norm_inf();
  } else if (a.dom.dim() == 3) {
    eta::EtaValue ea = eta::universal_eta(a);
    FormField deta2 = chern::exterior_derivative(ea.forms[0]);
    chern::GroupFamily limits;
    limits.dom = a.dom;
    const int N = a.fibres[0].dim();
    for (int p = 0; p < P; ++p)
      limits.values.push_back(Matrix::Identity(N, N) +
                              a.fibres[p].limit_perturbation);
    FormField ch3 = chern::ch_odd(limits)[1];
    rep.curving_residual = (deta2 - ch3).norm_inf();
  } else {
    throw EtalabError("gerbe_bfield_check: 2- or 3-axis domain required");
  }
  return rep;
}

}  // namespace etalab::adiabatic
