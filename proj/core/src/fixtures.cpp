#include "etalab/fixtures.hpp"

#include <cmath>

namespace etalab::fixtures {

namespace {

// smooth scalar on the domain with closed-form axis derivatives
struct SmoothScalar {
  std::vector<double> omega, phase;

  static SmoothScalar random(const ParamDomain& dom, Rng& rng) {
    SmoothScalar s;
    for (const auto& ax : dom.axes) {
      s.omega.push_back(2.0 * kPi / ax.length);
      s.phase.push_back(rng.uniform(0.0, 2.0 * kPi));
    }
    return s;
  }
  double value(const ParamDomain& dom, int p) const {
    double v = 1.0;
    for (size_t i = 0; i < omega.size(); ++i)
      v *= std::cos(omega[i] * dom.coord(p, (int)i) + phase[i]);
    return v;
  }
  double deriv(const ParamDomain& dom, int p, int axis) const {
    double v = 1.0;
    for (size_t i = 0; i < omega.size(); ++i) {
      const double arg = omega[i] * dom.coord(p, (int)i) + phase[i];
      v *= ((int)i == axis) ? -omega[i] * std::sin(arg) : std::cos(arg);
    }
    return v;
  }
};

// fixed-resolution lattice so margin safeguards do not depend on dom.n
ParamDomain probe_of(const ParamDomain& dom) {
  ParamDomain p = dom;
  for (auto& ax : p.axes) ax.n = 17;
  return p;
}

double family_min_margin(const std::vector<Matrix>& perts, int N) {
  const Matrix id = Matrix::Identity(N, N);
  double m = std::numeric_limits<double>::infinity();
  for (const auto& a : perts)
    m = std::min(m, opcore::smallest_singular_value(Matrix(id + a)));
  return m;
}

}  // namespace

SuspendedElement random_suspended(const GridPtr& grid, int N, Rng& rng,
                                  double amp, int bumps) {
  std::vector<Matrix> coeff;
  std::vector<double> width, center;
  for (int b = 0; b < bumps; ++b) {
    coeff.push_back(rng.matrix(N, amp / bumps));
    width.push_back(rng.uniform(0.5, 1.5));
    center.push_back(rng.uniform(-2.0, 2.0));
  }
  double scale = 1.0;
  for (int attempt = 0; attempt < 40; ++attempt) {
    SuspendedElement s;
    s.grid = grid;
    s.samples.resize(grid->n());
    for (int j = 0; j < grid->n(); ++j) {
      const double tau = grid->node(j);
      Matrix m = Matrix::Zero(N, N);
      for (int b = 0; b < bumps; ++b)
        m += scale * std::exp(-width[b] * (tau - center[b]) * (tau - center[b])) *
             coeff[b];
      s.samples[j] = m;
    }
    if (s.min_margin() > 0.2) return s;
    scale *= 0.7;
  }
  throw EtalabError("random_suspended: margin safeguard failed");
}

GroupFamily random_group_family(const ParamDomain& dom, int N, Rng& rng,
                                double amp, int winding) {
  const int P = dom.size();
  const int d = dom.dim();
  const int K = 3;
  std::vector<Matrix> coeff;
  std::vector<SmoothScalar> u;
  for (int k = 0; k < K; ++k) {
    coeff.push_back(rng.matrix(N, amp / K));
    u.push_back(SmoothScalar::random(dom, rng));
  }
  const Matrix id = Matrix::Identity(N, N);

  const ParamDomain probe = probe_of(dom);
  double scale = 1.0;
  for (int attempt = 0; attempt < 40; ++attempt) {
    std::vector<Matrix> pr(probe.size(), Matrix::Zero(N, N));
    for (int p = 0; p < probe.size(); ++p)
      for (int k = 0; k < K; ++k)
        pr[p] += scale * u[k].value(probe, p) * coeff[k];
    if (family_min_margin(pr, N) < 0.25) {
      scale *= 0.7;
      continue;
    }
    std::vector<Matrix> pert(P, Matrix::Zero(N, N));
    for (int p = 0; p < P; ++p)
      for (int k = 0; k < K; ++k)
        pert[p] += scale * u[k].value(dom, p) * coeff[k];
    GroupFamily f;
    f.dom = dom;
    f.values.resize(P);
    f.analytic_derivs.assign(d, std::vector<Matrix>(P));
    const double omega0 = 2.0 * kPi / dom.axes[0].length;
    for (int p = 0; p < P; ++p) {
      Matrix phase = id;
      Matrix dphase = Matrix::Zero(N, N);
      if (winding != 0) {
        const Complex ph = std::exp(kI * double(winding) * omega0 *
                                    dom.coord(p, 0));
        phase(0, 0) = ph;
        dphase(0, 0) = kI * double(winding) * omega0 * ph;
      }
      f.values[p] = (id + pert[p]) * phase;
      for (int axis = 0; axis < d; ++axis) {
        Matrix dpert = Matrix::Zero(N, N);
        for (int k = 0; k < K; ++k)
          dpert += scale * u[k].deriv(dom, p, axis) * coeff[k];
        f.analytic_derivs[axis][p] = dpert * phase;
        if (axis == 0 && winding != 0)
          f.analytic_derivs[axis][p] += (id + pert[p]) * dphase;
      }
    }
    return f;
  }
  throw EtalabError("random_group_family: margin safeguard failed");
}

SuspendedFamily random_suspended_family(const ParamDomain& dom,
                                        const GridPtr& grid, int N, Rng& rng,
                                        double amp) {
  const int P = dom.size();
  const int B = 3, K = 2;
  std::vector<Matrix> base, vary;
  std::vector<double> width, center;
  std::vector<SmoothScalar> u;
  for (int k = 0; k < K; ++k) u.push_back(SmoothScalar::random(dom, rng));
  for (int b = 0; b < B; ++b) {
    base.push_back(rng.matrix(N, amp / B));
    for (int k = 0; k < K; ++k) vary.push_back(rng.matrix(N, amp / B));
    width.push_back(rng.uniform(0.5, 1.5));
    center.push_back(rng.uniform(-2.0, 2.0));
  }

  auto build_fibre = [&](const ParamDomain& d, int p, double scale) {
    SuspendedElement fib;
    fib.grid = grid;
    fib.samples.resize(grid->n());
    std::vector<Matrix> cb(B);
    for (int b = 0; b < B; ++b) {
      cb[b] = base[b];
      for (int k = 0; k < K; ++k) cb[b] += u[k].value(d, p) * vary[b * K + k];
      cb[b] *= scale;
    }
    for (int j = 0; j < grid->n(); ++j) {
      const double tau = grid->node(j);
      Matrix m = Matrix::Zero(N, N);
      for (int b = 0; b < B; ++b)
        m += std::exp(-width[b] * (tau - center[b]) * (tau - center[b])) * cb[b];
      fib.samples[j] = m;
    }
    return fib;
  };

  const ParamDomain probe = probe_of(dom);
  double scale = 1.0;
  for (int attempt = 0; attempt < 40; ++attempt) {
    double margin = std::numeric_limits<double>::infinity();
    for (int p = 0; p < probe.size(); ++p)
      margin = std::min(margin, build_fibre(probe, p, scale).min_margin());
    if (margin > 0.2) {
      SuspendedFamily f;
      f.dom = dom;
      f.fibres.resize(P);
      for (int p = 0; p < P; ++p) f.fibres[p] = build_fibre(dom, p, scale);
      return f;
    }
    scale *= 0.7;
  }
  throw EtalabError("random_suspended_family: margin safeguard failed");
}

HalfOpenFamily random_half_open_family(const ParamDomain& dom,
                                       const GridPtr& grid, int N, Rng& rng,
                                       double amp, bool with_loop) {
  const int P = dom.size();
  const int K = 3;
  std::vector<Matrix> coeff;
  std::vector<SmoothScalar> u;
  for (int k = 0; k < K; ++k) {
    coeff.push_back(rng.matrix(N, amp / K));
    u.push_back(SmoothScalar::random(dom, rng));
  }
  const Matrix id = Matrix::Identity(N, N);

  const ParamDomain probe = probe_of(dom);
  double scale = 1.0;
  for (int attempt = 0;; ++attempt) {
    require(attempt < 40, "random_half_open_family: margin safeguard failed");
    double margin = std::numeric_limits<double>::infinity();
    for (int p = 0; p < probe.size(); ++p) {
      Matrix pr = Matrix::Zero(N, N);
      for (int k = 0; k < K; ++k)
        pr += scale * u[k].value(probe, p) * coeff[k];
      for (int s = 0; s <= 16; ++s)
        margin = std::min(margin, opcore::smallest_singular_value(
                                      Matrix(id + (s / 16.0) * pr)));
    }
    if (margin > 0.25) break;
    scale *= 0.7;
  }
  std::vector<Matrix> pert(P);
  for (int p = 0; p < P; ++p) {
    pert[p] = Matrix::Zero(N, N);
    for (int k = 0; k < K; ++k)
      pert[p] += scale * u[k].value(dom, p) * coeff[k];
  }

  SuspendedFamily loop;
  if (with_loop) loop = random_suspended_family(dom, grid, N, rng, 0.8 * amp);

  HalfOpenFamily f;
  f.dom = dom;
  f.fibres.resize(P);
  for (int p = 0; p < P; ++p) {
    auto& fib = f.fibres[p];
    fib.grid = grid;
    fib.limit_perturbation = pert[p];
    fib.samples.resize(grid->n());
    fib.derivative.resize(grid->n());
    std::vector<Matrix> dsig;
    if (with_loop) dsig = loop.fibres[p].tau_derivative();
    for (int j = 0; j < grid->n(); ++j) {
      const double tau = grid->node(j);
      const double r = 0.5 * (1.0 + std::tanh(tau));
      const double dr = 0.5 / (std::cosh(tau) * std::cosh(tau));
      Matrix path = r * pert[p];
      Matrix dpath = dr * pert[p];
      if (with_loop) {
        const Matrix& sg = loop.fibres[p].samples[j];
        fib.samples[j] = sg + path + sg * path;
        fib.derivative[j] = dsig[j] * (id + path) + (id + sg) * dpath;
      } else {
        fib.samples[j] = path;
        fib.derivative[j] = dpath;
      }
    }
    fib.validate();
  }
  return f;
}

HalfOpenElement random_half_open(const GridPtr& grid, int N, Rng& rng,
                                 double amp) {
  Matrix pert = rng.matrix(N, amp);
  const Matrix id = Matrix::Identity(N, N);
  for (int attempt = 0; attempt < 40; ++attempt) {
    if (opcore::smallest_singular_value(Matrix(id + pert)) > 0.3) break;
    pert *= 0.7;
  }
  return suspend::make_path(opcore::GroupElement(pert), grid);
}

namespace {

std::vector<Matrix> bigrid_bumps(const BiGrid& g, int N, Rng& rng, double amp,
                                 int bumps) {
  std::vector<Matrix> coeff;
  std::vector<double> wt, wtau, ct, ctau;
  for (int b = 0; b < bumps; ++b) {
    coeff.push_back(rng.matrix(N, amp / bumps));
    wt.push_back(rng.uniform(0.5, 1.5));
    wtau.push_back(rng.uniform(0.5, 1.5));
    ct.push_back(rng.uniform(-1.5, 1.5));
    ctau.push_back(rng.uniform(-1.5, 1.5));
  }
  std::vector<Matrix> field(g.size(), Matrix::Zero(N, N));
  for (int it = 0; it < g.t->n(); ++it)
    for (int jt = 0; jt < g.tau->n(); ++jt) {
      const double t = g.t->node(it), tau = g.tau->node(jt);
      Matrix m = Matrix::Zero(N, N);
      for (int b = 0; b < bumps; ++b)
        m += std::exp(-wt[b] * (t - ct[b]) * (t - ct[b]) -
                      wtau[b] * (tau - ctau[b]) * (tau - ctau[b])) *
             coeff[b];
      field[g.index(it, jt)] = m;
    }
  return field;
}

double eps_margin(const EpsilonElement& e) {
  const Matrix id = Matrix::Identity(e.N, e.N);
  double m = std::numeric_limits<double>::infinity();
  for (const auto& a : e.a0)
    m = std::min(m, opcore::smallest_singular_value(Matrix(id + a)));
  for (const auto& a : e.right0)
    m = std::min(m, opcore::smallest_singular_value(Matrix(id + a)));
  for (const auto& a : e.left0)
    m = std::min(m, opcore::smallest_singular_value(Matrix(id + a)));
  return m;
}

}  // namespace

EpsilonElement random_schwartz_eps(const BiGrid& grid, int N, Rng& rng,
                                   double amp, bool unital) {
  for (int attempt = 0; attempt < 40; ++attempt) {
    EpsilonElement e = EpsilonElement::identity(grid, N);
    e.unital = unital;
    e.a0 = bigrid_bumps(grid, N, rng, amp, 3);
    e.a1 = bigrid_bumps(grid, N, rng, amp, 3);
    if (!unital || eps_margin(e) > 0.2) return e;
    amp *= 0.7;
  }
  throw EtalabError("random_schwartz_eps: margin safeguard failed");
}

EpsilonElement random_extended_eps(const BiGrid& grid, int N, Rng& rng,
                                   double amp) {
  SuspendedElement R = random_suspended(grid.tau, N, rng, amp);
  std::vector<Matrix> bump = bigrid_bumps(grid, N, rng, 0.4 * amp, 2);
  for (int attempt = 0; attempt < 40; ++attempt) {
    EpsilonElement e = EpsilonElement::identity(grid, N);
    e.cls = adiabatic::EpsClass::HalfOpenT;
    e.a1 = bigrid_bumps(grid, N, rng, amp, 3);
    e.right0 = R.samples;
    for (int it = 0; it < grid.t->n(); ++it) {
      const double h = 0.5 * (1.0 + std::tanh(grid.t->node(it)));
      for (int jt = 0; jt < grid.tau->n(); ++jt)
        e.a0[grid.index(it, jt)] =
            h * R.samples[jt] + bump[grid.index(it, jt)];
    }
    if (eps_margin(e) > 0.15) return e;
    for (auto& m : bump) m *= 0.6;
    for (auto& m : R.samples) m *= 0.8;
  }
  throw EtalabError("random_extended_eps: margin safeguard failed");
}

EpsilonElement random_dclass_eps(const BiGrid& grid, int N, int j, Rng& rng,
                                 double amp) {
  SuspendedElement s = chern::winding_fixture(grid.tau, N, 1);
  const Matrix id = Matrix::Identity(N, N);
  std::vector<Matrix> sj(grid.tau->n());
  for (int jt = 0; jt < grid.tau->n(); ++jt) {
    Matrix full = id + s.samples[jt];
    Matrix pw = id;
    for (int k = 0; k < std::abs(j); ++k) pw = pw * full;
    if (j < 0) pw = pw.partialPivLu().solve(id).eval();
    sj[jt] = pw;
  }
  SuspendedElement R = random_suspended(grid.tau, N, rng, amp);
  for (int attempt = 0;; ++attempt) {
    require(attempt < 40, "random_dclass_eps: margin safeguard failed");
    double m = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 16; ++k)
      for (int jt = 0; jt < grid.tau->n(); ++jt)
        m = std::min(m, opcore::smallest_singular_value(Matrix(
                            id + (k / 16.0) * R.samples[jt])));
    if (m > 0.2) break;
    for (auto& s : R.samples) s *= 0.8;
  }
  EpsilonElement e = EpsilonElement::identity(grid, N);
  e.cls = adiabatic::EpsClass::DClass;
  e.j = j;
  e.a1 = bigrid_bumps(grid, N, rng, amp, 3);
  for (int jt = 0; jt < grid.tau->n(); ++jt) {
    e.left0[jt] = sj[jt] - id;
    e.right0[jt] = sj[jt] * (id + R.samples[jt]) - id;
  }
  // a0(t) = s^j (Id + h(t) R) - Id stays invertible for all t
  for (int it = 0; it < grid.t->n(); ++it) {
    const double h = 0.5 * (1.0 + std::tanh(grid.t->node(it)));
    for (int jt = 0; jt < grid.tau->n(); ++jt)
      e.a0[grid.index(it, jt)] = sj[jt] * (id + h * R.samples[jt]) - id;
  }
  return e;
}

std::vector<EpsilonElement> random_extended_family(const ParamDomain& dom,
                                                   const BiGrid& grid, int N,
                                                   Rng& rng, double amp) {
  const int P = dom.size();
  SuspendedFamily R = random_suspended_family(dom, grid.tau, N, rng, amp);
  std::vector<EpsilonElement> out;
  for (int attempt = 0; out.empty(); ++attempt) {
    require(attempt < 40, "random_extended_family: margin safeguard failed");
    std::vector<EpsilonElement> cand;
    cand.reserve(P);
    bool ok = true;
    for (int p = 0; p < P; ++p) {
      EpsilonElement e = EpsilonElement::identity(grid, N);
      e.cls = adiabatic::EpsClass::HalfOpenT;
      e.right0 = R.fibres[p].samples;
      for (int it = 0; it < grid.t->n(); ++it) {
        const double h = 0.5 * (1.0 + std::tanh(grid.t->node(it)));
        for (int jt = 0; jt < grid.tau->n(); ++jt)
          e.a0[grid.index(it, jt)] = h * R.fibres[p].samples[jt];
      }
      if (eps_margin(e) < 0.15) {
        ok = false;
        break;
      }
      cand.push_back(std::move(e));
    }
    if (ok) {
      out = std::move(cand);
    } else {
      // shrink the whole family so it stays smooth over the domain
      for (auto& fib : R.fibres)
        for (auto& m : fib.samples) m *= 0.8;
    }
  }
  // smooth eps-parts varying over the domain
  std::vector<SmoothScalar> u = {SmoothScalar::random(dom, rng),
                                 SmoothScalar::random(dom, rng)};
  std::vector<Matrix> b1 = bigrid_bumps(grid, N, rng, amp, 2);
  std::vector<Matrix> b2 = bigrid_bumps(grid, N, rng, amp, 2);
  for (int p = 0; p < P; ++p)
    for (int q = 0; q < grid.size(); ++q)
      out[p].a1[q] = u[0].value(dom, p) * b1[q] + u[1].value(dom, p) * b2[q];
  return out;
}

bundles::OddFamily random_odd_family(const ParamDomain& base,
                                     const GridPtr& grid, int N, Rng& rng,
                                     double spread) {
  const int P = base.size();
  const int K = 2;
  Matrix H0 = rng.hermitian(N, spread);
  std::vector<Matrix> Hk;
  std::vector<SmoothScalar> u;
  for (int k = 0; k < K; ++k) {
    Hk.push_back(rng.hermitian(N, 0.5 * spread));
    u.push_back(SmoothScalar::random(base, rng));
  }
  bundles::OddFamily f;
  f.base = base;
  f.grid = grid;
  f.A.resize(P);
  for (int p = 0; p < P; ++p) {
    f.A[p] = H0;
    for (int k = 0; k < K; ++k) f.A[p] += u[k].value(base, p) * Hk[k];
  }
  return f;
}

}  // namespace etalab::fixtures
