#include "etalab/eta.hpp"

#include <algorithm>
#include <cmath>

namespace etalab::eta {

RegularizedTraceConfig RegularizedTraceConfig::defaults(double L) {
  RegularizedTraceConfig cfg;
  const int n_radii = 20;
  const double lo = 4.0 * L, hi = 64.0 * L;
  for (int i = 0; i < n_radii; ++i)
    cfg.radii.push_back(lo * std::pow(hi / lo, double(i) / (n_radii - 1)));
  return cfg;
}

std::vector<Complex> regularized_trace_multi(
    const std::function<void(double, std::vector<Complex>&)>& F, int n_comp,
    const RegularizedTraceConfig& cfg) {
  require(n_comp > 0, "regularized_trace: no components");
  std::vector<double> radii = cfg.radii;
  require(radii.size() >= 2, "regularized_trace: need sample radii");
  std::sort(radii.begin(), radii.end());
  const int R = (int)radii.size();

  // basis columns in T
  std::vector<std::function<double(double)>> basis;
  basis.emplace_back([](double) { return 1.0; });
  if (cfg.with_log) basis.emplace_back([](double T) { return std::log(T); });
  if (cfg.p_derivatives > 0) {
    for (int j = 1; j <= cfg.p_derivatives; ++j)
      basis.emplace_back([j](double T) { return std::pow(T, j); });
  } else {
    for (int j = 1; j <= cfg.max_power; ++j)
      basis.emplace_back([j](double T) { return std::pow(T, j); });
    for (int j = 1; j <= cfg.neg_powers; ++j)
      basis.emplace_back([j](double T) { return std::pow(T, -j); });
  }
  const int B = (int)basis.size();
  require(R >= B + 4, "regularized_trace: need at least 4 more radii than basis functions");

  // incremental symmetric integrals over [-T_k, T_k]
  const auto gl = chern::gauss_legendre(cfg.panel_nodes, 0.0, 1.0);
  std::vector<Complex> acc(n_comp, Complex(0)), fval(n_comp);
  Eigen::MatrixXcd b(R, n_comp);
  double prev = 0.0;
  auto add_interval = [&](double lo, double hi) {
    const int panels = std::max(1, (int)std::ceil((hi - lo) / cfg.panel_width));
    const double w = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p)
      for (const auto& [x, wx] : gl) {
        const double t = lo + (p + x) * w;
        F(t, fval);
        for (int c = 0; c < n_comp; ++c) acc[c] += w * wx * fval[c];
        F(-t, fval);
        for (int c = 0; c < n_comp; ++c) acc[c] += w * wx * fval[c];
      }
  };
  for (int k = 0; k < R; ++k) {
    add_interval(prev, radii[k]);
    prev = radii[k];
    for (int c = 0; c < n_comp; ++c) b(k, c) = acc[c];
  }

  Eigen::MatrixXd A(R, B);
  for (int k = 0; k < R; ++k)
    for (int j = 0; j < B; ++j) A(k, j) = basis[j](radii[k]);
  Eigen::VectorXd scale(B);
  for (int j = 0; j < B; ++j) {
    scale(j) = A.col(j).norm();
    A.col(j) /= scale(j);
  }
  Eigen::MatrixXcd Ac = A.cast<Complex>();
  Eigen::MatrixXcd x = Ac.colPivHouseholderQr().solve(b);

  std::vector<Complex> out(n_comp);
  for (int c = 0; c < n_comp; ++c) {
    const Complex c0 = x(0, c) / scale(0);
    const double resid = (Ac * x.col(c) - b.col(c)).norm();
    // numerical noise scales with the size of the integrals being fitted
    const double ref = std::max({std::abs(c0), 1.0, b.col(c).norm()});
    if (resid > cfg.residual_tol * ref)
      throw EtalabError("regularized_trace: fit residual " +
                        std::to_string(resid) + " above threshold");
    out[c] = c0;
  }
  return out;
}

Complex regularized_trace(const std::function<Complex(double)>& F,
                          const RegularizedTraceConfig& cfg) {
  auto multi = [&](double t, std::vector<Complex>& out) { out[0] = F(t); };
  return regularized_trace_multi(multi, 1, cfg)[0];
}

Complex formal_trace(const ProductSuspendedElement& a,
                     const RegularizedTraceConfig& cfg) {
  std::vector<Matrix> dpoly;
  for (size_t k = 1; k < a.poly_coeffs.size(); ++k)
    dpoly.push_back(double(k) * a.poly_coeffs[k]);
  std::vector<Matrix> dsamp;
  if (!a.schwartz_part.samples.empty()) dsamp = a.schwartz_part.tau_derivative();
  auto F = [&](double tau) {
    Complex tr = 0;
    double p = 1.0;
    for (const auto& c : dpoly) {
      tr += c.trace() * p;
      p *= tau;
    }
    if (!dsamp.empty())
      tr += a.schwartz_part.grid->interpolate(dsamp, tau).trace();
    return tr;
  };
  return regularized_trace(F, cfg);
}

EvalFamily make_eval_family(const ParamDomain& dom,
                            std::vector<ProductSuspendedElement> fibres) {
  require((int)fibres.size() == dom.size(), "make_eval_family: fibre count");
  EvalFamily out;
  out.dom = dom;
  out.N = fibres[0].dim();
  struct Shared {
    ProductSuspendedElement el;
    std::vector<Matrix> dsamp;
  };
  for (auto& f : fibres) {
    auto sh = std::make_shared<Shared>();
    sh->el = std::move(f);
    if (!sh->el.schwartz_part.samples.empty())
      sh->dsamp = sh->el.schwartz_part.tau_derivative();
    Fiber fib;
    fib.value = [sh](double tau) { return sh->el.value_at(tau); };
    fib.dtau = [sh](double tau) {
      const int N = sh->el.dim();
      Matrix v = Matrix::Zero(N, N);
      for (int k = (int)sh->el.poly_coeffs.size() - 1; k >= 1; --k)
        v = v * tau + double(k) * sh->el.poly_coeffs[k];
      if (!sh->dsamp.empty())
        v += sh->el.schwartz_part.grid->interpolate(sh->dsamp, tau);
      return v;
    };
    out.fibres.push_back(std::move(fib));
  }
  return out;
}

EvalFamily hermitian_eval_family(const ParamDomain& dom,
                                 const std::vector<Matrix>& A,
                                 const std::vector<SuspendedElement>& q) {
  require((int)A.size() == dom.size(), "hermitian_eval_family: field size");
  require(q.empty() || q.size() == A.size(),
          "hermitian_eval_family: section size");
  std::vector<ProductSuspendedElement> fibres(A.size());
  const int N = (int)A[0].rows();
  for (size_t p = 0; p < A.size(); ++p) {
    fibres[p].poly_coeffs = {A[p], kI * Matrix::Identity(N, N)};
    if (!q.empty()) fibres[p].schwartz_part = q[p];
  }
  return make_eval_family(dom, std::move(fibres));
}

EvalFamily pointwise_inverse(const EvalFamily& f) {
  EvalFamily out;
  out.dom = f.dom;
  out.N = f.N;
  for (const auto& fib : f.fibres) {
    Fiber g;
    g.value = [fib](double tau) {
      Matrix v = fib.value(tau);
      return Matrix(v.partialPivLu().solve(
          Matrix::Identity(v.rows(), v.cols())));
    };
    g.dtau = [fib](double tau) {
      Matrix v = fib.value(tau);
      Matrix inv = v.partialPivLu().solve(Matrix::Identity(v.rows(), v.cols()));
      return Matrix(-inv * fib.dtau(tau) * inv);
    };
    out.fibres.push_back(std::move(g));
  }
  return out;
}

EvalFamily pointwise_product(const EvalFamily& f, const EvalFamily& g) {
  require(f.dom == g.dom, "pointwise_product: domain mismatch");
  EvalFamily out;
  out.dom = f.dom;
  out.N = f.N;
  for (size_t p = 0; p < f.fibres.size(); ++p) {
    const Fiber& a = f.fibres[p];
    const Fiber& b = g.fibres[p];
    Fiber h;
    h.value = [a, b](double tau) { return Matrix(a.value(tau) * b.value(tau)); };
    h.dtau = [a, b](double tau) {
      return Matrix(a.dtau(tau) * b.value(tau) + a.value(tau) * b.dtau(tau));
    };
    out.fibres.push_back(std::move(h));
  }
  return out;
}

namespace {

Complex s3_sum(const Matrix& k0, const Matrix& k1, const Matrix& k2) {
  return (k0 * k1 * k2).trace() + (k1 * k2 * k0).trace() +
         (k2 * k0 * k1).trace() - (k0 * k2 * k1).trace() -
         (k2 * k1 * k0).trace() - (k1 * k0 * k2).trace();
}

// central / one-sided y-derivative of the fibre value at fixed tau
Matrix fd_dir(const EvalFamily& f, int p, int axis, double tau) {
  const double h = f.dom.axes[axis].step();
  const int ip = f.dom.shift(p, axis, 1);
  const int im = f.dom.shift(p, axis, -1);
  if (ip >= 0 && im >= 0)
    return (f.fibres[ip].value(tau) - f.fibres[im].value(tau)) / (2 * h);
  if (ip >= 0) {
    const int ipp = f.dom.shift(p, axis, 2);
    return (-3.0 * f.fibres[p].value(tau) + 4.0 * f.fibres[ip].value(tau) -
            f.fibres[ipp].value(tau)) /
           (2 * h);
  }
  const int imm = f.dom.shift(p, axis, -2);
  return (3.0 * f.fibres[p].value(tau) - 4.0 * f.fibres[im].value(tau) +
          f.fibres[imm].value(tau)) /
         (2 * h);
}

}  // namespace

EtaValue family_eta(const EvalFamily& f, const RegularizedTraceConfig& cfg) {
  const int d = f.dom.dim();
  const int P = f.dom.size();
  const Complex c0 = chern::chern_coefficient(0);
  const Complex c1 = chern::chern_coefficient(1);

  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) pairs.emplace_back(i, j);
  const int n_comp = 1 + (int)pairs.size();

  EtaValue out;
  out.dom = f.dom;
  out.eta0.resize(P);
  if (d >= 2) out.forms.push_back(FormField::zero(2, f.dom));

  for (int p = 0; p < P; ++p) {
    auto F = [&](double tau, std::vector<Complex>& val) {
      Matrix a = f.fibres[p].value(tau);
      Eigen::PartialPivLU<Matrix> lu(a);
      Matrix kt = lu.solve(f.fibres[p].dtau(tau));
      val[0] = c0 * kt.trace();
      if (!pairs.empty()) {
        std::vector<Matrix> ky(d);
        for (int i = 0; i < d; ++i) ky[i] = lu.solve(fd_dir(f, p, i, tau));
        for (size_t q = 0; q < pairs.size(); ++q)
          val[1 + q] =
              c1 * s3_sum(kt, ky[pairs[q].first], ky[pairs[q].second]);
      }
    };
    auto res = regularized_trace_multi(F, n_comp, cfg);
    out.eta0[p] = res[0];
    for (size_t q = 0; q < pairs.size(); ++q)
      out.forms[0].comps[q][p] = res[1 + q];
  }
  return out;
}

std::vector<Complex> tau_invariant(const EvalFamily& f,
                                   const RegularizedTraceConfig& cfg) {
  EtaValue e = family_eta(f, cfg);
  std::vector<Complex> out(e.eta0.size());
  for (size_t p = 0; p < out.size(); ++p)
    out[p] = std::exp(kTwoPiI * e.eta0[p]);
  return out;
}

double eta_inverse_check(const EvalFamily& f,
                         const RegularizedTraceConfig& cfg) {
  EtaValue ea = family_eta(f, cfg);
  EtaValue eb = family_eta(pointwise_inverse(f), cfg);
  double r = 0;
  for (size_t p = 0; p < ea.eta0.size(); ++p)
    r = std::max(r, std::abs(ea.eta0[p] + eb.eta0[p]));
  for (size_t k = 0; k < ea.forms.size(); ++k)
    r = std::max(r, (ea.forms[k] + eb.forms[k]).norm_inf());
  return r;
}

MultiplicativityReport eta_multiplicativity_check(
    const EvalFamily& a, const EvalFamily& b, const suspend::GridPtr& grid,
    const RegularizedTraceConfig& cfg) {
  require(a.dom == b.dom, "eta_multiplicativity_check: domain mismatch");
  const int P = a.dom.size();
  EtaValue ea = family_eta(a, cfg);
  EtaValue eb = family_eta(b, cfg);

  MultiplicativityReport rep{0, 0, 0};
  std::vector<Complex> wfield(P);
  for (int p = 0; p < P; ++p) {
    // quotient loop s = b a^-1, Schwartz by assumption
    std::vector<Matrix> s(grid->n());
    for (int j = 0; j < grid->n(); ++j) {
      Matrix av = a.fibres[p].value(grid->node(j));
      Matrix bv = b.fibres[p].value(grid->node(j));
      s[j] = av.transpose()
                 .partialPivLu()
                 .solve(bv.transpose())
                 .transpose();  // b a^-1
    }
    std::vector<Matrix> pert(grid->n());
    for (int j = 0; j < grid->n(); ++j)
      pert[j] = s[j] - Matrix::Identity(a.N, a.N);
    auto ds = grid->tau_derivative(pert);
    Complex w = 0;
    for (int j = 0; j < grid->n(); ++j)
      w += grid->weights()[j] * s[j].partialPivLu().solve(ds[j]).trace();
    w /= kTwoPiI;
    wfield[p] = w;
    rep.winding_integrality = std::max(
        rep.winding_integrality, std::abs(w.real() - std::round(w.real())));
    rep.shift_residual =
        std::max(rep.shift_residual,
                 std::abs(eb.eta0[p] - ea.eta0[p] - std::round(w.real())));
  }
  for (int axis = 0; axis < a.dom.dim(); ++axis) {
    auto dea = chern::field_derivative(a.dom, ea.eta0, axis);
    auto deb = chern::field_derivative(a.dom, eb.eta0, axis);
    for (int p = 0; p < P; ++p)
      rep.deta_residual =
          std::max(rep.deta_residual, std::abs(dea[p] - deb[p]));
  }
  return rep;
}

EtaValue universal_eta(const HalfOpenFamily& f) {
  auto ff = chern::tau_pushforward(f);
  EtaValue out;
  out.dom = f.dom;
  out.eta0 = ff[0].comps[0];
  if (ff.size() > 1) out.forms.push_back(ff[1]);
  return out;
}

std::pair<Complex, Complex> fredholm_relation_check(const HalfOpenElement& a) {
  const auto& grid = *a.grid;
  const int N = a.dim();
  const Matrix id = Matrix::Identity(N, N);
  Complex eta0 = 0;
  for (int j = 0; j < grid.n(); ++j)
    eta0 += grid.weights()[j] * Matrix(id + a.samples[j])
                                    .partialPivLu()
                                    .solve(a.derivative[j])
                                    .trace();
  eta0 /= kTwoPiI;
  Complex det = Matrix(id + a.limit_perturbation).determinant();
  return {std::exp(kTwoPiI * eta0), det};
}

}  // namespace etalab::eta
