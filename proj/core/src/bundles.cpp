#include "etalab/bundles.hpp"

#include <cmath>

namespace etalab::bundles {

void OddFamily::validate(double herm_tol) const {
  require((int)A.size() == base.size(), "OddFamily: field size");
  require(grid != nullptr, "OddFamily: tau grid required");
  for (const auto& m : A)
    require((m - m.adjoint()).cwiseAbs().maxCoeff() <= herm_tol,
            "OddFamily: non-Hermitian block");
}

double OddFamily::ellipticity_witness() const {
  const int N = dim();
  const Matrix id = Matrix::Identity(N, N);
  double w = std::numeric_limits<double>::infinity();
  for (const auto& m : A)
    for (int j : {0, grid->n() - 1})
      w = std::min(w, opcore::smallest_singular_value(
                          Matrix(m + kI * grid->node(j) * id)));
  return w;
}

namespace {

double section_margin(const OddFamily& F, const std::vector<SuspendedElement>& q) {
  const int N = F.dim();
  const Matrix id = Matrix::Identity(N, N);
  double m = std::numeric_limits<double>::infinity();
  for (int p = 0; p < F.base.size(); ++p)
    for (int j = 0; j < F.grid->n(); ++j)
      m = std::min(m, opcore::smallest_singular_value(Matrix(
                          F.A[p] + kI * F.grid->node(j) * id + q[p].samples[j])));
  return m;
}

}  // namespace

void PerturbationSection::recompute_margin(const OddFamily& F) {
  margin = section_margin(F, q);
}

PerturbationSection make_invertible_perturbation(const OddFamily& F,
                                                 std::uint64_t seed) {
  F.validate();
  const int N = F.dim();
  const int P = F.base.size();
  const int nt = F.grid->n();
  const Matrix id = Matrix::Identity(N, N);
  const double target = 0.05;

  // near-kernel completion per gridpoint; the gaussian eigenvalue weight
  // keeps the section smooth along the base (a hard threshold would jump
  // where an eigenvalue crosses it)
  std::vector<Matrix> proj(P, Matrix::Zero(N, N));
  for (int p = 0; p < P; ++p) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(F.A[p]);
    for (int k = 0; k < N; ++k) {
      const double l = es.eigenvalues()(k) / (3 * target);
      proj[p] += std::exp(-l * l) * es.eigenvectors().col(k) *
                 es.eigenvectors().col(k).adjoint();
    }
  }

  double c = 0.1;
  std::vector<SuspendedElement> q(P);
  for (int attempt = 0; attempt < 12; ++attempt) {
    for (int p = 0; p < P; ++p) {
      q[p].grid = F.grid;
      q[p].samples.resize(nt);
      for (int j = 0; j < nt; ++j) {
        const double tau = F.grid->node(j);
        q[p].samples[j] = c * std::exp(-tau * tau) * proj[p];
      }
    }
    if (section_margin(F, q) > target) break;
    c *= 2.0;
    require(attempt + 1 < 12,
            "make_invertible_perturbation: growth budget exhausted");
  }

  // seed-dependent Schwartz jitter, smooth along the base and kept small
  // enough to preserve the margin
  Rng rng(seed, "perturbation-section");
  double amp = 0.2 * target;
  for (int shrink = 0; shrink < 8; ++shrink) {
    std::vector<SuspendedElement> jq = q;
    Rng local = rng;
    for (int k = 0; k < 2; ++k) {
      Matrix jm = local.hermitian(N, amp);
      const double w = 0.5 + local.uniform(0.0, 1.0);
      std::vector<double> phase(F.base.dim());
      for (auto& ph : phase) ph = local.uniform(0.0, 2 * kPi);
      for (int p = 0; p < P; ++p) {
        double cy = 1.0;
        for (int axis = 0; axis < F.base.dim(); ++axis)
          cy *= std::cos(F.base.coord(p, axis) + phase[axis]);
        for (int j = 0; j < nt; ++j) {
          const double tau = F.grid->node(j);
          jq[p].samples[j] += cy * std::exp(-w * tau * tau) * jm;
        }
      }
    }
    if (section_margin(F, jq) > 0.5 * target) {
      q = jq;
      break;
    }
    amp *= 0.5;
  }

  PerturbationSection out;
  out.q = std::move(q);
  out.recompute_margin(F);
  require(out.margin > kDefaultMarginFloor,
          "make_invertible_perturbation: margin below floor");
  return out;
}

chern::SuspendedFamily transition(const OddFamily& F,
                                  const PerturbationSection& q1,
                                  const PerturbationSection& q2) {
  const int N = F.dim();
  const int P = F.base.size();
  const Matrix id = Matrix::Identity(N, N);
  chern::SuspendedFamily out;
  out.dom = F.base;
  out.fibres.resize(P);
  for (int p = 0; p < P; ++p) {
    out.fibres[p].grid = F.grid;
    out.fibres[p].samples.resize(F.grid->n());
    for (int j = 0; j < F.grid->n(); ++j) {
      Matrix a2 = F.A[p] + kI * F.grid->node(j) * id + q2.q[p].samples[j];
      Matrix num = q1.q[p].samples[j] - q2.q[p].samples[j];
      // (a + q1)(a + q2)^-1 - Id = (q1 - q2)(a + q2)^-1
      out.fibres[p].samples[j] =
          a2.transpose().partialPivLu().solve(Matrix(num.transpose())).transpose();
    }
    out.fibres[p].validate();
  }
  return out;
}

PerturbationSection left_action(const OddFamily& F,
                                const chern::SuspendedFamily& s,
                                const PerturbationSection& q) {
  require(s.dom == F.base, "left_action: domain mismatch");
  const int N = F.dim();
  const int P = F.base.size();
  const Matrix id = Matrix::Identity(N, N);
  PerturbationSection out;
  out.q.resize(P);
  for (int p = 0; p < P; ++p) {
    out.q[p].grid = F.grid;
    out.q[p].samples.resize(F.grid->n());
    for (int j = 0; j < F.grid->n(); ++j) {
      Matrix a = F.A[p] + kI * F.grid->node(j) * id + q.q[p].samples[j];
      out.q[p].samples[j] = s.fibres[p].samples[j] * a + q.q[p].samples[j];
    }
  }
  out.recompute_margin(F);
  require(out.margin > kDefaultMarginFloor, "left_action: margin lost");
  return out;
}

PerturbationSection left_action(const OddFamily& F, const SuspendedElement& s,
                                const PerturbationSection& q) {
  chern::SuspendedFamily fam;
  fam.dom = F.base;
  fam.fibres.assign(F.base.size(), s);
  return left_action(F, fam, q);
}

eta::EvalFamily section_family(const OddFamily& F,
                               const PerturbationSection& q) {
  return eta::hermitian_eval_family(F.base, F.A, q.q);
}

Delooping delooping_section(const OddFamily& F, const PerturbationSection& q,
                            const suspend::PathOptions& opts) {
  const int N = F.dim();
  const int P = F.base.size();
  const Matrix id = Matrix::Identity(N, N);
  Delooping out;
  out.Q.dom = F.base;
  out.Q.fibres.resize(P);
  out.index_section.dom = F.base;
  for (int p = 0; p < P; ++p) {
    // Cayley comparison: smooth in y, unitary, margin-safe
    Matrix g = -(F.A[p] - kI * id) *
               Matrix(F.A[p] + kI * id).partialPivLu().solve(id);
    out.index_section.values.push_back(g);
    out.Q.fibres[p] =
        suspend::make_path(opcore::GroupElement(g - id), F.grid, opts);
  }
  return out;
}

IndexCheck index_theorem_check(const OddFamily& F, std::uint64_t seed,
                               const eta::RegularizedTraceConfig& cfg) {
  require(F.base.dim() == 1 && F.base.axes[0].periodic,
          "index_theorem_check: circle base required");
  PerturbationSection q1 = make_invertible_perturbation(F, seed);
  PerturbationSection q2 = make_invertible_perturbation(F, seed + 1);
  eta::EvalFamily fam1 = section_family(F, q1);
  eta::EvalFamily fam2 = section_family(F, q2);

  // gamma_y integrates an exact tau-derivative, so the truncated integral
  // up to T is the boundary difference of Tr(a^-1 dy a); only the partie
  // finie fit over the truncation radii is needed
  auto loop_integral = [&](const eta::EvalFamily& fam) {
    const int P = fam.dom.size();
    const double h = fam.dom.axes[0].step();
    const int nb = 1 + cfg.neg_powers;
    const int nr = (int)cfg.radii.size();
    Eigen::MatrixXcd M(nr, nb);
    for (int r = 0; r < nr; ++r) {
      M(r, 0) = 1.0;
      for (int j = 1; j <= cfg.neg_powers; ++j)
        M(r, j) = std::pow(cfg.radii[r], -j);
    }
    const auto qr = M.colPivHouseholderQr();
    Complex acc = 0;
    for (int p = 0; p < P; ++p) {
      const int ip = fam.dom.shift(p, 0, 1);
      const int im = fam.dom.shift(p, 0, -1);
      auto Fy = [&](double tau) {
        Matrix a = fam.fibres[p].value(tau);
        Matrix dy =
            (fam.fibres[ip].value(tau) - fam.fibres[im].value(tau)) / (2 * h);
        return a.partialPivLu().solve(dy).trace();
      };
      Eigen::VectorXcd v(nr);
      for (int r = 0; r < nr; ++r)
        v(r) = Fy(cfg.radii[r]) - Fy(-cfg.radii[r]);
      acc += h * qr.solve(v)(0) / kTwoPiI;
    }
    return acc;
  };

  IndexCheck out{};
  Complex lhs1 = loop_integral(fam1);
  Complex lhs2 = loop_integral(fam2);
  out.lhs = lhs1.real();
  out.basicness = std::abs(lhs1 - lhs2);

  Delooping d = delooping_section(F, q1);
  out.rhs = -chern::winding_number(d.index_section);

  auto tau_field = eta::tau_invariant(fam1, cfg);
  double wind = 0;
  for (size_t p = 0; p < tau_field.size(); ++p) {
    Complex r = tau_field[(p + 1) % tau_field.size()] / tau_field[p];
    wind += std::arg(r);
  }
  out.tau_winding = wind / (2 * kPi);
  return out;
}

}  // namespace etalab::bundles
