//! \file dynamics.cpp
//  \brief Right-hand side assembly for the coupled transport systems.

#include "dnull/dynamics.hpp"

#include <cmath>
#include <stdexcept>

#include "dnull/sphere_ops.hpp"

namespace dnull {

namespace {

// Product helpers. In linearized mode a bilinear term a*b is replaced by
// a0*b + b0*a - a0*b0 with angle-constant background values a0, b0; terms
// whose factors are both background-free drop out entirely.

struct Ctx {
  bool lin = false;
  BackgroundValues bg;
};

// scalar x scalar, both carrying background values
SpinField ss(const Ctx& c, const SpinField& a, double a0, const SpinField& b,
             double b0) {
  if (!c.lin) return multiply(a, b);
  SpinField out = b;
  out *= a0;
  out.axpy(b0, a);
  out += constant_field(-a0 * b0, a.grid());
  return out;
}

// scalar with background x background-free factor (any spin)
SpinField st(const Ctx& c, const SpinField& s, double s0, const SpinField& x) {
  if (!c.lin) return multiply(s, x);
  SpinField out = x;
  out *= s0;
  return out;
}

// contraction of a one-form into a full 2-tensor chi = chi_hat + (tr/2) g
SpinField full_contract(const Ctx& c, const SpinField& xi,
                        const SpinField& hat, const SpinField& tr,
                        double tr0) {
  SpinField out = st(c, tr, tr0, xi);
  out *= 0.5;
  if (!c.lin) out += dot12(xi, hat);
  return out;
}

RicciSet ricci_rhs_e4(const SphereSlice& s, const Ctx& c) {
  const RicciSet& R = s.ricci;
  const CurvatureSet& W = s.curv;
  const GridSpec& g = s.grid;
  RicciSet out = RicciSet::zero(g);
  const BackgroundValues& b = c.bg;

  SpinField eta_diff = R.eta;
  eta_diff -= R.etab;

  // eta: minus the contraction of (eta - etab) into chi, minus beta
  {
    SpinField rhs = full_contract(c, eta_diff, R.chi_hat, R.tr_chi, b.tr_chi);
    rhs *= -1.0;
    rhs -= W.beta;
    out.eta = rhs;
  }
  // chi_hat: -(tr chi) chi_hat - 2 omega chi_hat - alpha
  {
    SpinField rhs = st(c, R.tr_chi, b.tr_chi, R.chi_hat);
    rhs.axpy(2.0, st(c, R.omega, b.omega, R.chi_hat));
    rhs *= -1.0;
    rhs -= W.alpha;
    out.chi_hat = rhs;
  }
  // tr chi: -(1/2)(tr chi)^2 - |chi_hat|^2 - 2 omega tr chi
  {
    SpinField rhs = ss(c, R.tr_chi, b.tr_chi, R.tr_chi, b.tr_chi);
    rhs *= -0.5;
    rhs.axpy(-2.0, ss(c, R.omega, b.omega, R.tr_chi, b.tr_chi));
    if (!c.lin) rhs -= dot22(R.chi_hat, R.chi_hat);
    out.tr_chi = rhs;
  }
  // chib_hat: -(1/2) tr chi chib_hat + grad-hat etab + 2 omega chib_hat
  //           - (1/2) tr chib chi_hat + etab (x) etab
  {
    SpinField rhs = st(c, R.tr_chi, b.tr_chi, R.chib_hat);
    rhs *= -0.5;
    rhs.axpy(-2.0, d2_star(R.etab));
    rhs.axpy(2.0, st(c, R.omega, b.omega, R.chib_hat));
    rhs.axpy(-0.5, st(c, R.tr_chib, b.tr_chib, R.chi_hat));
    if (!c.lin) rhs += hat_otimes(R.etab, R.etab);
    out.chib_hat = rhs;
  }
  // tr chib: -(1/2) tr chi tr chib + 2 omega tr chib + 2 rho
  //          - chi_hat . chib_hat + 2 div etab + 2 |etab|^2
  {
    SpinField rhs = ss(c, R.tr_chi, b.tr_chi, R.tr_chib, b.tr_chib);
    rhs *= -0.5;
    rhs.axpy(2.0, ss(c, R.omega, b.omega, R.tr_chib, b.tr_chib));
    rhs.axpy(2.0, W.rho);
    rhs.axpy(2.0, real_part(d1(R.etab)));
    if (!c.lin) {
      rhs -= dot22(R.chi_hat, R.chib_hat);
      rhs.axpy(2.0, dot11(R.etab, R.etab));
    }
    out.tr_chib = rhs;
  }
  // omegab: 2 omega omegab + (3/4)|eta - etab|^2
  //         - (1/4)(eta - etab).(eta + etab) - (1/8)|eta + etab|^2 + rho/2
  {
    SpinField rhs = ss(c, R.omega, b.omega, R.omegab, b.omegab);
    rhs *= 2.0;
    rhs.axpy(0.5, W.rho);
    if (!c.lin) {
      SpinField eta_sum = R.eta;
      eta_sum += R.etab;
      rhs.axpy(0.75, dot11(eta_diff, eta_diff));
      rhs.axpy(-0.25, dot11(eta_diff, eta_sum));
      rhs.axpy(-0.125, dot11(eta_sum, eta_sum));
    }
    out.omegab = rhs;
  }
  return out;
}

RicciSet ricci_rhs_e3(const SphereSlice& s, const Ctx& c) {
  const RicciSet& R = s.ricci;
  const CurvatureSet& W = s.curv;
  const GridSpec& g = s.grid;
  RicciSet out = RicciSet::zero(g);
  const BackgroundValues& b = c.bg;

  SpinField etab_diff = R.etab;
  etab_diff -= R.eta;

  // etab: minus the contraction of (etab - eta) into chib, plus betab
  {
    SpinField rhs =
        full_contract(c, etab_diff, R.chib_hat, R.tr_chib, b.tr_chib);
    rhs *= -1.0;
    rhs += W.betab;
    out.etab = rhs;
  }
  // chib_hat: -(tr chib) chib_hat - 2 omegab chib_hat - alphab
  {
    SpinField rhs = st(c, R.tr_chib, b.tr_chib, R.chib_hat);
    rhs.axpy(2.0, st(c, R.omegab, b.omegab, R.chib_hat));
    rhs *= -1.0;
    rhs -= W.alphab;
    out.chib_hat = rhs;
  }
  // tr chib: -(1/2)(tr chib)^2 - |chib_hat|^2 - 2 omegab tr chib
  {
    SpinField rhs = ss(c, R.tr_chib, b.tr_chib, R.tr_chib, b.tr_chib);
    rhs *= -0.5;
    rhs.axpy(-2.0, ss(c, R.omegab, b.omegab, R.tr_chib, b.tr_chib));
    if (!c.lin) rhs -= dot22(R.chib_hat, R.chib_hat);
    out.tr_chib = rhs;
  }
  // chi_hat: -(1/2) tr chib chi_hat + grad-hat eta + 2 omegab chi_hat
  //          - (1/2) tr chi chib_hat + eta (x) eta
  {
    SpinField rhs = st(c, R.tr_chib, b.tr_chib, R.chi_hat);
    rhs *= -0.5;
    rhs.axpy(-2.0, d2_star(R.eta));
    rhs.axpy(2.0, st(c, R.omegab, b.omegab, R.chi_hat));
    rhs.axpy(-0.5, st(c, R.tr_chi, b.tr_chi, R.chib_hat));
    if (!c.lin) rhs += hat_otimes(R.eta, R.eta);
    out.chi_hat = rhs;
  }
  // tr chi: -(1/2) tr chib tr chi + 2 omegab tr chi + 2 rho
  //         - chi_hat . chib_hat + 2 div eta + 2 |eta|^2
  {
    SpinField rhs = ss(c, R.tr_chib, b.tr_chib, R.tr_chi, b.tr_chi);
    rhs *= -0.5;
    rhs.axpy(2.0, ss(c, R.omegab, b.omegab, R.tr_chi, b.tr_chi));
    rhs.axpy(2.0, W.rho);
    rhs.axpy(2.0, real_part(d1(R.eta)));
    if (!c.lin) {
      rhs -= dot22(R.chi_hat, R.chib_hat);
      rhs.axpy(2.0, dot11(R.eta, R.eta));
    }
    out.tr_chi = rhs;
  }
  // omega: 2 omega omegab + (3/4)|eta - etab|^2
  //        + (1/4)(eta - etab).(eta + etab) - (1/8)|eta + etab|^2 + rho/2
  {
    SpinField rhs = ss(c, R.omega, b.omega, R.omegab, b.omegab);
    rhs *= 2.0;
    rhs.axpy(0.5, W.rho);
    if (!c.lin) {
      SpinField eta_diff = R.eta;
      eta_diff -= R.etab;
      SpinField eta_sum = R.eta;
      eta_sum += R.etab;
      rhs.axpy(0.75, dot11(eta_diff, eta_diff));
      rhs.axpy(0.25, dot11(eta_diff, eta_sum));
      rhs.axpy(-0.125, dot11(eta_sum, eta_sum));
    }
    out.omega = rhs;
  }
  return out;
}

SpinField zeta_of(const SphereSlice& s) {
  SpinField z = s.ricci.eta;
  z -= s.ricci.etab;
  z *= 0.5;
  return z;
}

CurvatureSet curv_rhs_e4(const SphereSlice& s, const Ctx& c) {
  const RicciSet& R = s.ricci;
  const CurvatureSet& W = s.curv;
  const GridSpec& g = s.grid;
  CurvatureSet out = CurvatureSet::zero(g);
  const BackgroundValues& b = c.bg;
  SpinField zeta = zeta_of(s);
  SpinField rho_check = average_split(W.rho).checked;

  // beta: -2 tr chi beta + div alpha - 2 omega beta + (2 zeta + etab).alpha
  {
    SpinField rhs = st(c, R.tr_chi, b.tr_chi, W.beta);
    rhs *= -2.0;
    rhs += d2(W.alpha);
    rhs.axpy(-2.0, st(c, R.omega, b.omega, W.beta));
    if (!c.lin) {
      SpinField xi = zeta;
      xi *= 2.0;
      xi += R.etab;
      rhs += dot12(xi, W.alpha);
    }
    out.beta = rhs;
  }
  // rho: -(3/2) tr chi rho + div beta - (1/2) chib_hat . alpha
  //      + zeta . beta + 2 etab . beta
  {
    SpinField rhs = ss(c, R.tr_chi, b.tr_chi, W.rho, b.rho_bar);
    rhs *= -1.5;
    rhs += real_part(d1(W.beta));
    if (!c.lin) {
      rhs.axpy(-0.5, dot22(R.chib_hat, W.alpha));
      rhs += dot11(zeta, W.beta);
      rhs.axpy(2.0, dot11(R.etab, W.beta));
    }
    out.rho = rhs;
  }
  // sigma: -(3/2) tr chi sigma - curl beta + (1/2) chib_hat . *alpha
  //        - zeta . *beta - 2 etab . *beta
  {
    SpinField rhs = st(c, R.tr_chi, b.tr_chi, W.sigma);
    rhs *= -1.5;
    rhs -= imag_part(d1(W.beta));
    if (!c.lin) {
      SpinField beta_dual = dual(W.beta);
      rhs.axpy(0.5, dot22(R.chib_hat, dual(W.alpha)));
      rhs -= dot11(zeta, beta_dual);
      rhs.axpy(-2.0, dot11(R.etab, beta_dual));
    }
    out.sigma = rhs;
  }
  // betab: -tr chi betab - grad rho_check + *grad sigma + 2 omega betab
  //        + 2 chib_hat . beta - 3 (etab rho - *etab sigma)
  {
    SpinField rhs = st(c, R.tr_chi, b.tr_chi, W.betab);
    rhs *= -1.0;
    rhs -= grad(rho_check);
    rhs += dual(grad(W.sigma));
    rhs.axpy(2.0, st(c, R.omega, b.omega, W.betab));
    rhs.axpy(-3.0, st(c, W.rho, b.rho_bar, R.etab));
    if (!c.lin) {
      rhs.axpy(2.0, dot12(W.beta, R.chib_hat));
      rhs.axpy(3.0, multiply(W.sigma, dual(R.etab)));
    }
    out.betab = rhs;
  }
  // alphab: -(1/2) tr chi alphab - grad-hat betab + 4 omega alphab
  //         - 3 (chib_hat rho - *chib_hat sigma) + (zeta - 4 etab) (x) betab
  {
    SpinField rhs = st(c, R.tr_chi, b.tr_chi, W.alphab);
    rhs *= -0.5;
    rhs.axpy(2.0, d2_star(W.betab));
    rhs.axpy(4.0, st(c, R.omega, b.omega, W.alphab));
    rhs.axpy(-3.0, st(c, W.rho, b.rho_bar, R.chib_hat));
    if (!c.lin) {
      rhs.axpy(3.0, multiply(W.sigma, dual(R.chib_hat)));
      SpinField xi = zeta;
      xi.axpy(-4.0, R.etab);
      rhs += hat_otimes(xi, W.betab);
    }
    out.alphab = rhs;
  }
  return out;
}

CurvatureSet curv_rhs_e3(const SphereSlice& s, const Ctx& c) {
  const RicciSet& R = s.ricci;
  const CurvatureSet& W = s.curv;
  const GridSpec& g = s.grid;
  CurvatureSet out = CurvatureSet::zero(g);
  const BackgroundValues& b = c.bg;
  SpinField zeta = zeta_of(s);
  SpinField rho_check = average_split(W.rho).checked;

  // alpha: -(1/2) tr chib alpha + grad-hat beta + 4 omegab alpha
  //        - 3 (chi_hat rho + *chi_hat sigma) + (zeta + 4 eta) (x) beta
  {
    SpinField rhs = st(c, R.tr_chib, b.tr_chib, W.alpha);
    rhs *= -0.5;
    rhs.axpy(-2.0, d2_star(W.beta));
    rhs.axpy(4.0, st(c, R.omegab, b.omegab, W.alpha));
    rhs.axpy(-3.0, st(c, W.rho, b.rho_bar, R.chi_hat));
    if (!c.lin) {
      rhs.axpy(-3.0, multiply(W.sigma, dual(R.chi_hat)));
      SpinField xi = zeta;
      xi.axpy(4.0, R.eta);
      rhs += hat_otimes(xi, W.beta);
    }
    out.alpha = rhs;
  }
  // beta: -tr chib beta + grad rho_check + *grad sigma + 2 omegab beta
  //       + 2 chi_hat . betab + 3 (eta rho + *eta sigma)
  {
    SpinField rhs = st(c, R.tr_chib, b.tr_chib, W.beta);
    rhs *= -1.0;
    rhs += grad(rho_check);
    rhs += dual(grad(W.sigma));
    rhs.axpy(2.0, st(c, R.omegab, b.omegab, W.beta));
    rhs.axpy(3.0, st(c, W.rho, b.rho_bar, R.eta));
    if (!c.lin) {
      rhs.axpy(2.0, dot12(W.betab, R.chi_hat));
      rhs.axpy(3.0, multiply(W.sigma, dual(R.eta)));
    }
    out.beta = rhs;
  }
  // rho: -(3/2) tr chib rho - div betab - (1/2) chi_hat . alphab
  //      + zeta . betab - 2 eta . betab
  {
    SpinField rhs = ss(c, R.tr_chib, b.tr_chib, W.rho, b.rho_bar);
    rhs *= -1.5;
    rhs -= real_part(d1(W.betab));
    if (!c.lin) {
      rhs.axpy(-0.5, dot22(R.chi_hat, W.alphab));
      rhs += dot11(zeta, W.betab);
      rhs.axpy(-2.0, dot11(R.eta, W.betab));
    }
    out.rho = rhs;
  }
  // sigma: -(3/2) tr chib sigma - curl betab + (1/2) chi_hat . *alphab
  //        - zeta . *betab + 2 eta . *betab
  {
    SpinField rhs = st(c, R.tr_chib, b.tr_chib, W.sigma);
    rhs *= -1.5;
    rhs -= imag_part(d1(W.betab));
    if (!c.lin) {
      SpinField betab_dual = dual(W.betab);
      rhs.axpy(0.5, dot22(R.chi_hat, dual(W.alphab)));
      rhs -= dot11(zeta, betab_dual);
      rhs.axpy(2.0, dot11(R.eta, betab_dual));
    }
    out.sigma = rhs;
  }
  // betab: -2 tr chib betab - div alphab - 2 omegab betab + (2 zeta - eta).alphab
  {
    SpinField rhs = st(c, R.tr_chib, b.tr_chib, W.betab);
    rhs *= -2.0;
    rhs -= d2(W.alphab);
    rhs.axpy(-2.0, st(c, R.omegab, b.omegab, W.betab));
    if (!c.lin) {
      SpinField xi = zeta;
      xi *= 2.0;
      xi -= R.eta;
      rhs += dot12(xi, W.alphab);
    }
    out.betab = rhs;
  }
  return out;
}

}  // namespace

BackgroundValues background_at(BackgroundKind kind, double M, double u,
                               double ubar) {
  BackgroundValues b;
  if (kind == BackgroundKind::minkowski || M == 0.0) {
    double r = 0.5 * (ubar - u);
    if (!(r > 0.0))
      throw std::domain_error("background_at: ubar must exceed u");
    b.r = r;
    b.Omega = 0.5;
    b.tr_chi = 2.0 / r;
    b.tr_chib = -2.0 / r;
    b.omega = 0.0;
    b.omegab = 0.0;
    b.rho_bar = 0.0;
    b.e4_r = 1.0;
    b.e3_r = -1.0;
    return b;
  }
  double rstar = 0.5 * (ubar - u);
  double r = schwarzschild_radius(M, rstar);
  double kappa = std::sqrt(1.0 - 2.0 * M / r);
  b.r = r;
  b.Omega = 0.5 * kappa;
  b.tr_chi = 2.0 * kappa / r;
  b.tr_chib = -2.0 * kappa / r;
  b.omega = -M / (2.0 * r * r * kappa);
  b.omegab = M / (2.0 * r * r * kappa);
  b.rho_bar = -2.0 * M / (r * r * r);
  b.e4_r = kappa;
  b.e3_r = -kappa;
  return b;
}

RicciSet null_structure_rhs(Direction dir, const SphereSlice& slice,
                            Nonlinearity mode, const BackgroundValues* bg) {
  Ctx c;
  c.lin = (mode == Nonlinearity::linearized);
  if (c.lin) {
    if (bg == nullptr)
      throw std::invalid_argument(
          "null_structure_rhs: linearized mode needs background values");
    c.bg = *bg;
  }
  return dir == Direction::e4 ? ricci_rhs_e4(slice, c)
                              : ricci_rhs_e3(slice, c);
}

CurvatureSet bianchi_rhs(Direction dir, const SphereSlice& slice,
                         Nonlinearity mode, const BackgroundValues* bg) {
  Ctx c;
  c.lin = (mode == Nonlinearity::linearized);
  if (c.lin) {
    if (bg == nullptr)
      throw std::invalid_argument(
          "bianchi_rhs: linearized mode needs background values");
    c.bg = *bg;
  }
  return dir == Direction::e4 ? curv_rhs_e4(slice, c) : curv_rhs_e3(slice, c);
}

RhoSplitRhs rho_split_rhs(Direction dir, const SphereSlice& slice,
                          Nonlinearity mode, const BackgroundValues* bg) {
  CurvatureSet full = bianchi_rhs(dir, slice, mode, bg);
  return rho_split_from(dir, slice, full.rho, mode, bg);
}

RhoSplitRhs rho_split_from(Direction dir, const SphereSlice& slice,
                           const SpinField& nabla_rho, Nonlinearity mode,
                           const BackgroundValues* bg) {
  bool lin = (mode == Nonlinearity::linearized);
  if (lin && bg == nullptr)
    throw std::invalid_argument(
        "rho_split_from: linearized mode needs background values");

  // coordinate-time derivative of the sphere average: the average of
  // Omega * (nabla rho) plus the correlation of the checked expansion with
  // the checked rho
  double bar_dot;
  SpinField omega_nabla(0, slice.grid);
  if (lin) {
    // Taylor expansion of Omega * (nabla rho) about the background, whose
    // own rate need not vanish
    double tr0 = dir == Direction::e4 ? bg->tr_chi : bg->tr_chib;
    double rate0 = -1.5 * tr0 * bg->rho_bar;
    omega_nabla = nabla_rho;
    omega_nabla *= bg->Omega;
    omega_nabla.axpy(rate0, slice.Omega);
    omega_nabla += constant_field(-rate0 * bg->Omega, slice.grid);
    bar_dot = omega_nabla.mean().real();
  } else {
    omega_nabla = multiply(slice.Omega, nabla_rho);
    const SpinField& tr =
        dir == Direction::e4 ? slice.ricci.tr_chi : slice.ricci.tr_chib;
    SpinField omega_tr_check = average_split(multiply(slice.Omega, tr)).checked;
    SpinField rho_check = average_split(slice.curv.rho).checked;
    bar_dot = omega_nabla.mean().real() +
              multiply(omega_tr_check, rho_check).mean().real();
  }

  RhoSplitRhs out;
  out.bar = bar_dot;
  out.check = omega_nabla;
  out.check += constant_field(-bar_dot, slice.grid);
  return out;
}

SpinField lin_product(const SpinField& a, double a0, const SpinField& b,
                      double b0, Nonlinearity mode) {
  if (mode == Nonlinearity::full) return multiply(a, b);
  SpinField out = b;
  out *= a0;
  out.axpy(b0, a);
  if (a0 * b0 != 0.0) out += constant_field(-a0 * b0, a.grid());
  return out;
}

}  // namespace dnull
