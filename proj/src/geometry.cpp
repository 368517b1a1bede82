//! \file geometry.cpp
//  \brief Exact backgrounds, constraint residuals, mass aspect.

#include "dnull/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace dnull {

RicciSet RicciSet::zero(const GridSpec& g) {
  RicciSet rs;
  rs.chi_hat = SpinField(2, g);
  rs.tr_chi = SpinField(0, g);
  rs.chib_hat = SpinField(2, g);
  rs.tr_chib = SpinField(0, g);
  rs.zeta = SpinField(1, g);
  rs.eta = SpinField(1, g);
  rs.etab = SpinField(1, g);
  rs.omega = SpinField(0, g);
  rs.omegab = SpinField(0, g);
  return rs;
}

CurvatureSet CurvatureSet::zero(const GridSpec& g) {
  CurvatureSet cs;
  cs.alpha = SpinField(2, g);
  cs.beta = SpinField(1, g);
  cs.rho = SpinField(0, g);
  cs.sigma = SpinField(0, g);
  cs.betab = SpinField(1, g);
  cs.alphab = SpinField(2, g);
  return cs;
}

double schwarzschild_radius(double M, double rstar) {
  if (M <= 0.0) return rstar;
  // Newton on f(r) = r + 2M log(r/2M - 1) - rstar, f'(r) = r/(r - 2M).
  double r = rstar > 4.0 * M ? rstar
                             : 2.0 * M * (1.0 + std::exp(rstar / (2.0 * M) - 1.0));
  for (int it = 0; it < 200; ++it) {
    double f = r + 2.0 * M * std::log(r / (2.0 * M) - 1.0) - rstar;
    double step = f * (r - 2.0 * M) / r;
    // Keep the iterate in the exterior; plain Newton can overshoot when the
    // starting guess sits close to the horizon.
    double next = r - step;
    if (next <= 2.0 * M) next = 0.5 * (r + 2.0 * M);
    r = next;
    if (std::abs(step) < 1e-12 * (1.0 + std::abs(r))) break;
  }
  if (!(r > 2.0 * M))
    throw std::domain_error("schwarzschild_radius: left the exterior region");
  return r;
}

SphereSlice exact_background(BackgroundKind kind, double M, double u,
                             double ubar, const GridSpec& grid) {
  const bool flat = (kind == BackgroundKind::minkowski) || M == 0.0;
  double r;
  if (flat) {
    r = 0.5 * (ubar - u);
    if (!(r > 0.0))
      throw std::domain_error("exact_background: nonpositive radius");
  } else {
    r = schwarzschild_radius(M, 0.5 * (ubar - u));
  }

  GridSpec g = grid;
  g.r = r;

  SphereSlice s;
  s.u = u;
  s.ubar = ubar;
  s.r = r;
  s.grid = g;
  s.shift_b = SpinField(1, g);
  s.ricci = RicciSet::zero(g);
  s.curv = CurvatureSet::zero(g);

  const double kappa = flat ? 1.0 : std::sqrt(1.0 - 2.0 * M / r);
  s.Omega = constant_field(0.5 * kappa, g);
  s.ricci.tr_chi = constant_field(2.0 * kappa / r, g);
  s.ricci.tr_chib = constant_field(-2.0 * kappa / r, g);
  if (!flat) {
    s.ricci.omega = constant_field(-M / (2.0 * r * r * kappa), g);
    s.ricci.omegab = constant_field(M / (2.0 * r * r * kappa), g);
    s.curv.rho = constant_field(-2.0 * M / (r * r * r), g);
  }
  return s;
}

namespace {

// log of a positive real scalar field, evaluated pointwise on the padded
// grid and re-projected.
SpinField log_field(const SpinField& f) {
  GridSpec pad = padded_for_products(f.grid());
  GridValues v = synthesize(f, pad);
  for (int j = 0; j < pad.n_theta; ++j)
    for (int k = 0; k < pad.n_phi; ++k) v(j, k) = std::log(v(j, k).real());
  return truncated(analyze(0, v, pad), f.grid());
}

}  // namespace

ConstraintResiduals constraint_residuals(const SphereSlice& s) {
  const RicciSet& rc = s.ricci;
  const CurvatureSet& cv = s.curv;

  ConstraintResiduals out;

  SpinField gauss = gauss_curvature_flat(s.grid);
  gauss.axpy(0.25, multiply(rc.tr_chi, rc.tr_chib));
  gauss.axpy(-0.5, dot22(rc.chib_hat, rc.chi_hat));
  gauss += cv.rho;
  out.gauss = lp_norm(2, gauss);

  SpinField cod_out = d2(rc.chi_hat);
  cod_out.axpy(-0.5, grad(rc.tr_chi));
  cod_out += dot12(rc.zeta, rc.chi_hat);
  cod_out.axpy(-0.5, multiply(rc.tr_chi, rc.zeta));
  cod_out += cv.beta;
  out.codazzi_out = lp_norm(2, cod_out);

  SpinField cod_in = d2(rc.chib_hat);
  cod_in.axpy(-0.5, grad(rc.tr_chib));
  cod_in -= dot12(rc.zeta, rc.chib_hat);
  cod_in.axpy(0.5, multiply(rc.tr_chib, rc.zeta));
  cod_in -= cv.betab;
  out.codazzi_in = lp_norm(2, cod_in);

  SpinField tors = imag_part(d1(rc.eta));
  tors -= cv.sigma;
  tors.axpy(-0.5, wedge22(rc.chib_hat, rc.chi_hat));
  out.torsion = lp_norm(2, tors);

  SpinField dlog = grad(log_field(s.Omega));
  SpinField lap_out = rc.eta - rc.zeta - dlog;
  SpinField lap_in = rc.etab + rc.zeta - dlog;
  out.lapse = lp_norm(2, lap_out) + lp_norm(2, lap_in);

  return out;
}

MassAspect mass_aspect(const SphereSlice& s) {
  const RicciSet& rc = s.ricci;
  const CurvatureSet& cv = s.curv;

  MassAspect ma;
  ma.mu = real_part(d1(rc.eta));
  ma.mu *= -1.0;
  ma.mu.axpy(0.5, dot22(rc.chi_hat, rc.chib_hat));
  ma.mu -= cv.rho;

  ma.mub = real_part(d1(rc.etab));
  ma.mub *= -1.0;
  ma.mub.axpy(0.5, dot22(rc.chi_hat, rc.chib_hat));
  ma.mub -= cv.rho;

  SpinField quart = multiply(rc.tr_chi, rc.tr_chib);
  ma.mu_bracket = ma.mu;
  ma.mu_bracket.axpy(0.25, quart);
  ma.mub_bracket = ma.mub;
  ma.mub_bracket.axpy(0.25, quart);

  auto checked = [](const SpinField& f) { return average_split(f).checked; };
  ma.mu_check = checked(ma.mu);
  ma.mub_check = checked(ma.mub);
  return ma;
}

double area_radius(const SphereSlice& s) {
  const QuadratureRule& q = gauss_legendre(s.grid.n_theta);
  double solid = 0.0;
  for (int j = 0; j < s.grid.n_theta; ++j) solid += q.w[j];
  solid *= 2.0 * M_PI;  // longitude integral of 1
  double area = s.grid.r * s.grid.r * solid;
  return std::sqrt(area / (4.0 * M_PI));
}

SpinField gauss_curvature_flat(const GridSpec& grid) {
  return constant_field(1.0 / (grid.r * grid.r), grid);
}

}  // namespace dnull
