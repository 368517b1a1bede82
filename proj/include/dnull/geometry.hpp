//! \file geometry.hpp
//  \brief Foliation-sphere state: connection coefficients, curvature
//         components, exact backgrounds, constraint residuals, mass aspect.

#ifndef DNULL_GEOMETRY_HPP_
#define DNULL_GEOMETRY_HPP_

#include <vector>

#include "dnull/sphere_ops.hpp"

namespace dnull {

// Null decomposition of the connection on a foliation sphere. The double
// null gauge kills both null second fundamental forms along the generators
// (xi and its conjugate vanish identically), so they are not stored.
struct RicciSet {
  SpinField chi_hat;    // outgoing shear, spin 2
  SpinField tr_chi;     // outgoing expansion, spin 0
  SpinField chib_hat;   // incoming shear, spin 2
  SpinField tr_chib;    // incoming expansion, spin 0
  SpinField zeta;       // torsion one-form, spin 1
  SpinField eta;        // outgoing Ricci one-form, spin 1
  SpinField etab;       // incoming Ricci one-form, spin 1
  SpinField omega;      // outgoing lapse roll, spin 0
  SpinField omegab;     // incoming lapse roll, spin 0

  static RicciSet zero(const GridSpec& g);
};

// Null decomposition of the Weyl curvature.
struct CurvatureSet {
  SpinField alpha;      // spin 2
  SpinField beta;       // spin 1
  SpinField rho;        // spin 0
  SpinField sigma;      // spin 0
  SpinField betab;      // spin 1
  SpinField alphab;     // spin 2

  static CurvatureSet zero(const GridSpec& g);
};

// Full state on one sphere S(u, ubar) of the double null foliation.
struct SphereSlice {
  double u = 0.0;
  double ubar = 0.0;
  double r = 1.0;       // area radius; duplicated into grid.r
  SpinField Omega;      // lapse, spin 0, positive
  SpinField shift_b;    // angular shift one-form; carried, not evolved
  RicciSet ricci;
  CurvatureSet curv;
  GridSpec grid;
};

// Rectangular stack of slices indexed (u-index, ubar-index). `s` is the
// decay parameter the data set was prepared with; it rides along so the
// norm bookkeeping can pick weights without replumbing.
struct FoliationGrid {
  std::vector<std::vector<SphereSlice>> slices;
  double du = 0.0;
  double dubar = 0.0;
  double s = 0.0;
};

// ---- exact backgrounds -----------------------------------------------------

enum class BackgroundKind { minkowski, schwarzschild };

// Area radius of the Schwarzschild sphere with tortoise coordinate rstar
// (rstar = r + 2M log(r/2M - 1)), by Newton iteration to 1e-12.
double schwarzschild_radius(double M, double rstar);

// Stationary slice of the chosen background at (u, ubar), radius from
// (ubar - u)/2 through the background's radius relation. Throws
// std::domain_error outside the exterior region.
SphereSlice exact_background(BackgroundKind kind, double M, double u,
                             double ubar, const GridSpec& grid);

// ---- diagnostics -----------------------------------------------------------

struct ConstraintResiduals {
  double gauss = 0.0;        // K + (1/4) trchi trchib - (1/2) chib_hat.chi_hat + rho
  double codazzi_out = 0.0;  // div chi_hat - (1/2) grad trchi + zeta.chi_hat
                             //   - (1/2) trchi zeta + beta
  double codazzi_in = 0.0;   // conjugate, with the opposite zeta and beta signs
  double torsion = 0.0;      // curl eta - sigma - (1/2) chib_hat ^ chi_hat
  double lapse = 0.0;        // eta - zeta - grad log Omega and its conjugate
};

// Sphere L2 norms of the constraint combinations above; all vanish on
// consistent states.
ConstraintResiduals constraint_residuals(const SphereSlice& slice);

struct MassAspect {
  SpinField mu;            // -div eta + (1/2) chi_hat.chib_hat - rho
  SpinField mub;           // conjugate
  SpinField mu_bracket;    // mu + (1/4) trchi trchib
  SpinField mub_bracket;   // mub + (1/4) trchi trchib
  SpinField mu_check;      // mean-free part of mu
  SpinField mub_check;
};

MassAspect mass_aspect(const SphereSlice& slice);

// r = sqrt(area / 4 pi), the area evaluated by quadrature on the slice grid.
double area_radius(const SphereSlice& slice);

// Gauss curvature of the round comparison sphere, the constant 1/r^2.
SpinField gauss_curvature_flat(const GridSpec& grid);

}  // namespace dnull

#endif  // DNULL_GEOMETRY_HPP_
