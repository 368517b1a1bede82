//! \file dynamics.hpp
//  \brief Transport right-hand sides: the coupled null structure and
//         curvature systems, with full or linearized nonlinearity.

#ifndef DNULL_DYNAMICS_HPP_
#define DNULL_DYNAMICS_HPP_

#include "dnull/geometry.hpp"

namespace dnull {

enum class Direction { e3, e4 };
enum class Nonlinearity { full, linearized };

// Angle-constant background profile at one (u, ubar). Linearized right-hand
// sides keep background x perturbation products and drop the rest; all
// tensorial backgrounds vanish, so only these scalars are carried.
struct BackgroundValues {
  double r = 1.0;
  double Omega = 0.5;
  double tr_chi = 0.0;
  double tr_chib = 0.0;
  double omega = 0.0;
  double omegab = 0.0;
  double rho_bar = 0.0;
  double e4_r = 1.0;     // e4(r)
  double e3_r = -1.0;    // e3(r)
};

BackgroundValues background_at(BackgroundKind kind, double M, double u,
                               double ubar);

// Directional derivative of each connection coefficient that has a transport
// equation in the given direction; the remaining members of the returned set
// are zero. e4 covers {eta, chi_hat, tr_chi, chib_hat, tr_chib, omegab},
// e3 covers {etab, chi_hat, tr_chi, chib_hat, tr_chib, omega}.
RicciSet null_structure_rhs(Direction dir, const SphereSlice& slice,
                            Nonlinearity mode = Nonlinearity::full,
                            const BackgroundValues* bg = nullptr);

// Directional derivative of each curvature component with an equation in the
// given direction (alpha has none along e4, its conjugate none along e3).
// rho is returned whole; use rho_split_rhs when the mean must be tracked
// separately.
CurvatureSet bianchi_rhs(Direction dir, const SphereSlice& slice,
                         Nonlinearity mode = Nonlinearity::full,
                         const BackgroundValues* bg = nullptr);

// Exact mean/checked split of the rho transport: bar is d(rho_bar)/du(bar)
// in coordinate time (the sphere average couples to the expansion), check is
// the coordinate derivative of the mean-free part.
struct RhoSplitRhs {
  double bar = 0.0;      // d rho_bar / d ubar  (resp. d/du)
  SpinField check;       // d rho_check / d ubar (resp. d/du)
};
RhoSplitRhs rho_split_rhs(Direction dir, const SphereSlice& slice,
                          Nonlinearity mode = Nonlinearity::full,
                          const BackgroundValues* bg = nullptr);

// Same split, reusing an already assembled directional derivative of rho.
RhoSplitRhs rho_split_from(Direction dir, const SphereSlice& slice,
                           const SpinField& nabla_rho, Nonlinearity mode,
                           const BackgroundValues* bg);

// The bilinear building block the integrators share: full mode is the grid
// product a*b, linearized mode is the first-order expansion
// a0*b + b0*a - a0*b0 about the angle-constant background pair (a0, b0).
SpinField lin_product(const SpinField& a, double a0, const SpinField& b,
                      double b0, Nonlinearity mode);

}  // namespace dnull

#endif  // DNULL_DYNAMICS_HPP_
