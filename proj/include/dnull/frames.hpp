//! \file frames.hpp
//  \brief Null-frame changes with a fixed incoming generator: exact curvature
//         transformation by tensor substitution, leading-order Ricci rows,
//         oscillation norms, and radius diagnostics.

#ifndef DNULL_FRAMES_HPP_
#define DNULL_FRAMES_HPP_

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dnull/energies.hpp"
#include "dnull/geometry.hpp"

namespace dnull {

// Change of null frame that keeps the incoming generator:
//   e4' = lam (e4 + f_B e_B + |f|^2/4 e3),
//   e3' = e3 / lam,
//   eA' = eA + f_A/2 e3,
// with f a real one-form (spin 1) and lam a real positive scalar (spin 0).
// When the two frames belong to labeled foliations, lam = Omega / Omega'.
struct FrameTransform {
  SpinField f;
  SpinField lam;
};

FrameTransform identity_transform(const GridSpec& g);

// lam' = 1/lam, f' = -lam f. Involutive up to spectral roundoff.
FrameTransform invert_transform(const FrameTransform& t);

// Composition law of two successive changes sharing the incoming generator:
// first t12, then t23 in the primed frame, equals
//   f13 = f12 + f23 / lam12,   lam13 = lam12 lam23.
FrameTransform compose_transforms(const FrameTransform& t12,
                                  const FrameTransform& t23);

// Transformed slice plus measured remainders. The curvature set is computed
// exactly: the stored components are reassembled into the full Weyl tensor
// at every quadrature node (as a symmetric bilinear form on two-forms) and
// the primed frame vectors are substituted. The remainder map records the
// unweighted displacement of each component in sup norm,
//   alpha : sup |lam^-2 alpha' - alpha|     beta  : sup |lam^-1 beta' - beta|
//   rho   : sup |rho' - rho|                sigma : sup |sigma' - sigma|
//   betab : sup |lam betab' - betab|        alphab: sup |lam^2 alphab' - alphab|
//   tr_chib, chib_hat : sup |lam X' - X|    curl_f: sup |curl f|
// alphab, tr_chib and chib_hat transform exactly, so those entries sit at
// roundoff; the others measure the frame-mixing terms of order |f|.
// Ricci rows are filled with their leading-order formulas; normal-derivative
// corrections (the e3-derivatives of f and lam entering eta and omegab) are
// not representable on a single slice and are dropped there.
struct FrameChange {
  SphereSlice slice;
  std::map<std::string, double> remainders;
};

// Throws std::domain_error if lam is not positive everywhere on the sphere.
FrameChange apply_transform(const FrameTransform& t, const SphereSlice& in);

// ---- oscillation norms ------------------------------------------------------

// Weight conventions for the f-entry; both take the supremum of the pointwise
// sum |f| + |r grad f| + |r nabla_3 f| + |r nabla_4 f|, the null derivatives
// by centered (one-sided at edges) differences of the transform family.
enum class OscWeight {
  initial_layer,  // r^{(s-1)/2}
  general         // r |u|^{(s-3)/2}
};

struct OscNorms {
  double osc_f = 0.0;
  double osc_lambda = 0.0;  // sup r |lam - 1|
  double osc_r = 0.0;       // sup |r - r'|
  double total() const { return osc_f + osc_lambda + osc_r; }
};

// Weighted suprema of a transform family over a slab. The callbacks supply
// the transform living on each slice and the radius of the companion
// foliation through the same sphere.
OscNorms osc_norms(
    const FoliationGrid& grid, const SlabRegion& region,
    const std::function<FrameTransform(const SphereSlice&)>& transform_at,
    const std::function<double(const SphereSlice&)>& radius_prime, double s,
    OscWeight variant);

// ---- radius diagnostics -----------------------------------------------------

// Deviation of the area radius from the flat radius (ubar - u)/2 on every
// slice, with a finite-difference audit of its outgoing transport rate
//   d/dubar [r - (ubar - u)/2] = (r/2) mean(Omega tr chi) - 1/2.
struct RadiusComparison {
  std::vector<std::vector<double>> deviation;
  double transport_residual_max = 0.0;  // centered differences, interior columns
};

RadiusComparison radius_comparison(const FoliationGrid& grid);

}  // namespace dnull

#endif  // DNULL_FRAMES_HPP_
