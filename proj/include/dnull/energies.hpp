//! \file energies.hpp
//  \brief Weighted sphere norms, cone fluxes, the r^p divergence-identity
//         ledger for transport pairs, and trace-inequality measurements.

#ifndef DNULL_ENERGIES_HPP_
#define DNULL_ENERGIES_HPP_

#include <array>
#include <map>
#include <string>
#include <vector>

#include "dnull/dynamics.hpp"

namespace dnull {

// ---- weights ---------------------------------------------------------------

// One r / |u| weight applied to a field before a sphere or cone norm is
// taken. p is the Lebesgue index on the sphere; deriv_order 1 inserts one
// angular derivative scaled by r.
struct WeightSpec {
  double r_exp = 0.0;
  double u_exp = 0.0;
  int p = 2;            // 2 or 4
  int deriv_order = 0;  // 0 or 1
};

// Weight catalog keyed by norm identifier. Sphere-norm stems look like
// "R0S[alpha]" (outgoing family) and "uR0S[betab]" (incoming family); cone
// flux stems are "R[beta]" / "uR[beta]" plus the two derivative fluxes
// "R1[alpha_4]" and "uR1[alphab_3]"; connection norms are "O(eta)",
// "O(Omega_omega_check)", ...; initial-surface norms are "S0(etab)", ....
// The decay parameter s selects the weight branch: a slow branch for
// 3 < s < 4 (softer beta and rho/sigma weights), the base table for
// 4 <= s <= 6, and a fast branch for s > 6 (r-capped alpha and beta
// weights). The returned r_exp already contains the -2/p measure shift for
// sphere norms, so the norm is r_exp applied outside |.|_{p,S}. Throws
// std::invalid_argument for an unknown identifier or p outside {2,4}.
WeightSpec norm_weight(const std::string& norm_id, double s, int p, int q);

// Resolves a field identifier on a slice to its spin-weighted representative.
// Plain fields use their member names ("alpha", "beta", "rho", "sigma",
// "betab", "alphab", "chi_hat", "tr_chi", "chib_hat", "tr_chib", "eta",
// "etab", "zeta", "omega", "omegab", "Omega"). Derived entries:
//   "rho_check"             mean-free part of rho
//   "rho_sigma"             rho_check + i sigma   (the paired scalar)
//   "Omega_omega"           pointwise product Omega * omega
//   "Omega_omegab"          pointwise product Omega * omegab
//   "Omega_omega_check"     mean-free part of Omega * omega
//   "Omega_omegab_check"    mean-free part of Omega * omegab
//   "Omega_check"           mean-free part of Omega
//   "Omega_tr_chi_check"    mean-free part of Omega * tr_chi
//   "Omega_tr_chib_check"   mean-free part of Omega * tr_chib
//   "inv_Omega_tr_chib_check"  mean-free part of (1/Omega) * tr_chib
// Throws std::invalid_argument for an unknown identifier.
SpinField field_on_slice(const SphereSlice& slice, const std::string& field_id);

// |r^{r_exp} |u|^{u_exp} (r nabla)^{deriv_order} w|_{p,S} on one slice.
// The angular derivative magnitude uses the real-component convention: for a
// spin-s representative W, |nabla w|^2 = c_s (|eth W|^2 + |eth_bar W|^2) / 2
// with c_s the same modulus factor the field itself carries. The p = 2
// derivative norm is a plain coefficient sum; the p = 4 one squares the
// derivative magnitude through a band-limited product and carries the usual
// truncation of quartic integrands.
double sphere_norm(const SphereSlice& slice, const std::string& field_id,
                   const WeightSpec& spec);

// ---- cone fluxes -----------------------------------------------------------

enum class ConeKind {
  outgoing,  // u = const, parameterized by ubar (row of the grid)
  incoming   // ubar = const, parameterized by u (column of the grid)
};

// One cone segment inside a grid: `index` picks the row (outgoing) or column
// (incoming); [lo, hi] is the inclusive transverse index range, hi < 0
// meaning "to the far end".
struct ConeSelect {
  ConeKind kind = ConeKind::outgoing;
  int index = 0;
  int lo = 0;
  int hi = -1;
};

// L^2 flux of the weighted field along the cone segment,
//   flux^2 = sum_j w_j * 2 mean(Omega)_j * |r^{r_exp} |u|^{u_exp}
//            (r nabla)^q w|_{2,S_j}^2,
// with trapezoid weights w_j in the transverse step. The 2 Omega factor is
// the null line element of the foliation. Requires spec.p == 2. An empty
// segment returns 0 and warns on stderr.
double cone_flux(const FoliationGrid& grid, const std::string& field_id,
                 const ConeSelect& cone, const WeightSpec& spec);

// ---- transport pairs and the r^p identity ----------------------------------

// Shape of the coupled transport pair:
//   form_one:  nabla_3 psi1 + a1 trchib psi1 = -k d_k^* psi2 + h1,
//              nabla_4 psi2 + a2 trchi  psi2 =    d_k  psi1 + h2,
//   form_two:  nabla_3 psi1 + a1 trchib psi1 =    d_k  psi2 + h1,
//              nabla_4 psi2 + a2 trchi  psi2 = -k d_k^* psi1 + h2,
// where psi1 has spin k (form_one) or k-1 (form_two).
enum class BianchiShape { form_one, form_two };

struct BianchiPairSpec {
  int k = 1;
  double a1 = 0.0;
  double a2 = 0.0;
  BianchiShape shape = BianchiShape::form_one;
  double p = 0.0;  // r-exponent of the identity
};

// The five coefficient tuples the curvature system produces. The last one is
// the pair built from the radiation auxiliaries (alpha_ring, alpha_slash).
enum class BianchiPairId {
  alpha_beta,       // (2, 1/2, 2), form_one
  beta_rho_sigma,   // (1, 1, 3/2), form_one
  rho_sigma_betab,  // (1, 3/2, 1), form_two
  betab_alphab,     // (2, 2, 1/2), form_two
  teukolsky         // (2, 0, 5/2), form_one
};

// Spec for a known pair with the chosen r-exponent p. Throws
// std::invalid_argument if the id is unknown.
BianchiPairSpec canonical_pair(BianchiPairId id, double p);

// Rectangular index slab [i_lo, i_hi] x [j_lo, j_hi] of a grid (inclusive).
// `reversed` flips the boundary orientation: every signed entry of the
// ledger changes sign exactly.
struct SlabRegion {
  int i_lo = 0;
  int i_hi = 0;
  int j_lo = 0;
  int j_hi = 0;
  bool reversed = false;
};

// Signed ledger of the integrated divergence identity over a slab. lhs
// collects the two boundary flux differences plus the trace bulk; rhs
// collects the sphere divergence, the h couplings, the lapse-roll terms and
// the radius anomaly terms. residual = |lhs - rhs|. sphere_div_max is the
// largest closed-surface integral of the spherical divergence over the slab
// (zero in exact arithmetic). `terms` holds every named contribution with
// its sign; `scale` is the largest magnitude among fluxes and bulk terms,
// for relative comparisons.
struct RpLedger {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  double sphere_div_max = 0.0;
  double scale = 0.0;
  std::map<std::string, double> terms;
};

// Evaluates every term of the divergence identity for the pair on the slab
// by trapezoid quadrature in both null directions and exact angular
// integrals. In linearized mode the measure and coefficient factors are
// taken on the background (quadratic ledger); in full mode they are the
// stored fields. The teukolsky pair requires linearized mode and interior
// margin for its finite-difference auxiliaries. Throws std::invalid_argument
// for a malformed region or an unrecognized coefficient tuple.
RpLedger rp_identity_residual(const FoliationGrid& grid,
                              const BianchiPairSpec& pair,
                              const SlabRegion& region,
                              Nonlinearity mode = Nonlinearity::full,
                              BackgroundKind bg = BackgroundKind::minkowski,
                              double M = 0.0);

// Which of the four sign cases of the integral estimate applies, with both
// sides evaluated on the data: lhs = final fluxes plus the coercive bulk,
// rhs = entering fluxes plus the measured h couplings plus the case's
// defect bulk. ratio = lhs / rhs, defined as 0 when both sides vanish.
struct RpCaseReport {
  int case_id = 0;  // 1..4
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};

RpCaseReport rp_case_check(const FoliationGrid& grid,
                           const BianchiPairSpec& pair,
                           const SlabRegion& region,
                           Nonlinearity mode = Nonlinearity::full,
                           BackgroundKind bg = BackgroundKind::minkowski,
                           double M = 0.0);

// ---- initial-surface flux --------------------------------------------------

// Total curvature flux through the initial surface approximated by grid
// column j0: the r^s-weighted squares of the five curvature components and
// their first derivatives in the triple (r nabla, r nabla_3, r nabla_4),
// integrated down the column, plus the square of sup |r^3 rho_bar|.
// The null derivatives use second-order stencils; the grid must have at
// least three rows and three columns around j0 (std::invalid_argument).
struct InitialFlux {
  double total = 0.0;         // sqrt(total_sq)
  double total_sq = 0.0;
  double sup_r3_rho_bar = 0.0;
};

InitialFlux initial_flux_frakR0(const FoliationGrid& grid, int j0, double s);

// ---- trace and sphere inequalities ----------------------------------------

// Measured constants of the two cone trace inequalities and the sphere
// inequality, evaluated for the field at sphere (i, j) of the grid:
//   trace_u:    |r F|_{4,S}            vs  L^2(C_u) of {F, r nabla F, r nabla_4 F}
//   trace_ubar: |r^{1/2}|u|^{1/2}F|_{4,S}  vs  L^2(C_ubar) of {F, r nabla F}
//               plus |u| L^2(C_ubar) of nabla_3 F
//   sup:        sup_S r^{1/2} |F|      vs  |F|_{4,S} + |r nabla F|_{4,S}
// Each constant is lhs / rhs (0 when both vanish). within_bound records
// whether every constant is at most 100.
struct SobolevReport {
  double trace_u_lhs = 0.0, trace_u_rhs = 0.0, trace_u_const = 0.0;
  double trace_ubar_lhs = 0.0, trace_ubar_rhs = 0.0, trace_ubar_const = 0.0;
  double sup_lhs = 0.0, sup_rhs = 0.0, sup_const = 0.0;
  bool within_bound = true;
};

SobolevReport sobolev_check(const FoliationGrid& grid,
                            const std::string& field_id, int i, int j);

// ---- radiation bulk positivity ---------------------------------------------

// Mode-wise Gram matrix of the bulk quadratic form in (alpha_ring,
// alpha_slash, alpha) produced by the r^p identity of the radiation
// auxiliaries at exponent s0, after the angular derivative term is bounded
// below through the mode's Poincare constant c_ell:
//   [ s0 + 2        0                 -4              ]
//   [ 0             (8 - s0) / 4      0               ]
//   [ -4            0                 (7/4)(8 - s0) c_ell ]
// psd reports min_eigenvalue >= -1e-12. The same matrix decomposes as
// diag(s0 - 6, (8 - s0)/4, (7/4)(8 - s0) c_ell - 2) plus twice the square
// |alpha - 2 alpha_ring|^2, which is what makes it definite for
// 6 < s0 <= 29/4 and c_ell >= 7/4.
struct GramReport {
  std::array<std::array<double, 3>, 3> gram{};
  double min_eigenvalue = 0.0;
  bool psd = false;
};

GramReport teukolsky_bulk_positivity(double s0, double c_ell);

// ---- norm report -----------------------------------------------------------

// Named map of every catalog norm evaluated over a slab: sphere norms are
// maxima over the slab's slices (keys like "R0S[alpha]:p2"), cone fluxes
// maxima over its rows/columns (keys like "R0[beta]", "R1[beta]" for the
// angular-derivative flux), connection norms "O0(eta):p4", and the
// background comparison suprema "sup(r2_tr_chi_comp)", "sup(r_Omega_comp)",
// "sup(ru_tr_chib_comp)", "sup(r3_rho_bar)".
struct NormReport {
  std::map<std::string, double> values;
  std::string region;
  double s = 0.0;
};

NormReport norm_report(const FoliationGrid& grid, const SlabRegion& region,
                       double s);

}  // namespace dnull

#endif  // DNULL_ENERGIES_HPP_
