//! \file march.hpp
//  \brief Double-null integrator, cone transports, and the finite-difference
//         auxiliaries built on top of a marched foliation.

#ifndef DNULL_MARCH_HPP_
#define DNULL_MARCH_HPP_

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dnull/dynamics.hpp"

namespace dnull {

// Data on the outgoing edge cone u = u0: the three fields whose transport
// equations all run in the e3 direction, so their values along that cone are
// part of the characteristic data rather than of the marched state.
struct InnerData {
  SpinField omega;
  SpinField etab;
  SpinField alpha;
};
using EdgeConeData =
    std::function<InnerData(double ubar, const GridSpec& grid)>;

struct MarchConfig {
  double u0 = 0.0;
  double ubar0 = 0.0;
  double du = 0.0;
  double dubar = 0.0;
  int n_u = 0;               // rows, including the u = u0 edge
  int n_ubar = 0;            // columns, including the ubar = ubar0 edge
  int order = 4;             // classical Runge-Kutta; the only supported value
  Nonlinearity mode = Nonlinearity::full;
  BackgroundKind bg = BackgroundKind::minkowski;  // linearization point
  double M = 0.0;
  bool enforce_step_bound = true;   // du, dubar <= r_min / (2 l_max)
  bool reproject_rho_mean = true;   // re-center the mean-free part per step
  std::string abort_dump_path;      // offending slice lands here on abort
};

// Raised on NaN detection, horizon entry, or a step-size bound violation;
// the diagnostic slice has been dumped to the configured path (if any)
// before the throw.
struct MarchAbort : std::runtime_error {
  explicit MarchAbort(const std::string& what) : std::runtime_error(what) {}
};

// Marches the coupled system over the rectangle [u0, u0 + (n_u-1) du] x
// [ubar0, ubar0 + (n_ubar-1) dubar]. `initial_column` supplies the state on
// the incoming edge cone (one slice per row, at ubar0); `edge` supplies
// {omega, etab, alpha} on the outgoing edge cone at any ubar. The inner
// members of the input column are ignored: they are reconstructed by the
// same sweep the integrator uses, so the stored foliation is self-consistent.
FoliationGrid double_null_march(const std::vector<SphereSlice>& initial_column,
                                const EdgeConeData& edge,
                                const MarchConfig& cfg);

// Extends a partially marched grid to cfg.n_ubar columns; a grid freshly
// loaded from a checkpoint resumes bit-identically.
FoliationGrid march_continue(FoliationGrid grid, const EdgeConeData& edge,
                             const MarchConfig& cfg);

// Checkpoint: march metadata plus every slice in row-major order, in the
// slice snapshot format.
void save_grid(const std::string& path, const FoliationGrid& grid);
FoliationGrid load_grid(const std::string& path);

// Corner amplitudes for a consistent linearized initial column. Each entry
// seeds the named field's (l, m) coefficient on the first slice; every
// field with an incoming transport equation is then integrated down the
// column, so the column satisfies those equations to integrator order
// instead of violating them at the seeding amplitude. Fields without an
// incoming equation (eta, omegab, alphab, the shift) stay on the
// background, which keeps the lapse perturbation identically zero.
struct ColumnSeed {
  int l = 2;
  int m = 0;
  Complex alpha, beta, rho, sigma, betab;            // curvature corner values
  Complex chi_hat, tr_chi, chib_hat, tr_chib;        // shear / expansion
  Complex etab, omega;                               // swept connection fields
};

// Background column at ubar0 with the seeded perturbation integrated along
// u through the linearized incoming equations (classical fourth-order
// steps). The result feeds double_null_march as its initial column.
std::vector<SphereSlice> lin_initial_column(BackgroundKind kind, double M,
                                            double u0, double ubar0, double du,
                                            int n_u, const GridSpec& g,
                                            const ColumnSeed& seed);

// Edge data holding {omega, etab, alpha} frozen at their values on the given
// top-corner slice; the free outgoing data of a march started from a
// consistent column.
EdgeConeData frozen_edge(const SphereSlice& top);

// ---- single-field cone transport -------------------------------------------

// nabla4 U + lambda0 trchi U = F along an outgoing background cone (or the
// conjugate along an incoming one). The monitored quantity is
// |r^lambda1 U|_{p,S} with lambda1 = 2 (lambda0 - 1/p), which the transport
// keeps constant when F = 0.
struct TransportSpec {
  Direction direction = Direction::e4;
  double lambda0 = 0.0;
  std::string field_id;       // label for reports
  Nonlinearity mode = Nonlinearity::full;  // background coefficients either way
  int p_norm = 2;             // p of the monitored norm; <= 0 means sup
};

struct TransportResult {
  std::vector<double> coord;      // ubar (resp. u) at each step
  std::vector<double> radius;
  std::vector<SpinField> fields;
  std::vector<double> monitored;
  double lambda1 = 0.0;
};

using TransportSource =
    std::function<SpinField(double coord, double r, const GridSpec& grid)>;

TransportResult weighted_transport(const TransportSpec& spec,
                                   const SpinField& initial,
                                   BackgroundKind bg, double M, double u_fixed,
                                   double start, double step, int n_steps,
                                   const TransportSource& source = nullptr);

// ---- finite-difference auxiliaries on a marched grid -----------------------

// Fourth order centered stencils in the ubar (resp. u) direction; throws
// std::out_of_range when the requested point lacks two neighbors on each
// side.
struct TeukolskyAux {
  SpinField alpha_ring;   // r nabla4 alpha + 5 e4(r) alpha, spin 2
  SpinField alpha_slash;  // r d2 alpha, spin 1
};
struct TeukolskyAuxBar {
  SpinField alphab_ring;  // r nabla3 alphab + 5 e3(r) alphab, spin 2
  SpinField alphab_slash; // r d2 alphab, spin 1
};
// In linearized mode the 1/Omega factor is the scalar mean of the stored
// lapse; the stored fields are pure perturbations there and a pointwise
// product would leak a quadratic term into the auxiliaries.
TeukolskyAux teukolsky_aux(const FoliationGrid& grid, int i, int j,
                           Nonlinearity mode = Nonlinearity::full);
TeukolskyAuxBar teukolsky_aux_bar(const FoliationGrid& grid, int i, int j,
                                  Nonlinearity mode = Nonlinearity::full);

// L2 size of the discrete [Omega nabla4, r grad] f minus its predicted value
// (e4 of the radius times grad f, minus r times the chi contraction of
// grad f), for a caller-supplied profile f(u, ubar).
using ScalarProfile =
    std::function<SpinField(double u, double ubar, const GridSpec& grid)>;
double commutator_residual(const FoliationGrid& grid, int i, int j,
                           const ScalarProfile& f);

// ---- renormalized potentials along an incoming cone ------------------------

// Integrates the potential hierarchy in u with zero data on the first slice:
//   nabla3 omega_dag           = (1/2) Omega sigma
//   nabla3 mub_dag + trchib mub_dag = trchib sigma
//   nabla3 chi_dag + trchib chi_dag = 4 sigma
// and assembles per slice
//   kappa_pot = grad(Omega omega) + *grad omega_dag - (1/2) Omega beta
//   Xi = r grad [mub] + (1/2) chib_hat . (r grad chi_hat) + r zeta rho_check
// with [mub] = div zeta + (1/2) chib_hat.chi_hat - rho + (1/4) trchi trchib.
// hoho_residual[i] is the L2 defect of d1* applied to the pair
// (-Omega omega, omega_dag) against kappa_pot + (1/2) Omega beta, an exact
// identity, so the reported values are pure roundoff.
struct PotentialSeries {
  std::vector<SpinField> omega_dag;
  std::vector<SpinField> mub_dag;
  std::vector<SpinField> chi_dag;
  std::vector<SpinField> kappa_pot;
  std::vector<SpinField> Xi;
  std::vector<double> hoho_residual;
};

PotentialSeries renormalized_potentials(const std::vector<SphereSlice>& cone,
                                        Nonlinearity mode, BackgroundKind bg,
                                        double M);

// Residual of the kappa transport law nabla3 kappa + (1/2) trchib kappa
// = (1/4) Omega trchib beta at the interior slices of the cone (centered
// second order differences; the two endpoint entries are NaN).
std::vector<double> kappa_transport_residual(
    const std::vector<SphereSlice>& cone, const PotentialSeries& pot,
    Nonlinearity mode, BackgroundKind bg, double M);

}  // namespace dnull

#endif  // DNULL_MARCH_HPP_
