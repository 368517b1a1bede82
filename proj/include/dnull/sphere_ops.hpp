//! \file sphere_ops.hpp
//  \brief First-order sphere calculus on spin-weighted fields: the four
//         elementary operators, duals, products, norms, and elliptic solves.
//
//  Operator dictionary on the complex representatives (radius r):
//    d1  : s1 -> s0 pair   div + i curl        = +sqrt(l(l+1))/r      per mode
//    d1* : s0 pair -> s1   -grad f + dual grad f*                     (adjoint)
//    d2  : s2 -> s1        divergence of U     = +sqrt((l+2)(l-1))/r  per mode
//    d2* : s1 -> s2        -(1/2) traceless symmetrized gradient
//    dual: multiply by -i (coefficient-level, exact)
//  Compositions reproduce the Laplacian identities
//    d1* d1 = -lap_1 + K,  d1 d1* = -lap_0,
//    d2* d2 = -(1/2) lap_2 + K,  d2 d2* = -(1/2)(lap_1 + K),
//  with K = 1/r^2 on the round sphere.

#ifndef DNULL_SPHERE_OPS_HPP_
#define DNULL_SPHERE_OPS_HPP_

#include <stdexcept>
#include <string>
#include <vector>

#include "dnull/spin_field.hpp"

namespace dnull {

enum class HodgeKind { d1, d2, d1_star, d2_star, dual, laplacian };
enum class ProductKind { dot, wedge, hat_otimes, contract_2_1 };

// ---- elementary spectral operators (unit-sphere eth, then 1/r scalings) ----

SpinField eth(const SpinField& f);       // spin s -> s+1
SpinField eth_bar(const SpinField& f);   // spin s -> s-1

SpinField d1(const SpinField& xi);          // spin 1 -> 0 (div + i curl)
SpinField d1_star(const SpinField& f);      // spin 0 -> 1
SpinField d2(const SpinField& U);           // spin 2 -> 1
SpinField d2_star(const SpinField& xi);     // spin 1 -> 2
SpinField dual(const SpinField& x);         // spin 1 or 2, -> same
SpinField laplacian(const SpinField& x);    // rough Laplacian, any spin
SpinField grad(const SpinField& f);         // spin 0 -> 1, plain gradient

// Dispatcher matching the operator menu above.
SpinField hodge_operator(HodgeKind kind, const SpinField& x);

// ---- products (grid-mediated, dealiased) -----------------------------------

SpinField dot11(const SpinField& xi, const SpinField& eta);      // scalar
SpinField wedge11(const SpinField& xi, const SpinField& eta);    // scalar
SpinField hat_otimes(const SpinField& xi, const SpinField& eta); // spin 2
SpinField dot12(const SpinField& xi, const SpinField& U);        // spin 1
SpinField dot22(const SpinField& U, const SpinField& V);         // scalar
SpinField wedge22(const SpinField& U, const SpinField& V);       // scalar
// T^{BC} grad_A U_{BC} for two spin-2 fields (one-form output).
SpinField dot_tensor_grad(const SpinField& T, const SpinField& U);

// Dispatcher: dot/wedge choose the arity from the operand spins;
// contract_2_1 is the mixed pairing (one-form against 2-tensor).
SpinField product(ProductKind kind, const SpinField& a, const SpinField& b);

// Pointwise reciprocal of a spin-0 field through the padded product grid;
// exact when f is angle-constant, spectrally truncated otherwise.
SpinField reciprocal(const SpinField& f);

// ---- norms and means -------------------------------------------------------

// | . |_{p,S} = ( r^2 * integral |.|^p dOmega )^{1/p}; p in {2, 4} or p<=0
// for the sup norm. Tensor moduli follow the real-component convention
// (|U|^2 = 2 |W|^2 for spin-2 representatives).
double lp_norm(int p, const SpinField& f);

// Area mean and mean-free part of a spin-0 field.
struct AverageSplit {
  Complex mean;
  SpinField checked;
};
AverageSplit average_split(const SpinField& f);

// ---- elliptic solves -------------------------------------------------------

struct HodgeObstruction : std::runtime_error {
  int l, m;
  HodgeObstruction(int l_, int m_, const std::string& msg)
      : std::runtime_error(msg), l(l_), m(m_) {}
};

struct SolveResult {
  SpinField x;
  double obstruction_abs = 0.0;      // magnitude projected out
  double elliptic_constant = 0.0;    // (|grad x|_2 + |x|_2 / r) / |rhs|_2
};

// Minimal-norm solve of d1 xi = rhs (rhs spin 0 pair) or d2 U = rhs (rhs
// spin 1). Obstruction modes below tol_rel * |rhs| are zeroed and reported;
// above, a HodgeObstruction naming the offending (l, m) is thrown.
SolveResult solve_hodge(HodgeKind kind, const SpinField& rhs,
                        double tol_rel = 1e-8);

// ---- spectral gaps ---------------------------------------------------------

struct PoincareResult {
  double c2 = 0.0;              // min of r^2 d2* d2 over spin-2 fields
  std::vector<double> per_l;    // restricted minima, index l (l >= 2)
};

// Assembles r^2 d2* d2 through grid-mediated applications and solves the
// hermitian eigenproblem; per-l entries come from the fixed-l subspaces.
PoincareResult poincare_constant(int l_max);

// Same grid-mediated application used by the eigensolve (exposed for the
// identity tests): synthesize on the padded grid and re-analyze.
SpinField grid_roundtrip(const SpinField& f);

}  // namespace dnull

#endif  // DNULL_SPHERE_OPS_HPP_
