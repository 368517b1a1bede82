//! \file spin_field.hpp
//  \brief Spin-weighted fields on a sphere: coefficient storage, exact
//         synthesis/analysis between mode space and grid values.
//
//  A SpinField of weight s holds complex coefficients a_{lm} for
//  |s| <= l <= l_max against the orthonormal spin-weighted basis
//    Y^s_{lm}(theta,phi) = (-1)^s sqrt((2l+1)/4pi) d^l_{m,-s}(theta) e^{i m phi},
//  so that integral |F|^2 dOmega  =  sum |a_{lm}|^2  on the unit sphere.
//
//  Real sphere tensors are carried as single complex fields in the fixed
//  orthonormal dyad (e_theta, e_phi):
//    pair of scalars (f, f*)          <->  spin 0:  F = f + i f*
//    one-form xi                      <->  spin +1: Xi = xi_1 + i xi_2
//    symmetric traceless U            <->  spin +2: W = U_11 + i U_12

#ifndef DNULL_SPIN_FIELD_HPP_
#define DNULL_SPIN_FIELD_HPP_

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "dnull/grid.hpp"

namespace dnull {

using Complex = std::complex<double>;

// Maximum |spin| the transform tables support. Spin 3 shows up transiently in
// products like conj(W) * eth(W); nothing in the calculus needs more than 4.
constexpr int kMaxSpin = 4;

class SpinField {
 public:
  SpinField() = default;
  SpinField(int spin, const GridSpec& grid);  // zero field

  int spin() const { return spin_; }
  int l_min() const { return std::abs(spin_); }
  int l_max() const { return grid_.l_max; }
  const GridSpec& grid() const { return grid_; }
  double r() const { return grid_.r; }

  int coeff_count() const { return static_cast<int>(a_.size()); }
  int index(int l, int m) const;        // flat index of (l, m)
  Complex& at(int l, int m) { return a_[index(l, m)]; }
  const Complex& at(int l, int m) const { return a_[index(l, m)]; }
  std::vector<Complex>& coeffs() { return a_; }
  const std::vector<Complex>& coeffs() const { return a_; }

  // In-place linear algebra used by the integrators.
  SpinField& operator+=(const SpinField& o);
  SpinField& operator-=(const SpinField& o);
  SpinField& operator*=(double c);
  SpinField& operator*=(Complex c);
  friend SpinField operator+(SpinField a, const SpinField& b) { return a += b; }
  friend SpinField operator-(SpinField a, const SpinField& b) { return a -= b; }
  friend SpinField operator*(double c, SpinField a) { return a *= c; }

  void axpy(double c, const SpinField& o);  // this += c * o

  double coeff_norm() const;      // sqrt(sum |a|^2) = unit-sphere L2 norm
  Complex mean() const;           // area mean (spin 0 only)

  // Swap to a different radius/resolution keeping coefficients (used when a
  // slice is rescaled; l_max must match).
  void set_radius(double r) { grid_.r = r; }

 private:
  int spin_ = 0;
  GridSpec grid_{0, 1, 1, 1.0};
  std::vector<Complex> a_;
};

// -------- transforms ---------------------------------------------------------

// Grid values F(theta_j, phi_k), row j = colatitude node, col k = longitude.
using GridValues = Eigen::MatrixXcd;

// Evaluate the field on the nodes of `on` (same l_max, any conforming sizes).
GridValues synthesize(const SpinField& f, const GridSpec& on);
GridValues synthesize(const SpinField& f);   // on the field's own grid

// Project grid samples onto the basis, truncating at on.l_max.
SpinField analyze(int spin, const GridValues& v, const GridSpec& on);

// Pointwise product computed on a padded grid; result spin = sa + sb,
// truncated at the common l_max. The retained modes are exact for
// band-limited factors.
SpinField multiply(const SpinField& a, const SpinField& b);

// Copy of f on grid `to`, dropping modes above to.l_max (or zero-filling if
// `to` is wider).
SpinField truncated(const SpinField& f, const GridSpec& to);

// Complex conjugate field: spin flips sign. Coefficient-level (exact):
//   conj(Y^s_{lm}) = (-1)^{s+m} Y^{-s}_{l,-m}.
SpinField conj_field(const SpinField& f);

// Real / imaginary part of a spin-0 field, again spin 0 and real.
SpinField real_part(const SpinField& f);
SpinField imag_part(const SpinField& f);

// Uniform value c on the sphere (spin 0).
SpinField constant_field(Complex c, const GridSpec& grid);

// Largest pointwise modulus sampled on a dense (quartic-padded) grid.
double sup_abs(const SpinField& f);

// Max |coefficient| outside the single mode (l0, m0); diagnostic for mode
// purity tests.
double off_mode_max(const SpinField& f, int l0, int m0);

}  // namespace dnull

#endif  // DNULL_SPIN_FIELD_HPP_
