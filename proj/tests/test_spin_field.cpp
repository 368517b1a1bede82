//! \file test_spin_field.cpp
//  \brief Oracle tests for the spin-weighted transform core.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dnull/sphere_ops.hpp"
#include "dnull/spin_field.hpp"

using namespace dnull;

namespace {

SpinField random_field(int spin, const GridSpec& g, unsigned seed) {
  SpinField f(spin, g);
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (auto& v : f.coeffs()) v = Complex(nd(rng), nd(rng));
  return f;
}

}  // namespace

TEST_CASE("gauss-legendre rule integrates polynomials exactly") {
  const auto& q = gauss_legendre(12);
  double s0 = 0.0, s10 = 0.0;
  for (int j = 0; j < 12; ++j) {
    s0 += q.w[j];
    s10 += q.w[j] * std::pow(q.x[j], 10);
  }
  CHECK(s0 == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(s10 == doctest::Approx(2.0 / 11.0).epsilon(1e-13));
}

TEST_CASE("basis matches closed-form harmonics") {
  GridSpec g(4, 1.0);
  const auto& q = gauss_legendre(g.n_theta);

  SUBCASE("spin 0: Y00 and Y10") {
    SpinField f(0, g);
    f.at(0, 0) = 1.0;
    GridValues v = synthesize(f);
    for (int j = 0; j < g.n_theta; ++j)
      CHECK(v(j, 0).real() ==
            doctest::Approx(1.0 / std::sqrt(4 * M_PI)).epsilon(1e-13));

    SpinField h(0, g);
    h.at(1, 0) = 1.0;
    GridValues vh = synthesize(h);
    for (int j = 0; j < g.n_theta; ++j)
      CHECK(vh(j, 0).real() ==
            doctest::Approx(std::sqrt(3 / (4 * M_PI)) * q.x[j]).epsilon(1e-12));
  }

  SUBCASE("spin 1: (1,0) mode is sqrt(3/8pi) sin(theta)") {
    SpinField f(1, g);
    f.at(1, 0) = 1.0;
    GridValues v = synthesize(f);
    for (int j = 0; j < g.n_theta; ++j) {
      double st = std::sin(q.theta[j]);
      CHECK(v(j, 0).real() ==
            doctest::Approx(std::sqrt(3 / (8 * M_PI)) * st).epsilon(1e-12));
      CHECK(v(j, 0).imag() == doctest::Approx(0.0).epsilon(1e-13));
    }
  }

  SUBCASE("spin 2: (2,0) mode is sqrt(15/32pi) sin^2(theta)") {
    SpinField f(2, g);
    f.at(2, 0) = 1.0;
    GridValues v = synthesize(f);
    for (int j = 0; j < g.n_theta; ++j) {
      double st = std::sin(q.theta[j]);
      CHECK(v(j, 0).real() ==
            doctest::Approx(std::sqrt(15 / (32 * M_PI)) * st * st)
                .epsilon(1e-12));
    }
  }
}

TEST_CASE("analysis inverts synthesis to near machine precision") {
  GridSpec g(16, 3.7);
  for (int spin = -2; spin <= 3; ++spin) {
    SpinField f = random_field(spin, g, 100 + spin);
    SpinField back = analyze(spin, synthesize(f), g);
    double err = 0.0;
    for (int i = 0; i < f.coeff_count(); ++i)
      err = std::max(err, std::abs(f.coeffs()[i] - back.coeffs()[i]));
    CHECK(err < 1e-12 * f.coeff_norm());
  }
}

TEST_CASE("parseval holds against grid quadrature") {
  GridSpec g(10, 2.0);
  SpinField f = random_field(1, g, 7);
  GridSpec pad = padded_for_products(g);
  GridValues v = synthesize(f, pad);
  const auto& q = gauss_legendre(pad.n_theta);
  double acc = 0.0;
  for (int j = 0; j < pad.n_theta; ++j) {
    double row = 0.0;
    for (int k = 0; k < pad.n_phi; ++k) row += std::norm(v(j, k));
    acc += q.w[j] * row;
  }
  acc *= 2 * M_PI / pad.n_phi;
  double coeff2 = f.coeff_norm() * f.coeff_norm();
  CHECK(acc == doctest::Approx(coeff2).epsilon(1e-12));
}

TEST_CASE("conjugation is exact at coefficient level") {
  GridSpec g(9, 1.0);
  for (int spin : {0, 1, 2}) {
    SpinField f = random_field(spin, g, 31 + spin);
    SpinField c = conj_field(f);
    CHECK(c.spin() == -spin);
    GridValues vf = synthesize(f);
    GridValues vc = synthesize(c);
    double err = (vc - vf.conjugate()).cwiseAbs().maxCoeff();
    CHECK(err < 1e-12 * vf.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("products are pointwise on the grid and dealiased") {
  GridSpec g(8, 1.5);
  SpinField a = random_field(0, g, 1);
  SpinField b = random_field(1, g, 2);
  SpinField p = multiply(a, b);
  CHECK(p.spin() == 1);
  // Band-limit the factors so the product (degree 2 l_max) is captured
  // exactly at twice the resolution for comparison.
  GridSpec wide(2 * g.l_max, 1.5);
  SpinField aw(0, wide), bw(1, wide);
  for (int l = 0; l <= g.l_max; ++l)
    for (int m = -l; m <= l; ++m) aw.at(l, m) = a.at(l, m);
  for (int l = 1; l <= g.l_max; ++l)
    for (int m = -l; m <= l; ++m) bw.at(l, m) = b.at(l, m);
  SpinField pw = analyze(1, synthesize(aw).cwiseProduct(synthesize(bw)), wide);
  double err = 0.0;
  for (int l = 1; l <= g.l_max; ++l)
    for (int m = -l; m <= l; ++m)
      err = std::max(err, std::abs(p.at(l, m) - pw.at(l, m)));
  CHECK(err < 1e-12 * pw.coeff_norm());
}

TEST_CASE("eth operators match the defining derivative formula") {
  // FD oracle: eth f = -(sin)^s (d_theta + i csc d_phi) (sin)^{-s} f on a
  // dense colatitude grid, phi derivative exact per azimuthal mode.
  GridSpec g(6, 1.0);
  GridSpec dense(6, 128, 13, 1.0);
  const auto& q = gauss_legendre(dense.n_theta);
  struct Probe { int spin, l, m; };
  for (Probe pr : {Probe{0, 3, 1}, Probe{1, 2, -2}, Probe{-1, 3, 2},
                   Probe{2, 4, 0}, Probe{-2, 3, 3}}) {
    SpinField f(pr.spin, g);
    f.at(pr.l, pr.m) = Complex(0.7, -0.3);
    GridValues v = synthesize(f, dense);
    GridValues ve = synthesize(eth(f), dense);
    // 5-point Lagrange derivative on the nonuniform theta nodes.
    for (int j = 20; j < dense.n_theta - 20; j += 13) {
      int k = 3;  // fixed phi column
      double st = std::sin(q.theta[j]);
      // g(theta) = (sin theta)^{-s} f at column k
      auto gval = [&](int jj) {
        return v(jj, k) * std::pow(std::sin(q.theta[jj]), -pr.spin);
      };
      Complex dg(0.0);
      for (int a = -2; a <= 2; ++a) {
        // derivative of the Lagrange basis function through node j+a
        double dsum = 0.0;
        for (int c = -2; c <= 2; ++c) {
          if (c == a) continue;
          double term = 1.0 / (q.theta[j + a] - q.theta[j + c]);
          for (int b = -2; b <= 2; ++b) {
            if (b == a || b == c) continue;
            term *= (q.theta[j] - q.theta[j + b]) /
                    (q.theta[j + a] - q.theta[j + b]);
          }
          dsum += term;
        }
        dg += gval(j + a) * dsum;
      }
      Complex dphi = Complex(0, 1) * double(pr.m) * v(j, k);
      Complex expect = -std::pow(st, pr.spin) *
                       (dg + Complex(0, 1) / st *
                                 std::pow(st, -pr.spin) * dphi);
      CHECK(std::abs(ve(j, k) - expect) < 5e-6);
    }
  }
}

TEST_CASE("mean and constant fields") {
  GridSpec g(5, 2.0);
  SpinField c = constant_field(Complex(2.5, -1.0), g);
  CHECK(c.mean().real() == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(c.mean().imag() == doctest::Approx(-1.0).epsilon(1e-14));
  GridValues v = synthesize(c);
  CHECK(v(0, 0).real() == doctest::Approx(2.5).epsilon(1e-13));
}
