//! \file test_sphere_ops.cpp
//  \brief Identity suite for the sphere calculus operators.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dnull/sphere_ops.hpp"

using namespace dnull;

namespace {

SpinField random_field(int spin, const GridSpec& g, unsigned seed) {
  SpinField f(spin, g);
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (auto& v : f.coeffs()) v = Complex(nd(rng), nd(rng));
  return f;
}

double rel_diff(const SpinField& a, const SpinField& b) {
  double num = 0.0, den = 0.0;
  for (int i = 0; i < a.coeff_count(); ++i) {
    num = std::max(num, std::abs(a.coeffs()[i] - b.coeffs()[i]));
    den = std::max(den, std::abs(b.coeffs()[i]));
  }
  return den > 0 ? num / den : num;
}

}  // namespace

TEST_CASE("operator composition identities, grid-mediated vs multiplier") {
  GridSpec g(16, 2.3);
  const double r2 = g.r * g.r;
  SpinField K = constant_field(1.0 / r2, g);

  SUBCASE("d1* d1 = -lap_1 + K on one-forms") {
    SpinField xi = random_field(1, g, 11);
    SpinField lhs = d1_star(grid_roundtrip(d1(xi)));
    SpinField rhs = laplacian(xi);
    rhs *= -1.0;
    rhs.axpy(1.0 / r2, xi);
    CHECK(rel_diff(lhs, rhs) < 1e-11);
  }
  SUBCASE("d1 d1* = -lap_0 on scalar pairs") {
    SpinField f = random_field(0, g, 12);
    SpinField lhs = d1(grid_roundtrip(d1_star(f)));
    SpinField rhs = laplacian(f);
    rhs *= -1.0;
    CHECK(rel_diff(lhs, rhs) < 1e-11);
  }
  SUBCASE("d2* d2 = -(1/2) lap_2 + K on 2-tensors") {
    SpinField U = random_field(2, g, 13);
    SpinField lhs = d2_star(grid_roundtrip(d2(U)));
    SpinField rhs = laplacian(U);
    rhs *= -0.5;
    rhs.axpy(1.0 / r2, U);
    CHECK(rel_diff(lhs, rhs) < 1e-11);
  }
  SUBCASE("d2 d2* = -(1/2)(lap_1 + K) on one-forms") {
    SpinField xi = random_field(1, g, 14);
    SpinField lhs = d2(grid_roundtrip(d2_star(xi)));
    SpinField rhs = laplacian(xi);
    rhs.axpy(1.0 / r2, xi);
    rhs *= -0.5;
    CHECK(rel_diff(lhs, rhs) < 1e-11);
  }
  (void)K;
}

TEST_CASE("dual is an exact quarter-turn") {
  GridSpec g(8, 1.0);
  for (int spin : {1, 2}) {
    SpinField x = random_field(spin, g, 21 + spin);
    SpinField dd = dual(dual(x));
    SpinField neg = x;
    neg *= -1.0;
    CHECK(rel_diff(dd, neg) == 0.0);  // coefficient-level, exact
  }
}

TEST_CASE("curl of a gradient vanishes; divergence of a dual gradient") {
  GridSpec g(10, 1.7);
  SpinField f = real_part(random_field(0, g, 31));
  SpinField D = d1(grid_roundtrip(grad(f)));
  // D packs div + i curl; gradient flow has zero curl.
  SpinField c = imag_part(D);
  CHECK(lp_norm(2, c) < 1e-12 * lp_norm(2, f));
  // dual gradient: div = 0, curl = -lap f
  SpinField Dd = d1(grid_roundtrip(dual(grad(f))));
  CHECK(lp_norm(2, real_part(Dd)) < 1e-12 * lp_norm(2, f));
  SpinField curl_part = imag_part(Dd);
  SpinField expect = laplacian(f);
  expect *= -1.0;
  CHECK(rel_diff(curl_part, expect) < 1e-11);
}

TEST_CASE("products match componentwise evaluation on the grid") {
  // Products return the band-limited projection, so the oracle assembles the
  // raw pointwise product on the padded grid and analyzes it at the same
  // truncation before comparing coefficients.
  GridSpec g(8, 1.0);
  SpinField xi = random_field(1, g, 41);
  SpinField eta = random_field(1, g, 42);
  SpinField U = random_field(2, g, 43);
  SpinField V = random_field(2, g, 44);

  GridSpec pad = padded_for_products(g);
  GridValues vxi = synthesize(xi, pad), veta = synthesize(eta, pad);
  GridValues vU = synthesize(U, pad), vV = synthesize(V, pad);
  GridValues scratch(pad.n_theta, pad.n_phi);

  auto check_against = [&](const SpinField& got, int spin) {
    SpinField expect = truncated(analyze(spin, scratch, pad), g);
    CHECK(rel_diff(got, expect) < 1e-12);
  };

  SUBCASE("one-form dot") {
    for (int j = 0; j < pad.n_theta; ++j)
      for (int k = 0; k < pad.n_phi; ++k) {
        double x1 = vxi(j, k).real(), x2 = vxi(j, k).imag();
        double e1 = veta(j, k).real(), e2 = veta(j, k).imag();
        scratch(j, k) = x1 * e1 + x2 * e2;
      }
    check_against(dot11(xi, eta), 0);
  }
  SUBCASE("one-form wedge") {
    for (int j = 0; j < pad.n_theta; ++j)
      for (int k = 0; k < pad.n_phi; ++k) {
        double x1 = vxi(j, k).real(), x2 = vxi(j, k).imag();
        double e1 = veta(j, k).real(), e2 = veta(j, k).imag();
        scratch(j, k) = x1 * e2 - x2 * e1;
      }
    check_against(wedge11(xi, eta), 0);
  }
  SUBCASE("2-tensor dot and wedge carry the component factor 2") {
    for (int j = 0; j < pad.n_theta; ++j)
      for (int k = 0; k < pad.n_phi; ++k) {
        double u11 = vU(j, k).real(), u12 = vU(j, k).imag();
        double v11 = vV(j, k).real(), v12 = vV(j, k).imag();
        scratch(j, k) = 2 * (u11 * v11 + u12 * v12);
      }
    check_against(dot22(U, V), 0);
    for (int j = 0; j < pad.n_theta; ++j)
      for (int k = 0; k < pad.n_phi; ++k) {
        double u11 = vU(j, k).real(), u12 = vU(j, k).imag();
        double v11 = vV(j, k).real(), v12 = vV(j, k).imag();
        scratch(j, k) = 2 * (u11 * v12 - u12 * v11);
      }
    check_against(wedge22(U, V), 0);
  }
  SUBCASE("mixed contraction (one-form into 2-tensor)") {
    // (xi . U)_1 + i (xi . U)_2 with U_22 = -U_11, U_21 = U_12
    for (int j = 0; j < pad.n_theta; ++j)
      for (int k = 0; k < pad.n_phi; ++k) {
        double x1 = vxi(j, k).real(), x2 = vxi(j, k).imag();
        double u11 = vU(j, k).real(), u12 = vU(j, k).imag();
        scratch(j, k) = Complex(x1 * u11 + x2 * u12, x1 * u12 - x2 * u11);
      }
    check_against(dot12(xi, U), 1);
  }
  SUBCASE("traceless symmetric product of one-forms") {
    for (int j = 0; j < pad.n_theta; ++j)
      for (int k = 0; k < pad.n_phi; ++k) {
        double x1 = vxi(j, k).real(), x2 = vxi(j, k).imag();
        double e1 = veta(j, k).real(), e2 = veta(j, k).imag();
        scratch(j, k) = Complex(x1 * e1 - x2 * e2, x1 * e2 + x2 * e1);
      }
    check_against(hat_otimes(xi, eta), 2);
  }
}

TEST_CASE("tensor-gradient contraction against the square-norm oracle") {
  // U^{BC} grad_A U_{BC} = (1/2) grad_A |U|^2
  GridSpec g(8, 1.4);
  SpinField U = random_field(2, g, 51);
  SpinField lhs = dot_tensor_grad(U, U);
  SpinField n2 = dot22(U, U);
  SpinField rhs = grad(n2);
  rhs *= 0.5;
  CHECK(rel_diff(lhs, rhs) < 1e-10);
}

TEST_CASE("norms: Parseval, quartic quadrature, sup") {
  GridSpec g(6, 3.0);
  SpinField one = constant_field(1.0, g);
  CHECK(lp_norm(2, one) ==
        doctest::Approx(g.r * std::sqrt(4 * M_PI)).epsilon(1e-13));
  CHECK(lp_norm(4, one) ==
        doctest::Approx(std::sqrt(g.r) * std::pow(4 * M_PI, 0.25))
            .epsilon(1e-13));
  CHECK(lp_norm(0, one) == doctest::Approx(1.0).epsilon(1e-12));

  // spin-2 component factor: a single (2,0) mode U has |U|^2 = 2 |W|^2
  SpinField U(2, g);
  U.at(2, 0) = 1.0;
  CHECK(lp_norm(2, U) == doctest::Approx(g.r * std::sqrt(2.0)).epsilon(1e-13));
}

TEST_CASE("average split") {
  GridSpec g(5, 1.0);
  SpinField f = real_part(random_field(0, g, 61));
  auto [mean, checked] = average_split(f);
  CHECK(std::abs(checked.mean()) < 1e-15);
  SpinField back = checked;
  back += constant_field(mean, g);
  CHECK(rel_diff(back, f) < 1e-14);
}

TEST_CASE("elliptic solves invert the forward operators") {
  GridSpec g(12, 2.0);
  SUBCASE("d1 solve") {
    SpinField xi = random_field(1, g, 71);
    SolveResult res = solve_hodge(HodgeKind::d1, d1(xi));
    CHECK(rel_diff(res.x, xi) < 1e-10);
    CHECK(res.elliptic_constant <= 4.0);
  }
  SUBCASE("d2 solve") {
    SpinField U = random_field(2, g, 72);
    SolveResult res = solve_hodge(HodgeKind::d2, d2(U));
    CHECK(rel_diff(res.x, U) < 1e-10);
    CHECK(res.elliptic_constant <= 4.0);
  }
  SUBCASE("single-mode potential recovered through the full cycle") {
    SpinField f(0, g);
    f.at(2, 0) = 1.0;                       // real Y20 potential
    SpinField xi = d1_star(f);              // the generated one-form
    SolveResult res = solve_hodge(HodgeKind::d1, d1(xi));
    CHECK(rel_diff(res.x, xi) < 1e-12);
  }
  SUBCASE("obstruction raises with the offending mode named") {
    SpinField rhs(0, g);
    rhs.at(0, 0) = 1.0;  // pure mean cannot be a divergence
    bool threw = false;
    try {
      solve_hodge(HodgeKind::d1, rhs);
    } catch (const HodgeObstruction& e) {
      threw = true;
      CHECK(e.l == 0);
      CHECK(e.m == 0);
    }
    CHECK(threw);
  }
  SUBCASE("d2 obstruction sits at l = 1") {
    SpinField rhs(1, g);
    rhs.at(1, 1) = 1.0;
    bool threw = false;
    try {
      solve_hodge(HodgeKind::d2, rhs);
    } catch (const HodgeObstruction& e) {
      threw = true;
      CHECK(e.l == 1);
    }
    CHECK(threw);
  }
}

TEST_CASE("spectral gap of the shear operator") {
  PoincareResult p = poincare_constant(8);
  CHECK(p.c2 == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(p.per_l[2] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(p.per_l[3] == doctest::Approx(5.0).epsilon(1e-10));
  CHECK(p.per_l[4] == doctest::Approx(9.0).epsilon(1e-10));
}

TEST_CASE("product dispatcher honors operand kinds") {
  GridSpec g(6, 1.0);
  SpinField xi = random_field(1, g, 81);
  SpinField U = random_field(2, g, 82);
  CHECK(product(ProductKind::dot, xi, xi).spin() == 0);
  CHECK(product(ProductKind::hat_otimes, xi, xi).spin() == 2);
  CHECK(product(ProductKind::contract_2_1, xi, U).spin() == 1);
  CHECK_THROWS_AS(product(ProductKind::hat_otimes, U, U),
                  std::invalid_argument);
}
