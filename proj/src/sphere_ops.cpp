//! \file sphere_ops.cpp
//  \brief Implementation of the sphere calculus.

#include "dnull/sphere_ops.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace dnull {

namespace {

// Apply a per-l multiplier, mapping spin s_in -> s_out.
template <typename Fn>
SpinField per_l_multiplier(const SpinField& f, int spin_out, Fn mult) {
  SpinField out(spin_out, f.grid());
  int l_lo = std::max(f.l_min(), out.l_min());
  for (int l = l_lo; l <= f.l_max(); ++l) {
    double c = mult(l);
    for (int m = -l; m <= l; ++m) out.at(l, m) = c * f.at(l, m);
  }
  return out;
}

double tensor_factor(const SpinField& f) {
  return std::abs(f.spin()) == 2 ? 2.0 : 1.0;
}

}  // namespace

SpinField eth(const SpinField& f) {
  int s = f.spin();
  return per_l_multiplier(f, s + 1, [s](int l) {
    return std::sqrt(double(l - s) * (l + s + 1));
  });
}

SpinField eth_bar(const SpinField& f) {
  int s = f.spin();
  return per_l_multiplier(f, s - 1, [s](int l) {
    return -std::sqrt(double(l + s) * (l - s + 1));
  });
}

SpinField d1(const SpinField& xi) {
  if (xi.spin() != 1) throw std::invalid_argument("d1: expects spin 1");
  SpinField out = eth_bar(xi);
  out *= -1.0 / xi.r();
  return out;
}

SpinField d1_star(const SpinField& f) {
  if (f.spin() != 0) throw std::invalid_argument("d1_star: expects spin 0");
  SpinField out = eth(f);
  out *= 1.0 / f.r();
  return out;
}

SpinField d2(const SpinField& U) {
  if (U.spin() != 2) throw std::invalid_argument("d2: expects spin 2");
  SpinField out = eth_bar(U);
  out *= -1.0 / U.r();
  return out;
}

SpinField d2_star(const SpinField& xi) {
  if (xi.spin() != 1) throw std::invalid_argument("d2_star: expects spin 1");
  SpinField out = eth(xi);
  out *= 1.0 / (2.0 * xi.r());
  return out;
}

SpinField dual(const SpinField& x) {
  if (x.spin() != 1 && x.spin() != 2)
    throw std::invalid_argument("dual: expects spin 1 or 2");
  SpinField out = x;
  out *= Complex(0.0, -1.0);
  return out;
}

SpinField laplacian(const SpinField& x) {
  int s = x.spin();
  double r2 = x.r() * x.r();
  return per_l_multiplier(x, s, [s, r2](int l) {
    return -(double(l) * (l + 1) - double(s) * s) / r2;
  });
}

SpinField grad(const SpinField& f) {
  if (f.spin() != 0) throw std::invalid_argument("grad: expects spin 0");
  SpinField out = eth(f);
  out *= -1.0 / f.r();
  return out;
}

SpinField hodge_operator(HodgeKind kind, const SpinField& x) {
  switch (kind) {
    case HodgeKind::d1: return d1(x);
    case HodgeKind::d2: return d2(x);
    case HodgeKind::d1_star: return d1_star(x);
    case HodgeKind::d2_star: return d2_star(x);
    case HodgeKind::dual: return dual(x);
    case HodgeKind::laplacian: return laplacian(x);
  }
  throw std::logic_error("hodge_operator: unknown kind");
}

SpinField dot11(const SpinField& xi, const SpinField& eta) {
  return real_part(multiply(conj_field(xi), eta));
}
SpinField wedge11(const SpinField& xi, const SpinField& eta) {
  return imag_part(multiply(conj_field(xi), eta));
}
SpinField hat_otimes(const SpinField& xi, const SpinField& eta) {
  return multiply(xi, eta);
}
SpinField dot12(const SpinField& xi, const SpinField& U) {
  return multiply(conj_field(xi), U);
}
SpinField dot22(const SpinField& U, const SpinField& V) {
  SpinField out = real_part(multiply(conj_field(U), V));
  out *= 2.0;
  return out;
}
SpinField wedge22(const SpinField& U, const SpinField& V) {
  SpinField out = imag_part(multiply(conj_field(U), V));
  out *= 2.0;
  return out;
}

SpinField dot_tensor_grad(const SpinField& T, const SpinField& U) {
  if (T.spin() != 2 || U.spin() != 2)
    throw std::invalid_argument("dot_tensor_grad: expects two spin-2 fields");
  SpinField a = multiply(conj_field(T), eth(U));       // spin -2 * spin 3
  SpinField b = multiply(T, conj_field(eth_bar(U)));   // spin 2 * spin -1
  a += b;
  a *= -1.0 / U.r();
  return a;
}

SpinField product(ProductKind kind, const SpinField& a, const SpinField& b) {
  int sa = std::abs(a.spin()), sb = std::abs(b.spin());
  switch (kind) {
    case ProductKind::dot:
      if (sa == 1 && sb == 1) return dot11(a, b);
      if (sa == 2 && sb == 2) return dot22(a, b);
      if (sa == 0 || sb == 0) return multiply(a, b);
      break;
    case ProductKind::wedge:
      if (sa == 1 && sb == 1) return wedge11(a, b);
      if (sa == 2 && sb == 2) return wedge22(a, b);
      break;
    case ProductKind::hat_otimes:
      if (sa == 1 && sb == 1) return hat_otimes(a, b);
      break;
    case ProductKind::contract_2_1:
      if (sa == 1 && sb == 2) return dot12(a, b);
      if (sa == 2 && sb == 1) return dot12(b, a);
      break;
  }
  throw std::invalid_argument("product: operand spins unsupported for kind");
}

double lp_norm(int p, const SpinField& f) {
  double kf = tensor_factor(f);
  if (p == 2) return f.r() * std::sqrt(kf) * f.coeff_norm();
  if (p == 4) {
    GridSpec pad = padded_for_quartics(f.grid());
    GridValues v = synthesize(f, pad);
    const auto& q = gauss_legendre(pad.n_theta);
    double acc = 0.0;
    for (int j = 0; j < pad.n_theta; ++j) {
      double row = 0.0;
      for (int k = 0; k < pad.n_phi; ++k) {
        double m2 = kf * std::norm(v(j, k));
        row += m2 * m2;
      }
      acc += q.w[j] * row;
    }
    acc *= 2.0 * M_PI / pad.n_phi;           // integral |.|^4 dOmega
    return std::pow(f.r() * f.r() * acc, 0.25);
  }
  if (p <= 0) return std::sqrt(kf) * sup_abs(f);
  throw std::invalid_argument("lp_norm: p must be 2, 4, or <=0 for sup");
}

AverageSplit average_split(const SpinField& f) {
  if (f.spin() != 0)
    throw std::invalid_argument("average_split: spin 0 only");
  AverageSplit out{f.mean(), f};
  out.checked.at(0, 0) = Complex(0.0);
  return out;
}

SolveResult solve_hodge(HodgeKind kind, const SpinField& rhs, double tol_rel) {
  if (kind != HodgeKind::d1 && kind != HodgeKind::d2)
    throw std::invalid_argument("solve_hodge: kind must be d1 or d2");
  const bool is_d1 = (kind == HodgeKind::d1);
  if (is_d1 && rhs.spin() != 0)
    throw std::invalid_argument("solve_hodge(d1): rhs must be spin 0");
  if (!is_d1 && rhs.spin() != 1)
    throw std::invalid_argument("solve_hodge(d2): rhs must be spin 1");

  const int s_out = is_d1 ? 1 : 2;
  const double r = rhs.r();
  const double rn = rhs.coeff_norm();
  SolveResult res;
  res.x = SpinField(s_out, rhs.grid());

  double obs2 = 0.0;
  for (int l = rhs.l_min(); l <= rhs.l_max(); ++l) {
    bool in_image = (l >= s_out);
    for (int m = -l; m <= l; ++m) {
      Complex b = rhs.at(l, m);
      if (!in_image) {
        double a = std::abs(b);
        if (a > tol_rel * std::max(rn, 1e-300))
          throw HodgeObstruction(
              l, m,
              "solve_hodge: incompatible rhs, nonzero obstruction mode (l=" +
                  std::to_string(l) + ", m=" + std::to_string(m) + ")");
        obs2 += a * a;
        continue;
      }
      double mult = is_d1 ? std::sqrt(double(l) * (l + 1)) / r
                          : std::sqrt(double(l + 2) * (l - 1)) / r;
      res.x.at(l, m) = b / mult;
    }
  }
  res.obstruction_abs = std::sqrt(obs2);

  // Measured first-derivative elliptic constant.
  double g2 = 0.0;
  int s = res.x.spin();
  for (int l = res.x.l_min(); l <= res.x.l_max(); ++l) {
    double ev = (double(l) * (l + 1) - double(s) * s) / (r * r);
    for (int m = -l; m <= l; ++m) g2 += ev * std::norm(res.x.at(l, m));
  }
  double kf = tensor_factor(res.x);
  double grad_norm = r * std::sqrt(kf * g2);
  double rhs_norm = lp_norm(2, rhs);
  if (rhs_norm > 0.0)
    res.elliptic_constant =
        (grad_norm + lp_norm(2, res.x) / r) / rhs_norm;
  return res;
}

SpinField grid_roundtrip(const SpinField& f) {
  GridSpec pad = padded_for_products(f.grid());
  return analyze(f.spin(), synthesize(f, pad), pad);
}

SpinField reciprocal(const SpinField& f) {
  GridSpec pad = padded_for_products(f.grid());
  GridValues v = synthesize(f, pad);
  return truncated(analyze(0, v.cwiseInverse(), pad), f.grid());
}

PoincareResult poincare_constant(int l_max) {
  GridSpec g(l_max, 1.0);
  const int n = (l_max + 1) * (l_max + 1) - 4;
  Eigen::MatrixXcd A(n, n);
  SpinField basis(2, g);
  for (int c = 0; c < n; ++c) {
    for (auto& v : basis.coeffs()) v = Complex(0.0);
    basis.coeffs()[c] = Complex(1.0);
    SpinField mid = grid_roundtrip(d2(basis));
    SpinField out = grid_roundtrip(d2_star(mid));
    for (int rr = 0; rr < n; ++rr) A(rr, c) = out.coeffs()[rr];
  }
  // r = 1, so A already represents r^2 d2* d2; symmetrize against roundoff.
  Eigen::MatrixXcd H = 0.5 * (A + A.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  PoincareResult res;
  res.c2 = es.eigenvalues().minCoeff();
  res.per_l.assign(l_max + 1, 0.0);
  for (int l = 2; l <= l_max; ++l) {
    int lo = basis.index(l, -l);
    int hi = basis.index(l, l);
    Eigen::MatrixXcd sub = H.block(lo, lo, hi - lo + 1, hi - lo + 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> esl(sub);
    res.per_l[l] = esl.eigenvalues().minCoeff();
  }
  return res;
}

}  // namespace dnull
