//! \file frames.cpp
//  \brief Frame changes with fixed incoming generator, oscillation norms,
//         and radius diagnostics.

#include "dnull/frames.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dnull/sphere_ops.hpp"

namespace dnull {

namespace {

// basis order (e3, e4, e1, e2); a frame vector is a coefficient quadruple
struct BasisVec {
  double c[4];
};

// the six ordered index pairs (34), (31), (32), (41), (42), (12)
constexpr int kPairA[6] = {0, 0, 0, 1, 1, 2};
constexpr int kPairB[6] = {1, 2, 3, 2, 3, 3};

void wedge(const BasisVec& x, const BasisVec& y, double out[6]) {
  for (int p = 0; p < 6; ++p)
    out[p] = x.c[kPairA[p]] * y.c[kPairB[p]] - x.c[kPairB[p]] * y.c[kPairA[p]];
}

double eval_weyl(const double m[6][6], const double xy[6], const double zt[6]) {
  double acc = 0.0;
  for (int p = 0; p < 6; ++p) {
    double row = 0.0;
    for (int q = 0; q < 6; ++q) row += m[p][q] * zt[q];
    acc += xy[p] * row;
  }
  return acc;
}

GridValues lift(const SpinField& f, const GridSpec& work) {
  return synthesize(truncated(f, work), work);
}

}  // namespace

FrameTransform identity_transform(const GridSpec& g) {
  FrameTransform t;
  t.f = SpinField(1, g);
  t.lam = constant_field(Complex(1.0, 0.0), g);
  return t;
}

FrameTransform invert_transform(const FrameTransform& t) {
  FrameTransform out;
  out.lam = reciprocal(t.lam);
  out.f = multiply(t.lam, t.f);
  out.f *= -1.0;
  return out;
}

FrameTransform compose_transforms(const FrameTransform& t12,
                                  const FrameTransform& t23) {
  FrameTransform out;
  out.lam = multiply(t12.lam, t23.lam);
  out.f = t12.f + multiply(reciprocal(t12.lam), t23.f);
  return out;
}

FrameChange apply_transform(const FrameTransform& t, const SphereSlice& in) {
  const GridSpec& base = in.grid;
  // wide working band: the substitution multiplies up to four powers of f
  // into the curvature, and e3' brings in the reciprocal of lam
  GridSpec work(3 * base.l_max + 4, in.r);

  SpinField fr = t.f;
  fr.set_radius(in.r);
  GridValues lam_v = lift(t.lam, work);
  GridValues f_v = lift(fr, work);
  GridValues d1f_v = lift(d1(fr), work);
  GridValues d2sf_v = lift(d2_star(fr), work);

  const long nr = lam_v.rows(), nc = lam_v.cols();
  for (long a = 0; a < nr; ++a)
    for (long b = 0; b < nc; ++b)
      if (lam_v(a, b).real() <= 0.0)
        throw std::domain_error(
            "frame transform: lambda must stay positive on the sphere");

  GridValues al_v = lift(in.curv.alpha, work);
  GridValues be_v = lift(in.curv.beta, work);
  GridValues rh_v = lift(in.curv.rho, work);
  GridValues sg_v = lift(in.curv.sigma, work);
  GridValues bb_v = lift(in.curv.betab, work);
  GridValues ab_v = lift(in.curv.alphab, work);

  GridValues ch_v = lift(in.ricci.chi_hat, work);
  GridValues tc_v = lift(in.ricci.tr_chi, work);
  GridValues cb_v = lift(in.ricci.chib_hat, work);
  GridValues tb_v = lift(in.ricci.tr_chib, work);
  GridValues eta_v = lift(in.ricci.eta, work);
  GridValues etb_v = lift(in.ricci.etab, work);
  GridValues om_v = lift(in.ricci.omega, work);
  GridValues omb_v = lift(in.ricci.omegab, work);
  GridValues Om_v = lift(in.Omega, work);

  GridValues al_o(nr, nc), be_o(nr, nc), rh_o(nr, nc), sg_o(nr, nc),
      bb_o(nr, nc), ab_o(nr, nc), ch_o(nr, nc), tc_o(nr, nc), cb_o(nr, nc),
      tb_o(nr, nc), eta_o(nr, nc), etb_o(nr, nc), om_o(nr, nc), omb_o(nr, nc),
      ze_o(nr, nc), Om_o(nr, nc);

  FrameChange out;
  auto& rem = out.remainders;
  const char* keys[] = {"alpha", "beta",    "rho",     "sigma",  "betab",
                        "alphab", "tr_chib", "chib_hat", "curl_f"};
  for (const char* k : keys) rem[k] = 0.0;

  for (long a = 0; a < nr; ++a)
    for (long b = 0; b < nc; ++b) {
      double lam = lam_v(a, b).real();
      double f1 = f_v(a, b).real(), f2 = f_v(a, b).imag();
      double a11 = al_v(a, b).real(), a12 = al_v(a, b).imag();
      double b1 = be_v(a, b).real(), b2 = be_v(a, b).imag();
      double rh = rh_v(a, b).real(), sg = sg_v(a, b).real();
      double bb1 = bb_v(a, b).real(), bb2 = bb_v(a, b).imag();
      double ab11 = ab_v(a, b).real(), ab12 = ab_v(a, b).imag();

      // Weyl tensor as a symmetric form on the two-form basis
      double m[6][6];
      m[0][0] = 4.0 * rh;
      m[0][1] = 2.0 * bb1;
      m[0][2] = 2.0 * bb2;
      m[0][3] = -2.0 * b1;
      m[0][4] = -2.0 * b2;
      m[0][5] = 2.0 * sg;
      m[1][1] = ab11;
      m[1][2] = ab12;
      m[2][2] = -ab11;
      m[1][3] = -rh;
      m[1][4] = sg;
      m[2][3] = -sg;
      m[2][4] = -rh;
      m[1][5] = bb2;
      m[2][5] = -bb1;
      m[3][3] = a11;
      m[3][4] = a12;
      m[4][4] = -a11;
      m[3][5] = b2;
      m[4][5] = -b1;
      m[5][5] = -rh;
      for (int p = 1; p < 6; ++p)
        for (int q = 0; q < p; ++q) m[p][q] = m[q][p];

      double ff = f1 * f1 + f2 * f2;
      BasisVec e4p{{0.25 * lam * ff, lam, lam * f1, lam * f2}};
      BasisVec e3p{{1.0 / lam, 0.0, 0.0, 0.0}};
      BasisVec e1p{{0.5 * f1, 0.0, 1.0, 0.0}};
      BasisVec e2p{{0.5 * f2, 0.0, 0.0, 1.0}};

      double w14[6], w24[6], w34[6], w13[6], w23[6], w43[6], w12[6];
      wedge(e1p, e4p, w14);
      wedge(e2p, e4p, w24);
      wedge(e3p, e4p, w34);
      wedge(e1p, e3p, w13);
      wedge(e2p, e3p, w23);
      wedge(e4p, e3p, w43);
      wedge(e1p, e2p, w12);

      double ap11 = eval_weyl(m, w14, w14);
      double ap12 = eval_weyl(m, w14, w24);
      double bp1 = 0.5 * eval_weyl(m, w14, w34);
      double bp2 = 0.5 * eval_weyl(m, w24, w34);
      double rp = 0.25 * eval_weyl(m, w34, w34);
      double sp = 0.5 * eval_weyl(m, w12, w34);
      double bbp1 = 0.5 * eval_weyl(m, w13, w43);
      double bbp2 = 0.5 * eval_weyl(m, w23, w43);
      double abp11 = eval_weyl(m, w13, w13);
      double abp12 = eval_weyl(m, w13, w23);

      al_o(a, b) = Complex(ap11, ap12);
      be_o(a, b) = Complex(bp1, bp2);
      rh_o(a, b) = Complex(rp, rh_v(a, b).imag());
      sg_o(a, b) = Complex(sp, sg_v(a, b).imag());
      bb_o(a, b) = Complex(bbp1, bbp2);
      ab_o(a, b) = Complex(abp11, abp12);

      // Ricci rows at leading order; the chib rows and the lapse relation
      // are exact
      Complex fc = f_v(a, b);
      Complex div_f(d1f_v(a, b).real(), 0.0);
      tc_o(a, b) = lam * (tc_v(a, b) + div_f);
      ch_o(a, b) = lam * (ch_v(a, b) - d2sf_v(a, b));
      tb_o(a, b) = tb_v(a, b) / lam;
      cb_o(a, b) = cb_v(a, b) / lam;
      eta_o(a, b) = eta_v(a, b) - omb_v(a, b).real() * fc;
      etb_o(a, b) = etb_v(a, b) + 0.25 * tb_v(a, b).real() * fc;
      ze_o(a, b) = 0.5 * (eta_o(a, b) - etb_o(a, b));
      om_o(a, b) = lam * om_v(a, b);
      omb_o(a, b) = omb_v(a, b) / lam;
      Om_o(a, b) = Om_v(a, b) / lam;

      double l2 = lam * lam;
      auto bump = [&rem](const char* k, double v) {
        double& slot = rem[k];
        slot = std::max(slot, v);
      };
      bump("alpha", std::abs(al_o(a, b) / l2 - al_v(a, b)));
      bump("beta", std::abs(be_o(a, b) / lam - be_v(a, b)));
      bump("rho", std::abs(rp - rh));
      bump("sigma", std::abs(sp - sg));
      bump("betab", std::abs(lam * bb_o(a, b) - bb_v(a, b)));
      bump("alphab", std::abs(l2 * ab_o(a, b) - ab_v(a, b)));
      bump("tr_chib", std::abs(lam * tb_o(a, b) - tb_v(a, b)));
      bump("chib_hat", std::abs(lam * cb_o(a, b) - cb_v(a, b)));
      bump("curl_f", std::abs(d1f_v(a, b).imag()));
    }

  SphereSlice s = in;
  s.curv.alpha = truncated(analyze(2, al_o, work), base);
  s.curv.beta = truncated(analyze(1, be_o, work), base);
  s.curv.rho = truncated(analyze(0, rh_o, work), base);
  s.curv.sigma = truncated(analyze(0, sg_o, work), base);
  s.curv.betab = truncated(analyze(-1, bb_o, work), base);
  s.curv.alphab = truncated(analyze(-2, ab_o, work), base);
  s.ricci.chi_hat = truncated(analyze(2, ch_o, work), base);
  s.ricci.tr_chi = truncated(analyze(0, tc_o, work), base);
  s.ricci.chib_hat = truncated(analyze(-2, cb_o, work), base);
  s.ricci.tr_chib = truncated(analyze(0, tb_o, work), base);
  s.ricci.eta = truncated(analyze(1, eta_o, work), base);
  s.ricci.etab = truncated(analyze(1, etb_o, work), base);
  s.ricci.zeta = truncated(analyze(1, ze_o, work), base);
  s.ricci.omega = truncated(analyze(0, om_o, work), base);
  s.ricci.omegab = truncated(analyze(0, omb_o, work), base);
  s.Omega = truncated(analyze(0, Om_o, work), base);
  out.slice = s;
  return out;
}

// ---- oscillation norms -------------------------------------------------------

namespace {

// centered difference of the transform's f across one grid direction,
// one-sided at the boundary; returns the plain coordinate derivative
SpinField family_derivative(
    const FoliationGrid& grid,
    const std::function<FrameTransform(const SphereSlice&)>& transform_at,
    int i, int j, bool along_u) {
  int nu = static_cast<int>(grid.slices.size());
  int nubar = nu > 0 ? static_cast<int>(grid.slices[0].size()) : 0;
  int pos = along_u ? i : j;
  int n = along_u ? nu : nubar;
  double h = along_u ? grid.du : grid.dubar;
  auto f_at = [&](int p) {
    const SphereSlice& sl = along_u ? grid.slices[p][j] : grid.slices[i][p];
    return transform_at(sl).f;
  };
  SpinField out;
  if (pos > 0 && pos + 1 < n) {
    out = f_at(pos + 1);
    out -= f_at(pos - 1);
    out *= 1.0 / (2.0 * h);
  } else if (pos + 1 < n) {
    out = f_at(pos + 1);
    out -= f_at(pos);
    out *= 1.0 / h;
  } else if (pos > 0) {
    out = f_at(pos);
    out -= f_at(pos - 1);
    out *= 1.0 / h;
  } else {
    out = f_at(pos);
    out *= 0.0;
  }
  return out;
}

}  // namespace

OscNorms osc_norms(
    const FoliationGrid& grid, const SlabRegion& region,
    const std::function<FrameTransform(const SphereSlice&)>& transform_at,
    const std::function<double(const SphereSlice&)>& radius_prime, double s,
    OscWeight variant) {
  int nu = static_cast<int>(grid.slices.size());
  int nubar = nu > 0 ? static_cast<int>(grid.slices[0].size()) : 0;
  if (region.i_lo < 0 || region.j_lo < 0 || region.i_lo >= region.i_hi ||
      region.j_lo >= region.j_hi || region.i_hi >= nu || region.j_hi >= nubar)
    throw std::invalid_argument("osc norms: malformed slab region");

  OscNorms out;
  for (int i = region.i_lo; i <= region.i_hi; ++i)
    for (int j = region.j_lo; j <= region.j_hi; ++j) {
      const SphereSlice& sl = grid.slices[i][j];
      FrameTransform t = transform_at(sl);
      SpinField f = t.f;
      f.set_radius(sl.r);
      double r = sl.r;
      double om = sl.Omega.mean().real();
      double wgt = variant == OscWeight::initial_layer
                       ? std::pow(r, 0.5 * (s - 1.0))
                       : r * std::pow(std::abs(sl.u), 0.5 * (s - 3.0));

      SpinField fu = family_derivative(grid, transform_at, i, j, true);
      SpinField fv = family_derivative(grid, transform_at, i, j, false);
      // r nabla_3 = (r/Omega) d_u, r nabla_4 = (r/Omega) d_ubar
      fu *= r / om;
      fv *= r / om;

      GridSpec dense = padded_for_quartics(f.grid());
      GridValues v0 = synthesize(f, dense);
      GridValues ve = synthesize(eth(f), dense);
      GridValues vb = synthesize(eth_bar(f), dense);
      GridValues v3 = synthesize(fu, dense);
      GridValues v4 = synthesize(fv, dense);
      GridValues vl = synthesize(truncated(t.lam, dense), dense);
      for (long a = 0; a < v0.rows(); ++a)
        for (long b = 0; b < v0.cols(); ++b) {
          double grad = std::sqrt(
              0.5 * (std::norm(ve(a, b)) + std::norm(vb(a, b))));
          double d1v = std::abs(v0(a, b)) + grad + std::abs(v3(a, b)) +
                       std::abs(v4(a, b));
          out.osc_f = std::max(out.osc_f, wgt * d1v);
          out.osc_lambda =
              std::max(out.osc_lambda, r * std::abs(vl(a, b) - 1.0));
        }
      out.osc_r = std::max(out.osc_r, std::abs(r - radius_prime(sl)));
    }
  return out;
}

// ---- radius diagnostics ------------------------------------------------------

RadiusComparison radius_comparison(const FoliationGrid& grid) {
  int nu = static_cast<int>(grid.slices.size());
  int nubar = nu > 0 ? static_cast<int>(grid.slices[0].size()) : 0;
  RadiusComparison out;
  out.deviation.assign(nu, std::vector<double>(nubar, 0.0));
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nubar; ++j) {
      const SphereSlice& sl = grid.slices[i][j];
      out.deviation[i][j] = sl.r - 0.5 * (sl.ubar - sl.u);
    }
  for (int i = 0; i < nu; ++i)
    for (int j = 1; j + 1 < nubar; ++j) {
      const SphereSlice& sl = grid.slices[i][j];
      double ddev = (out.deviation[i][j + 1] - out.deviation[i][j - 1]) /
                    (2.0 * grid.dubar);
      double rate =
          0.5 * sl.r *
              multiply(sl.Omega, sl.ricci.tr_chi).mean().real() -
          0.5;
      out.transport_residual_max =
          std::max(out.transport_residual_max, std::abs(ddev - rate));
    }
  return out;
}

}  // namespace dnull
