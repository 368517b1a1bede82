//! \file march.cpp
//  \brief Nested method-of-lines double-null integrator and the cone-wise
//         transports and finite-difference constructions built on it.

#include "dnull/march.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "dnull/snapshot.hpp"
#include "dnull/sphere_ops.hpp"

namespace dnull {

namespace {

// ---- marched state ---------------------------------------------------------

// One u-row of the outer state: every field with a transport equation in the
// e4 direction, plus the radius and the rho average carried as plain scalars.
struct Row {
  double r = 0.0;
  double rho_bar = 0.0;
  SpinField Omega, tr_chi, chi_hat, tr_chib, chib_hat, eta, omegab, beta,
      rho_check, sigma, betab, alphab;

  void axpy(double c, const Row& o) {
    r += c * o.r;
    rho_bar += c * o.rho_bar;
    Omega.axpy(c, o.Omega);
    tr_chi.axpy(c, o.tr_chi);
    chi_hat.axpy(c, o.chi_hat);
    tr_chib.axpy(c, o.tr_chib);
    chib_hat.axpy(c, o.chib_hat);
    eta.axpy(c, o.eta);
    omegab.axpy(c, o.omegab);
    beta.axpy(c, o.beta);
    rho_check.axpy(c, o.rho_check);
    sigma.axpy(c, o.sigma);
    betab.axpy(c, o.betab);
    alphab.axpy(c, o.alphab);
  }
  void scale(double c) {
    r *= c;
    rho_bar *= c;
    Omega *= c;
    tr_chi *= c;
    chi_hat *= c;
    tr_chib *= c;
    chib_hat *= c;
    eta *= c;
    omegab *= c;
    beta *= c;
    rho_check *= c;
    sigma *= c;
    betab *= c;
    alphab *= c;
  }
  bool finite() const {
    if (!std::isfinite(r) || !std::isfinite(rho_bar)) return false;
    for (const SpinField* f :
         {&Omega, &tr_chi, &chi_hat, &tr_chib, &chib_hat, &eta, &omegab,
          &beta, &rho_check, &sigma, &betab, &alphab})
      if (!std::isfinite(f->coeff_norm())) return false;
    return true;
  }
};

using Column = std::vector<Row>;

Row row_from_slice(const SphereSlice& s) {
  Row w;
  w.r = s.r;
  AverageSplit sp = average_split(s.curv.rho);
  w.rho_bar = sp.mean.real();
  w.rho_check = sp.checked;
  w.Omega = s.Omega;
  w.tr_chi = s.ricci.tr_chi;
  w.chi_hat = s.ricci.chi_hat;
  w.tr_chib = s.ricci.tr_chib;
  w.chib_hat = s.ricci.chib_hat;
  w.eta = s.ricci.eta;
  w.omegab = s.ricci.omegab;
  w.beta = s.curv.beta;
  w.sigma = s.curv.sigma;
  w.betab = s.curv.betab;
  w.alphab = s.curv.alphab;
  return w;
}

SphereSlice to_slice(const Row& w, const InnerData& in, double u, double ubar) {
  GridSpec g = w.Omega.grid();
  g.r = w.r;
  auto put = [&](SpinField f) {
    f.set_radius(w.r);
    return f;
  };
  SphereSlice s;
  s.u = u;
  s.ubar = ubar;
  s.r = w.r;
  s.grid = g;
  s.Omega = put(w.Omega);
  s.shift_b = SpinField(1, g);
  s.ricci.chi_hat = put(w.chi_hat);
  s.ricci.tr_chi = put(w.tr_chi);
  s.ricci.chib_hat = put(w.chib_hat);
  s.ricci.tr_chib = put(w.tr_chib);
  s.ricci.eta = put(w.eta);
  s.ricci.etab = put(in.etab);
  s.ricci.omega = put(in.omega);
  s.ricci.omegab = put(w.omegab);
  SpinField zeta = s.ricci.eta;
  zeta -= s.ricci.etab;
  zeta *= 0.5;
  s.ricci.zeta = zeta;
  s.curv.alpha = put(in.alpha);
  s.curv.beta = put(w.beta);
  s.curv.rho = put(w.rho_check);
  s.curv.rho += constant_field(w.rho_bar, g);
  s.curv.sigma = put(w.sigma);
  s.curv.betab = put(w.betab);
  s.curv.alphab = put(w.alphab);
  return s;
}

// Lagrange interpolation of the column at fractional row position t, with up
// to four points (one-sided near the edges); exact on the nodes.
Row interp_row(const Column& col, double t) {
  int nu = static_cast<int>(col.size());
  int nearest = static_cast<int>(std::lround(t));
  if (nearest >= 0 && nearest < nu && std::abs(t - nearest) < 1e-12)
    return col[nearest];
  int npts = std::min(4, nu);
  int j0 = static_cast<int>(std::floor(t)) - (npts - 1) / 2;
  j0 = std::clamp(j0, 0, nu - npts);
  double x = t - j0;
  Row out;
  for (int m = 0; m < npts; ++m) {
    double w = 1.0;
    for (int n = 0; n < npts; ++n)
      if (n != m) w *= (x - n) / (m - n);
    if (m == 0) {
      out = col[j0];
      out.scale(w);
    } else {
      out.axpy(w, col[j0 + m]);
    }
  }
  return out;
}

// Background directional rates of the scalars whose background values are
// nonzero; everything else has rate zero at the linearization point.
struct BgRates {
  double tr_chi = 0.0, tr_chib = 0.0, omegab = 0.0, omega = 0.0;
  double nabla_Omega = 0.0;  // nabla4 Omega (resp. nabla3 Omega)
};

BgRates bg_rates(Direction dir, const BackgroundValues& b) {
  BgRates r;
  if (dir == Direction::e4) {
    r.tr_chi = -0.5 * b.tr_chi * b.tr_chi - 2.0 * b.omega * b.tr_chi;
    r.tr_chib = -0.5 * b.tr_chi * b.tr_chib + 2.0 * b.omega * b.tr_chib +
                2.0 * b.rho_bar;
    r.omegab = 2.0 * b.omega * b.omegab + 0.5 * b.rho_bar;
    r.nabla_Omega = -2.0 * b.Omega * b.omega;
  } else {
    r.tr_chib = -0.5 * b.tr_chib * b.tr_chib - 2.0 * b.omegab * b.tr_chib;
    r.tr_chi = -0.5 * b.tr_chib * b.tr_chi + 2.0 * b.omegab * b.tr_chi +
               2.0 * b.rho_bar;
    r.omega = 2.0 * b.omega * b.omegab + 0.5 * b.rho_bar;
    r.nabla_Omega = -2.0 * b.Omega * b.omegab;
  }
  return r;
}

const BackgroundValues* bg_ptr(const MarchConfig& cfg, double u, double ubar,
                               BackgroundValues& storage) {
  if (cfg.mode != Nonlinearity::linearized) return nullptr;
  storage = background_at(cfg.bg, cfg.M, u, ubar);
  return &storage;
}

// coordinate rate Omega * (nabla X), with the linearized cross term when the
// background rate is nonzero
SpinField coord_rate(const SphereSlice& s, const SpinField& nabla_x,
                     double bg_rate, Nonlinearity mode,
                     const BackgroundValues* bg) {
  double om0 = bg != nullptr ? bg->Omega : 0.0;
  return lin_product(s.Omega, om0, nabla_x, bg_rate, mode);
}

// ---- inner sweep ------------------------------------------------------------

InnerData inner_rate(const Column& col, const InnerData& y, double t,
                     double ubar, const MarchConfig& cfg) {
  Row w = interp_row(col, t);
  double u = cfg.u0 + t * cfg.du;
  SphereSlice s = to_slice(w, y, u, ubar);
  BackgroundValues store;
  const BackgroundValues* bg = bg_ptr(cfg, u, ubar, store);
  BgRates rates =
      bg != nullptr ? bg_rates(Direction::e3, *bg) : BgRates{};
  RicciSet n3 = null_structure_rhs(Direction::e3, s, cfg.mode, bg);
  CurvatureSet b3 = bianchi_rhs(Direction::e3, s, cfg.mode, bg);
  InnerData d;
  d.omega = coord_rate(s, n3.omega, rates.omega, cfg.mode, bg);
  d.etab = coord_rate(s, n3.etab, 0.0, cfg.mode, bg);
  d.alpha = coord_rate(s, b3.alpha, 0.0, cfg.mode, bg);
  return d;
}

void inner_axpy(InnerData& y, double c, const InnerData& o) {
  y.omega.axpy(c, o.omega);
  y.etab.axpy(c, o.etab);
  y.alpha.axpy(c, o.alpha);
}

// Reconstructs {omega, etab, alpha} on every row of the column at parameter
// time ubar by integrating their e3 equations up from the outgoing edge.
std::vector<InnerData> inner_sweep(const Column& col, double ubar,
                                   const EdgeConeData& edge,
                                   const MarchConfig& cfg) {
  int nu = static_cast<int>(col.size());
  const GridSpec& g = col[0].Omega.grid();
  std::vector<InnerData> out;
  out.reserve(nu);
  InnerData y = edge(ubar, g);
  out.push_back(y);
  double h = cfg.du;
  for (int i = 0; i + 1 < nu; ++i) {
    double t = static_cast<double>(i);
    InnerData k1 = inner_rate(col, y, t, ubar, cfg);
    InnerData y2 = y;
    inner_axpy(y2, 0.5 * h, k1);
    InnerData k2 = inner_rate(col, y2, t + 0.5, ubar, cfg);
    InnerData y3 = y;
    inner_axpy(y3, 0.5 * h, k2);
    InnerData k3 = inner_rate(col, y3, t + 0.5, ubar, cfg);
    InnerData y4 = y;
    inner_axpy(y4, h, k3);
    InnerData k4 = inner_rate(col, y4, t + 1.0, ubar, cfg);
    inner_axpy(y, h / 6.0, k1);
    inner_axpy(y, h / 3.0, k2);
    inner_axpy(y, h / 3.0, k3);
    inner_axpy(y, h / 6.0, k4);
    out.push_back(y);
  }
  return out;
}

// ---- outer rate -------------------------------------------------------------

Column column_rate(const Column& col, double ubar, const EdgeConeData& edge,
                   const MarchConfig& cfg) {
  std::vector<InnerData> inner = inner_sweep(col, ubar, edge, cfg);
  int nu = static_cast<int>(col.size());
  Column d(nu);
  for (int i = 0; i < nu; ++i) {
    double u = cfg.u0 + i * cfg.du;
    SphereSlice s = to_slice(col[i], inner[i], u, ubar);
    BackgroundValues store;
    const BackgroundValues* bg = bg_ptr(cfg, u, ubar, store);
    BgRates rates =
        bg != nullptr ? bg_rates(Direction::e4, *bg) : BgRates{};
    double om0 = bg != nullptr ? bg->Omega : 0.0;
    double tr0 = bg != nullptr ? bg->tr_chi : 0.0;
    double omega0 = bg != nullptr ? bg->omega : 0.0;

    RicciSet n4 = null_structure_rhs(Direction::e4, s, cfg.mode, bg);
    CurvatureSet b4 = bianchi_rhs(Direction::e4, s, cfg.mode, bg);
    RhoSplitRhs rs = rho_split_from(Direction::e4, s, b4.rho, cfg.mode, bg);

    Row& dr = d[i];
    dr.r = 0.5 * s.r *
           lin_product(s.Omega, om0, s.ricci.tr_chi, tr0, cfg.mode)
               .mean()
               .real();
    SpinField nabla_Omega =
        lin_product(s.Omega, om0, s.ricci.omega, omega0, cfg.mode);
    nabla_Omega *= -2.0;
    dr.Omega = coord_rate(s, nabla_Omega, rates.nabla_Omega, cfg.mode, bg);
    dr.tr_chi = coord_rate(s, n4.tr_chi, rates.tr_chi, cfg.mode, bg);
    dr.chi_hat = coord_rate(s, n4.chi_hat, 0.0, cfg.mode, bg);
    dr.tr_chib = coord_rate(s, n4.tr_chib, rates.tr_chib, cfg.mode, bg);
    dr.chib_hat = coord_rate(s, n4.chib_hat, 0.0, cfg.mode, bg);
    dr.eta = coord_rate(s, n4.eta, 0.0, cfg.mode, bg);
    dr.omegab = coord_rate(s, n4.omegab, rates.omegab, cfg.mode, bg);
    dr.beta = coord_rate(s, b4.beta, 0.0, cfg.mode, bg);
    dr.sigma = coord_rate(s, b4.sigma, 0.0, cfg.mode, bg);
    dr.betab = coord_rate(s, b4.betab, 0.0, cfg.mode, bg);
    dr.alphab = coord_rate(s, b4.alphab, 0.0, cfg.mode, bg);
    dr.rho_bar = rs.bar;
    dr.rho_check = rs.check;
  }
  return d;
}

void column_axpy(Column& y, double c, const Column& o) {
  for (size_t i = 0; i < y.size(); ++i) y[i].axpy(c, o[i]);
}

[[noreturn]] void abort_march(const MarchConfig& cfg, const SphereSlice& s,
                              const std::string& why) {
  std::string msg = "double null march aborted: " + why;
  if (!cfg.abort_dump_path.empty()) {
    save_slice(cfg.abort_dump_path, s);
    msg += " (diagnostic slice dumped to " + cfg.abort_dump_path + ")";
  }
  throw MarchAbort(msg);
}

void check_column(const Column& col, const std::vector<InnerData>& inner,
                  double ubar, const MarchConfig& cfg) {
  double r_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(col.size()); ++i) {
    const Row& w = col[i];
    double u = cfg.u0 + i * cfg.du;
    if (!w.finite()) {
      abort_march(cfg, to_slice(w, inner[i], u, ubar),
                  "NaN detected at u = " + std::to_string(u));
    }
    if (w.r <= 0.0)
      abort_march(cfg, to_slice(w, inner[i], u, ubar),
                  "region collapsed, r <= 0");
    if (cfg.bg == BackgroundKind::schwarzschild && cfg.M > 0.0 &&
        w.r <= 2.0 * cfg.M * (1.0 + 1e-10))
      abort_march(cfg, to_slice(w, inner[i], u, ubar),
                  "horizon entry, r <= 2M");
    r_min = std::min(r_min, w.r);
  }
  int l_max = col[0].Omega.grid().l_max;
  if (cfg.enforce_step_bound && l_max >= 1) {
    double bound = r_min / (2.0 * l_max);
    if (std::abs(cfg.du) > bound || std::abs(cfg.dubar) > bound)
      abort_march(cfg, to_slice(col[0], inner[0], cfg.u0, ubar),
                  "step-size bound violated: need |du|, |dubar| <= r_min / "
                  "(2 l_max) = " +
                      std::to_string(bound));
  }
}

}  // namespace

FoliationGrid march_continue(FoliationGrid grid, const EdgeConeData& edge,
                             const MarchConfig& cfg) {
  if (cfg.order != 4)
    throw std::invalid_argument("march: only order 4 is supported");
  int nu = static_cast<int>(grid.slices.size());
  if (nu == 0 || nu != cfg.n_u)
    throw std::invalid_argument("march: grid rows do not match cfg.n_u");
  int done = static_cast<int>(grid.slices[0].size());
  if (done == 0) throw std::invalid_argument("march: empty grid");
  if (std::abs(grid.du - cfg.du) > 1e-12 ||
      std::abs(grid.dubar - cfg.dubar) > 1e-12)
    throw std::invalid_argument("march: grid spacing disagrees with cfg");

  // state from the last stored column
  Column y;
  y.reserve(nu);
  for (int i = 0; i < nu; ++i) y.push_back(row_from_slice(grid.slices[i][done - 1]));

  double h = cfg.dubar;
  for (int j = done; j < cfg.n_ubar; ++j) {
    double ubar = cfg.ubar0 + (j - 1) * h;
    Column k1 = column_rate(y, ubar, edge, cfg);
    Column y2 = y;
    column_axpy(y2, 0.5 * h, k1);
    Column k2 = column_rate(y2, ubar + 0.5 * h, edge, cfg);
    Column y3 = y;
    column_axpy(y3, 0.5 * h, k2);
    Column k3 = column_rate(y3, ubar + 0.5 * h, edge, cfg);
    Column y4 = y;
    column_axpy(y4, h, k3);
    Column k4 = column_rate(y4, ubar + h, edge, cfg);
    column_axpy(y, h / 6.0, k1);
    column_axpy(y, h / 3.0, k2);
    column_axpy(y, h / 3.0, k3);
    column_axpy(y, h / 6.0, k4);

    double ubar_new = cfg.ubar0 + j * h;
    if (cfg.reproject_rho_mean)
      for (Row& w : y) w.rho_check.at(0, 0) = Complex(0.0, 0.0);
    std::vector<InnerData> inner = inner_sweep(y, ubar_new, edge, cfg);
    check_column(y, inner, ubar_new, cfg);
    for (int i = 0; i < nu; ++i) {
      grid.slices[i].push_back(
          to_slice(y[i], inner[i], cfg.u0 + i * cfg.du, ubar_new));
      // re-extract the state from what was stored, so resuming from a
      // checkpoint retraces the identical arithmetic
      y[i] = row_from_slice(grid.slices[i].back());
    }
  }
  return grid;
}

FoliationGrid double_null_march(const std::vector<SphereSlice>& initial_column,
                                const EdgeConeData& edge,
                                const MarchConfig& cfg) {
  if (cfg.order != 4)
    throw std::invalid_argument("march: only order 4 is supported");
  int nu = static_cast<int>(initial_column.size());
  if (nu == 0 || nu != cfg.n_u)
    throw std::invalid_argument(
        "march: initial column size does not match cfg.n_u");
  if (cfg.n_ubar < 1) throw std::invalid_argument("march: n_ubar < 1");
  double tol = 1e-9 * (1.0 + std::abs(cfg.u0) + std::abs(cfg.ubar0));
  for (int i = 0; i < nu; ++i) {
    const SphereSlice& s = initial_column[i];
    if (std::abs(s.u - (cfg.u0 + i * cfg.du)) > tol ||
        std::abs(s.ubar - cfg.ubar0) > tol)
      throw std::invalid_argument(
          "march: initial column coordinates disagree with cfg");
    if (s.grid.l_max != initial_column[0].grid.l_max)
      throw std::invalid_argument("march: mixed resolutions in column");
  }

  Column y;
  y.reserve(nu);
  for (const SphereSlice& s : initial_column) y.push_back(row_from_slice(s));
  std::vector<InnerData> inner = inner_sweep(y, cfg.ubar0, edge, cfg);
  check_column(y, inner, cfg.ubar0, cfg);

  FoliationGrid grid;
  grid.du = cfg.du;
  grid.dubar = cfg.dubar;
  grid.slices.resize(nu);
  for (int i = 0; i < nu; ++i)
    grid.slices[i].push_back(
        to_slice(y[i], inner[i], cfg.u0 + i * cfg.du, cfg.ubar0));
  return march_continue(std::move(grid), edge, cfg);
}

// ---- linearized initial data ------------------------------------------------

namespace {

// State of the incoming-direction column integration: every field with a
// transport equation in the e3 direction, plus the coordinate scalars. The
// fields without an e3 equation (eta, omegab, alphab) stay at their
// background values along the column.
struct ColState {
  double r = 0.0;
  double rho_bar = 0.0;
  SpinField Omega, tr_chi, chi_hat, tr_chib, chib_hat, etab, omega, alpha,
      beta, rho_check, sigma, betab;

  void axpy(double c, const ColState& o) {
    r += c * o.r;
    rho_bar += c * o.rho_bar;
    Omega.axpy(c, o.Omega);
    tr_chi.axpy(c, o.tr_chi);
    chi_hat.axpy(c, o.chi_hat);
    tr_chib.axpy(c, o.tr_chib);
    chib_hat.axpy(c, o.chib_hat);
    etab.axpy(c, o.etab);
    omega.axpy(c, o.omega);
    alpha.axpy(c, o.alpha);
    beta.axpy(c, o.beta);
    rho_check.axpy(c, o.rho_check);
    sigma.axpy(c, o.sigma);
    betab.axpy(c, o.betab);
  }
};

SphereSlice col_to_slice(const ColState& w, BackgroundKind kind, double M,
                         double u, double ubar) {
  GridSpec g = w.Omega.grid();
  g.r = w.r;
  auto put = [&](SpinField f) {
    f.set_radius(w.r);
    return f;
  };
  BackgroundValues b0 = background_at(kind, M, u, ubar);
  SphereSlice s;
  s.u = u;
  s.ubar = ubar;
  s.r = w.r;
  s.grid = g;
  s.Omega = put(w.Omega);
  s.shift_b = SpinField(1, g);
  s.ricci.chi_hat = put(w.chi_hat);
  s.ricci.tr_chi = put(w.tr_chi);
  s.ricci.chib_hat = put(w.chib_hat);
  s.ricci.tr_chib = put(w.tr_chib);
  s.ricci.eta = SpinField(1, g);
  s.ricci.etab = put(w.etab);
  s.ricci.omega = put(w.omega);
  s.ricci.omegab = constant_field(b0.omegab, g);
  SpinField zeta = s.ricci.eta;
  zeta -= s.ricci.etab;
  zeta *= 0.5;
  s.ricci.zeta = zeta;
  s.curv.alpha = put(w.alpha);
  s.curv.beta = put(w.beta);
  s.curv.rho = put(w.rho_check);
  s.curv.rho += constant_field(w.rho_bar, g);
  s.curv.sigma = put(w.sigma);
  s.curv.betab = put(w.betab);
  s.curv.alphab = SpinField(2, g);
  return s;
}

ColState col_rate(const ColState& y, BackgroundKind kind, double M, double u,
                  double ubar) {
  SphereSlice s = col_to_slice(y, kind, M, u, ubar);
  BackgroundValues b0 = background_at(kind, M, u, ubar);
  const Nonlinearity mode = Nonlinearity::linearized;
  BgRates rates = bg_rates(Direction::e3, b0);
  RicciSet n3 = null_structure_rhs(Direction::e3, s, mode, &b0);
  CurvatureSet c3 = bianchi_rhs(Direction::e3, s, mode, &b0);
  RhoSplitRhs rs = rho_split_from(Direction::e3, s, c3.rho, mode, &b0);
  ColState d;
  d.r = 0.5 * s.r *
        lin_product(s.Omega, b0.Omega, s.ricci.tr_chib, b0.tr_chib, mode)
            .mean()
            .real();
  SpinField nabla_Omega =
      lin_product(s.Omega, b0.Omega, s.ricci.omegab, b0.omegab, mode);
  nabla_Omega *= -2.0;
  d.Omega = coord_rate(s, nabla_Omega, rates.nabla_Omega, mode, &b0);
  d.tr_chi = coord_rate(s, n3.tr_chi, rates.tr_chi, mode, &b0);
  d.chi_hat = coord_rate(s, n3.chi_hat, 0.0, mode, &b0);
  d.tr_chib = coord_rate(s, n3.tr_chib, rates.tr_chib, mode, &b0);
  d.chib_hat = coord_rate(s, n3.chib_hat, 0.0, mode, &b0);
  d.etab = coord_rate(s, n3.etab, 0.0, mode, &b0);
  d.omega = coord_rate(s, n3.omega, rates.omega, mode, &b0);
  d.alpha = coord_rate(s, c3.alpha, 0.0, mode, &b0);
  d.beta = coord_rate(s, c3.beta, 0.0, mode, &b0);
  d.sigma = coord_rate(s, c3.sigma, 0.0, mode, &b0);
  d.betab = coord_rate(s, c3.betab, 0.0, mode, &b0);
  d.rho_bar = rs.bar;
  d.rho_check = rs.check;
  return d;
}

}  // namespace

std::vector<SphereSlice> lin_initial_column(BackgroundKind kind, double M,
                                            double u0, double ubar0, double du,
                                            int n_u, const GridSpec& g,
                                            const ColumnSeed& seed) {
  if (n_u < 1) throw std::invalid_argument("lin_initial_column: n_u < 1");
  if (seed.l < 2 || seed.l > g.l_max || std::abs(seed.m) > seed.l)
    throw std::invalid_argument(
        "lin_initial_column: seed mode outside 2 <= l <= l_max, |m| <= l");

  SphereSlice corner = exact_background(kind, M, u0, ubar0, g);
  ColState y;
  y.r = corner.r;
  AverageSplit sp = average_split(corner.curv.rho);
  y.rho_bar = sp.mean.real();
  y.rho_check = sp.checked;
  y.Omega = corner.Omega;
  y.tr_chi = corner.ricci.tr_chi;
  y.chi_hat = corner.ricci.chi_hat;
  y.tr_chib = corner.ricci.tr_chib;
  y.chib_hat = corner.ricci.chib_hat;
  y.etab = corner.ricci.etab;
  y.omega = corner.ricci.omega;
  y.alpha = corner.curv.alpha;
  y.beta = corner.curv.beta;
  y.sigma = corner.curv.sigma;
  y.betab = corner.curv.betab;

  int l = seed.l, m = seed.m;
  y.alpha.at(l, m) += seed.alpha;
  y.beta.at(l, m) += seed.beta;
  y.rho_check.at(l, m) += seed.rho;
  y.sigma.at(l, m) += seed.sigma;
  y.betab.at(l, m) += seed.betab;
  y.chi_hat.at(l, m) += seed.chi_hat;
  y.tr_chi.at(l, m) += seed.tr_chi;
  y.chib_hat.at(l, m) += seed.chib_hat;
  y.tr_chib.at(l, m) += seed.tr_chib;
  y.etab.at(l, m) += seed.etab;
  y.omega.at(l, m) += seed.omega;

  std::vector<SphereSlice> out;
  out.reserve(n_u);
  double h = du;
  for (int i = 0;; ++i) {
    double u = u0 + i * du;
    out.push_back(col_to_slice(y, kind, M, u, ubar0));
    if (i + 1 == n_u) break;
    ColState k1 = col_rate(y, kind, M, u, ubar0);
    ColState y2 = y;
    y2.axpy(0.5 * h, k1);
    ColState k2 = col_rate(y2, kind, M, u + 0.5 * h, ubar0);
    ColState y3 = y;
    y3.axpy(0.5 * h, k2);
    ColState k3 = col_rate(y3, kind, M, u + 0.5 * h, ubar0);
    ColState y4 = y;
    y4.axpy(h, k3);
    ColState k4 = col_rate(y4, kind, M, u + h, ubar0);
    y.axpy(h / 6.0, k1);
    y.axpy(h / 3.0, k2);
    y.axpy(h / 3.0, k3);
    y.axpy(h / 6.0, k4);
  }
  return out;
}

EdgeConeData frozen_edge(const SphereSlice& top) {
  InnerData d;
  d.omega = top.ricci.omega;
  d.etab = top.ricci.etab;
  d.alpha = top.curv.alpha;
  int l_max = top.grid.l_max;
  return [d, l_max](double, const GridSpec& g) {
    if (g.l_max != l_max)
      throw std::invalid_argument("frozen_edge: resolution mismatch");
    return d;
  };
}

// ---- checkpoint -------------------------------------------------------------

void save_grid(const std::string& path, const FoliationGrid& grid) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_grid: cannot open " + path);
  int nu = static_cast<int>(grid.slices.size());
  int nubar = nu > 0 ? static_cast<int>(grid.slices[0].size()) : 0;
  out << "dnull-grid 1\n";
  out.precision(17);
  out << "meta " << nu << " " << nubar << " " << grid.du << " " << grid.dubar
      << " " << grid.s << "\n";
  for (int i = 0; i < nu; ++i) {
    if (static_cast<int>(grid.slices[i].size()) != nubar)
      throw std::runtime_error("save_grid: ragged grid");
    for (int j = 0; j < nubar; ++j) write_slice(out, grid.slices[i][j]);
  }
  if (!out) throw std::runtime_error("save_grid: write failed for " + path);
}

FoliationGrid load_grid(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_grid: cannot open " + path);
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (!in || magic != "dnull-grid" || version != 1)
    throw std::runtime_error("load_grid: not a grid checkpoint: " + path);
  std::string tag;
  int nu = 0, nubar = 0;
  FoliationGrid grid;
  in >> tag >> nu >> nubar >> grid.du >> grid.dubar >> grid.s;
  if (!in || tag != "meta" || nu <= 0 || nubar <= 0)
    throw std::runtime_error("load_grid: malformed metadata in " + path);
  in.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
  grid.slices.resize(nu);
  for (int i = 0; i < nu; ++i) {
    grid.slices[i].reserve(nubar);
    for (int j = 0; j < nubar; ++j) grid.slices[i].push_back(read_slice(in));
  }
  return grid;
}

// ---- weighted cone transport ------------------------------------------------

TransportResult weighted_transport(const TransportSpec& spec,
                                   const SpinField& initial,
                                   BackgroundKind bg, double M, double u_fixed,
                                   double start, double step, int n_steps,
                                   const TransportSource& source) {
  bool out_going = spec.direction == Direction::e4;
  auto values = [&](double c) {
    return out_going ? background_at(bg, M, u_fixed, c)
                     : background_at(bg, M, c, u_fixed);
  };
  TransportResult res;
  res.lambda1 =
      2.0 * (spec.lambda0 - (spec.p_norm > 0 ? 1.0 / spec.p_norm : 0.0));

  SpinField y = initial;
  auto rate = [&](double c, const SpinField& f) {
    BackgroundValues b = values(c);
    double tr = out_going ? b.tr_chi : b.tr_chib;
    SpinField d =
        source ? source(c, b.r, f.grid()) : SpinField(f.spin(), f.grid());
    d.axpy(-spec.lambda0 * tr, f);
    d *= b.Omega;
    return d;
  };
  auto record = [&](double c) {
    BackgroundValues b = values(c);
    SpinField f = y;
    f.set_radius(b.r);
    res.coord.push_back(c);
    res.radius.push_back(b.r);
    res.monitored.push_back(std::pow(b.r, res.lambda1) *
                            lp_norm(spec.p_norm, f));
    res.fields.push_back(f);
  };
  record(start);
  for (int k = 0; k < n_steps; ++k) {
    double c = start + k * step;
    SpinField k1 = rate(c, y);
    SpinField y2 = y;
    y2.axpy(0.5 * step, k1);
    SpinField k2 = rate(c + 0.5 * step, y2);
    SpinField y3 = y;
    y3.axpy(0.5 * step, k2);
    SpinField k3 = rate(c + 0.5 * step, y3);
    SpinField y4 = y;
    y4.axpy(step, k3);
    SpinField k4 = rate(c + step, y4);
    y.axpy(step / 6.0, k1);
    y.axpy(step / 3.0, k2);
    y.axpy(step / 3.0, k3);
    y.axpy(step / 6.0, k4);
    record(c + step);
  }
  return res;
}

// ---- finite-difference auxiliaries ------------------------------------------

namespace {

void need_stencil(int idx, int count, const char* who) {
  if (idx < 2 || idx + 2 >= count)
    throw std::out_of_range(std::string(who) +
                            ": fourth order stencil needs two neighbors on "
                            "each side");
}

// fourth order centered derivative of slice data selected by `pick`, taken
// along the ubar (axis = 1) or u (axis = 0) direction at (i, j)
template <class Pick>
SpinField centered_d(const FoliationGrid& grid, int i, int j, int axis,
                     double h, const Pick& pick) {
  auto at = [&](int off) -> SpinField {
    const SphereSlice& s =
        axis == 1 ? grid.slices[i][j + off] : grid.slices[i + off][j];
    SpinField f = pick(s);
    f.set_radius(grid.slices[i][j].r);
    return f;
  };
  SpinField d = at(-2);
  d.axpy(-8.0, at(-1));
  d.axpy(8.0, at(1));
  d.axpy(-1.0, at(2));
  d *= 1.0 / (12.0 * h);
  return d;
}

double centered_d_radius(const FoliationGrid& grid, int i, int j, int axis,
                         double h) {
  auto at = [&](int off) {
    return axis == 1 ? grid.slices[i][j + off].r : grid.slices[i + off][j].r;
  };
  return (at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2)) / (12.0 * h);
}

}  // namespace

TeukolskyAux teukolsky_aux(const FoliationGrid& grid, int i, int j,
                           Nonlinearity mode) {
  if (i < 0 || i >= static_cast<int>(grid.slices.size()))
    throw std::out_of_range("teukolsky_aux: row out of range");
  need_stencil(j, static_cast<int>(grid.slices[i].size()), "teukolsky_aux");
  const SphereSlice& s = grid.slices[i][j];
  // d/dubar of the coefficients is Omega nabla4 in the transported frame
  SpinField dal = centered_d(grid, i, j, 1, grid.dubar,
                             [](const SphereSlice& q) { return q.curv.alpha; });
  double dr = centered_d_radius(grid, i, j, 1, grid.dubar);
  SpinField x = dal;
  x *= s.r;
  x.axpy(5.0 * dr, s.curv.alpha);
  TeukolskyAux out;
  if (mode == Nonlinearity::linearized) {
    x *= 1.0 / s.Omega.mean().real();
    out.alpha_ring = x;
  } else {
    out.alpha_ring = multiply(reciprocal(s.Omega), x);
  }
  out.alpha_slash = d2(s.curv.alpha);
  out.alpha_slash *= s.r;
  return out;
}

TeukolskyAuxBar teukolsky_aux_bar(const FoliationGrid& grid, int i, int j,
                                  Nonlinearity mode) {
  need_stencil(i, static_cast<int>(grid.slices.size()), "teukolsky_aux_bar");
  if (j < 0 || j >= static_cast<int>(grid.slices[i].size()))
    throw std::out_of_range("teukolsky_aux_bar: column out of range");
  const SphereSlice& s = grid.slices[i][j];
  SpinField dal = centered_d(grid, i, j, 0, grid.du,
                             [](const SphereSlice& q) { return q.curv.alphab; });
  double dr = centered_d_radius(grid, i, j, 0, grid.du);
  SpinField x = dal;
  x *= s.r;
  x.axpy(5.0 * dr, s.curv.alphab);
  TeukolskyAuxBar out;
  if (mode == Nonlinearity::linearized) {
    x *= 1.0 / s.Omega.mean().real();
    out.alphab_ring = x;
  } else {
    out.alphab_ring = multiply(reciprocal(s.Omega), x);
  }
  out.alphab_slash = d2(s.curv.alphab);
  out.alphab_slash *= s.r;
  return out;
}

double commutator_residual(const FoliationGrid& grid, int i, int j,
                           const ScalarProfile& f) {
  if (i < 0 || i >= static_cast<int>(grid.slices.size()))
    throw std::out_of_range("commutator_residual: row out of range");
  need_stencil(j, static_cast<int>(grid.slices[i].size()),
               "commutator_residual");
  const SphereSlice& s = grid.slices[i][j];
  auto f_at = [&](const SphereSlice& q) { return f(q.u, q.ubar, q.grid); };

  // Omega nabla4 (r grad f) from the coefficient stencil
  SpinField lhs = centered_d(grid, i, j, 1, grid.dubar,
                             [&](const SphereSlice& q) {
                               SpinField g = grad(f_at(q));
                               g *= q.r;
                               return g;
                             });
  // minus r grad(Omega nabla4 f)
  SpinField df = centered_d(grid, i, j, 1, grid.dubar, f_at);
  SpinField gdf = grad(df);
  lhs.axpy(-s.r, gdf);

  // predicted: (Omega e4 r) grad f - r Omega chi . grad f
  SpinField gf = grad(f_at(s));
  double dr = centered_d_radius(grid, i, j, 1, grid.dubar);
  SpinField pred = gf;
  pred *= dr;
  SpinField contraction = multiply(s.Omega, dot12(gf, s.ricci.chi_hat));
  contraction.axpy(0.5, multiply(multiply(s.Omega, s.ricci.tr_chi), gf));
  pred.axpy(-s.r, contraction);

  lhs -= pred;
  return lp_norm(2, lhs);
}

// ---- renormalized potentials ------------------------------------------------

namespace {

struct ConeSample {
  double r = 0.0;
  SpinField Omega, tr_chib, sigma;
};

ConeSample cone_sample(const std::vector<SphereSlice>& cone, double t) {
  int n = static_cast<int>(cone.size());
  int nearest = static_cast<int>(std::lround(t));
  auto from = [&](const SphereSlice& s) {
    ConeSample c;
    c.r = s.r;
    c.Omega = s.Omega;
    c.tr_chib = s.ricci.tr_chib;
    c.sigma = s.curv.sigma;
    return c;
  };
  if (nearest >= 0 && nearest < n && std::abs(t - nearest) < 1e-12)
    return from(cone[nearest]);
  int npts = std::min(4, n);
  int j0 = std::clamp(static_cast<int>(std::floor(t)) - (npts - 1) / 2, 0,
                      n - npts);
  double x = t - j0;
  ConeSample out;
  bool first = true;
  for (int m = 0; m < npts; ++m) {
    double w = 1.0;
    for (int nn = 0; nn < npts; ++nn)
      if (nn != m) w *= (x - nn) / (m - nn);
    ConeSample c = from(cone[j0 + m]);
    if (first) {
      out.r = w * c.r;
      out.Omega = c.Omega;
      out.Omega *= w;
      out.tr_chib = c.tr_chib;
      out.tr_chib *= w;
      out.sigma = c.sigma;
      out.sigma *= w;
      first = false;
    } else {
      out.r += w * c.r;
      out.Omega.axpy(w, c.Omega);
      out.tr_chib.axpy(w, c.tr_chib);
      out.sigma.axpy(w, c.sigma);
    }
  }
  out.Omega.set_radius(out.r);
  out.tr_chib.set_radius(out.r);
  out.sigma.set_radius(out.r);
  return out;
}

struct PotState {
  SpinField omega_dag, mub_dag, chi_dag;
  void axpy(double c, const PotState& o) {
    omega_dag.axpy(c, o.omega_dag);
    mub_dag.axpy(c, o.mub_dag);
    chi_dag.axpy(c, o.chi_dag);
  }
};

}  // namespace

PotentialSeries renormalized_potentials(const std::vector<SphereSlice>& cone,
                                        Nonlinearity mode, BackgroundKind bg,
                                        double M) {
  int n = static_cast<int>(cone.size());
  if (n == 0)
    throw std::invalid_argument("renormalized_potentials: empty cone");
  double du = n > 1 ? cone[1].u - cone[0].u : 0.0;
  for (int i = 1; i < n; ++i) {
    if (std::abs(cone[i].u - cone[0].u - i * du) >
            1e-9 * (1.0 + std::abs(cone[i].u)) ||
        std::abs(cone[i].ubar - cone[0].ubar) > 1e-9)
      throw std::invalid_argument(
          "renormalized_potentials: cone slices not uniform in u");
  }
  const GridSpec& g0 = cone[0].grid;
  double ubar = cone[0].ubar;
  bool lin = mode == Nonlinearity::linearized;

  auto bg_at = [&](double u) {
    return lin ? background_at(bg, M, u, ubar) : BackgroundValues{};
  };
  auto rate = [&](double t, const PotState& y) {
    ConeSample c = cone_sample(cone, t);
    double u = cone[0].u + t * du;
    BackgroundValues b = bg_at(u);
    double om0 = lin ? b.Omega : 0.0;
    double trb0 = lin ? b.tr_chib : 0.0;
    // the accumulated state rides along the cone, so it carries the sample
    // radius for the products below
    SpinField mub_cur = y.mub_dag;
    mub_cur.set_radius(c.r);
    SpinField chi_cur = y.chi_dag;
    chi_cur.set_radius(c.r);
    // nabla3 rates
    SpinField n_om = lin_product(c.Omega, om0, c.sigma, 0.0, mode);
    n_om *= 0.5;
    SpinField n_mub = c.sigma;
    n_mub -= mub_cur;
    n_mub = lin_product(c.tr_chib, trb0, n_mub, 0.0, mode);
    SpinField n_chi = chi_cur;
    n_chi = lin_product(c.tr_chib, trb0, n_chi, 0.0, mode);
    n_chi *= -1.0;
    n_chi.axpy(4.0, c.sigma);
    // coordinate rates
    PotState d;
    d.omega_dag = lin_product(c.Omega, om0, n_om, 0.0, mode);
    d.mub_dag = lin_product(c.Omega, om0, n_mub, 0.0, mode);
    d.chi_dag = lin_product(c.Omega, om0, n_chi, 0.0, mode);
    return d;
  };

  PotState y{SpinField(0, g0), SpinField(0, g0), SpinField(0, g0)};
  PotentialSeries out;
  auto emit = [&](int i, const PotState& st) {
    const SphereSlice& s = cone[i];
    BackgroundValues b = bg_at(s.u);
    double om0 = lin ? b.Omega : 0.0;
    double omega0 = lin ? b.omega : 0.0;
    double trc0 = lin ? b.tr_chi : 0.0;
    double trb0 = lin ? b.tr_chib : 0.0;

    SpinField omega_dag = st.omega_dag;
    omega_dag.set_radius(s.r);
    SpinField mub_dag = st.mub_dag;
    mub_dag.set_radius(s.r);
    SpinField chi_dag = st.chi_dag;
    chi_dag.set_radius(s.r);

    SpinField om_omega =
        lin_product(s.Omega, om0, s.ricci.omega, omega0, mode);
    SpinField om_beta = lin_product(s.Omega, om0, s.curv.beta, 0.0, mode);
    SpinField kappa = grad(om_omega);
    kappa += dual(grad(omega_dag));
    kappa.axpy(-0.5, om_beta);

    // renormalized incoming mass aspect with the expansion product folded in
    SpinField mub_br = real_part(d1(s.ricci.zeta));
    mub_br -= s.curv.rho;
    mub_br.axpy(0.25, lin_product(s.ricci.tr_chi, trc0, s.ricci.tr_chib,
                                  trb0, mode));
    if (!lin) mub_br.axpy(0.5, dot22(s.ricci.chib_hat, s.ricci.chi_hat));
    SpinField Xi = grad(mub_br);
    Xi *= s.r;
    if (!lin) {
      Xi.axpy(0.5 * s.r, dot_tensor_grad(s.ricci.chib_hat, s.ricci.chi_hat));
      SpinField rc = average_split(s.curv.rho).checked;
      Xi.axpy(s.r, multiply(rc, s.ricci.zeta));
    }

    SpinField pair = omega_dag;
    pair *= Complex(0.0, 1.0);
    pair.axpy(-1.0, om_omega);
    SpinField defect = d1_star(pair);
    defect -= kappa;
    defect.axpy(-0.5, om_beta);

    out.omega_dag.push_back(omega_dag);
    out.mub_dag.push_back(mub_dag);
    out.chi_dag.push_back(chi_dag);
    out.kappa_pot.push_back(kappa);
    out.Xi.push_back(Xi);
    out.hoho_residual.push_back(lp_norm(2, defect));
  };

  emit(0, y);
  for (int i = 0; i + 1 < n; ++i) {
    double t = static_cast<double>(i);
    PotState k1 = rate(t, y);
    PotState y2 = y;
    y2.axpy(0.5 * du, k1);
    PotState k2 = rate(t + 0.5, y2);
    PotState y3 = y;
    y3.axpy(0.5 * du, k2);
    PotState k3 = rate(t + 0.5, y3);
    PotState y4 = y;
    y4.axpy(du, k3);
    PotState k4 = rate(t + 1.0, y4);
    y.axpy(du / 6.0, k1);
    y.axpy(du / 3.0, k2);
    y.axpy(du / 3.0, k3);
    y.axpy(du / 6.0, k4);
    emit(i + 1, y);
  }
  return out;
}

std::vector<double> kappa_transport_residual(
    const std::vector<SphereSlice>& cone, const PotentialSeries& pot,
    Nonlinearity mode, BackgroundKind bg, double M) {
  int n = static_cast<int>(cone.size());
  if (static_cast<int>(pot.kappa_pot.size()) != n)
    throw std::invalid_argument(
        "kappa_transport_residual: series does not match cone");
  std::vector<double> out(n, std::numeric_limits<double>::quiet_NaN());
  if (n < 3) return out;
  double du = cone[1].u - cone[0].u;
  bool lin = mode == Nonlinearity::linearized;
  for (int i = 1; i + 1 < n; ++i) {
    const SphereSlice& s = cone[i];
    BackgroundValues b =
        lin ? background_at(bg, M, s.u, s.ubar) : BackgroundValues{};
    double om0 = lin ? b.Omega : 0.0;
    double trb0 = lin ? b.tr_chib : 0.0;
    SpinField dk = pot.kappa_pot[i + 1];
    dk -= pot.kappa_pot[i - 1];
    dk *= 1.0 / (2.0 * du);
    dk.set_radius(s.r);
    // nabla3 kappa = (1/Omega) d/du kappa
    SpinField n3k;
    if (lin) {
      n3k = dk;
      n3k *= 1.0 / om0;
    } else {
      n3k = multiply(reciprocal(s.Omega), dk);
    }
    SpinField res = n3k;
    res.axpy(0.5, lin_product(s.ricci.tr_chib, trb0, pot.kappa_pot[i], 0.0,
                              mode));
    SpinField om_beta = lin_product(s.Omega, om0, s.curv.beta, 0.0, mode);
    res.axpy(-0.25,
             lin_product(s.ricci.tr_chib, trb0, om_beta, 0.0, mode));
    out[i] = lp_norm(2, res);
  }
  return out;
}

}  // namespace dnull
