//! \file grid.cpp
//  \brief Gauss-Legendre rules and grid sizing.

#include "dnull/grid.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace dnull {

GridSpec::GridSpec(int lmax, double radius) : GridSpec(lmax, 0, 0, radius) {}

GridSpec::GridSpec(int lmax, int ntheta, int nphi, double radius)
    : l_max(lmax), n_theta(ntheta), n_phi(nphi), r(radius) {
  if (lmax < 0) throw std::invalid_argument("GridSpec: l_max must be >= 0");
  if (radius <= 0.0) throw std::invalid_argument("GridSpec: r must be > 0");
  if (n_theta == 0) n_theta = l_max + 1;
  if (n_phi == 0) n_phi = 2 * l_max + 1;
  if (n_theta < l_max + 1)
    throw std::invalid_argument("GridSpec: n_theta < l_max + 1");
  if (n_phi < 2 * l_max + 1)
    throw std::invalid_argument("GridSpec: n_phi < 2*l_max + 1");
}

GridSpec padded_for_products(const GridSpec& g) {
  // Quadrature must be exact for degree 3*l_max integrands in both angles.
  int lp = g.l_max + (g.l_max + 1) / 2;
  return GridSpec(g.l_max, lp + 1, 2 * lp + 1, g.r);
}

GridSpec padded_for_quartics(const GridSpec& g) {
  int lp = 2 * g.l_max;
  return GridSpec(g.l_max, lp + 1, 2 * lp + 1, g.r);
}

namespace {

QuadratureRule build_rule(int n) {
  QuadratureRule q;
  q.x.resize(n);
  q.w.resize(n);
  q.theta.resize(n);
  // Newton iteration on P_n with the classic Chebyshev-flavored initial guess.
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double pn = std::legendre(n, x);
      double pnm1 = std::legendre(n - 1, x);
      double dp = n * (x * pn - pnm1) / (x * x - 1.0);
      double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double pnm1 = std::legendre(n - 1, x);
    double dp = n * (x * std::legendre(n, x) - pnm1) / (x * x - 1.0);
    // store by increasing x
    q.x[n - 1 - i] = x;
    q.w[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  for (int i = 0; i < n; ++i) q.theta[i] = std::acos(q.x[i]);
  return q;
}

std::mutex rule_mutex;
std::map<int, QuadratureRule> rule_cache;

}  // namespace

const QuadratureRule& gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  std::lock_guard<std::mutex> lk(rule_mutex);
  auto it = rule_cache.find(n);
  if (it == rule_cache.end()) it = rule_cache.emplace(n, build_rule(n)).first;
  return it->second;
}

}  // namespace dnull
