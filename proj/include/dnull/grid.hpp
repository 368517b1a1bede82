//! \file grid.hpp
//  \brief Sphere sampling: Gauss-Legendre colatitude nodes, uniform longitude,
//         and the resolution bookkeeping shared by all spectral transforms.

#ifndef DNULL_GRID_HPP_
#define DNULL_GRID_HPP_

#include <vector>

namespace dnull {

// Resolution and radius of one sampled sphere. Colatitude uses Gauss-Legendre
// nodes in cos(theta), longitude a uniform periodic grid, so that analysis of
// band-limited data (l <= l_max) is quadrature-exact. Requirements:
//   n_theta >= l_max + 1,   n_phi >= 2*l_max + 1.
struct GridSpec {
  int l_max = 8;
  int n_theta = 0;   // 0 requests the minimal legal value
  int n_phi = 0;
  double r = 1.0;

  GridSpec() = default;
  GridSpec(int lmax, double radius);
  GridSpec(int lmax, int ntheta, int nphi, double radius);

  bool operator==(const GridSpec&) const = default;
};

// GridSpec sized so that triple products of band-limited data re-analyze
// without aliasing (the usual 3/2 padding).
GridSpec padded_for_products(const GridSpec& g);

// GridSpec sized for quartic integrands (L4 norms).
GridSpec padded_for_quartics(const GridSpec& g);

// Gauss-Legendre rule on x = cos(theta) in (-1, 1), weights for integral dx.
// Nodes are ordered by increasing x (theta decreasing from pi to 0).
struct QuadratureRule {
  std::vector<double> x;        // cos(theta_j)
  std::vector<double> w;        // GL weights, sum = 2
  std::vector<double> theta;    // acos(x)
};

// Cached per n; thread-safe.
const QuadratureRule& gauss_legendre(int n);

}  // namespace dnull

#endif  // DNULL_GRID_HPP_
