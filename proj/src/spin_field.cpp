//! \file spin_field.cpp
//  \brief Spin-weighted transforms built on Wigner d recurrences.

#include "dnull/spin_field.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace dnull {

namespace {

// d^l_{mu,nu}(theta) for l in [l0, l_max], l0 = max(|mu|,|nu|), by upward
// recurrence from the closed-form top-row seed. out[l - l0] receives d^l.
void wigner_d_column(int mu, int nu, int l_max, double theta,
                     std::vector<double>& out) {
  const int l0 = std::max(std::abs(mu), std::abs(nu));
  out.assign(l_max - l0 + 1, 0.0);
  if (l0 > l_max) return;

  const double x = std::cos(theta);
  double seed;
  if (l0 == 0) {
    seed = 1.0;
  } else {
    // Reduce to the top row d^{l0}_{l0, n} using
    //   d_{m'm} = (-1)^{m'-m} d_{mm'} = d_{-m,-m'}.
    int n;
    double sign = 1.0;
    if (std::abs(mu) >= std::abs(nu)) {
      if (mu >= 0) {
        n = nu;
      } else {
        n = -nu;
        sign = ((nu - mu) % 2 == 0) ? 1.0 : -1.0;
      }
    } else {
      if (nu >= 0) {
        n = mu;
        sign = ((mu - nu) % 2 == 0) ? 1.0 : -1.0;
      } else {
        n = -mu;
      }
    }
    const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
    double lg = 0.5 * (std::lgamma(2 * l0 + 1) - std::lgamma(l0 + n + 1) -
                       std::lgamma(l0 - n + 1));
    double mag = std::exp(lg) * std::pow(c, l0 + n) * std::pow(s, l0 - n);
    double par = ((l0 - n) % 2 == 0) ? 1.0 : -1.0;
    seed = sign * par * mag;
  }
  out[0] = seed;

  double dm1 = 0.0, d0 = seed;
  int lstart = l0;
  if (l0 == 0 && l_max >= 1) {
    // The l=0 step of the recurrence is degenerate; d^1_{00} = cos(theta).
    out[1] = x;
    dm1 = d0;
    d0 = x;
    lstart = 1;
  }
  for (int l = lstart; l < l_max; ++l) {
    double lp = l + 1.0;
    double c1 = l * std::sqrt((lp * lp - mu * mu) * (lp * lp - nu * nu));
    double c2 = (2 * l + 1) * (l * lp * x - mu * nu);
    double c3 = lp * std::sqrt(double(l * l - mu * mu) * (l * l - nu * nu));
    double dnext = (c2 * d0 - c3 * dm1) / c1;
    out[l + 1 - l0] = dnext;
    dm1 = d0;
    d0 = dnext;
  }
}

struct Plan {
  int l_max, n_theta, n_phi, spin;
  // theta_mat[m + l_max]: (n_theta x (l_max - l_low + 1)) with
  // lambda_{lm}(theta_j) = (-1)^s sqrt((2l+1)/4pi) d^l_{m,-s}(theta_j).
  std::vector<Eigen::MatrixXd> theta_mat;
  Eigen::MatrixXcd synth_phase;  // (n_m x n_phi): e^{+i m phi_k}
  Eigen::MatrixXcd anal_phase;   // (n_phi x n_m): e^{-i m phi_k} 2pi/n_phi
  Eigen::VectorXd w;             // GL weights
};

Plan build_plan(int l_max, int n_theta, int n_phi, int spin) {
  Plan p{l_max, n_theta, n_phi, spin, {}, {}, {}, {}};
  const auto& q = gauss_legendre(n_theta);
  p.w = Eigen::Map<const Eigen::VectorXd>(q.w.data(), n_theta);

  const int n_m = 2 * l_max + 1;
  const double sgn_s = (spin % 2 == 0) ? 1.0 : -1.0;
  p.theta_mat.resize(n_m);
  std::vector<double> col;
  for (int m = -l_max; m <= l_max; ++m) {
    int l_low = std::max(std::abs(m), std::abs(spin));
    int nl = l_max - l_low + 1;
    Eigen::MatrixXd T(n_theta, std::max(nl, 0));
    for (int j = 0; j < n_theta; ++j) {
      wigner_d_column(m, -spin, l_max, q.theta[j], col);
      for (int l = l_low; l <= l_max; ++l) {
        double norm = std::sqrt((2 * l + 1) / (4.0 * M_PI));
        T(j, l - l_low) = sgn_s * norm * col[l - std::max(std::abs(m), std::abs(spin))];
      }
    }
    p.theta_mat[m + l_max] = std::move(T);
  }

  p.synth_phase.resize(n_m, n_phi);
  p.anal_phase.resize(n_phi, n_m);
  for (int k = 0; k < n_phi; ++k) {
    double phi = 2.0 * M_PI * k / n_phi;
    for (int m = -l_max; m <= l_max; ++m) {
      Complex e(std::cos(m * phi), std::sin(m * phi));
      p.synth_phase(m + l_max, k) = e;
      p.anal_phase(k, m + l_max) = std::conj(e) * (2.0 * M_PI / n_phi);
    }
  }
  return p;
}

std::mutex plan_mutex;
std::map<std::tuple<int, int, int, int>, Plan> plan_cache;

const Plan& get_plan(int l_max, int n_theta, int n_phi, int spin) {
  if (std::abs(spin) > kMaxSpin)
    throw std::invalid_argument("spin transform: |spin| > supported maximum");
  std::lock_guard<std::mutex> lk(plan_mutex);
  auto key = std::make_tuple(l_max, n_theta, n_phi, spin);
  auto it = plan_cache.find(key);
  if (it == plan_cache.end())
    it = plan_cache.emplace(key, build_plan(l_max, n_theta, n_phi, spin)).first;
  return it->second;
}

}  // namespace

SpinField::SpinField(int spin, const GridSpec& grid) : spin_(spin), grid_(grid) {
  if (std::abs(spin) > kMaxSpin)
    throw std::invalid_argument("SpinField: |spin| exceeds supported maximum");
  if (grid.l_max < std::abs(spin))
    throw std::invalid_argument("SpinField: l_max < |spin|");
  int lm = std::abs(spin);
  a_.assign((grid.l_max + 1) * (grid.l_max + 1) - lm * lm, Complex(0.0));
}

int SpinField::index(int l, int m) const {
  int lm = std::abs(spin_);
  if (l < lm || l > grid_.l_max || std::abs(m) > l)
    throw std::out_of_range("SpinField::index: (l,m) outside coefficient set");
  return l * l - lm * lm + (m + l);
}

SpinField& SpinField::operator+=(const SpinField& o) {
  for (size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
  return *this;
}
SpinField& SpinField::operator-=(const SpinField& o) {
  for (size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
  return *this;
}
SpinField& SpinField::operator*=(double c) {
  for (auto& v : a_) v *= c;
  return *this;
}
SpinField& SpinField::operator*=(Complex c) {
  for (auto& v : a_) v *= c;
  return *this;
}
void SpinField::axpy(double c, const SpinField& o) {
  for (size_t i = 0; i < a_.size(); ++i) a_[i] += c * o.a_[i];
}

double SpinField::coeff_norm() const {
  double s = 0.0;
  for (const auto& v : a_) s += std::norm(v);
  return std::sqrt(s);
}

Complex SpinField::mean() const {
  if (spin_ != 0)
    throw std::invalid_argument("SpinField::mean: defined for spin 0 only");
  return a_[0] / std::sqrt(4.0 * M_PI);
}

GridValues synthesize(const SpinField& f, const GridSpec& on) {
  if (on.l_max != f.l_max())
    throw std::invalid_argument("synthesize: grid l_max mismatch");
  const Plan& p = get_plan(on.l_max, on.n_theta, on.n_phi, f.spin());
  const int l_maxv = on.l_max;
  Eigen::MatrixXcd G(on.n_theta, 2 * l_maxv + 1);
  for (int m = -l_maxv; m <= l_maxv; ++m) {
    int l_low = std::max(std::abs(m), std::abs(f.spin()));
    int nl = l_maxv - l_low + 1;
    if (nl <= 0) {
      G.col(m + l_maxv).setZero();
      continue;
    }
    Eigen::VectorXd re(nl), im(nl);
    for (int l = l_low; l <= l_maxv; ++l) {
      Complex a = f.at(l, m);
      re[l - l_low] = a.real();
      im[l - l_low] = a.imag();
    }
    const auto& T = p.theta_mat[m + l_maxv];
    G.col(m + l_maxv) = (T * re).cast<Complex>() +
                        Complex(0, 1) * (T * im).cast<Complex>();
  }
  return G * p.synth_phase;
}

GridValues synthesize(const SpinField& f) { return synthesize(f, f.grid()); }

SpinField analyze(int spin, const GridValues& v, const GridSpec& on) {
  if (v.rows() != on.n_theta || v.cols() != on.n_phi)
    throw std::invalid_argument("analyze: value matrix does not match grid");
  const Plan& p = get_plan(on.l_max, on.n_theta, on.n_phi, spin);
  const int l_maxv = on.l_max;
  Eigen::MatrixXcd Fhat = v * p.anal_phase;  // (n_theta x n_m)
  SpinField out(spin, on);
  for (int m = -l_maxv; m <= l_maxv; ++m) {
    int l_low = std::max(std::abs(m), std::abs(spin));
    int nl = l_maxv - l_low + 1;
    if (nl <= 0) continue;
    Eigen::VectorXcd col = Fhat.col(m + l_maxv).cwiseProduct(p.w.cast<Complex>());
    const auto& T = p.theta_mat[m + l_maxv];
    Eigen::VectorXcd a = T.transpose() * col;
    for (int l = l_low; l <= l_maxv; ++l) out.at(l, m) = a[l - l_low];
  }
  return out;
}

SpinField multiply(const SpinField& a, const SpinField& b) {
  if (a.l_max() != b.l_max())
    throw std::invalid_argument("multiply: l_max mismatch");
  if (a.r() != b.r())
    throw std::invalid_argument("multiply: radius mismatch");
  GridSpec pad = padded_for_products(a.grid());
  GridValues va = synthesize(a, pad);
  GridValues vb = synthesize(b, pad);
  SpinField wide = analyze(a.spin() + b.spin(), va.cwiseProduct(vb), pad);
  return truncated(wide, a.grid());
}

SpinField truncated(const SpinField& f, const GridSpec& to) {
  SpinField out(f.spin(), to);
  int l_top = std::min(f.l_max(), to.l_max);
  for (int l = out.l_min(); l <= l_top; ++l)
    for (int m = -l; m <= l; ++m) out.at(l, m) = f.at(l, m);
  return out;
}

SpinField conj_field(const SpinField& f) {
  SpinField out(-f.spin(), f.grid());
  int s = f.spin();
  for (int l = std::abs(s); l <= f.l_max(); ++l)
    for (int m = -l; m <= l; ++m) {
      double sgn = ((s + m) % 2 == 0) ? 1.0 : -1.0;
      out.at(l, m) = sgn * std::conj(f.at(l, -m));
    }
  return out;
}

SpinField real_part(const SpinField& f) {
  if (f.spin() != 0)
    throw std::invalid_argument("real_part: spin 0 only");
  SpinField c = conj_field(f);
  SpinField out = f;
  out += c;
  out *= 0.5;
  return out;
}

SpinField imag_part(const SpinField& f) {
  if (f.spin() != 0)
    throw std::invalid_argument("imag_part: spin 0 only");
  SpinField c = conj_field(f);
  SpinField out = f;
  out -= c;
  out *= Complex(0.0, -0.5);
  return out;
}

SpinField constant_field(Complex c, const GridSpec& grid) {
  SpinField out(0, grid);
  out.at(0, 0) = c * std::sqrt(4.0 * M_PI);
  return out;
}

double sup_abs(const SpinField& f) {
  GridValues v = synthesize(f, padded_for_quartics(f.grid()));
  return v.cwiseAbs().maxCoeff();
}

double off_mode_max(const SpinField& f, int l0, int m0) {
  double mx = 0.0;
  for (int l = f.l_min(); l <= f.l_max(); ++l)
    for (int m = -l; m <= l; ++m) {
      if (l == l0 && m == m0) continue;
      mx = std::max(mx, std::abs(f.at(l, m)));
    }
  return mx;
}

}  // namespace dnull
