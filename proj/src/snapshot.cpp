//! \file snapshot.cpp
//  \brief Versioned text serialization of sphere slices.

#include "dnull/snapshot.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dnull {

namespace {

constexpr const char* kMagic = "dnull-slice";
constexpr int kVersion = 1;

struct FieldRef {
  const char* name;
  SpinField SphereSlice::*direct;
  SpinField RicciSet::*ricci;
  SpinField CurvatureSet::*curv;
};

// Fixed serialization order; names are part of the format.
constexpr std::array<FieldRef, 17> kFields = {{
    {"Omega", &SphereSlice::Omega, nullptr, nullptr},
    {"shift_b", &SphereSlice::shift_b, nullptr, nullptr},
    {"chi_hat", nullptr, &RicciSet::chi_hat, nullptr},
    {"tr_chi", nullptr, &RicciSet::tr_chi, nullptr},
    {"chib_hat", nullptr, &RicciSet::chib_hat, nullptr},
    {"tr_chib", nullptr, &RicciSet::tr_chib, nullptr},
    {"zeta", nullptr, &RicciSet::zeta, nullptr},
    {"eta", nullptr, &RicciSet::eta, nullptr},
    {"etab", nullptr, &RicciSet::etab, nullptr},
    {"omega", nullptr, &RicciSet::omega, nullptr},
    {"omegab", nullptr, &RicciSet::omegab, nullptr},
    {"alpha", nullptr, nullptr, &CurvatureSet::alpha},
    {"beta", nullptr, nullptr, &CurvatureSet::beta},
    {"rho", nullptr, nullptr, &CurvatureSet::rho},
    {"sigma", nullptr, nullptr, &CurvatureSet::sigma},
    {"betab", nullptr, nullptr, &CurvatureSet::betab},
    {"alphab", nullptr, nullptr, &CurvatureSet::alphab},
}};

SpinField& field_of(SphereSlice& s, const FieldRef& ref) {
  if (ref.direct) return s.*(ref.direct);
  if (ref.ricci) return s.ricci.*(ref.ricci);
  return s.curv.*(ref.curv);
}

const SpinField& field_of(const SphereSlice& s, const FieldRef& ref) {
  return field_of(const_cast<SphereSlice&>(s), ref);
}

[[noreturn]] void bad(const std::string& what) {
  throw std::runtime_error("slice snapshot: " + what);
}

}  // namespace

void write_slice(std::ostream& os, const SphereSlice& s) {
  char buf[128];
  os << kMagic << ' ' << kVersion << '\n';
  std::snprintf(buf, sizeof buf, "meta %.17g %.17g %.17g %d %d %d\n", s.u,
                s.ubar, s.r, s.grid.l_max, s.grid.n_theta, s.grid.n_phi);
  os << buf;
  for (const FieldRef& ref : kFields) {
    const SpinField& f = field_of(s, ref);
    os << "field " << ref.name << ' ' << f.spin() << ' ' << f.coeff_count()
       << '\n';
    for (int l = f.l_min(); l <= f.l_max(); ++l)
      for (int m = -l; m <= l; ++m) {
        Complex c = f.at(l, m);
        std::snprintf(buf, sizeof buf, "%d %d %.17g %.17g\n", l, m, c.real(),
                      c.imag());
        os << buf;
      }
  }
  if (!os) bad("write failed");
}

SphereSlice read_slice(std::istream& is) {
  std::string magic;
  int version = 0;
  if (!(is >> magic >> version)) bad("missing header");
  if (magic != kMagic) bad("not a slice snapshot (bad magic '" + magic + "')");
  if (version != kVersion)
    bad("unsupported version " + std::to_string(version));

  std::string tag;
  SphereSlice s;
  int l_max = 0, n_theta = 0, n_phi = 0;
  if (!(is >> tag >> s.u >> s.ubar >> s.r >> l_max >> n_theta >> n_phi) ||
      tag != "meta")
    bad("malformed meta line");
  GridSpec g(l_max, n_theta, n_phi, s.r);
  s.grid = g;
  s.shift_b = SpinField(1, g);
  s.ricci = RicciSet::zero(g);
  s.curv = CurvatureSet::zero(g);
  s.Omega = SpinField(0, g);

  for (const FieldRef& ref : kFields) {
    std::string name;
    int spin = 0, count = 0;
    if (!(is >> tag >> name >> spin >> count) || tag != "field")
      bad("malformed field header");
    if (name != ref.name)
      bad("field order mismatch: expected '" + std::string(ref.name) +
          "', found '" + name + "'");
    SpinField& f = field_of(s, ref);
    if (spin != f.spin()) bad("wrong spin for field '" + name + "'");
    if (count != f.coeff_count())
      bad("wrong coefficient count for field '" + name + "'");
    for (int i = 0; i < count; ++i) {
      int l, m;
      double re, im;
      if (!(is >> l >> m >> re >> im))
        bad("truncated records in field '" + name + "'");
      if (l < f.l_min() || l > f.l_max() || m < -l || m > l)
        bad("mode out of range in field '" + name + "'");
      f.at(l, m) = Complex(re, im);
    }
  }
  return s;
}

void save_slice(const std::string& path, const SphereSlice& s) {
  std::ofstream os(path);
  if (!os) bad("cannot open '" + path + "' for writing");
  write_slice(os, s);
}

SphereSlice load_slice(const std::string& path) {
  std::ifstream is(path);
  if (!is) bad("cannot open '" + path + "' for reading");
  return read_slice(is);
}

}  // namespace dnull
