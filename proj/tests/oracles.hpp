#pragma once

// Test-only reference implementations, independent of the library's
// evaluation kernels: direct summation, finite differences, and arithmetic
// from first principles. Expected values in the test suites are computed
// (or bounded) through these.

#include "qpat/potential.hpp"
#include "qpat/types.hpp"
#include "qpat/wave.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <random>

namespace oracle {

using qpat::Complex;
using qpat::CVec;
using qpat::Mat;
using qpat::Vec;

// Bit-stable uniforms: mt19937_64 output mapped directly, no distribution
// objects, so frozen expectations stay frozen.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

inline double gaussian(std::mt19937_64& rng) {
  // Box-Muller; deterministic across standard libraries.
  const double u1 = std::max(uniform01(rng), 1e-300);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * qpat::pi * u2);
}

inline Vec random_point(std::mt19937_64& rng, int dim, double half_width) {
  Vec x(dim);
  for (int a = 0; a < dim; ++a) x[a] = uniform(rng, -half_width, half_width);
  return x;
}

// Random wave set: unit directions scaled by k, no two columns equal or
// antipodal, amplitudes bounded away from the all-zero pair.
inline qpat::WaveConfig random_config(std::mt19937_64& rng, int dim, int pairs, double k) {
  Mat cols(dim, pairs);
  for (int j = 0; j < pairs; ++j) {
    while (true) {
      Vec dir(dim);
      if (dim == 2) {
        const double theta = uniform(rng, 0.0, qpat::pi);  // half-plane: no antipodes
        dir << std::cos(theta), std::sin(theta);
      } else {
        const double z = uniform(rng, 0.0, 1.0);  // upper hemisphere
        const double phi = uniform(rng, 0.0, qpat::two_pi);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        dir.resize(3);
        dir << r * std::cos(phi), r * std::sin(phi), z;
      }
      bool clash = false;
      for (int i = 0; i < j && !clash; ++i) {
        const Vec prev = cols.col(i) / k;
        if (std::min((prev - dir).norm(), (prev + dir).norm()) < 1e-3) clash = true;
      }
      if (!clash) {
        cols.col(j) = k * dir;
        break;
      }
    }
  }
  CVec alpha(pairs), beta(pairs);
  for (int j = 0; j < pairs; ++j) {
    alpha[j] = Complex{uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)};
    beta[j] = Complex{uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)};
    if (std::abs(alpha[j]) + std::abs(beta[j]) < 1e-2) alpha[j] = Complex{1.0, 0.0};
  }
  return qpat::make_wave_config(cols, k, alpha, beta);
}

// Direct summation of the plane-wave superposition via std::polar.
inline Complex field_direct_sum(const qpat::WaveConfig& cfg, const Vec& x) {
  Complex p{0.0, 0.0};
  for (int j = 0; j < cfg.pair_count(); ++j) {
    double theta = 0.0;
    for (int a = 0; a < cfg.dim(); ++a) theta += cfg.wavevectors(a, j) * x[a];
    p += cfg.alpha[j] * std::polar(1.0, theta) + cfg.beta[j] * std::polar(1.0, -theta);
  }
  return p;
}

// Central differences.
template <typename F>
Vec gradient_fd(const F& f, const Vec& x, double h) {
  Vec g(x.size());
  for (int a = 0; a < x.size(); ++a) {
    Vec xp = x, xm = x;
    xp[a] += h;
    xm[a] -= h;
    g[a] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

template <typename F>
CVec gradient_fd_complex(const F& f, const Vec& x, double h) {
  CVec g(x.size());
  for (int a = 0; a < x.size(); ++a) {
    Vec xp = x, xm = x;
    xp[a] += h;
    xm[a] -= h;
    g[a] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

// Jacobian of a vector field by central differences (rows: components).
template <typename F>
Mat jacobian_fd(const F& f, const Vec& x, double h) {
  const Vec f0 = f(x);
  Mat jac(f0.size(), x.size());
  for (int a = 0; a < x.size(); ++a) {
    Vec xp = x, xm = x;
    xp[a] += h;
    xm[a] -= h;
    jac.col(a) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return jac;
}

// Magnitude scale of psi for relative comparisons (the potential itself
// crosses zero, so point values cannot normalize).
inline double psi_scale(const qpat::WaveConfig& cfg, const qpat::ArpCoefficients& co) {
  const double s = cfg.amplitude_sum();
  const double bnorm = co.B.cwiseAbs().rowwise().sum().maxCoeff();  // inf-norm bound
  return std::abs(co.a) * s * s + bnorm * cfg.k * cfg.k * s * s;
}

// Closed-form single-pair potential psi(x1) = 4 a cos^2(k x1) - 4 b k^2 sin^2(k x1)
// for k1 = (k, 0), alpha = beta = 1, B = b I.
inline double one_pair_psi(double a, double b, double k, double x1) {
  const double c = std::cos(k * x1), s = std::sin(k * x1);
  return 4.0 * a * c * c - 4.0 * b * k * k * s * s;
}

}  // namespace oracle
