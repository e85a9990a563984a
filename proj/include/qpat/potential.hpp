#pragma once

#include "qpat/types.hpp"
#include "qpat/wave.hpp"

#include <vector>

namespace qpat {

/// Fluid/particle constants entering the radiation-potential coefficients.
struct MaterialParams {
  double rho0 = 0.0;   // fluid density, kg/m^3
  double c0 = 0.0;     // fluid sound speed, m/s
  double rho_p = 0.0;  // particle density, kg/m^3
  double c_p = 0.0;    // particle sound speed, m/s
  double omega = 0.0;  // angular frequency, rad/s

  void validate() const;  // all strictly positive
};

/// kappa = 1/(rho c^2)
double compressibility(double rho, double c);

struct ScatteringFactors {
  double f1;  // monopole: 1 - kappa_p/kappa_0
  double f2;  // dipole: 2(rho_p - rho_0)/(2 rho_p + rho_0)
};
ScatteringFactors scattering_factors(const MaterialParams& m);

enum class ArpMode { Acoustic, Optical };

/// Coefficients of the radiation potential
///   psi(x) = a |p(x)|^2 - grad p(x)^* B grad p(x).
/// Acoustic mode has B = b I_d; optical tweezers correspond to B = 0.
struct ArpCoefficients {
  double a = 0.0;
  Mat B;  // dim x dim, real symmetric PSD
  ArpMode mode = ArpMode::Acoustic;

  int dim() const { return static_cast<int>(B.rows()); }
  void validate() const;

  static ArpCoefficients isotropic(double a, double b, int dim);
  static ArpCoefficients optical(double a, int dim);
  static ArpCoefficients direct(double a, const Mat& B, ArpMode mode = ArpMode::Acoustic);
};

/// a = f1 kappa_0 / 4, B = 3 f2 / (8 rho_0 omega^2) I_d (acoustic) or 0 (optical).
ArpCoefficients arp_coefficients(const MaterialParams& m, int dim,
                                 ArpMode mode = ArpMode::Acoustic);

/// Water with dispersed carbon particles; the standard demo system.
MaterialParams water_carbon_material(double omega = two_pi * 1.0e6);

/// The same system with coefficients rescaled to order-one units
/// (a = 5.7424e6, b = f2/2 = 0.2115); SI evaluation of the formulas above
/// gives a ~ 1e-10, b ~ 4e-18 instead, so plots and thresholds quoted in
/// scaled units need this variant.
ArpCoefficients water_carbon_scaled_coefficients(int dim);

struct ArpDerivs {
  double psi;
  Vec grad;  // d entries
  Mat hess;  // d x d, symmetric by construction
};

double evaluate_arp(const WaveConfig& cfg, const ArpCoefficients& co,
                    Eigen::Ref<const Vec> x);

/// (psi, grad psi, hess psi), all analytic; the hessian uses closed-form
/// third derivatives of p, never nested differences.
ArpDerivs evaluate_arp_derivatives(const WaveConfig& cfg, const ArpCoefficients& co,
                                   Eigen::Ref<const Vec> x);

/// Batch form over the columns of points (d x M), parallel over the list.
std::vector<ArpDerivs> evaluate_arp_derivatives(const WaveConfig& cfg,
                                                const ArpCoefficients& co, const Mat& points,
                                                int threads);

/// B_N = K^T B K, the gradient-term matrix of the N-dimensional lift.
Mat lifted_gradient_matrix(const WaveConfig& cfg, const ArpCoefficients& co);

/// psi_N(y) built from p_N with the same a and B_N = K^T B K;
/// satisfies psi(x) = psi_N(K^T x).
double evaluate_lifted_arp(const WaveConfig& cfg, const ArpCoefficients& co,
                           Eigen::Ref<const Vec> y);

/// Upper bound on |grad psi| over all of space: 2|a| k S^2 + 2 ||B|| k^3 S^2
/// with S = sum |alpha_j| + |beta_j|. Used to normalize convergence tests.
double reference_gradient_scale(const WaveConfig& cfg, const ArpCoefficients& co);

/// Smallest eigenvalue of a symmetric 2x2 or 3x3 matrix (closed form).
double min_eigenvalue_symmetric(const Mat& H);

/// Rectangular sample lattice; res points per axis including both endpoints.
struct GridSpec {
  Vec lower, upper;
  Eigen::VectorXi res;

  int dim() const { return static_cast<int>(lower.size()); }
  Eigen::Index point_count() const;
  double step(int axis) const { return (upper[axis] - lower[axis]) / (res[axis] - 1); }
  double coord(int axis, Eigen::Index i) const { return lower[axis] + i * step(axis); }
  void validate() const;
};

GridSpec centered_square_grid(double half_width, int res);

/// Per-point (psi, |grad psi|, min eig hess psi) planes, row-major with the
/// first axis fastest: flat = ix + nx*(iy + ny*iz).
struct FieldGrid {
  GridSpec spec;
  Eigen::ArrayXd psi, grad_norm, eig_min;

  Eigen::Index size() const { return psi.size(); }
  Vec point(Eigen::Index flat) const;
  Eigen::Index flat_index(Eigen::Ref<const Eigen::VectorXi> idx) const;
};

/// Full sweep; values at each point are independent of the thread partition.
FieldGrid evaluate_arp_grid(const WaveConfig& cfg, const ArpCoefficients& co,
                            const GridSpec& spec, int threads = 1);

/// The triple stored by evaluate_arp_grid at one point, computed through the
/// identical code path; grid planes match this bit for bit at grid nodes.
struct ArpPlanePoint {
  double psi, grad_norm, eig_min;
};
ArpPlanePoint evaluate_arp_plane_point(const WaveConfig& cfg, const ArpCoefficients& co,
                                       Eigen::Ref<const Vec> x);

}  // namespace qpat
