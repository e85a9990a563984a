#pragma once

#include "qpat/types.hpp"

namespace qpat {

/// A superposition of N counter-propagating plane-wave pairs,
///   p(x) = sum_j alpha_j exp(i k_j.x) + beta_j exp(-i k_j.x),
/// with all wavevectors k_j of magnitude k. The drive vector
/// u = [alpha_1..alpha_N, beta_1..beta_N] collects the complex amplitudes.
struct WaveConfig {
  double k = 0.0;     // wavenumber, rad/m
  Mat wavevectors;    // d x N, columns k_j with |k_j| = k
  CVec alpha, beta;   // N complex amplitudes per pair

  int dim() const { return static_cast<int>(wavevectors.rows()); }
  int pair_count() const { return static_cast<int>(wavevectors.cols()); }
  double wavelength() const { return two_pi / k; }

  /// sum_j |alpha_j| + |beta_j|; bounds |p| everywhere.
  double amplitude_sum() const;

  /// Throws std::invalid_argument on any violated invariant, naming the
  /// offending field/index.
  void validate() const;
};

WaveConfig make_wave_config(const Mat& wavevectors, double k, const CVec& alpha,
                            const CVec& beta);

/// Builds a config from the stacked drive vector u = [alpha; beta] (2N entries).
WaveConfig wave_config_from_drive(const Mat& wavevectors, double k, const CVec& u);

struct FieldDerivs {
  Complex p;
  CVec grad;   // d entries
  CMat hess;   // d x d, symmetric
};

/// p(x). Throws std::invalid_argument on x/config dimension mismatch.
Complex evaluate_field(const WaveConfig& cfg, Eigen::Ref<const Vec> x);

/// Batch form: one value per column of points (d x M); the point list is
/// the unit of parallelism.
CVec evaluate_field(const WaveConfig& cfg, const Mat& points, int threads);

/// (p, grad p, hess p) in one pass; one complex exponential per wave.
FieldDerivs evaluate_field_derivatives(const WaveConfig& cfg, Eigen::Ref<const Vec> x);

/// The N-dimensional periodic parent field p_N(y) = sum_j alpha_j e^{i y_j}
/// + beta_j e^{-i y_j}; satisfies p(x) = p_N(K^T x) with K = [k_1..k_N].
Complex evaluate_periodic_field(const WaveConfig& cfg, Eigen::Ref<const Vec> y);

/// grad_y p_N(y); diagonal structure, entry j = i(alpha_j e^{i y_j} - beta_j e^{-i y_j}).
CVec periodic_field_gradient(const WaveConfig& cfg, Eigen::Ref<const Vec> y);

}  // namespace qpat
