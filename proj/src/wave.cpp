#include "qpat/wave.hpp"

#include "qpat/parallel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qpat {

double WaveConfig::amplitude_sum() const {
  double s = 0.0;
  for (int j = 0; j < pair_count(); ++j) s += std::abs(alpha[j]) + std::abs(beta[j]);
  return s;
}

void WaveConfig::validate() const {
  if (!(k > 0.0) || !std::isfinite(k))
    throw std::invalid_argument("wave config: wavenumber k must be positive and finite");
  const int d = dim();
  const int n = pair_count();
  if (d != 2 && d != 3)
    throw std::invalid_argument("wave config: dimension must be 2 or 3, got " +
                                std::to_string(d));
  if (n < 1) throw std::invalid_argument("wave config: at least one wavevector required");
  if (alpha.size() != n || beta.size() != n)
    throw std::invalid_argument("wave config: amplitude count does not match wavevector count");
  if (!wavevectors.allFinite())
    throw std::invalid_argument("wave config: non-finite wavevector entry");
  for (int j = 0; j < n; ++j) {
    const double nj = wavevectors.col(j).norm();
    if (std::abs(nj - k) > 1e-12 * k)
      throw std::invalid_argument("wave config: |k_" + std::to_string(j + 1) +
                                  "| = " + std::to_string(nj) +
                                  " deviates from wavenumber " + std::to_string(k));
    if (!std::isfinite(alpha[j].real()) || !std::isfinite(alpha[j].imag()) ||
        !std::isfinite(beta[j].real()) || !std::isfinite(beta[j].imag()))
      throw std::invalid_argument("wave config: non-finite amplitude at index " +
                                  std::to_string(j + 1));
    if (std::abs(alpha[j]) == 0.0 && std::abs(beta[j]) == 0.0)
      throw std::invalid_argument("wave config: amplitudes alpha and beta both zero at index " +
                                  std::to_string(j + 1));
  }
}

WaveConfig make_wave_config(const Mat& wavevectors, double k, const CVec& alpha,
                            const CVec& beta) {
  WaveConfig cfg{k, wavevectors, alpha, beta};
  cfg.validate();
  return cfg;
}

WaveConfig wave_config_from_drive(const Mat& wavevectors, double k, const CVec& u) {
  const int n = static_cast<int>(wavevectors.cols());
  if (u.size() != 2 * n)
    throw std::invalid_argument("drive vector u must have 2N = " + std::to_string(2 * n) +
                                " entries, got " + std::to_string(u.size()));
  return make_wave_config(wavevectors, k, u.head(n), u.tail(n));
}

namespace {

void check_point_dim(const WaveConfig& cfg, Eigen::Index got, const char* what) {
  if (got != cfg.dim())
    throw std::invalid_argument(std::string(what) + ": point dimension " +
                                std::to_string(got) + " does not match config dimension " +
                                std::to_string(cfg.dim()));
}

}  // namespace

Complex evaluate_field(const WaveConfig& cfg, Eigen::Ref<const Vec> x) {
  check_point_dim(cfg, x.size(), "evaluate_field");
  Complex p{0.0, 0.0};
  for (int j = 0; j < cfg.pair_count(); ++j) {
    const double theta = cfg.wavevectors.col(j).dot(x);
    const Complex e{std::cos(theta), std::sin(theta)};
    p += cfg.alpha[j] * e + cfg.beta[j] * std::conj(e);
  }
  return p;
}

FieldDerivs evaluate_field_derivatives(const WaveConfig& cfg, Eigen::Ref<const Vec> x) {
  check_point_dim(cfg, x.size(), "evaluate_field_derivatives");
  const int d = cfg.dim();
  FieldDerivs out;
  out.p = Complex{0.0, 0.0};
  out.grad = CVec::Zero(d);
  out.hess = CMat::Zero(d, d);
  const Complex iu{0.0, 1.0};
  for (int j = 0; j < cfg.pair_count(); ++j) {
    const auto kj = cfg.wavevectors.col(j);
    const double theta = kj.dot(x);
    const Complex e{std::cos(theta), std::sin(theta)};
    const Complex fwd = cfg.alpha[j] * e;            // alpha_j e^{i k.x}
    const Complex bwd = cfg.beta[j] * std::conj(e);  // beta_j e^{-i k.x}
    const Complex psum = fwd + bwd;
    const Complex pdif = fwd - bwd;
    out.p += psum;
    out.grad += (iu * pdif) * kj.cast<Complex>();
    const Mat outer = kj * kj.transpose();  // materialized: keeps the hessian
    out.hess -= psum * outer.cast<Complex>();  // symmetric bit for bit
  }
  return out;
}

CVec evaluate_field(const WaveConfig& cfg, const Mat& points, int threads) {
  if (points.rows() != cfg.dim())
    throw std::invalid_argument("evaluate_field: point rows must match config dimension");
  CVec out(points.cols());
  parallel_for(static_cast<std::size_t>(points.cols()), threads,
               [&](std::size_t begin, std::size_t end) {
                 for (std::size_t i = begin; i < end; ++i) {
                   const Eigen::Index col = static_cast<Eigen::Index>(i);
                   out[col] = evaluate_field(cfg, points.col(col));
                 }
               });
  return out;
}

Complex evaluate_periodic_field(const WaveConfig& cfg, Eigen::Ref<const Vec> y) {
  if (y.size() != cfg.pair_count())
    throw std::invalid_argument("evaluate_periodic_field: expected an N-dimensional point");
  Complex p{0.0, 0.0};
  for (int j = 0; j < cfg.pair_count(); ++j) {
    const Complex e{std::cos(y[j]), std::sin(y[j])};
    p += cfg.alpha[j] * e + cfg.beta[j] * std::conj(e);
  }
  return p;
}

CVec periodic_field_gradient(const WaveConfig& cfg, Eigen::Ref<const Vec> y) {
  if (y.size() != cfg.pair_count())
    throw std::invalid_argument("periodic_field_gradient: expected an N-dimensional point");
  const Complex iu{0.0, 1.0};
  CVec g(cfg.pair_count());
  for (int j = 0; j < cfg.pair_count(); ++j) {
    const Complex e{std::cos(y[j]), std::sin(y[j])};
    g[j] = iu * (cfg.alpha[j] * e - cfg.beta[j] * std::conj(e));
  }
  return g;
}

}  // namespace qpat
