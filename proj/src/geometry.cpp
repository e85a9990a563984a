#include "qpat/geometry.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qpat {

Mat polygon_wavevectors(int pairs, double k) {
  if (pairs < 1) throw std::invalid_argument("polygon_wavevectors: pair count must be >= 1");
  if (!(k > 0.0)) throw std::invalid_argument("polygon_wavevectors: wavenumber must be positive");
  Mat cols(2, pairs);
  for (int j = 0; j < pairs; ++j) {
    const double theta = j * pi / pairs;
    cols.col(j) << k * std::cos(theta), k * std::sin(theta);
  }
  return cols;
}

void validate_wavevector_matrix(const Mat& K, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("wavevector matrix: wavenumber must be positive");
  if (K.cols() < 1) throw std::invalid_argument("wavevector matrix: at least one column required");
  for (int j = 0; j < K.cols(); ++j) {
    const double nj = K.col(j).norm();
    if (std::abs(nj - k) > 1e-12 * k)
      throw std::invalid_argument("wavevector matrix: column " + std::to_string(j + 1) +
                                  " has norm " + std::to_string(nj) + ", expected " +
                                  std::to_string(k));
  }
  for (int i = 0; i < K.cols(); ++i)
    for (int j = i + 1; j < K.cols(); ++j) {
      const double near = std::min((K.col(i) - K.col(j)).norm(), (K.col(i) + K.col(j)).norm());
      if (near <= 1e-9 * k)
        throw std::invalid_argument("wavevector matrix: columns " + std::to_string(i + 1) +
                                    " and " + std::to_string(j + 1) +
                                    " are equal or antipodal");
    }
}

namespace {

// Smallest-denominator rational within tol of v, denominators <= qmax.
bool snap_rational(double v, int qmax, double tol, RationalCoefficient& out) {
  for (long long q = 1; q <= qmax; ++q) {
    const double scaled = v * static_cast<double>(q);
    if (std::abs(scaled) > 1e15) return false;
    const long long p = std::llround(scaled);
    if (std::abs(v - static_cast<double>(p) / static_cast<double>(q)) <= tol) {
      out = {p, q};
      return true;
    }
  }
  return false;
}

// Next k-subset of {0..n-1} in lexicographic order; false when exhausted.
bool next_subset(std::vector<int>& idx, int n) {
  const int r = static_cast<int>(idx.size());
  for (int i = r - 1; i >= 0; --i) {
    if (idx[i] < n - (r - i)) {
      ++idx[i];
      for (int j = i + 1; j < r; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

PeriodicityResult classify_periodicity(const Mat& K, int qmax) {
  if (qmax < 1) throw std::invalid_argument("classify_periodicity: qmax must be >= 1");
  const double k = K.col(0).norm();
  validate_wavevector_matrix(K, k);
  const int n = static_cast<int>(K.cols());

  Eigen::ColPivHouseholderQR<Mat> qr(K);
  qr.setThreshold(1e-9);
  const int rank = static_cast<int>(qr.rank());

  PeriodicityResult result;
  result.qmax = qmax;

  if (rank == n) {
    // Linearly independent columns generate a discrete rank-n lattice.
    result.periodic = true;
    for (int j = 0; j < n; ++j) result.basis_columns.push_back(j);
    return result;
  }

  std::vector<int> subset(rank);
  std::iota(subset.begin(), subset.end(), 0);
  const double coeff_tol = 1e-9;
  const double vol_floor = std::pow(1e-6 * k, rank);
  do {
    Mat basis(K.rows(), rank);
    for (int i = 0; i < rank; ++i) basis.col(i) = K.col(subset[i]);
    const Mat gram = basis.transpose() * basis;
    const double vol = std::sqrt(std::max(0.0, gram.determinant()));
    if (vol <= vol_floor) continue;
    const Eigen::LDLT<Mat> gram_solver(gram);

    std::vector<ColumnCombination> combos;
    bool all_fit = true;
    for (int j = 0; j < n && all_fit; ++j) {
      if (std::find(subset.begin(), subset.end(), j) != subset.end()) continue;
      const Vec c = gram_solver.solve(basis.transpose() * K.col(j));
      ColumnCombination combo;
      combo.column = j;
      Vec snapped(rank);
      for (int i = 0; i < rank; ++i) {
        RationalCoefficient rc;
        if (!snap_rational(c[i], qmax, coeff_tol, rc)) {
          all_fit = false;
          break;
        }
        combo.coeffs.push_back(rc);
        snapped[i] = rc.value();
      }
      if (!all_fit) break;
      if ((basis * snapped - K.col(j)).norm() > 1e-9 * k * (1.0 + snapped.lpNorm<1>())) {
        all_fit = false;
        break;
      }
      combos.push_back(std::move(combo));
    }
    if (all_fit) {
      result.periodic = true;
      result.basis_columns = subset;
      result.combinations = std::move(combos);
      return result;
    }
  } while (next_subset(subset, n));

  result.periodic = false;
  return result;
}

Vec periodic_translation(const Mat& K, const PeriodicityResult& witness) {
  if (!witness.periodic)
    throw std::invalid_argument("periodic_translation: witness is not periodic");
  const int r = static_cast<int>(witness.basis_columns.size());
  Mat basis(K.rows(), r);
  for (int i = 0; i < r; ++i) basis.col(i) = K.col(witness.basis_columns[i]);

  long long lcm_den = 1;
  for (const auto& combo : witness.combinations)
    for (const auto& rc : combo.coeffs) lcm_den = std::lcm(lcm_den, rc.den);

  const Eigen::LDLT<Mat> gram_solver((basis.transpose() * basis).eval());
  Vec best;
  for (int m = 0; m < r; ++m) {
    const Vec t =
        two_pi * static_cast<double>(lcm_den) * (basis * gram_solver.solve(Vec::Unit(r, m)));
    if (best.size() == 0 || t.norm() < best.norm()) best = t;
  }
  // Every k_j . T must be an integer multiple of 2 pi.
  const Vec phases = K.transpose() * best / two_pi;
  for (int j = 0; j < phases.size(); ++j)
    if (std::abs(phases[j] - std::round(phases[j])) > 1e-9 * (1.0 + std::abs(phases[j])))
      throw std::runtime_error("periodic_translation: witness failed phase check on column " +
                               std::to_string(j + 1));
  return best;
}

double halton(unsigned long long index, unsigned base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

double rotational_symmetry_defect(const WaveConfig& cfg, const ArpCoefficients& co, int order,
                                  double radius, int samples, unsigned seed) {
  if (cfg.dim() != 2)
    throw std::invalid_argument("rotational_symmetry_defect: 2D configurations only");
  if (order < 1) throw std::invalid_argument("rotational_symmetry_defect: order must be >= 1");
  if (samples < 8) throw std::invalid_argument("rotational_symmetry_defect: need >= 8 samples");
  if (!(radius > 0.0)) throw std::invalid_argument("rotational_symmetry_defect: radius must be positive");
  if (order == 1) return 0.0;  // identity rotation

  const Eigen::Rotation2Dd rot(two_pi / order);
  const Mat2 R = rot.toRotationMatrix();
  double max_diff = 0.0, max_abs = 0.0;
  const unsigned long long offset = 1 + static_cast<unsigned long long>(seed);
  for (int i = 0; i < samples; ++i) {
    const double u = halton(offset + i, 2);
    const double v = halton(offset + i, 3);
    const double rho = radius * std::sqrt(u);
    const double phi = two_pi * v;
    const Vec2 x(rho * std::cos(phi), rho * std::sin(phi));
    const double psi_x = evaluate_arp(cfg, co, x);
    const double psi_rx = evaluate_arp(cfg, co, (R * x).eval());
    max_diff = std::max(max_diff, std::abs(psi_rx - psi_x));
    max_abs = std::max({max_abs, std::abs(psi_x), std::abs(psi_rx)});
  }
  if (max_abs == 0.0) return 0.0;
  return max_diff / max_abs;
}

}  // namespace qpat
