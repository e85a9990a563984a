#pragma once

#include "qpat/potential.hpp"
#include "qpat/types.hpp"
#include "qpat/wave.hpp"

#include <vector>

namespace qpat {

/// Columns k * (cos(j pi/N), sin(j pi/N)), j = 0..N-1. Together with the
/// counter-propagating partners these realize a regular 2N-gon of
/// propagation directions.
Mat polygon_wavevectors(int pairs, double k);

/// Checks column norms against k and rejects duplicate or antipodal columns.
void validate_wavevector_matrix(const Mat& K, double k);

struct RationalCoefficient {
  long long num = 0;
  long long den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// One non-basis column expressed as a rational combination of the basis.
struct ColumnCombination {
  int column = -1;
  std::vector<RationalCoefficient> coeffs;  // one per basis column
};

struct PeriodicityResult {
  bool periodic = false;
  int qmax = 0;
  std::vector<int> basis_columns;
  std::vector<ColumnCombination> combinations;
};

/// Decides whether the integer span of the columns of K is a discrete
/// lattice: searches rank-many column subsets for a basis such that every
/// remaining column is a rational combination with denominators <= qmax.
/// No fit within qmax means quasiperiodic (up to that denominator bound).
PeriodicityResult classify_periodicity(const Mat& K, int qmax = 64);

/// A lattice translation T with k_j . T in 2 pi Z for all j, built from the
/// witness; the field (and its potential) repeats under x -> x + T.
Vec periodic_translation(const Mat& K, const PeriodicityResult& witness);

/// max over quasi-random points |x| <= radius of
/// |psi(R x) - psi(x)| / max |psi| over the sample, R the rotation by
/// 2 pi / order about the origin. Two-dimensional configs only.
double rotational_symmetry_defect(const WaveConfig& cfg, const ArpCoefficients& co, int order,
                                  double radius, int samples, unsigned seed = 0);

/// Radical-inverse (Halton) sequence term; deterministic low-discrepancy
/// sampling for reproducible defect measurements.
double halton(unsigned long long index, unsigned base);

}  // namespace qpat
