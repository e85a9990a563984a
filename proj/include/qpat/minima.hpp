#pragma once

#include "qpat/potential.hpp"
#include "qpat/types.hpp"
#include "qpat/wave.hpp"

#include <vector>

namespace qpat {

/// Acceptance thresholds for a grid cell: hessian sufficiently positive
/// definite (min eigenvalue at or above eig threshold) and gradient small
/// (strictly below grad threshold). Auto mode scales the thresholds off the
/// grid extrema so they track the potential's arbitrary units; absolute mode
/// takes them verbatim.
struct MinimaCriteria {
  enum class Mode { AutoScaled, Absolute };
  Mode mode = Mode::AutoScaled;

  // Absolute thresholds (potential units per length^2, per length).
  double eig_min = 1e-6;
  double grad_max = 4e11;

  // Auto mode: eig threshold = eig_factor * max(0, max min-eigenvalue),
  // grad threshold = grad_factor * max gradient norm.
  double eig_factor = 1e-9;
  double grad_factor = 0.05;

  void validate() const;

  static MinimaCriteria absolute(double eig_min, double grad_max);
  static MinimaCriteria auto_scaled(double eig_factor = 1e-9, double grad_factor = 0.05);
};

struct ResolvedCriteria {
  double eig_min = 0.0;
  double grad_max = 0.0;
};

ResolvedCriteria resolve_criteria(const MinimaCriteria& criteria, const FieldGrid& grid);

struct MinimumPoint {
  Vec x;
  double psi = 0.0;
  double grad_norm = 0.0;
  double eig_min = 0.0;
  bool refined = false;
};

struct MinimaSet {
  std::vector<MinimumPoint> points;
  GridSpec grid;
  ResolvedCriteria criteria;
};

/// Grid cells passing both thresholds, reduced per connected component
/// (8-neighbour in 2D, 26-neighbour in 3D) to the lowest-psi cell. The
/// outermost cell ring is excluded. Empty result is valid; an empty grid is
/// an error.
MinimaSet detect_minima(const FieldGrid& grid, const MinimaCriteria& criteria);

/// Flat indices of interior cells passing the thresholds (the raw assembly
/// regions before component reduction).
std::vector<Eigen::Index> passing_cells(const FieldGrid& grid, const MinimaCriteria& criteria);

enum class RefineStatus { Converged, MaxIterations, Diverged, SaddleRejected };

struct RefineOptions {
  int max_iter = 50;
  double tol = 1e-12;  // |grad psi| <= tol * reference_gradient_scale
  // Escape box; a Newton iterate more than one wavelength outside aborts
  // with Diverged. Empty vectors disable the check.
  Vec box_lower, box_upper;
};

struct RefineResult {
  RefineStatus status = RefineStatus::MaxIterations;
  Vec x;
  double psi = 0.0;
  double grad_norm = 0.0;
  double eig_min = 0.0;
  int iterations = 0;
};

/// Damped Newton descent on psi with analytic gradient and hessian.
/// Exactly flat directions (zero curvature) are admitted at convergence;
/// genuinely indefinite stationary points are rejected as saddles.
RefineResult refine_minimum(const WaveConfig& cfg, const ArpCoefficients& co,
                            Eigen::Ref<const Vec> x0, const RefineOptions& opts = {});

/// Refines every detected point, keeps the converged ones, and deduplicates
/// to a minimum separation of half the grid spacing (lowest psi wins).
MinimaSet refine_minima_set(const WaveConfig& cfg, const ArpCoefficients& co,
                            const MinimaSet& detected, const RefineOptions& opts = {},
                            int threads = 1);

/// Exhaustive basin recovery: seeds newton refinement from every interior
/// cell inside the gradient threshold (ignoring the eigenvalue plane, whose
/// positive pocket around a shallow minimum can be smaller than one cell),
/// keeps converged positive-semidefinite endpoints whose exact curvature
/// passes the eigenvalue criterion, and deduplicates. Unlike per-component
/// representatives this finds every basin whose gradient band contains a
/// cell, so the result is stable under rotations of the field.
MinimaSet refine_basins(const WaveConfig& cfg, const ArpCoefficients& co, const FieldGrid& grid,
                        const MinimaCriteria& criteria, const RefineOptions& opts = {},
                        int threads = 1);

struct RelaxOptions {
  double step = 0.0;    // initial step size; 0 picks one from the gradient scale
  int iterations = 1000;
  double tol = 1e-9;    // |grad psi| <= tol * reference_gradient_scale
  bool record_trajectories = false;
  int threads = 1;
};

struct RelaxResult {
  std::vector<Vec> positions;
  std::vector<double> psi;
  std::vector<double> grad_norm;
  std::vector<char> converged;
  // Per particle, per accepted step (seed first); psi_history parallels it.
  std::vector<std::vector<Vec>> trajectories;
  std::vector<std::vector<double>> psi_history;
};

/// Overdamped descent x <- x - eta grad psi with each move clipped to
/// lambda/20 and eta halved whenever psi would increase; psi is
/// non-increasing along accepted steps. Non-converged particles are
/// reported with their final gradient norm, never as errors.
RelaxResult relax_particles(const WaveConfig& cfg, const ArpCoefficients& co,
                            const std::vector<Vec>& seeds, const RelaxOptions& opts = {});

/// Symmetric Hausdorff distance between two point sets; infinity when
/// exactly one set is empty, zero when both are.
double hausdorff_distance(const std::vector<Vec>& a, const std::vector<Vec>& b);

}  // namespace qpat
