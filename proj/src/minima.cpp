#include "qpat/minima.hpp"

#include "qpat/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace qpat {

void MinimaCriteria::validate() const {
  if (mode == Mode::Absolute) {
    if (!(eig_min > 0.0) || !(grad_max > 0.0))
      throw std::invalid_argument("minima criteria: absolute thresholds must be positive");
  } else {
    if (!(eig_factor > 0.0) || !(grad_factor > 0.0))
      throw std::invalid_argument("minima criteria: auto factors must be positive");
  }
}

MinimaCriteria MinimaCriteria::absolute(double eig_min, double grad_max) {
  MinimaCriteria c;
  c.mode = Mode::Absolute;
  c.eig_min = eig_min;
  c.grad_max = grad_max;
  c.validate();
  return c;
}

MinimaCriteria MinimaCriteria::auto_scaled(double eig_factor, double grad_factor) {
  MinimaCriteria c;
  c.mode = Mode::AutoScaled;
  c.eig_factor = eig_factor;
  c.grad_factor = grad_factor;
  c.validate();
  return c;
}

ResolvedCriteria resolve_criteria(const MinimaCriteria& criteria, const FieldGrid& grid) {
  criteria.validate();
  if (grid.size() == 0) throw std::invalid_argument("minima: empty grid");
  if (criteria.mode == MinimaCriteria::Mode::Absolute)
    return {criteria.eig_min, criteria.grad_max};
  // A field with exactly flat directions tops out at zero min-eigenvalue;
  // the threshold then degenerates to zero and the (>=) comparison still
  // admits the flat minima while the gradient threshold rejects psi == 0.
  const double eig_top = std::max(0.0, grid.eig_min.maxCoeff());
  return {criteria.eig_factor * eig_top, criteria.grad_factor * grid.grad_norm.maxCoeff()};
}

namespace {

bool cell_passes(const FieldGrid& grid, const ResolvedCriteria& rc, Eigen::Index flat) {
  return grid.eig_min[flat] >= rc.eig_min && grid.grad_norm[flat] < rc.grad_max;
}

std::vector<uint8_t> passing_bitmap(const FieldGrid& grid, const ResolvedCriteria& rc) {
  const int d = grid.spec.dim();
  const Eigen::Index nx = grid.spec.res[0];
  const Eigen::Index ny = grid.spec.res[1];
  const Eigen::Index nz = d == 3 ? grid.spec.res[2] : 1;
  std::vector<uint8_t> pass(static_cast<std::size_t>(grid.size()), 0);
  Eigen::Index f = 0;
  for (Eigen::Index iz = 0; iz < nz; ++iz)
    for (Eigen::Index iy = 0; iy < ny; ++iy)
      for (Eigen::Index ix = 0; ix < nx; ++ix, ++f) {
        if (ix <= 0 || ix >= nx - 1 || iy <= 0 || iy >= ny - 1) continue;
        if (d == 3 && (iz <= 0 || iz >= nz - 1)) continue;
        if (cell_passes(grid, rc, f)) pass[f] = 1;
      }
  return pass;
}

}  // namespace

std::vector<Eigen::Index> passing_cells(const FieldGrid& grid, const MinimaCriteria& criteria) {
  if (grid.size() == 0) throw std::invalid_argument("passing_cells: empty grid");
  grid.spec.validate();
  const auto pass = passing_bitmap(grid, resolve_criteria(criteria, grid));
  std::vector<Eigen::Index> out;
  for (Eigen::Index f = 0; f < grid.size(); ++f)
    if (pass[f]) out.push_back(f);
  return out;
}

MinimaSet detect_minima(const FieldGrid& grid, const MinimaCriteria& criteria) {
  if (grid.size() == 0) throw std::invalid_argument("detect_minima: empty grid");
  grid.spec.validate();
  const ResolvedCriteria rc = resolve_criteria(criteria, grid);
  const int d = grid.spec.dim();
  const Eigen::Index nx = grid.spec.res[0];
  const Eigen::Index ny = grid.spec.res[1];
  const Eigen::Index nz = d == 3 ? grid.spec.res[2] : 1;

  const auto flat_of = [&](Eigen::Index ix, Eigen::Index iy, Eigen::Index iz) {
    return ix + nx * (iy + ny * iz);
  };

  std::vector<uint8_t> pass = passing_bitmap(grid, rc);

  // Connected-component reduction: each cluster of passing cells yields its
  // lowest-psi cell (ties broken by flat index for determinism).
  MinimaSet out;
  out.grid = grid.spec;
  out.criteria = rc;
  std::vector<uint8_t> seen(pass.size(), 0);
  std::vector<Eigen::Index> stack;
  for (Eigen::Index start = 0; start < grid.size(); ++start) {
    if (!pass[start] || seen[start]) continue;
    Eigen::Index best = start;
    stack.assign(1, start);
    seen[start] = 1;
    while (!stack.empty()) {
      const Eigen::Index f = stack.back();
      stack.pop_back();
      if (grid.psi[f] < grid.psi[best] || (grid.psi[f] == grid.psi[best] && f < best)) best = f;
      const Eigen::Index ix = f % nx;
      const Eigen::Index iy = (f / nx) % ny;
      const Eigen::Index iz = f / (nx * ny);
      for (Eigen::Index dz = d == 3 ? -1 : 0; dz <= (d == 3 ? 1 : 0); ++dz)
        for (Eigen::Index dy = -1; dy <= 1; ++dy)
          for (Eigen::Index dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0 && dz == 0) continue;
            const Eigen::Index jx = ix + dx, jy = iy + dy, jz = iz + dz;
            if (jx < 0 || jx >= nx || jy < 0 || jy >= ny || jz < 0 || jz >= nz) continue;
            const Eigen::Index g = flat_of(jx, jy, jz);
            if (pass[g] && !seen[g]) {
              seen[g] = 1;
              stack.push_back(g);
            }
          }
    }
    MinimumPoint pt;
    pt.x = grid.point(best);
    pt.psi = grid.psi[best];
    pt.grad_norm = grid.grad_norm[best];
    pt.eig_min = grid.eig_min[best];
    pt.refined = false;
    out.points.push_back(std::move(pt));
  }
  return out;
}

namespace {

struct EigPair {
  double min, max_abs;
};

EigPair hess_eigs(const Mat& H) {
  Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
  const Vec ev = es.eigenvalues();
  return {ev(0), ev.cwiseAbs().maxCoeff()};
}

bool outside_box_by(const Vec& x, const Vec& lo, const Vec& hi, double margin) {
  if (lo.size() == 0) return false;
  for (int a = 0; a < x.size(); ++a)
    if (x[a] < lo[a] - margin || x[a] > hi[a] + margin) return true;
  return false;
}

}  // namespace

RefineResult refine_minimum(const WaveConfig& cfg, const ArpCoefficients& co,
                            Eigen::Ref<const Vec> x0, const RefineOptions& opts) {
  const double ref = reference_gradient_scale(cfg, co);
  const double gtol = opts.tol * ref;
  const double lambda = cfg.wavelength();

  // Newton displacements are trust-limited to half a wavelength: the
  // potential is a bounded superposition whose minima are never farther
  // away than that, and an unlimited step along a near-flat eigendirection
  // can be astronomically long.
  const double trust = 0.5 * lambda;

  RefineResult res;
  res.x = x0;
  Vec x = x0;
  double mu_boost = 0.0;
  for (int iter = 0; iter <= opts.max_iter; ++iter) {
    const ArpDerivs der = evaluate_arp_derivatives(cfg, co, x);
    const EigPair eig = hess_eigs(der.hess);
    res.x = x;
    res.psi = der.psi;
    res.grad_norm = der.grad.norm();
    res.eig_min = eig.min;
    res.iterations = iter;
    if (res.grad_norm <= gtol) {
      // Exactly flat directions give a zero eigenvalue at a genuine
      // minimum line; only clearly negative curvature is a saddle.
      const double psd_tol = 1e-9 * std::max(eig.max_abs, ref / std::max(lambda, 1e-300));
      res.status = eig.min >= -psd_tol ? RefineStatus::Converged : RefineStatus::SaddleRejected;
      return res;
    }
    if (iter == opts.max_iter) break;

    const int d = cfg.dim();
    double mu = (eig.min > 0.0 ? 0.0 : -eig.min) + 1e-9 * std::max(eig.max_abs, 1e-300) +
                mu_boost;
    Vec step;
    for (int raise = 0; raise < 60; ++raise) {
      step = Eigen::LDLT<Mat>((der.hess + mu * Mat::Identity(d, d)).eval()).solve(-der.grad);
      if (step.allFinite() && step.norm() <= trust && step.norm() > 0.0) break;
      mu = mu * 10.0 + res.grad_norm / trust;
    }
    if (!step.allFinite() || step.norm() == 0.0)
      step = -der.grad * (trust / res.grad_norm);

    // Backtrack until psi does not increase.
    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h < 60; ++h) {
      const Vec cand = x + t * step;
      if (outside_box_by(cand, opts.box_lower, opts.box_upper, lambda)) {
        res.status = RefineStatus::Diverged;
        return res;
      }
      if (evaluate_arp(cfg, co, cand) <= der.psi) {
        x = cand;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      // No descent along the damped direction; stiffen the damping and retry.
      mu_boost = std::max(mu * 10.0, 1e-6 * std::max(eig.max_abs, 1e-300));
      continue;
    }
    mu_boost = 0.0;
  }
  res.status = RefineStatus::MaxIterations;
  return res;
}

namespace {

// Keeps lowest-psi representatives at the given minimum separation.
// Candidates are bucketed on a min_sep lattice so deduplication stays
// near-linear even for tens of thousands of refined seeds.
std::vector<MinimumPoint> dedupe_points(std::vector<MinimumPoint> candidates, double min_sep) {
  std::sort(candidates.begin(), candidates.end(),
            [](const MinimumPoint& a, const MinimumPoint& b) {
              if (a.psi != b.psi) return a.psi < b.psi;
              return std::lexicographical_compare(a.x.data(), a.x.data() + a.x.size(), b.x.data(),
                                                  b.x.data() + b.x.size());
            });
  std::vector<MinimumPoint> kept;
  if (candidates.empty()) return kept;
  const int d = static_cast<int>(candidates.front().x.size());
  std::unordered_map<long long, std::vector<int>> buckets;
  const auto key_of = [&](const Vec& x, long long ox, long long oy, long long oz) {
    const auto cell = [&](int a, long long off) {
      return static_cast<long long>(std::floor(x[a] / min_sep)) + off;
    };
    long long key = cell(0, ox) * 73856093LL ^ cell(1, oy) * 19349663LL;
    if (d == 3) key ^= cell(2, oz) * 83492791LL;
    return key;
  };
  for (const auto& p : candidates) {
    bool dup = false;
    for (long long oz = (d == 3 ? -1 : 0); oz <= (d == 3 ? 1 : 0) && !dup; ++oz)
      for (long long oy = -1; oy <= 1 && !dup; ++oy)
        for (long long ox = -1; ox <= 1 && !dup; ++ox) {
          const auto it = buckets.find(key_of(p.x, ox, oy, oz));
          if (it == buckets.end()) continue;
          for (int idx : it->second)
            if ((kept[idx].x - p.x).norm() < min_sep) {
              dup = true;
              break;
            }
        }
    if (!dup) {
      buckets[key_of(p.x, 0, 0, 0)].push_back(static_cast<int>(kept.size()));
      kept.push_back(p);
    }
  }
  return kept;
}

double half_min_spacing(const GridSpec& spec) {
  double min_sep = std::numeric_limits<double>::infinity();
  for (int a = 0; a < spec.dim(); ++a) min_sep = std::min(min_sep, spec.step(a));
  return 0.5 * min_sep;
}

MinimaSet refine_seeds(const WaveConfig& cfg, const ArpCoefficients& co,
                       const std::vector<Vec>& seeds, const GridSpec& grid,
                       const ResolvedCriteria& criteria, const RefineOptions& opts,
                       int threads) {
  RefineOptions local = opts;
  if (local.box_lower.size() == 0) {
    local.box_lower = grid.lower;
    local.box_upper = grid.upper;
  }
  std::vector<RefineResult> results(seeds.size());
  parallel_for(seeds.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      results[i] = refine_minimum(cfg, co, seeds[i], local);
  });

  std::vector<MinimumPoint> refined;
  for (const auto& r : results) {
    if (r.status != RefineStatus::Converged) continue;
    refined.push_back({r.x, r.psi, r.grad_norm, r.eig_min, true});
  }

  MinimaSet out;
  out.grid = grid;
  out.criteria = criteria;
  out.points = dedupe_points(std::move(refined), half_min_spacing(grid));
  return out;
}

}  // namespace

MinimaSet refine_minima_set(const WaveConfig& cfg, const ArpCoefficients& co,
                            const MinimaSet& detected, const RefineOptions& opts, int threads) {
  std::vector<Vec> seeds;
  seeds.reserve(detected.points.size());
  for (const auto& p : detected.points) seeds.push_back(p.x);
  return refine_seeds(cfg, co, seeds, detected.grid, detected.criteria, opts, threads);
}

MinimaSet refine_basins(const WaveConfig& cfg, const ArpCoefficients& co, const FieldGrid& grid,
                        const MinimaCriteria& criteria, const RefineOptions& opts, int threads) {
  if (grid.size() == 0) throw std::invalid_argument("refine_basins: empty grid");
  grid.spec.validate();
  const ResolvedCriteria rc = resolve_criteria(criteria, grid);

  const int d = grid.spec.dim();
  const Eigen::Index nx = grid.spec.res[0];
  const Eigen::Index ny = grid.spec.res[1];
  const Eigen::Index nz = d == 3 ? grid.spec.res[2] : 1;
  std::vector<Vec> seeds;
  Eigen::Index f = 0;
  for (Eigen::Index iz = 0; iz < nz; ++iz)
    for (Eigen::Index iy = 0; iy < ny; ++iy)
      for (Eigen::Index ix = 0; ix < nx; ++ix, ++f) {
        if (ix <= 0 || ix >= nx - 1 || iy <= 0 || iy >= ny - 1) continue;
        if (d == 3 && (iz <= 0 || iz >= nz - 1)) continue;
        if (grid.grad_norm[f] < rc.grad_max) seeds.push_back(grid.point(f));
      }

  MinimaSet out = refine_seeds(cfg, co, seeds, grid.spec, rc, opts, threads);
  // The eigenvalue criterion is applied to the refined curvature, which is
  // exact and rotation invariant, rather than to the coarse grid samples.
  std::erase_if(out.points, [&](const MinimumPoint& p) { return p.eig_min < rc.eig_min; });
  return out;
}

RelaxResult relax_particles(const WaveConfig& cfg, const ArpCoefficients& co,
                            const std::vector<Vec>& seeds, const RelaxOptions& opts) {
  if (opts.step < 0.0) throw std::invalid_argument("relax: step must be positive");
  const double ref = reference_gradient_scale(cfg, co);
  const double gtol = opts.tol * ref;
  const double max_move = cfg.wavelength() / 20.0;
  const double eta0 = opts.step > 0.0 ? opts.step : max_move / std::max(ref, 1e-300);

  const std::size_t n = seeds.size();
  RelaxResult out;
  out.positions.resize(n);
  out.psi.assign(n, 0.0);
  out.grad_norm.assign(n, 0.0);
  out.converged.assign(n, 0);
  if (opts.record_trajectories) {
    out.trajectories.resize(n);
    out.psi_history.resize(n);
  }

  const double eta_cap = eta0 * 1e9;
  parallel_for(n, opts.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Vec x = seeds[i];
      double eta = eta0;
      ArpDerivs der = evaluate_arp_derivatives(cfg, co, x);
      if (opts.record_trajectories) {
        out.trajectories[i].push_back(x);
        out.psi_history[i].push_back(der.psi);
      }
      bool converged = false;
      for (int it = 0; it < opts.iterations; ++it) {
        const double gn = der.grad.norm();
        if (gn <= gtol) {
          converged = true;
          break;
        }
        bool accepted = false;
        for (int h = 0; h < 60; ++h) {
          Vec move = eta * der.grad;
          const double mnorm = move.norm();
          if (mnorm > max_move) move *= max_move / mnorm;
          const Vec cand = x - move;
          const ArpDerivs cand_der = evaluate_arp_derivatives(cfg, co, cand);
          if (cand_der.psi <= der.psi) {
            x = cand;
            der = cand_der;
            accepted = true;
            break;
          }
          eta *= 0.5;
        }
        if (!accepted) break;  // at the numerical floor of psi
        // Grow the step back so it can track the local curvature scale.
        eta = std::min(eta * 1.5, eta_cap);
        if (opts.record_trajectories) {
          out.trajectories[i].push_back(x);
          out.psi_history[i].push_back(der.psi);
        }
      }
      out.positions[i] = x;
      out.psi[i] = der.psi;
      out.grad_norm[i] = der.grad.norm();
      out.converged[i] = converged || der.grad.norm() <= gtol;
    }
  });
  return out;
}

double hausdorff_distance(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  if (a.empty() && b.empty()) return 0.0;
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  double h = 0.0;
  const auto one_sided = [&](const std::vector<Vec>& from, const std::vector<Vec>& to) {
    double worst = 0.0;
    for (const auto& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : to) best = std::min(best, (p - q).norm());
      worst = std::max(worst, best);
    }
    return worst;
  };
  h = std::max(one_sided(a, b), one_sided(b, a));
  return h;
}

}  // namespace qpat
