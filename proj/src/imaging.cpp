#include "qpat/imaging.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qpat {

void GrayImage::validate() const {
  if (width <= 0 || height <= 0)
    throw std::invalid_argument("image: dimensions must be positive");
  if (samples.size() != static_cast<std::size_t>(width) * height)
    throw std::invalid_argument("image: sample count does not match dimensions");
  for (double v : samples)
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("image: intensity outside [0,1]");
}

GrayImage GrayImage::constant(int width, int height, double value) {
  GrayImage img{width, height, {}};
  img.samples.assign(static_cast<std::size_t>(width) * height, value);
  return img;
}

long BinaryMask::count() const {
  long n = 0;
  for (auto b : bits) n += b != 0;
  return n;
}

BinaryMask BinaryMask::empty(int width, int height) {
  BinaryMask m{width, height, {}};
  m.bits.assign(static_cast<std::size_t>(width) * height, 0);
  return m;
}

BinaryMask binarize(const GrayImage& img, double sensitivity, Polarity polarity) {
  img.validate();
  if (!(sensitivity >= 0.0 && sensitivity <= 1.0))
    throw std::invalid_argument("binarize: sensitivity must be in [0,1]");
  const int w = img.width, h = img.height;

  std::vector<double> oriented(img.samples.size());
  for (std::size_t i = 0; i < img.samples.size(); ++i)
    oriented[i] = polarity == Polarity::DarkForeground ? 1.0 - img.samples[i] : img.samples[i];

  // Summed-area table over the oriented intensities, (w+1)x(h+1).
  std::vector<double> sat(static_cast<std::size_t>(w + 1) * (h + 1), 0.0);
  const auto sat_at = [&](int x, int y) -> double& {
    return sat[static_cast<std::size_t>(y) * (w + 1) + x];
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      sat_at(x + 1, y + 1) = oriented[static_cast<std::size_t>(y) * w + x] + sat_at(x, y + 1) +
                             sat_at(x + 1, y) - sat_at(x, y);

  const int half = static_cast<int>(std::ceil(std::min(w, h) / 16.0));
  const double factor = 1.0 + (0.5 - sensitivity);

  BinaryMask mask = BinaryMask::empty(w, h);
  for (int y = 0; y < h; ++y) {
    const int y0 = std::max(0, y - half), y1 = std::min(h - 1, y + half);
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - half), x1 = std::min(w - 1, x + half);
      const double sum =
          sat_at(x1 + 1, y1 + 1) - sat_at(x0, y1 + 1) - sat_at(x1 + 1, y0) + sat_at(x0, y0);
      const double mean = sum / ((y1 - y0 + 1) * (x1 - x0 + 1));
      const double v = oriented[static_cast<std::size_t>(y) * w + x];
      mask.set(x, y, v > mean * factor && v > mean);
    }
  }
  return mask;
}

Vec2 Homography::apply(const Vec2& p) const {
  const Vec3 q = H * Vec3(p.x(), p.y(), 1.0);
  return {q.x() / q.z(), q.y() / q.z()};
}

bool Homography::finite_image(const Vec2& p) const {
  const Vec3 q = H * Vec3(p.x(), p.y(), 1.0);
  const double scale = H.row(2).norm() * Vec3(p.x(), p.y(), 1.0).norm();
  return std::abs(q.z()) > 1e-12 * std::max(scale, 1e-300);
}

void Homography::validate() const {
  const double det = H.determinant();
  const double n = H.norm();
  if (std::abs(det) <= 1e-12 * n * n * n)
    throw std::invalid_argument("homography: singular matrix (|det| below tolerance)");
}

namespace {

Mat3 normalizing_transform(const std::vector<Vec2>& pts) {
  Vec2 centroid = Vec2::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += (p - centroid).norm();
  mean_dist /= static_cast<double>(pts.size());
  const double s = mean_dist > 0.0 ? std::sqrt(2.0) / mean_dist : 1.0;
  Mat3 t = Mat3::Identity();
  t(0, 0) = s;
  t(1, 1) = s;
  t(0, 2) = -s * centroid.x();
  t(1, 2) = -s * centroid.y();
  return t;
}

}  // namespace

Homography fit_homography(const std::vector<std::pair<Vec2, Vec2>>& pairs) {
  const int n = static_cast<int>(pairs.size());
  if (n < 4)
    throw std::invalid_argument("fit_homography: need at least 4 point pairs, got " +
                                std::to_string(n));

  std::vector<Vec2> src(n), tgt(n);
  for (int i = 0; i < n; ++i) {
    src[i] = pairs[i].first;
    tgt[i] = pairs[i].second;
  }

  double span = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) span = std::max(span, (src[i] - src[j]).norm());
  if (span == 0.0) throw std::invalid_argument("fit_homography: all source points coincide");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int l = j + 1; l < n; ++l) {
        const Vec2 u = src[j] - src[i], v = src[l] - src[i];
        const double area = 0.5 * std::abs(u.x() * v.y() - u.y() * v.x());
        if (area <= 1e-9 * span * span)
          throw std::invalid_argument("fit_homography: source points " + std::to_string(i + 1) +
                                      ", " + std::to_string(j + 1) + ", " + std::to_string(l + 1) +
                                      " are collinear");
      }

  const Mat3 ts = normalizing_transform(src);
  const Mat3 tt = normalizing_transform(tgt);

  Mat a(2 * n, 9);
  for (int i = 0; i < n; ++i) {
    const Vec3 s = ts * Vec3(src[i].x(), src[i].y(), 1.0);
    const Vec3 t = tt * Vec3(tgt[i].x(), tgt[i].y(), 1.0);
    const double sx = s.x(), sy = s.y();
    const double tx = t.x(), ty = t.y();
    a.row(2 * i) << 0, 0, 0, -sx, -sy, -1, ty * sx, ty * sy, ty;
    a.row(2 * i + 1) << sx, sy, 1, 0, 0, 0, -tx * sx, -tx * sy, -tx;
  }

  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  const Vec hvec = svd.matrixV().col(8);
  Mat3 hn;
  hn << hvec(0), hvec(1), hvec(2), hvec(3), hvec(4), hvec(5), hvec(6), hvec(7), hvec(8);

  Homography out;
  out.H = tt.inverse() * hn * ts;
  if (std::abs(out.H(2, 2)) > 1e-12 * out.H.norm()) out.H /= out.H(2, 2);
  out.validate();
  return out;
}

BinaryMask rasterize_points(const Homography& h, const std::vector<Vec2>& points, int width,
                            int height, double radius, ProjectionStats* stats) {
  if (width <= 0 || height <= 0)
    throw std::invalid_argument("rasterize: canvas dimensions must be positive");
  if (!(radius >= 1.0)) throw std::invalid_argument("rasterize: marker radius must be >= 1");
  h.validate();
  BinaryMask mask = BinaryMask::empty(width, height);
  int skipped = 0;
  const double r2 = radius * radius;
  for (const auto& p : points) {
    if (!h.finite_image(p)) {
      ++skipped;
      continue;
    }
    const Vec2 c = h.apply(p);
    const int x0 = std::max(0, static_cast<int>(std::ceil(c.x() - radius)));
    const int x1 = std::min(width - 1, static_cast<int>(std::floor(c.x() + radius)));
    const int y0 = std::max(0, static_cast<int>(std::ceil(c.y() - radius)));
    const int y1 = std::min(height - 1, static_cast<int>(std::floor(c.y() + radius)));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const double dx = x - c.x(), dy = y - c.y();
        if (dx * dx + dy * dy <= r2) mask.set(x, y, true);
      }
  }
  if (stats) stats->skipped = skipped;
  return mask;
}

BinaryMask project_minima(const Homography& h, const MinimaSet& minima, int width, int height,
                          double radius, ProjectionStats* stats) {
  if (minima.grid.dim() != 2)
    throw std::invalid_argument("project_minima: 2D minima sets only");
  std::vector<Vec2> pts;
  pts.reserve(minima.points.size());
  for (const auto& p : minima.points) pts.emplace_back(p.x[0], p.x[1]);
  return rasterize_points(h, pts, width, height, radius, stats);
}

std::optional<double> overlap_fraction(const BinaryMask& sim, const BinaryMask& exp,
                                       const EvalCircle& circle) {
  if (sim.width != exp.width || sim.height != exp.height)
    throw std::invalid_argument("overlap_fraction: mask dimensions differ");
  if (!(circle.diameter > 0.0))
    throw std::invalid_argument("overlap_fraction: circle diameter must be positive");
  const double r = circle.diameter / 2.0;
  if (circle.center.x() + r < 0 || circle.center.x() - r > sim.width - 1 ||
      circle.center.y() + r < 0 || circle.center.y() - r > sim.height - 1)
    throw std::invalid_argument("overlap_fraction: circle does not intersect the canvas");

  const int x0 = std::max(0, static_cast<int>(std::ceil(circle.center.x() - r)));
  const int x1 = std::min(sim.width - 1, static_cast<int>(std::floor(circle.center.x() + r)));
  const int y0 = std::max(0, static_cast<int>(std::ceil(circle.center.y() - r)));
  const int y1 = std::min(sim.height - 1, static_cast<int>(std::floor(circle.center.y() + r)));
  const double r2 = r * r;
  long sim_px = 0, both_px = 0;
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - circle.center.x(), dy = y - circle.center.y();
      if (dx * dx + dy * dy > r2) continue;
      if (!sim.at(x, y)) continue;
      ++sim_px;
      if (exp.at(x, y)) ++both_px;
    }
  if (sim_px == 0) return std::nullopt;
  return 100.0 * static_cast<double>(both_px) / static_cast<double>(sim_px);
}

std::vector<AgreementPoint> agreement_curve(const BinaryMask& sim, const BinaryMask& exp,
                                            const Vec2& center, double d_px,
                                            const std::vector<double>& alphas) {
  std::vector<AgreementPoint> curve;
  curve.reserve(alphas.size());
  for (double alpha : alphas) {
    AgreementPoint pt;
    pt.alpha = alpha;
    pt.diameter_px = alpha * d_px;
    pt.agreement = overlap_fraction(sim, exp, {center, pt.diameter_px});
    curve.push_back(pt);
  }
  return curve;
}

}  // namespace qpat
