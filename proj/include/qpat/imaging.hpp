#pragma once

#include "qpat/minima.hpp"
#include "qpat/types.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace qpat {

struct GrayImage {
  int width = 0, height = 0;
  std::vector<double> samples;  // row-major intensities in [0,1]

  double at(int x, int y) const { return samples[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return samples[static_cast<std::size_t>(y) * width + x]; }
  void validate() const;

  static GrayImage constant(int width, int height, double value);
};

struct BinaryMask {
  int width = 0, height = 0;
  std::vector<std::uint8_t> bits;  // row-major

  bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v) {
    bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0;
  }
  long count() const;

  static BinaryMask empty(int width, int height);
};

enum class Polarity { DarkForeground, BrightForeground };

/// Adaptive local-mean threshold. Dark polarity inverts intensities first;
/// a pixel is foreground when it exceeds the local window mean both scaled
/// by 1 + (0.5 - sensitivity) and unscaled, so a constant image is always
/// all-background. Window side = 2*ceil(min(width,height)/16) + 1, clipped
/// at the borders.
BinaryMask binarize(const GrayImage& img, double sensitivity, Polarity polarity);

struct Homography {
  Mat3 H = Mat3::Identity();

  /// Maps (x, y) homogeneously; callers should check finite_image first for
  /// points that may land near the plane at infinity.
  Vec2 apply(const Vec2& p) const;
  bool finite_image(const Vec2& p) const;
  void validate() const;  // |det H| above tolerance, H(2,2) normalized to 1 when nonzero
};

/// Direct linear transform with isotropic point normalization (centroid to
/// origin, mean distance sqrt(2)); exact for 4 non-degenerate pairs,
/// least-squares beyond. Pairs are (source, target).
Homography fit_homography(const std::vector<std::pair<Vec2, Vec2>>& pairs);

struct ProjectionStats {
  int skipped = 0;  // points mapping to the plane at infinity
};

/// Maps points through H into pixel coordinates and rasterizes filled disks
/// of the given radius; out-of-canvas parts clip.
BinaryMask rasterize_points(const Homography& h, const std::vector<Vec2>& points, int width,
                            int height, double radius, ProjectionStats* stats = nullptr);

/// Same for a detected/refined minima set (2D grids only).
BinaryMask project_minima(const Homography& h, const MinimaSet& minima, int width, int height,
                          double radius, ProjectionStats* stats = nullptr);

struct EvalCircle {
  Vec2 center;      // pixel coordinates
  double diameter;  // pixels
};

/// 100 * |sim AND exp| / |sim| over pixels inside the circle; empty sim
/// coverage is the distinct "undefined" result, never 0.
std::optional<double> overlap_fraction(const BinaryMask& sim, const BinaryMask& exp,
                                       const EvalCircle& circle);

struct AgreementPoint {
  double alpha = 0.0;
  double diameter_px = 0.0;
  std::optional<double> agreement;  // percentage in [0,100]
};

std::vector<AgreementPoint> agreement_curve(const BinaryMask& sim, const BinaryMask& exp,
                                            const Vec2& center, double d_px,
                                            const std::vector<double>& alphas);

}  // namespace qpat
