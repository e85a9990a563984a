#pragma once

#include "qpat/minima.hpp"
#include "qpat/potential.hpp"
#include "qpat/wave.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qpat {

/// Grid request: either a centered square (cube) of the given half-width in
/// wavelengths, or an explicit box in meters.
struct GridConfig {
  double half_width_lambda = 7.0;
  int res = 1024;
  std::optional<std::pair<Vec, Vec>> box;
};

struct RunConfig {
  std::string wave_preset;  // empty when K was given explicitly
  WaveConfig wave;
  std::optional<MaterialParams> material;  // exactly one of material / direct coefficients
  bool direct_coefficients = false;
  ArpCoefficients coefficients;  // resolved either way
  GridConfig grid;
  MinimaCriteria criteria;
  std::vector<std::string> outputs;
  unsigned seed = 0;
};

/// Wavenumber of the default water/carbon demo system (1 MHz in water).
double default_wavenumber();

/// Pair counts of the polygon presets: pair, square, hexagon, octagon,
/// decagon, dodecagon. Throws on unknown names.
int preset_pair_count(const std::string& name);

/// Full run presets: the polygon names above with all-ones drive, plus
/// exp1 (octagon, u = ones) and exp2 (octagon, u = [1,-1,1,1,1,-1,1,1]).
RunConfig preset_run_config(const std::string& name);

RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text, const std::string& origin = "config");

/// JSON document that re-parses to an identical RunConfig.
std::string config_echo(const RunConfig& cfg);

GridSpec grid_spec_for(const RunConfig& cfg);

/// Registration pairs "sx sy tx ty", one per line, '#' comments.
std::vector<std::pair<Vec2, Vec2>> read_correspondences(const std::filesystem::path& path);

/// Locale-independent, round-trip-exact decimal rendering.
std::string format_double(double v);

}  // namespace qpat
