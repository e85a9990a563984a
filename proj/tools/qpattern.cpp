// qpattern: simulate plane-wave radiation potentials, locate particle
// assembly sites, classify pattern periodicity, and compare simulated
// patterns against binarized photographs.

#include "qpat/geometry.hpp"
#include "qpat/imaging.hpp"
#include "qpat/minima.hpp"
#include "qpat/pgm.hpp"
#include "qpat/potential.hpp"
#include "qpat/run_config.hpp"
#include "qpat/wave.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qpat;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string preset;
  double grid_box = 0.0;  // half-width in wavelengths; 0 = config default
  int grid_res = 0;
  int threads = 1;
  unsigned seed = 0;
  std::string out_dir = ".";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "run configuration file (JSON)");
  cmd->add_option("--preset", o.preset,
                  "run preset: exp1, exp2, pair, square, hexagon, octagon, decagon, dodecagon");
  cmd->add_option("--grid-box", o.grid_box, "grid half-width in wavelengths");
  cmd->add_option("--grid-res", o.grid_res, "grid points per axis");
  cmd->add_option("--threads", o.threads, "worker threads for batch evaluation")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "seed for sampled operations");
  cmd->add_option("--out", o.out_dir, "output directory");
}

RunConfig resolve_config(const CommonOpts& o) {
  if (!o.config_path.empty() && !o.preset.empty())
    throw std::invalid_argument("give either --config or --preset, not both");
  RunConfig rc;
  if (!o.config_path.empty())
    rc = load_config(o.config_path);
  else if (!o.preset.empty())
    rc = preset_run_config(o.preset);
  else
    throw std::invalid_argument("a --config file or --preset name is required");
  if (o.grid_box > 0.0) {
    rc.grid.half_width_lambda = o.grid_box;
    rc.grid.box.reset();
  }
  if (o.grid_res > 0) rc.grid.res = o.grid_res;
  if (o.seed != 0) rc.seed = o.seed;
  return rc;
}

fs::path ensure_out_dir(const CommonOpts& o) {
  fs::path dir(o.out_dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failure on " + path.string());
}

json grid_meta(const RunConfig& rc, const FieldGrid& grid) {
  json meta;
  meta["lambda"] = rc.wave.wavelength();
  meta["k"] = rc.wave.k;
  json lo = json::array(), hi = json::array(), res = json::array();
  for (int a = 0; a < grid.spec.dim(); ++a) {
    lo.push_back(grid.spec.lower[a]);
    hi.push_back(grid.spec.upper[a]);
    res.push_back(grid.spec.res[a]);
  }
  meta["box"] = json::array({lo, hi});
  meta["res"] = res;
  return meta;
}

// Field image: row 0 is the top of the picture (max y); value scaling is
// recorded in the sidecar so physical values stay recoverable.
GrayImage field_to_image(const FieldGrid& grid, double lo, double hi) {
  const Eigen::Index nx = grid.spec.res[0];
  const Eigen::Index ny = grid.spec.res[1];
  GrayImage img;
  img.width = static_cast<int>(nx);
  img.height = static_cast<int>(ny);
  img.samples.resize(static_cast<std::size_t>(nx * ny));
  const double span = hi > lo ? hi - lo : 1.0;
  for (Eigen::Index iy = 0; iy < ny; ++iy)
    for (Eigen::Index ix = 0; ix < nx; ++ix) {
      const double v = grid.psi[iy * nx + ix];
      img.samples[static_cast<std::size_t>(ny - 1 - iy) * nx + ix] =
          std::clamp((v - lo) / span, 0.0, 1.0);
    }
  return img;
}

std::string minima_csv(const MinimaSet& detected, const MinimaSet& refined) {
  std::string csv = "# units: x,y in meters; psi, grad_norm, min_eig in config units\n";
  csv += "x,y,psi,grad_norm,min_eig,refined\n";
  const auto emit = [&](const MinimaSet& set) {
    for (const auto& p : set.points) {
      csv += format_double(p.x[0]) + "," + format_double(p.x[1]) + "," + format_double(p.psi) +
             "," + format_double(p.grad_norm) + "," + format_double(p.eig_min) + "," +
             (p.refined ? "1" : "0") + "\n";
    }
  };
  emit(detected);
  emit(refined);
  return csv;
}

int cmd_field(const CommonOpts& o, bool fixed_scale, double scale_min, double scale_max) {
  const RunConfig rc = resolve_config(o);
  if (rc.wave.dim() != 2)
    throw std::invalid_argument("field image export requires a 2D configuration");
  const fs::path dir = ensure_out_dir(o);
  const FieldGrid grid = evaluate_arp_grid(rc.wave, rc.coefficients, grid_spec_for(rc), o.threads);

  const double lo = fixed_scale ? scale_min : grid.psi.minCoeff();
  const double hi = fixed_scale ? scale_max : grid.psi.maxCoeff();
  write_pgm(dir / "field.pgm", field_to_image(grid, lo, hi), 65535);

  // Raw planes: float64, little endian, x fastest then y; psi, grad_norm,
  // eig_min concatenated.
  std::ofstream raw(dir / "field_raw.f64", std::ios::binary);
  if (!raw) throw std::runtime_error("cannot write field_raw.f64");
  const auto dump = [&](const Eigen::ArrayXd& plane) {
    raw.write(reinterpret_cast<const char*>(plane.data()),
              static_cast<std::streamsize>(sizeof(double) * plane.size()));
  };
  dump(grid.psi);
  dump(grid.grad_norm);
  dump(grid.eig_min);
  raw.close();

  json meta = grid_meta(rc, grid);
  meta["scale"] = {{"mode", fixed_scale ? "fixed" : "minmax"},
                   {"min", lo},
                   {"max", hi},
                   {"maxval", 65535}};
  meta["raw"] = {{"file", "field_raw.f64"},
                 {"planes", json::array({"psi", "grad_norm", "eig_min"})},
                 {"dtype", "float64-le"},
                 {"order", "x-fastest"}};
  meta["image_rows"] = "top row is max y";
  write_text(dir / "field_meta.json", meta.dump(2) + "\n");
  write_text(dir / "config_echo.json", config_echo(rc));
  std::cout << "field: " << (dir / "field.pgm").string() << " psi range [" << format_double(lo)
            << ", " << format_double(hi) << "]\n";
  return 0;
}

int cmd_minima(const CommonOpts& o) {
  const RunConfig rc = resolve_config(o);
  const fs::path dir = ensure_out_dir(o);
  const FieldGrid grid = evaluate_arp_grid(rc.wave, rc.coefficients, grid_spec_for(rc), o.threads);
  const MinimaSet detected = detect_minima(grid, rc.criteria);
  const MinimaSet refined =
      refine_basins(rc.wave, rc.coefficients, grid, rc.criteria, {}, o.threads);
  write_text(dir / "minima.csv", minima_csv(detected, refined));
  write_text(dir / "config_echo.json", config_echo(rc));
  std::cout << "minima: " << detected.points.size() << " detected cells, "
            << refined.points.size() << " refined -> " << (dir / "minima.csv").string() << "\n";
  return 0;
}

int cmd_symmetry(const CommonOpts& o, int order, double radius_lambda, int samples) {
  const RunConfig rc = resolve_config(o);
  const double radius = radius_lambda * rc.wave.wavelength();
  const double defect =
      rotational_symmetry_defect(rc.wave, rc.coefficients, order, radius, samples, rc.seed);
  std::cout << "order " << order << " symmetry defect " << format_double(defect) << "\n";
  return 0;
}

int cmd_classify(const CommonOpts& o, int qmax) {
  const RunConfig rc = resolve_config(o);
  const PeriodicityResult r = classify_periodicity(rc.wave.wavevectors, qmax);
  if (!r.periodic) {
    std::cout << "quasiperiodic (no rational lattice up to denominator " << qmax << ")\n";
    return 0;
  }
  std::cout << "periodic\n";
  std::cout << "basis columns:";
  for (int c : r.basis_columns) std::cout << " k" << (c + 1);
  std::cout << "\n";
  for (const auto& combo : r.combinations) {
    std::cout << "k" << (combo.column + 1) << " =";
    for (std::size_t i = 0; i < combo.coeffs.size(); ++i) {
      const auto& coeff = combo.coeffs[i];
      std::cout << (i ? " + " : " ") << "(" << coeff.num << "/" << coeff.den << ") k"
                << (r.basis_columns[i] + 1);
    }
    std::cout << "\n";
  }
  const Vec t = periodic_translation(rc.wave.wavevectors, r);
  std::cout << "translation:";
  for (int a = 0; a < t.size(); ++a) std::cout << " " << format_double(t[a]);
  std::cout << "\n";
  return 0;
}

int cmd_relax(const CommonOpts& o, int particles, double radius_lambda, int iterations) {
  const RunConfig rc = resolve_config(o);
  const fs::path dir = ensure_out_dir(o);
  const double radius = radius_lambda * rc.wave.wavelength();
  const int d = rc.wave.dim();

  std::mt19937_64 rng(rc.seed);
  const auto uniform = [&rng](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  };
  std::vector<Vec> seeds;
  while (static_cast<int>(seeds.size()) < particles) {
    Vec x(d);
    for (int a = 0; a < d; ++a) x[a] = uniform(-radius, radius);
    if (x.norm() <= radius) seeds.push_back(x);
  }

  RelaxOptions opts;
  opts.iterations = iterations;
  opts.record_trajectories = true;
  opts.threads = o.threads;
  const RelaxResult r = relax_particles(rc.wave, rc.coefficients, seeds, opts);

  std::string csv = "# overdamped descent trajectories; units: meters and config units\n";
  csv += "particle,step,x,y";
  if (d == 3) csv += ",z";
  csv += ",psi\n";
  for (std::size_t i = 0; i < seeds.size(); ++i)
    for (std::size_t s = 0; s < r.trajectories[i].size(); ++s) {
      csv += std::to_string(i) + "," + std::to_string(s);
      for (int a = 0; a < d; ++a) csv += "," + format_double(r.trajectories[i][s][a]);
      csv += "," + format_double(r.psi_history[i][s]) + "\n";
    }
  write_text(dir / "trajectories.csv", csv);

  std::string fin = "# final particle states\nparticle,x,y";
  if (d == 3) fin += ",z";
  fin += ",psi,grad_norm,converged\n";
  int converged = 0;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    fin += std::to_string(i);
    for (int a = 0; a < d; ++a) fin += "," + format_double(r.positions[i][a]);
    fin += "," + format_double(r.psi[i]) + "," + format_double(r.grad_norm[i]) + "," +
           (r.converged[i] ? "1" : "0") + "\n";
    converged += r.converged[i] ? 1 : 0;
  }
  write_text(dir / "relax_final.csv", fin);
  std::cout << "relax: " << converged << "/" << seeds.size() << " converged -> "
            << (dir / "trajectories.csv").string() << "\n";
  return 0;
}

GrayImage overlay_image(const BinaryMask& sim, const BinaryMask& exp) {
  // Comparison picture: background white, experiment-only light gray,
  // simulation-only mid gray, overlap black.
  GrayImage img = GrayImage::constant(sim.width, sim.height, 1.0);
  for (int y = 0; y < sim.height; ++y)
    for (int x = 0; x < sim.width; ++x) {
      const bool s = sim.at(x, y), e = exp.at(x, y);
      if (s && e)
        img.at(x, y) = 0.0;
      else if (s)
        img.at(x, y) = 0.45;
      else if (e)
        img.at(x, y) = 0.75;
    }
  return img;
}

std::vector<Vec2> read_refined_sites(const std::string& minima_path) {
  std::ifstream in(minima_path);
  if (!in) throw std::invalid_argument("cannot open minima CSV " + minima_path);
  std::vector<Vec2> sites;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("x,", 0) == 0) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() < 6)
      throw std::invalid_argument("minima CSV: expected 6 columns in '" + line + "'");
    if (cells[5] == "1") sites.emplace_back(std::stod(cells[0]), std::stod(cells[1]));
  }
  return sites;
}

int cmd_compare(const CommonOpts& o, const std::string& image_path, const std::string& points_path,
                const std::string& minima_path, double sensitivity, double marker_radius,
                const std::vector<double>& alphas, double center_x, double center_y, double d_px,
                double d_lambda) {
  const RunConfig rc = resolve_config(o);
  const fs::path dir = ensure_out_dir(o);
  if (rc.wave.dim() != 2) throw std::invalid_argument("compare requires a 2D configuration");

  const GrayImage photo = read_pgm(image_path);
  const BinaryMask exp_mask = binarize(photo, sensitivity, Polarity::DarkForeground);

  const auto pairs = read_correspondences(points_path);
  const Homography h = fit_homography(pairs);

  // Simulated assembly sites: a previously exported CSV, or a fresh
  // detect+refine pass on this configuration.
  std::vector<Vec2> sites;
  if (!minima_path.empty()) {
    sites = read_refined_sites(minima_path);
  } else {
    const FieldGrid grid =
        evaluate_arp_grid(rc.wave, rc.coefficients, grid_spec_for(rc), o.threads);
    const MinimaSet refined =
        refine_basins(rc.wave, rc.coefficients, grid, rc.criteria, {}, o.threads);
    for (const auto& p : refined.points) sites.emplace_back(p.x[0], p.x[1]);
  }

  ProjectionStats stats;
  const BinaryMask sim_mask =
      rasterize_points(h, sites, photo.width, photo.height, marker_radius, &stats);
  if (stats.skipped > 0)
    std::cerr << "warning: " << stats.skipped << " site(s) mapped to the plane at infinity\n";

  // Evaluation circle: center defaults to the mapped origin, diameter to
  // the mapped transducer width D (default 40/3 lambda).
  Vec2 center = h.apply(Vec2(0.0, 0.0));
  if (center_x >= 0 && center_y >= 0) center = Vec2(center_x, center_y);
  double diameter = d_px;
  if (diameter <= 0) {
    const double d_phys = d_lambda * rc.wave.wavelength();
    const Vec2 ex0 = h.apply(Vec2(-d_phys / 2, 0)), ex1 = h.apply(Vec2(d_phys / 2, 0));
    const Vec2 ey0 = h.apply(Vec2(0, -d_phys / 2)), ey1 = h.apply(Vec2(0, d_phys / 2));
    diameter = 0.5 * ((ex1 - ex0).norm() + (ey1 - ey0).norm());
  }

  const auto curve = agreement_curve(sim_mask, exp_mask, center, diameter, alphas);
  std::string csv = "alpha,diameter_px,agreement_pct\n";
  for (const auto& p : curve) {
    csv += format_double(p.alpha) + "," + format_double(p.diameter_px) + ",";
    csv += p.agreement ? format_double(*p.agreement) : std::string("undefined");
    csv += "\n";
  }
  write_text(dir / "agreement.csv", csv);
  write_pgm(dir / "sim_mask.pgm", sim_mask);
  write_pgm(dir / "exp_mask.pgm", exp_mask);
  write_pgm(dir / "overlay.pgm", overlay_image(sim_mask, exp_mask), 255);

  for (const auto& p : curve)
    std::cout << "alpha " << p.alpha << ": "
              << (p.agreement ? format_double(*p.agreement) + "%" : std::string("undefined"))
              << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"plane-wave particle pattern toolkit"};
  app.require_subcommand(1);

  CommonOpts field_o, minima_o, sym_o, classify_o, relax_o, compare_o;

  auto* field = app.add_subcommand("field", "evaluate the potential on a grid, export image + raw");
  add_common(field, field_o);
  bool fixed_scale = false;
  double scale_min = 0.0, scale_max = 1.0;
  field->add_flag("--fixed-scale", fixed_scale, "use an explicit value range for the image");
  field->add_option("--scale-min", scale_min, "fixed-scale minimum");
  field->add_option("--scale-max", scale_max, "fixed-scale maximum");

  auto* minima = app.add_subcommand("minima", "detect and refine assembly sites, export CSV");
  add_common(minima, minima_o);

  auto* symmetry = app.add_subcommand("symmetry", "rotational symmetry defect of the potential");
  add_common(symmetry, sym_o);
  int order = 8, samples = 512;
  double radius_lambda = 7.0;
  symmetry->add_option("--order", order, "rotational order m (angle 2 pi / m)")->required();
  symmetry->add_option("--radius", radius_lambda, "sample disk radius in wavelengths");
  symmetry->add_option("--samples", samples, "number of sample points");

  auto* classify = app.add_subcommand("classify", "periodic vs quasiperiodic wavevector set");
  add_common(classify, classify_o);
  int qmax = 64;
  classify->add_option("--qmax", qmax, "denominator bound for the rational search");

  auto* relax = app.add_subcommand("relax", "overdamped particle descent, export trajectories");
  add_common(relax, relax_o);
  int particles = 100, iterations = 1000;
  double relax_radius = 3.0;
  relax->add_option("--particles", particles, "number of particles");
  relax->add_option("--radius", relax_radius, "seeding disk radius in wavelengths");
  relax->add_option("--iterations", iterations, "descent iteration cap");

  auto* compare = app.add_subcommand("compare", "register sites onto a photo, agreement curve");
  add_common(compare, compare_o);
  std::string image_path, points_path, minima_path;
  double sensitivity = 0.45, marker_radius = 3.0;
  std::vector<double> alphas = {0.5, 0.625, 0.75, 0.875, 1.0};
  double center_x = -1.0, center_y = -1.0, d_px = 0.0, d_lambda = 40.0 / 3.0;
  compare->add_option("--image", image_path, "experiment photograph (PGM P5)")->required();
  compare
      ->add_option("--points", points_path,
                   "correspondences: 'sx sy tx ty' per line, source meters, target pixels")
      ->required();
  compare->add_option("--minima", minima_path, "minima CSV (else recomputed from the config)");
  compare->add_option("--sensitivity", sensitivity, "binarization sensitivity in [0,1]");
  compare->add_option("--marker-radius", marker_radius, "site marker radius in pixels");
  compare->add_option("--alphas", alphas, "evaluation circle fractions of D");
  compare->add_option("--center-x", center_x, "circle center x in pixels (default: mapped origin)");
  compare->add_option("--center-y", center_y, "circle center y in pixels");
  compare->add_option("--d-px", d_px, "evaluation diameter D in pixels (default: mapped D)");
  compare->add_option("--d-lambda", d_lambda, "transducer width D in wavelengths");

  CLI11_PARSE(app, argc, argv);

  try {
    if (field->parsed()) return cmd_field(field_o, fixed_scale, scale_min, scale_max);
    if (minima->parsed()) return cmd_minima(minima_o);
    if (symmetry->parsed()) return cmd_symmetry(sym_o, order, radius_lambda, samples);
    if (classify->parsed()) return cmd_classify(classify_o, qmax);
    if (relax->parsed()) return cmd_relax(relax_o, particles, relax_radius, iterations);
    if (compare->parsed())
      return cmd_compare(compare_o, image_path, points_path, minima_path, sensitivity,
                         marker_radius, alphas, center_x, center_y, d_px, d_lambda);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
