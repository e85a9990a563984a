#include "qpat/run_config.hpp"

#include "qpat/geometry.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qpat {

using nlohmann::json;

double default_wavenumber() {
  const MaterialParams m = water_carbon_material();
  return m.omega / m.c0;
}

int preset_pair_count(const std::string& name) {
  if (name == "pair") return 1;
  if (name == "square") return 2;
  if (name == "hexagon") return 3;
  if (name == "octagon") return 4;
  if (name == "decagon") return 5;
  if (name == "dodecagon") return 6;
  throw std::invalid_argument("unknown wave preset '" + name +
                              "' (expected pair, square, hexagon, octagon, decagon, dodecagon)");
}

namespace {

CVec ones_drive(int pairs) { return CVec::Constant(2 * pairs, Complex{1.0, 0.0}); }

const std::set<std::string>& known_outputs() {
  static const std::set<std::string> s{"field", "raw",   "minima",   "trajectories",
                                       "masks", "curve", "metadata"};
  return s;
}

Complex parse_amplitude(const json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  throw std::invalid_argument(where + ": amplitude entries must be numbers or [re, im] pairs");
}

MaterialParams parse_material(const json& m) {
  MaterialParams mp;
  const struct {
    const char* key;
    double* dst;
  } fields[] = {{"rho0", &mp.rho0},
                {"c0", &mp.c0},
                {"rho_p", &mp.rho_p},
                {"c_p", &mp.c_p},
                {"omega", &mp.omega}};
  for (const auto& f : fields) {
    if (!m.contains(f.key))
      throw std::invalid_argument(std::string("material: missing field '") + f.key + "'");
    *f.dst = m.at(f.key).get<double>();
  }
  mp.validate();
  return mp;
}

json amplitude_json(const Complex& c) {
  if (c.imag() == 0.0) return c.real();
  return json::array({c.real(), c.imag()});
}

}  // namespace

RunConfig preset_run_config(const std::string& name) {
  RunConfig rc;
  const double k = default_wavenumber();
  std::string wave_name = name;
  CVec u;
  if (name == "exp1") {
    wave_name = "octagon";
    u = ones_drive(4);
  } else if (name == "exp2") {
    wave_name = "octagon";
    u = ones_drive(4);
    u[1] = Complex{-1.0, 0.0};  // u = [1,-1,1,1, 1,-1,1,1]
    u[5] = Complex{-1.0, 0.0};
  } else {
    u = ones_drive(preset_pair_count(name));
  }
  const int pairs = preset_pair_count(wave_name);
  rc.wave_preset = wave_name;
  rc.wave = wave_config_from_drive(polygon_wavevectors(pairs, k), k, u);
  rc.material = water_carbon_material();
  rc.coefficients = arp_coefficients(*rc.material, rc.wave.dim());
  rc.direct_coefficients = false;
  return rc;
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // nlohmann reports "at line L, column C" in what().
    throw std::invalid_argument(origin + ": " + e.what());
  }
  try {
    RunConfig rc;
    if (doc.contains("preset")) rc = preset_run_config(doc.at("preset").get<std::string>());

    if (doc.contains("wave")) {
      const json& w = doc.at("wave");
      const bool has_preset = w.contains("preset");
      const bool has_k_matrix = w.contains("K");
      if (has_preset && has_k_matrix)
        throw std::invalid_argument("wave: preset and explicit K are mutually exclusive");
      double k = w.contains("k") ? w.at("k").get<double>() : default_wavenumber();
      Mat kmat;
      if (has_preset) {
        rc.wave_preset = w.at("preset").get<std::string>();
        kmat = polygon_wavevectors(preset_pair_count(rc.wave_preset), k);
      } else if (has_k_matrix) {
        rc.wave_preset.clear();
        const json& km = w.at("K");
        const int d = static_cast<int>(km.size());
        if (d != 2 && d != 3) throw std::invalid_argument("wave.K: expected 2 or 3 rows");
        const int n = static_cast<int>(km.at(0).size());
        kmat.resize(d, n);
        for (int r = 0; r < d; ++r) {
          if (static_cast<int>(km.at(r).size()) != n)
            throw std::invalid_argument("wave.K: ragged rows");
          for (int c = 0; c < n; ++c) kmat(r, c) = km.at(r).at(c).get<double>();
        }
        if (!w.contains("k")) k = kmat.col(0).norm();
      } else if (!rc.wave_preset.empty()) {
        kmat = polygon_wavevectors(preset_pair_count(rc.wave_preset), k);
      } else {
        throw std::invalid_argument("wave: either preset or K required");
      }
      CVec u;
      if (w.contains("u")) {
        const json& uj = w.at("u");
        u.resize(static_cast<Eigen::Index>(uj.size()));
        for (std::size_t i = 0; i < uj.size(); ++i)
          u[static_cast<Eigen::Index>(i)] = parse_amplitude(uj.at(i), "wave.u");
      } else if (!rc.wave_preset.empty() && rc.wave.alpha.size() == kmat.cols()) {
        u.resize(2 * kmat.cols());
        u << rc.wave.alpha, rc.wave.beta;
      } else {
        u = ones_drive(static_cast<int>(kmat.cols()));
      }
      rc.wave = wave_config_from_drive(kmat, k, u);
    } else if (rc.wave_preset.empty()) {
      throw std::invalid_argument("config: missing wave section (or a run preset)");
    }

    const bool has_material = doc.contains("material");
    const bool has_coeffs = doc.contains("coefficients");
    if (has_material && has_coeffs)
      throw std::invalid_argument(
          "config: material and coefficients are mutually exclusive, give exactly one");
    if (has_material) {
      rc.material = parse_material(doc.at("material"));
      rc.direct_coefficients = false;
      rc.coefficients = arp_coefficients(*rc.material, rc.wave.dim());
    } else if (has_coeffs) {
      const json& c = doc.at("coefficients");
      rc.material.reset();
      rc.direct_coefficients = true;
      const double a = c.at("a").get<double>();
      const std::string mode = c.value("mode", std::string("acoustic"));
      if (mode == "optical") {
        rc.coefficients = ArpCoefficients::optical(a, rc.wave.dim());
      } else if (c.contains("B")) {
        const json& bj = c.at("B");
        const int d = rc.wave.dim();
        if (static_cast<int>(bj.size()) != d)
          throw std::invalid_argument("coefficients.B: dimension mismatch with wave");
        Mat b(d, d);
        for (int r = 0; r < d; ++r)
          for (int cc = 0; cc < d; ++cc) b(r, cc) = bj.at(r).at(cc).get<double>();
        rc.coefficients = ArpCoefficients::direct(a, b);
      } else {
        rc.coefficients =
            ArpCoefficients::isotropic(a, c.at("b").get<double>(), rc.wave.dim());
      }
    } else if (!rc.material.has_value()) {
      throw std::invalid_argument("config: give exactly one of material or coefficients");
    }

    if (doc.contains("grid")) {
      const json& g = doc.at("grid");
      rc.grid.res = g.value("res", rc.grid.res);
      if (g.contains("box")) {
        const json& b = g.at("box");
        const int d = rc.wave.dim();
        if (static_cast<int>(b.size()) != 2 || static_cast<int>(b.at(0).size()) != d ||
            static_cast<int>(b.at(1).size()) != d)
          throw std::invalid_argument("grid.box: expected [lower, upper] with wave dimension");
        Vec lo(d), hi(d);
        for (int a = 0; a < d; ++a) {
          lo[a] = b.at(0).at(a).get<double>();
          hi[a] = b.at(1).at(a).get<double>();
        }
        rc.grid.box = std::make_pair(lo, hi);
      } else if (g.contains("half_width_lambda")) {
        rc.grid.half_width_lambda = g.at("half_width_lambda").get<double>();
      }
    }

    if (doc.contains("criteria")) {
      const json& cj = doc.at("criteria");
      const std::string mode = cj.value("mode", std::string("auto"));
      if (mode == "absolute") {
        rc.criteria = MinimaCriteria::absolute(cj.value("eig_min", 1e-6),
                                               cj.value("grad_max", 4e11));
      } else if (mode == "auto") {
        rc.criteria = MinimaCriteria::auto_scaled(cj.value("eig_factor", 1e-9),
                                                  cj.value("grad_factor", 0.05));
      } else {
        throw std::invalid_argument("criteria.mode: expected 'auto' or 'absolute'");
      }
    }

    if (doc.contains("outputs")) {
      for (const auto& o : doc.at("outputs")) {
        const std::string name = o.get<std::string>();
        if (!known_outputs().count(name))
          throw std::invalid_argument("outputs: unknown artifact '" + name + "'");
        rc.outputs.push_back(name);
      }
    }
    rc.seed = doc.value("seed", 0u);

    rc.wave.validate();
    rc.coefficients.validate();
    rc.criteria.validate();
    grid_spec_for(rc).validate();
    return rc;
  } catch (const json::exception& e) {
    throw std::invalid_argument(origin + ": " + e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

std::string config_echo(const RunConfig& cfg) {
  json doc;
  json w;
  if (!cfg.wave_preset.empty()) {
    w["preset"] = cfg.wave_preset;
  } else {
    json rows = json::array();
    for (int r = 0; r < cfg.wave.dim(); ++r) {
      json row = json::array();
      for (int c = 0; c < cfg.wave.pair_count(); ++c) row.push_back(cfg.wave.wavevectors(r, c));
      rows.push_back(row);
    }
    w["K"] = rows;
  }
  w["k"] = cfg.wave.k;
  json u = json::array();
  for (int j = 0; j < cfg.wave.pair_count(); ++j) u.push_back(amplitude_json(cfg.wave.alpha[j]));
  for (int j = 0; j < cfg.wave.pair_count(); ++j) u.push_back(amplitude_json(cfg.wave.beta[j]));
  w["u"] = u;
  doc["wave"] = w;

  if (cfg.direct_coefficients) {
    json c;
    c["a"] = cfg.coefficients.a;
    if (cfg.coefficients.mode == ArpMode::Optical) {
      c["mode"] = "optical";
    } else {
      c["mode"] = "acoustic";
      json rows = json::array();
      for (int r = 0; r < cfg.coefficients.dim(); ++r) {
        json row = json::array();
        for (int cc = 0; cc < cfg.coefficients.dim(); ++cc) row.push_back(cfg.coefficients.B(r, cc));
        rows.push_back(row);
      }
      c["B"] = rows;
    }
    doc["coefficients"] = c;
  } else {
    const MaterialParams& m = *cfg.material;
    doc["material"] = {{"rho0", m.rho0},
                       {"c0", m.c0},
                       {"rho_p", m.rho_p},
                       {"c_p", m.c_p},
                       {"omega", m.omega}};
  }

  json g;
  g["res"] = cfg.grid.res;
  if (cfg.grid.box) {
    json lo = json::array(), hi = json::array();
    for (int a = 0; a < cfg.grid.box->first.size(); ++a) {
      lo.push_back(cfg.grid.box->first[a]);
      hi.push_back(cfg.grid.box->second[a]);
    }
    g["box"] = json::array({lo, hi});
  } else {
    g["half_width_lambda"] = cfg.grid.half_width_lambda;
  }
  doc["grid"] = g;

  json cj;
  if (cfg.criteria.mode == MinimaCriteria::Mode::Absolute) {
    cj["mode"] = "absolute";
    cj["eig_min"] = cfg.criteria.eig_min;
    cj["grad_max"] = cfg.criteria.grad_max;
  } else {
    cj["mode"] = "auto";
    cj["eig_factor"] = cfg.criteria.eig_factor;
    cj["grad_factor"] = cfg.criteria.grad_factor;
  }
  doc["criteria"] = cj;

  if (!cfg.outputs.empty()) doc["outputs"] = cfg.outputs;
  doc["seed"] = cfg.seed;
  return doc.dump(2) + "\n";
}

GridSpec grid_spec_for(const RunConfig& cfg) {
  GridSpec spec;
  const int d = cfg.wave.dim();
  if (cfg.grid.box) {
    spec.lower = cfg.grid.box->first;
    spec.upper = cfg.grid.box->second;
  } else {
    const double half = cfg.grid.half_width_lambda * cfg.wave.wavelength();
    spec.lower = Vec::Constant(d, -half);
    spec.upper = Vec::Constant(d, half);
  }
  spec.res = Eigen::VectorXi::Constant(d, cfg.grid.res);
  return spec;
}

std::vector<std::pair<Vec2, Vec2>> read_correspondences(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("correspondences: cannot open " + path.string());
  std::vector<std::pair<Vec2, Vec2>> pairs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    double sx, sy, tx, ty;
    if (!(ls >> sx)) continue;  // blank or comment-only line
    if (!(ls >> sy >> tx >> ty))
      throw std::invalid_argument("correspondences: expected 'sx sy tx ty' at " + path.string() +
                                  ":" + std::to_string(lineno));
    double extra;
    if (ls >> extra)
      throw std::invalid_argument("correspondences: trailing data at " + path.string() + ":" +
                                  std::to_string(lineno));
    pairs.emplace_back(Vec2(sx, sy), Vec2(tx, ty));
  }
  return pairs;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace qpat
