#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qpat/pgm.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "qpattern_cli_test";
  fs::create_directories(dir);
  return dir;
}

RunResult run(const std::string& args) {
  const fs::path out = work_dir() / "stdout.txt";
  const fs::path err = work_dir() / "stderr.txt";
  const std::string cmd = std::string(QPATTERN_BIN) + " " + args + " > " + out.string() + " 2> " +
                          err.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WEXITSTATUS(status);
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

}  // namespace

TEST_CASE("classify subcommand") {
  const RunResult square = run("classify --preset square");
  CHECK(square.exit_code == 0);
  CHECK(square.out.find("periodic") == 0);

  const RunResult hexagon = run("classify --preset hexagon");
  CHECK(hexagon.exit_code == 0);
  CHECK(hexagon.out.find("periodic") == 0);
  CHECK(hexagon.out.find("(-1/1) k1") != std::string::npos);
  CHECK(hexagon.out.find("(1/1) k2") != std::string::npos);

  const RunResult octagon = run("classify --preset octagon");
  CHECK(octagon.exit_code == 0);
  CHECK(octagon.out.find("quasiperiodic") == 0);
}

TEST_CASE("symmetry subcommand reports a tiny octagon defect") {
  const RunResult r = run("symmetry --preset octagon --order 8 --samples 64");
  REQUIRE(r.exit_code == 0);
  std::istringstream parse(r.out);
  std::string w1, w2, w3, w4;
  double defect = -1.0;
  parse >> w1 >> w2 >> w3 >> w4 >> defect;
  CHECK(defect >= 0.0);
  CHECK(defect <= 1e-10);
}

TEST_CASE("field subcommand writes image, raw planes and sidecar") {
  const fs::path dir = work_dir() / "field_out";
  fs::remove_all(dir);
  const RunResult r =
      run("field --preset exp1 --grid-res 64 --grid-box 2 --out " + dir.string());
  REQUIRE(r.exit_code == 0);
  const qpat::GrayImage img = qpat::read_pgm(dir / "field.pgm");
  CHECK(img.width == 64);
  CHECK(img.height == 64);
  CHECK(fs::file_size(dir / "field_raw.f64") == 3u * 64u * 64u * sizeof(double));
  const std::string meta = slurp(dir / "field_meta.json");
  CHECK(meta.find("\"lambda\"") != std::string::npos);
  CHECK(meta.find("\"min\"") != std::string::npos);
  const std::string echo = slurp(dir / "config_echo.json");
  CHECK(echo.find("octagon") != std::string::npos);
}

TEST_CASE("minima CSV is deterministic across thread counts") {
  const fs::path dir1 = work_dir() / "minima_t1";
  const fs::path dir2 = work_dir() / "minima_t2";
  fs::remove_all(dir1);
  fs::remove_all(dir2);
  const std::string common = "minima --preset exp1 --grid-res 129 --grid-box 1.5 ";
  REQUIRE(run(common + "--threads 1 --out " + dir1.string()).exit_code == 0);
  REQUIRE(run(common + "--threads 2 --out " + dir2.string()).exit_code == 0);
  const std::string csv1 = slurp(dir1 / "minima.csv");
  const std::string csv2 = slurp(dir2 / "minima.csv");
  CHECK(csv1 == csv2);
  CHECK(csv1.find("x,y,psi,grad_norm,min_eig,refined\n") != std::string::npos);
  CHECK(csv1.find(",1\n") != std::string::npos);  // at least one refined row
}

TEST_CASE("relax subcommand writes trajectories deterministically") {
  const fs::path dir1 = work_dir() / "relax_a";
  const fs::path dir2 = work_dir() / "relax_b";
  fs::remove_all(dir1);
  fs::remove_all(dir2);
  const std::string common =
      "relax --preset pair --particles 5 --iterations 50 --seed 11 --radius 0.5 ";
  REQUIRE(run(common + "--threads 1 --out " + dir1.string()).exit_code == 0);
  REQUIRE(run(common + "--threads 2 --out " + dir2.string()).exit_code == 0);
  CHECK(slurp(dir1 / "trajectories.csv") == slurp(dir2 / "trajectories.csv"));
  CHECK(slurp(dir1 / "relax_final.csv") == slurp(dir2 / "relax_final.csv"));
  CHECK(slurp(dir1 / "trajectories.csv").find("particle,step,x,y,psi") != std::string::npos);
}

TEST_CASE("validation failures exit with code 1") {
  CHECK(run("field --preset exp1 --config also.json").exit_code == 1);
  CHECK(run("minima --config /nonexistent/config.json").exit_code == 1);
  CHECK(run("classify --preset heptadecagon").exit_code == 1);
  const RunResult r = run("symmetry --preset octagon --order 8 --samples 2");
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("error") != std::string::npos);
}

TEST_CASE("compare subcommand end to end on a tiny synthetic pair") {
  const fs::path dir = work_dir() / "compare_out";
  fs::remove_all(dir);
  fs::create_directories(dir);

  // Synthetic "photo": dark blobs at two mapped site positions on a bright
  // field. Sites in meters; the map to pixels is x_px = 1e5 x + 100.
  const double scale = 1e5;
  qpat::GrayImage photo = qpat::GrayImage::constant(200, 200, 0.8);
  const auto to_px = [&](double xm, double ym) {
    return qpat::Vec2(scale * xm + 100.0, scale * ym + 100.0);
  };
  qpat::Homography id;
  std::vector<qpat::Vec2> sites_m = {{-2e-4, 1e-4}, {3e-4, -2e-4}};
  for (const auto& s : sites_m) {
    const qpat::Vec2 c = to_px(s.x(), s.y());
    for (int y = 0; y < 200; ++y)
      for (int x = 0; x < 200; ++x)
        if ((qpat::Vec2(x, y) - c).norm() <= 4.0) photo.at(x, y) = 0.2;
  }
  qpat::write_pgm(dir / "photo.pgm", photo, 255);

  std::ofstream pts(dir / "points.txt");
  pts << "# sx sy tx ty\n";
  for (double xm : {-5e-4, 5e-4})
    for (double ym : {-5e-4, 5e-4}) {
      const qpat::Vec2 t = to_px(xm, ym);
      pts << xm << " " << ym << " " << t.x() << " " << t.y() << "\n";
    }
  pts.close();

  std::ofstream csv(dir / "minima.csv");
  csv << "# units: x,y in meters\nx,y,psi,grad_norm,min_eig,refined\n";
  for (const auto& s : sites_m)
    csv << s.x() << "," << s.y() << ",0,0,1,1\n";
  csv.close();

  const RunResult r = run("compare --preset exp1 --image " + (dir / "photo.pgm").string() +
                          " --points " + (dir / "points.txt").string() + " --minima " +
                          (dir / "minima.csv").string() +
                          " --marker-radius 3 --center-x 100 --center-y 100 --d-px 180 --out " +
                          dir.string());
  REQUIRE(r.exit_code == 0);
  const std::string curve = slurp(dir / "agreement.csv");
  CHECK(curve.find("alpha,diameter_px,agreement_pct\n") == 0);
  CHECK(fs::exists(dir / "sim_mask.pgm"));
  CHECK(fs::exists(dir / "exp_mask.pgm"));
  CHECK(fs::exists(dir / "overlay.pgm"));
  // Sites drawn with radius 4 in the photo, projected with radius 3: the
  // simulated markers sit inside the binarized blobs, agreement 100%.
  CHECK(curve.find(",100\n") != std::string::npos);

  // A circle with no simulated pixels reports the undefined marker.
  const RunResult r2 = run("compare --preset exp1 --image " + (dir / "photo.pgm").string() +
                           " --points " + (dir / "points.txt").string() + " --minima " +
                           (dir / "minima.csv").string() +
                           " --center-x 190 --center-y 10 --d-px 8 --alphas 1.0 --out " +
                           dir.string());
  REQUIRE(r2.exit_code == 0);
  CHECK(slurp(dir / "agreement.csv").find("undefined") != std::string::npos);
}
