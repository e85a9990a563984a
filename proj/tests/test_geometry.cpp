#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qpat/geometry.hpp"

#include "oracles.hpp"

#include <random>

using namespace qpat;

namespace {

WaveConfig all_ones_polygon(int pairs, double k) {
  return wave_config_from_drive(polygon_wavevectors(pairs, k), k,
                                CVec::Constant(2 * pairs, Complex{1, 0}));
}

}  // namespace

TEST_CASE("polygon wavevectors") {
  SUBCASE("octagon directions at multiples of pi/4") {
    const Mat cols = polygon_wavevectors(4, 1.0);
    REQUIRE(cols.cols() == 4);
    for (int j = 0; j < 4; ++j) {
      const double theta = j * pi / 4.0;
      CHECK(cols(0, j) == doctest::Approx(std::cos(theta)).epsilon(1e-15));
      CHECK(cols(1, j) == doctest::Approx(std::sin(theta)).epsilon(1e-15));
    }
  }

  SUBCASE("single pair") {
    const Mat cols = polygon_wavevectors(1, 1.0);
    CHECK(cols(0, 0) == 1.0);
    CHECK(cols(1, 0) == 0.0);
  }

  SUBCASE("square is the orthogonal case") {
    const Mat cols = polygon_wavevectors(2, 1.0);
    CHECK(cols.col(0).isApprox(Vec2(1.0, 0.0), 1e-15));
    CHECK((cols.col(1) - Vec2(0.0, 1.0)).norm() <= 1e-15);
  }

  SUBCASE("zero pairs rejected") { CHECK_THROWS_AS(polygon_wavevectors(0, 1.0), std::invalid_argument); }

  SUBCASE("duplicate and antipodal columns rejected") {
    Mat dup(2, 2);
    dup << 1, 1, 0, 0;
    CHECK_THROWS_AS(validate_wavevector_matrix(dup, 1.0), std::invalid_argument);
    Mat anti(2, 2);
    anti << 1, -1, 0, 0;
    CHECK_THROWS_AS(validate_wavevector_matrix(anti, 1.0), std::invalid_argument);
  }
}

TEST_CASE("periodicity classification") {
  SUBCASE("square lattice is periodic") {
    const auto r = classify_periodicity(polygon_wavevectors(2, 1.0));
    CHECK(r.periodic);
  }

  SUBCASE("hexagon is periodic with witness k3 = k2 - k1") {
    const auto r = classify_periodicity(polygon_wavevectors(3, 1.0));
    REQUIRE(r.periodic);
    REQUIRE(r.basis_columns == std::vector<int>{0, 1});
    REQUIRE(r.combinations.size() == 1);
    const auto& combo = r.combinations[0];
    CHECK(combo.column == 2);
    CHECK(combo.coeffs[0].num == -1);
    CHECK(combo.coeffs[0].den == 1);
    CHECK(combo.coeffs[1].num == 1);
    CHECK(combo.coeffs[1].den == 1);
    // Verify the identity numerically: cos/sin of 0, pi/3, 2pi/3.
    const Mat cols = polygon_wavevectors(3, 1.0);
    CHECK((cols.col(2) - (cols.col(1) - cols.col(0))).norm() <= 1e-15);
  }

  SUBCASE("octagon, decagon and dodecagon are quasiperiodic") {
    for (int pairs : {4, 5, 6}) {
      const auto r = classify_periodicity(polygon_wavevectors(pairs, 1.0), 64);
      CHECK_FALSE(r.periodic);
      CHECK(r.qmax == 64);
    }
  }

  SUBCASE("crystallographic restriction across 2N in {2,4,6} vs {8,10,12}") {
    for (int pairs : {1, 2, 3}) CHECK(classify_periodicity(polygon_wavevectors(pairs, 1.0)).periodic);
    for (int pairs : {4, 5, 6})
      CHECK_FALSE(classify_periodicity(polygon_wavevectors(pairs, 1.0)).periodic);
  }

  SUBCASE("classification is rotation invariant") {
    std::mt19937_64 rng(123);
    for (int trial = 0; trial < 5; ++trial) {
      const double angle = oracle::uniform(rng, 0.0, two_pi);
      const Mat2 rot = Eigen::Rotation2Dd(angle).toRotationMatrix();
      for (int pairs : {2, 3, 4, 5}) {
        const Mat k = polygon_wavevectors(pairs, 1.0);
        const Mat k_rot = rot * k;
        CHECK(classify_periodicity(k).periodic == classify_periodicity(k_rot).periodic);
      }
    }
  }

  SUBCASE("independent 3D triple is periodic") {
    Mat k(3, 3);
    k << 1, 0, 0, 0, 1, 0, 0, 0, 1;
    CHECK(classify_periodicity(k).periodic);
  }
}

TEST_CASE("periodic translation witness") {
  const double k = two_pi;  // lambda = 1
  const ArpCoefficients co = ArpCoefficients::isotropic(1.0, 0.1, 2);
  std::mt19937_64 rng(321);

  for (int pairs : {1, 2, 3}) {
    const WaveConfig cfg = all_ones_polygon(pairs, k);
    const auto witness = classify_periodicity(cfg.wavevectors);
    REQUIRE(witness.periodic);
    const Vec t = periodic_translation(cfg.wavevectors, witness);
    CHECK(t.norm() > 0.0);
    const double scale = oracle::psi_scale(cfg, co);
    for (int i = 0; i < 100; ++i) {
      const Vec x = oracle::random_point(rng, 2, 5.0);
      const double before = evaluate_arp(cfg, co, x);
      const double after = evaluate_arp(cfg, co, (x + t).eval());
      CHECK(std::abs(after - before) <= 1e-9 * scale);
    }
  }

  SUBCASE("square translation has length lambda") {
    const auto witness = classify_periodicity(polygon_wavevectors(2, k));
    const Vec t = periodic_translation(polygon_wavevectors(2, k), witness);
    CHECK(t.norm() == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("quasiperiodic witness is rejected") {
    const auto r = classify_periodicity(polygon_wavevectors(4, k));
    CHECK_THROWS_AS(periodic_translation(polygon_wavevectors(4, k), r), std::invalid_argument);
  }
}

TEST_CASE("rotational symmetry defect") {
  const double k = two_pi;
  const ArpCoefficients co = ArpCoefficients::isotropic(1.0, 0.1, 2);

  SUBCASE("all-ones 2N-gon has order-2N symmetry") {
    for (int pairs : {4, 5, 6}) {
      const WaveConfig cfg = all_ones_polygon(pairs, k);
      CHECK(rotational_symmetry_defect(cfg, co, 2 * pairs, 7.0, 256) <= 1e-10);
    }
  }

  SUBCASE("octagon has no 16-fold symmetry") {
    const WaveConfig cfg = all_ones_polygon(4, k);
    CHECK(rotational_symmetry_defect(cfg, co, 16, 7.0, 256) > 1e-2);
  }

  SUBCASE("order 1 is exactly zero") {
    const WaveConfig cfg = all_ones_polygon(4, k);
    CHECK(rotational_symmetry_defect(cfg, co, 1, 7.0, 64) == 0.0);
  }

  SUBCASE("deterministic for a fixed seed") {
    const WaveConfig cfg = all_ones_polygon(4, k);
    const double d1 = rotational_symmetry_defect(cfg, co, 16, 7.0, 128, 7);
    const double d2 = rotational_symmetry_defect(cfg, co, 16, 7.0, 128, 7);
    CHECK(d1 == d2);
  }

  SUBCASE("3D configurations are unsupported") {
    std::mt19937_64 rng(55);
    const WaveConfig cfg = oracle::random_config(rng, 3, 3, k);
    const ArpCoefficients co3 = ArpCoefficients::isotropic(1.0, 0.1, 3);
    CHECK_THROWS_AS(rotational_symmetry_defect(cfg, co3, 8, 7.0, 64), std::invalid_argument);
  }
}
