#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qpat/geometry.hpp"
#include "qpat/wave.hpp"

#include "oracles.hpp"

#include <random>

using namespace qpat;

namespace {

WaveConfig one_pair(double k) {
  Mat cols(2, 1);
  cols << k, 0.0;
  return make_wave_config(cols, k, CVec::Constant(1, Complex{1, 0}),
                          CVec::Constant(1, Complex{1, 0}));
}

WaveConfig all_ones_polygon(int pairs, double k) {
  return wave_config_from_drive(polygon_wavevectors(pairs, k), k,
                                CVec::Constant(2 * pairs, Complex{1, 0}));
}

}  // namespace

TEST_CASE("single pair: values at antinode and node") {
  const double k = two_pi;  // lambda = 1
  const WaveConfig cfg = one_pair(k);

  const Complex at_origin = evaluate_field(cfg, Vec2(0.0, 0.0));
  CHECK(at_origin.real() == 2.0);
  CHECK(at_origin.imag() == 0.0);

  const Complex at_node = evaluate_field(cfg, Vec2(pi / (2.0 * k), 0.0));
  CHECK(std::abs(at_node) <= 1e-12 * cfg.amplitude_sum());
}

TEST_CASE("octagon all-ones matches direct summation") {
  const double k = two_pi;
  const WaveConfig cfg = all_ones_polygon(4, k);
  CHECK(evaluate_field(cfg, Vec2(0.0, 0.0)) == Complex{8.0, 0.0});

  std::mt19937_64 rng(101);
  for (int i = 0; i < 200; ++i) {
    const Vec x = oracle::random_point(rng, 2, 7.0);
    const Complex got = evaluate_field(cfg, x);
    const Complex want = oracle::field_direct_sum(cfg, x);
    CHECK(std::abs(got - want) <= 1e-13 * cfg.amplitude_sum());
  }
}

TEST_CASE("derivatives: single pair closed forms") {
  const double k = two_pi;
  const WaveConfig cfg = one_pair(k);

  const FieldDerivs at_origin = evaluate_field_derivatives(cfg, Vec2(0.0, 0.0));
  CHECK(at_origin.grad(0) == Complex{0.0, 0.0});
  CHECK(at_origin.grad(1) == Complex{0.0, 0.0});

  // d p / d x1 = -2 k sin(k x1) = -2k at the node.
  const FieldDerivs at_node = evaluate_field_derivatives(cfg, Vec2(pi / (2.0 * k), 0.0));
  CHECK(at_node.grad(0).real() == doctest::Approx(-2.0 * k).epsilon(1e-13));
  CHECK(std::abs(at_node.grad(0).imag()) <= 1e-13 * k);
}

TEST_CASE("derivatives agree with central finite differences") {
  std::mt19937_64 rng(202);
  const double k = two_pi;
  const double h = 1e-6;  // 1e-6 lambda with lambda = 1
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = trial % 2 == 0 ? 2 : 3;
    const WaveConfig cfg = oracle::random_config(rng, dim, 1 + trial % 5, k);
    const Vec x = oracle::random_point(rng, dim, 3.0);
    const FieldDerivs d = evaluate_field_derivatives(cfg, x);

    const auto field = [&](const Vec& p) { return evaluate_field(cfg, p); };
    const CVec grad_fd = oracle::gradient_fd_complex(field, x, h);
    CHECK((d.grad - grad_fd).norm() <= 1e-6 * std::max(grad_fd.norm(), k));

    for (int a = 0; a < dim; ++a) {
      const auto grad_a = [&](const Vec& p) { return evaluate_field_derivatives(cfg, p).grad[a]; };
      const CVec hess_row_fd = oracle::gradient_fd_complex(grad_a, x, h);
      CHECK((d.hess.row(a).transpose() - hess_row_fd).norm() <=
            1e-6 * std::max(hess_row_fd.norm(), k * k));
    }
  }
}

TEST_CASE("hessian is exactly symmetric") {
  std::mt19937_64 rng(303);
  for (int trial = 0; trial < 10; ++trial) {
    const WaveConfig cfg = oracle::random_config(rng, 3, 4, two_pi);
    const Vec x = oracle::random_point(rng, 3, 5.0);
    const FieldDerivs d = evaluate_field_derivatives(cfg, x);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(d.hess(i, j) == d.hess(j, i));
  }
}

TEST_CASE("helmholtz residual vanishes") {
  std::mt19937_64 rng(404);
  const double k = two_pi;
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = trial % 2 == 0 ? 2 : 3;
    const WaveConfig cfg = oracle::random_config(rng, dim, 1 + trial % 6, k);
    const Vec x = oracle::random_point(rng, dim, 7.0);
    const FieldDerivs d = evaluate_field_derivatives(cfg, x);
    const Complex residual = d.hess.trace() + k * k * d.p;
    CHECK(std::abs(residual) <= 1e-10 * k * k * cfg.amplitude_sum());
  }
}

TEST_CASE("periodic parent field") {
  const double k = two_pi;
  const WaveConfig cfg = all_ones_polygon(4, k);

  SUBCASE("value at the origin is 2N") {
    CHECK(evaluate_periodic_field(cfg, Vec::Zero(4)) == Complex{8.0, 0.0});
  }

  SUBCASE("period 2 pi in every coordinate") {
    std::mt19937_64 rng(505);
    for (int i = 0; i < 50; ++i) {
      Vec y = oracle::random_point(rng, 4, 10.0);
      const Complex base = evaluate_periodic_field(cfg, y);
      for (int m = 0; m < 4; ++m) {
        Vec shifted = y;
        shifted[m] += two_pi;
        CHECK(std::abs(evaluate_periodic_field(cfg, shifted) - base) <=
              1e-12 * cfg.amplitude_sum());
      }
    }
  }

  SUBCASE("lift identity p(x) = p_N(K^T x)") {
    std::mt19937_64 rng(606);
    for (int trial = 0; trial < 20; ++trial) {
      const int dim = trial % 2 == 0 ? 2 : 3;
      const WaveConfig rcfg = oracle::random_config(rng, dim, 1 + trial % 8, k);
      for (int i = 0; i < 100; ++i) {
        const Vec x = oracle::random_point(rng, dim, 7.0);
        const Vec y = rcfg.wavevectors.transpose() * x;
        CHECK(std::abs(evaluate_field(rcfg, x) - evaluate_periodic_field(rcfg, y)) <=
              1e-12 * rcfg.amplitude_sum());
      }
    }
  }
}

TEST_CASE("linearity in the drive vector") {
  std::mt19937_64 rng(707);
  const double k = two_pi;
  const Mat cols = polygon_wavevectors(4, k);
  for (int trial = 0; trial < 10; ++trial) {
    CVec u1(8), u2(8);
    for (int i = 0; i < 8; ++i) {
      u1[i] = Complex{oracle::uniform(rng, -1, 1), oracle::uniform(rng, -1, 1)};
      u2[i] = Complex{oracle::uniform(rng, -1, 1), oracle::uniform(rng, -1, 1)};
    }
    u1[0] += 2.0;  // keep every pair away from all-zero
    u2[4] += 2.0;
    const WaveConfig a = wave_config_from_drive(cols, k, u1);
    const WaveConfig b = wave_config_from_drive(cols, k, u2);
    const WaveConfig sum = wave_config_from_drive(cols, k, (u1 + u2).eval());
    const Vec x = oracle::random_point(rng, 2, 7.0);
    CHECK(std::abs(evaluate_field(sum, x) - evaluate_field(a, x) - evaluate_field(b, x)) <=
          1e-12 * (a.amplitude_sum() + b.amplitude_sum()));
  }
}

TEST_CASE("swapping alpha and beta mirrors the field") {
  std::mt19937_64 rng(808);
  for (int trial = 0; trial < 10; ++trial) {
    const int dim = trial % 2 == 0 ? 2 : 3;
    const WaveConfig cfg = oracle::random_config(rng, dim, 3, two_pi);
    const WaveConfig swapped = make_wave_config(cfg.wavevectors, cfg.k, cfg.beta, cfg.alpha);
    const Vec x = oracle::random_point(rng, dim, 7.0);
    CHECK(std::abs(evaluate_field(swapped, x) - evaluate_field(cfg, (-x).eval())) <=
          1e-12 * cfg.amplitude_sum());
  }
}

TEST_CASE("batch evaluation matches pointwise calls for any thread count") {
  std::mt19937_64 rng(909);
  const WaveConfig cfg = oracle::random_config(rng, 2, 5, two_pi);
  Mat points(2, 37);
  for (int i = 0; i < points.cols(); ++i) points.col(i) = oracle::random_point(rng, 2, 7.0);
  const CVec serial = evaluate_field(cfg, points, 1);
  const CVec parallel = evaluate_field(cfg, points, 3);
  for (int i = 0; i < points.cols(); ++i) {
    const Complex want = evaluate_field(cfg, points.col(i));
    CHECK(serial[i] == want);
    CHECK(parallel[i] == want);
  }
  CHECK_THROWS_AS(evaluate_field(cfg, Mat::Zero(3, 4), 1), std::invalid_argument);
}

TEST_CASE("config validation") {
  const double k = two_pi;

  SUBCASE("wrong wavevector magnitude names the index") {
    Mat cols(2, 2);
    cols << k, 0.5 * k, 0.0, 0.0;
    CHECK_THROWS_WITH_AS(make_wave_config(cols, k, CVec::Ones(2), CVec::Ones(2)),
                         doctest::Contains("k_2"), std::invalid_argument);
  }

  SUBCASE("both amplitudes zero is rejected") {
    Mat cols(2, 1);
    cols << k, 0.0;
    CHECK_THROWS_AS(make_wave_config(cols, k, CVec::Zero(1), CVec::Zero(1)),
                    std::invalid_argument);
  }

  SUBCASE("empty wave set is rejected") {
    CHECK_THROWS_AS(make_wave_config(Mat(2, 0), k, CVec(0), CVec(0)), std::invalid_argument);
  }

  SUBCASE("point dimension mismatch") {
    const WaveConfig cfg = one_pair(k);
    CHECK_THROWS_AS(evaluate_field(cfg, Vec3(0, 0, 0)), std::invalid_argument);
  }

  SUBCASE("drive vector must have 2N entries") {
    CHECK_THROWS_AS(wave_config_from_drive(polygon_wavevectors(4, k), k, CVec::Ones(7)),
                    std::invalid_argument);
  }
}
