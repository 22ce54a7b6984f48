#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rsc/integration.hpp"
#include "rsc/rng.hpp"

using namespace rsc;

namespace {

RoughPath smooth_lift(int n, int refine) {
  // Z = (sin t, t^2/2) canonically lifted
  TimeGrid gf(0.0, 1.0, n * refine);
  GridPath p = make_grid_path(gf, 2, 1);
  for (int k = 0; k <= gf.n_steps; ++k) {
    double t = gf.time(k);
    p.values[k] << std::sin(t), 0.5 * t * t;
  }
  return canonical_lift_smooth(p, refine);
}

}  // namespace

TEST_CASE("rough integral: constant integrand and exact Chen case") {
  RoughPath rz = smooth_lift(64, 16);
  TimeGrid g = rz.base.grid;
  GridPath c = make_grid_path(g, 1, 2);
  for (auto& v : c.values) v << 2.0, -1.0;
  GridPath zero = make_grid_path(g, 1, 4);
  Vec got = rough_integral(c, zero, rz, 0, 64);
  Vec want = c.values[0] * Vec(rz.base.values[64] - rz.base.values[0]);
  CHECK((got - want).norm() < 1e-14);

  // Y dX = deltaX^a dX^b with Gubinelli derivative e_a (x) e_b: the compensated
  // sums telescope to the reconstructed area at (0, T) exactly, by Chen.
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      GridPath yb = make_grid_path(g, 1, 2);
      GridPath ypb = make_grid_path(g, 1, 4);
      for (int k = 0; k <= 64; ++k) {
        double dxa = (rz.base.values[k] - rz.base.values[0])(a, 0);
        yb.values[k].setZero();
        yb.values[k](0, b) = dxa;  // Y dX = deltaX^a dX^b
        // Gubinelli derivative: d(deltaX^a) = e_a, so Y' (v (x) w) = v_a w_b
        ypb.values[k].setZero();
        ypb.values[k](0, a + b * 2) = 1.0;
      }
      double got_ab = rough_integral(yb, ypb, rz, 0, 64)(0);
      CHECK(got_ab == doctest::Approx(rz.area.at(0, 64)(a, b)).epsilon(1e-10));
    }
  }
}

TEST_CASE("rough integral is additive and linear") {
  RoughPath rz = smooth_lift(32, 8);
  TimeGrid g = rz.base.grid;
  auto eng = make_engine(3, 0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  GridPath y = make_grid_path(g, 2, 2), yp = make_grid_path(g, 2, 4);
  for (int k = 0; k <= 32; ++k) {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) y.values[k](i, j) = gauss(eng);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 4; ++j) yp.values[k](i, j) = gauss(eng);
  }
  Vec whole = rough_integral(y, yp, rz, 0, 32);
  Vec split = rough_integral(y, yp, rz, 0, 11) + rough_integral(y, yp, rz, 11, 32);
  CHECK((whole - split).norm() < 1e-12);

  GridPath y2 = y, yp2 = yp;
  for (auto& v : y2.values) v *= -1.5;
  for (auto& v : yp2.values) v *= -1.5;
  CHECK((rough_integral(y2, yp2, rz, 0, 32) + 1.5 * whole).norm() < 1e-12);
}

TEST_CASE("rough integral of f(X) against a smooth driver matches quadrature") {
  // scalar smooth driver (t, t^2/2)-style: use component 2 only via a 1-d driver
  const int n = 256;
  TimeGrid gf(0.0, 1.0, n * 16);
  GridPath p = make_grid_path(gf, 1, 1);
  for (int k = 0; k <= gf.n_steps; ++k) {
    double t = gf.time(k);
    p.values[k](0, 0) = std::sin(t);
  }
  RoughPath rz = canonical_lift_smooth(p, 16);
  TimeGrid g = rz.base.grid;
  // integrand f(X) = X^2 with derivative 2X: int X^2 dX = X^3/3
  GridPath y = make_grid_path(g, 1, 1), yp = make_grid_path(g, 1, 1);
  for (int k = 0; k <= n; ++k) {
    double x = rz.base.values[k](0, 0);
    y.values[k](0, 0) = x * x;
    yp.values[k](0, 0) = 2.0 * x;
  }
  double got = rough_integral(y, yp, rz, 0, n)(0);
  double s1 = std::sin(1.0);
  CHECK(std::abs(got - s1 * s1 * s1 / 3.0) < 5.0 / n);
}

TEST_CASE("riemann-stieltjes integral examples") {
  TimeGrid g(0.0, 1.0, 128);
  GridPath tpath = make_grid_path(g, 1, 1);
  for (int k = 0; k <= 128; ++k) tpath.values[k](0, 0) = g.time(k);
  GridPath one = make_grid_path(g, 1, 1);
  for (auto& v : one.values) v.setOnes();
  GridPath r1 = rs_integral(one, tpath);
  for (int k = 0; k <= 128; ++k) CHECK(r1.values[k](0, 0) == doctest::Approx(g.time(k)));

  GridPath r2 = rs_integral(tpath, tpath);
  CHECK(r2.values[128](0, 0) == doctest::Approx(0.5).epsilon(0.02));

  GridPath cdrv = make_grid_path(g, 1, 1);
  for (auto& v : cdrv.values) v.setConstant(4.2);
  GridPath r3 = rs_integral(tpath, cdrv);
  CHECK(r3.values[128].norm() == 0.0);
}

TEST_CASE("rough stochastic integral reduces to the rough integral when M == 0") {
  RoughPath rz = smooth_lift(32, 8);
  TimeGrid g = rz.base.grid;
  GridPath y = make_grid_path(g, 1, 2), yp = make_grid_path(g, 1, 4);
  for (int k = 0; k <= 32; ++k) {
    y.values[k] << std::cos(g.time(k)), g.time(k);
    yp.values[k] << 1.0, 0.5, -0.25, 2.0;
  }
  GridPath zero = make_grid_path(g, 1, 2);
  GridPath rsi = rough_stochastic_integral(y, yp, zero, rz);
  GridPath plain = rough_integral_path(y, yp, rz);
  for (int k = 0; k <= 32; ++k) CHECK((rsi.values[k] - plain.values[k]).norm() == 0.0);
}

TEST_CASE("rsi with Y == M equals the IBP integral exactly") {
  TimeGrid gf(0.0, 1.0, 32 * 8);
  GridPath xf = sample_brownian(gf, 2, 7);
  RoughPath rx = ito_lift_from_fine(xf, 8);
  TimeGrid g = rx.base.grid;
  GridPath wf = sample_brownian(gf, 2, 8);
  GridPath m = make_grid_path(g, 1, 2);
  GridPath wc = coarsen(wf, 8);
  for (int k = 0; k <= 32; ++k) m.values[k] = wc.values[k].transpose();
  GridPath zero_dy = make_grid_path(g, 1, 4);
  GridPath rsi = rough_stochastic_integral(m, zero_dy, m, rx);
  GridPath ibp = ibp_m_dx(m, rx.base);
  for (int k = 0; k <= 32; ++k) CHECK((rsi.values[k] - ibp.values[k]).norm() < 1e-13);

  // and the IBP path satisfies M_s deltaX + Pi(M;X) exactly:
  // per construction int_0^t M dX - M_0 deltaX_{0,t} telescopes the right-point sums
  Vec direct = Vec::Zero(1);
  for (int k = 0; k < 32; ++k)
    direct += m.values[k + 1] * Vec(rx.base.values[k + 1] - rx.base.values[k]);
  CHECK((Vec(ibp.values[32]) - direct).norm() < 1e-12);
}

TEST_CASE("stopped consistency is exact") {
  TimeGrid gf(0.0, 1.0, 32 * 8);
  GridPath xf = sample_brownian(gf, 1, 9);
  RoughPath rx = ito_lift_from_fine(xf, 8);
  TimeGrid g = rx.base.grid;
  GridPath wf = sample_brownian(gf, 1, 10);
  GridPath wc = coarsen(wf, 8);
  GridPath y = make_grid_path(g, 1, 1), dy = make_grid_path(g, 1, 1), m = make_grid_path(g, 1, 1);
  for (int k = 0; k <= 32; ++k) {
    m.values[k] = wc.values[k];
    y.values[k](0, 0) = std::sin(rx.base.values[k](0, 0)) + wc.values[k](0, 0);
    dy.values[k](0, 0) = std::cos(rx.base.values[k](0, 0));
  }
  CHECK(stopped_consistency_check(y, dy, m, rx, 32) < 1e-12);
  CHECK(stopped_consistency_check(y, dy, m, rx, 0) < 1e-12);
  for (int s = 0; s < 100; ++s) {
    int stop = 1 + static_cast<int>(derive_seed(100, s) % 31);
    GridPath xf2 = sample_brownian(gf, 1, derive_seed(101, s));
    RoughPath rx2 = ito_lift_from_fine(xf2, 8);
    GridPath wf2 = coarsen(sample_brownian(gf, 1, derive_seed(102, s)), 8);
    GridPath y2 = y, m2 = m;
    for (int k = 0; k <= 32; ++k) {
      m2.values[k] = wf2.values[k];
      y2.values[k](0, 0) = std::sin(rx2.base.values[k](0, 0)) + wf2.values[k](0, 0);
    }
    CHECK(stopped_consistency_check(y2, dy, m2, rx2, stop) < 1e-12);
  }
}
