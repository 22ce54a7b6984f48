#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "rsc/rough_path.hpp"
#include "rsc/serialize.hpp"

using namespace rsc;

namespace {

GridPath identity_path(const TimeGrid& g) {
  GridPath p = make_grid_path(g, 1, 1);
  for (int k = 0; k <= g.n_steps; ++k) p.values[k](0, 0) = g.time(k);
  return p;
}

}  // namespace

TEST_CASE("time grid invariants") {
  CHECK_THROWS(TimeGrid(0.0, 0.0, 4));
  CHECK_THROWS(TimeGrid(0.0, 1.0, 1));
  TimeGrid g(0.0, 2.0, 8);
  CHECK(g.dt() == doctest::Approx(0.25));
  CHECK(g.time(8) == doctest::Approx(2.0));
}

TEST_CASE("increment basics and errors") {
  TimeGrid g(0.0, 1.0, 16);
  GridPath id = identity_path(g);
  CHECK(increment(id, 0, 16)(0, 0) == doctest::Approx(1.0));
  GridPath c = make_grid_path(g, 2, 1);
  for (auto& v : c.values) v.setConstant(3.5);
  CHECK(increment(c, 3, 9).norm() == 0.0);
  CHECK_THROWS(increment(id, 4, 4));
  CHECK_THROWS(increment(id, 0, 17));
}

TEST_CASE("increment matches cumulative-sum oracle on a Brownian sample") {
  TimeGrid g(0.0, 1.0, 64);
  GridPath w = sample_brownian(g, 2, 7);
  for (auto [i, j] : {std::pair{0, 64}, {5, 40}, {17, 18}}) {
    Mat acc = Mat::Zero(2, 1);
    for (int k = i; k < j; ++k) acc += w.values[k + 1] - w.values[k];
    CHECK((increment(w, i, j) - acc).norm() < 1e-12);
  }
  // additivity
  CHECK((increment(w, 0, 20) + increment(w, 20, 50) - increment(w, 0, 50)).norm() < 1e-12);
}

TEST_CASE("second delta: additive grids vanish, chen grids reproduce the cross term") {
  TimeGrid g(0.0, 1.0, 32);
  GridPath w = sample_brownian(g, 2, 3);
  TwoParamGrid add = make_additive(w);
  for (auto [i, k, j] : {std::tuple{0, 10, 32}, {1, 2, 3}, {5, 20, 31}})
    CHECK(second_delta(add, i, k, j).norm() < 1e-12);

  RoughPath lift = ito_lift_from_fine(sample_brownian(TimeGrid(0, 1, 32 * 8), 2, 3), 8);
  for (auto [i, k, j] : {std::tuple{0, 10, 32}, {2, 7, 19}}) {
    Vec dl = lift.base.values[k] - lift.base.values[i];
    Vec dr = lift.base.values[j] - lift.base.values[k];
    CHECK((second_delta(lift.area, i, k, j) - dl * dr.transpose()).norm() < 1e-12);
  }
  CHECK_THROWS(second_delta(add, 3, 3, 5));
}

TEST_CASE("chen reconstruction agrees with brute-force accumulation") {
  TimeGrid gf(0.0, 1.0, 24 * 4);
  GridPath wf = sample_brownian(gf, 2, 11);
  RoughPath lift = ito_lift_from_fine(wf, 4);
  // independent re-accumulation
  auto brute = [&](int i, int j) {
    Mat acc = lift.area.consecutive[i];
    for (int k = i + 1; k < j; ++k) {
      Vec dl = lift.base.values[k] - lift.base.values[i];
      Vec dr = lift.base.values[k + 1] - lift.base.values[k];
      acc += lift.area.consecutive[k] + dl * dr.transpose();
    }
    return acc;
  };
  for (auto [i, j] : {std::pair{0, 24}, {3, 17}, {11, 12}})
    CHECK((lift.area.at(i, j) - brute(i, j)).norm() < 1e-12);
}

TEST_CASE("holder seminorm: linear, constant, Brownian refinement stability") {
  TimeGrid g(0.0, 1.0, 64);
  GridPath lin = make_grid_path(g, 1, 1);
  for (int k = 0; k <= 64; ++k) lin.values[k](0, 0) = -2.5 * g.time(k);
  CHECK(holder_seminorm(lin, 1.0) == doctest::Approx(2.5));
  GridPath c = make_grid_path(g, 3, 1);
  CHECK(holder_seminorm(c, 0.5) == 0.0);

  // same driving noise at two resolutions
  GridPath fine = sample_brownian(TimeGrid(0.0, 1.0, 128), 1, 99);
  GridPath coarse = coarsen(fine, 2);
  double a = holder_seminorm(coarse, 0.4);
  double b = holder_seminorm(fine, 0.4);
  CHECK(a > 0.0);
  CHECK(std::abs(b - a) / b < 0.2);

  // monotone non-increasing in min_gap; homogeneous of degree 1
  CHECK(holder_seminorm(fine, 0.4, 4) <= holder_seminorm(fine, 0.4, 1) + 1e-15);
  GridPath scaled = fine;
  for (auto& v : scaled.values) v *= 3.0;
  CHECK(holder_seminorm(scaled, 0.4) == doctest::Approx(3.0 * b));
}

TEST_CASE("two-param seminorm examples") {
  TimeGrid g(0.0, 1.0, 32);
  auto sq = [&](int i, int j) {
    double dt = g.time(j) - g.time(i);
    return Mat::Constant(1, 1, dt * dt);
  };
  CHECK(two_param_seminorm(sq, g, 2.0) == doctest::Approx(1.0));

  GridPath zero = make_grid_path(g, 2, 1);
  CHECK(two_param_seminorm(make_additive(zero), 0.5) == 0.0);

  GridPath fine = sample_brownian(TimeGrid(0.0, 1.0, 32 * 8), 1, 5);
  RoughPath l1 = ito_lift_from_fine(fine, 8);
  RoughPath l2 = ito_lift_from_fine(fine, 4);  // refinement x2 of the working grid
  double s1 = two_param_seminorm(l1.area, 0.8);
  double s2 = two_param_seminorm(l2.area, 0.8);
  CHECK(s1 > 0.0);
  CHECK(std::isfinite(s1));
  CHECK(std::abs(s2 - s1) / s1 < 0.6);
}

TEST_CASE("anisotropic distance") {
  CHECK(anisotropic_distance(0.0, 0.3, 0.4) == doctest::Approx(0.3));
  CHECK(anisotropic_distance(1.0, 0.0, 0.4) == doctest::Approx(1.0));
  CHECK(anisotropic_distance(0.01, 0.05, 0.4) == doctest::Approx(std::pow(0.01, 0.4)));
  CHECK(std::pow(0.01, 0.4) == doctest::Approx(0.15848931924611134));
  CHECK_THROWS(anisotropic_distance(-1.0, 0.0, 0.4));
}

TEST_CASE("grid path serialization round trip") {
  TimeGrid g(0.0, 1.0, 16);
  GridPath w = sample_brownian(g, 2, 21);
  save_grid_path("/tmp/rsc_test_gp", w);
  GridPath r = load_grid_path("/tmp/rsc_test_gp");
  REQUIRE(r.grid == w.grid);
  for (int k = 0; k <= 16; ++k) CHECK((r.values[k] - w.values[k]).norm() == 0.0);

  RoughPath lift = ito_lift(w, 4, 123);
  save_two_param("/tmp/rsc_test_tp", lift.area);
  TwoParamGrid back = load_two_param("/tmp/rsc_test_tp");
  for (auto [i, j] : {std::pair{0, 16}, {3, 9}})
    CHECK((back.at(i, j) - lift.area.at(i, j)).norm() == 0.0);
}

TEST_CASE("non-finite values rejected") {
  TimeGrid g(0.0, 1.0, 4);
  GridPath p = make_grid_path(g, 1, 1);
  p.values[2](0, 0) = std::nan("");
  CHECK_THROWS(check_finite(p, "p"));
}
