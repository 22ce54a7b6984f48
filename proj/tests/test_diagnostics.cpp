#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "rsc/diagnostics.hpp"
#include "rsc/rng.hpp"
#include "rsc/rough_path.hpp"

using namespace rsc;

TEST_CASE("convergence rate: exact powers and noisy slopes") {
  std::vector<double> mesh = {0.1, 0.05, 0.025, 0.0125};
  std::vector<double> lin = mesh;
  CHECK(convergence_rate(mesh, lin).slope == doctest::Approx(1.0));
  std::vector<double> quad;
  for (double m : mesh) quad.push_back(m * m);
  CHECK(convergence_rate(mesh, quad).slope == doctest::Approx(2.0));

  auto eng = make_engine(1, 0);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  std::vector<double> noisy;
  for (double m : mesh) noisy.push_back(std::pow(m, 1.2) * (1.0 + u(eng)));
  RateFit fit = convergence_rate(mesh, noisy);
  CHECK(std::abs(fit.slope - 1.2) < 0.1);
  CHECK(fit.r2 > 0.99);

  // zeros are excluded with a flag; degenerate data raises
  std::vector<double> withzero = {0.1, 0.0, 0.0125, 0.00625};
  std::vector<double> mesh4 = {0.1, 0.05, 0.025, 0.0125};
  RateFit fz = convergence_rate(mesh4, withzero);
  CHECK(fz.zeros_excluded);
  CHECK(fz.n_used == 3);
  CHECK_THROWS(convergence_rate({0.1, 0.05}, {0.1, 0.05}));
}

TEST_CASE("kolmogorov fit: deterministic linear two-parameter object") {
  TimeGrid g(0.0, 1.0, 128);
  std::vector<TwoParamGrid> samples;
  GridPath tpath = make_grid_path(g, 1, 1);
  for (int k = 0; k <= 128; ++k) tpath.values[k](0, 0) = g.time(k);
  for (int s = 0; s < 100; ++s) samples.push_back(make_additive(tpath));
  ScalingFit fit = kolmogorov_scaling_fit(samples, 1, 2.0);
  CHECK(fit.slope == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("kolmogorov fit: brownian increments scale at one half") {
  TimeGrid g(0.0, 1.0, 256);
  std::vector<GridPath> samples;
  for (int s = 0; s < 1000; ++s) samples.push_back(sample_brownian(g, 1, derive_seed(5, s)));
  ScalingFit fit = kolmogorov_scaling_fit(samples, 1, 4.0);
  CHECK(std::abs(fit.slope - 0.5) < 0.05);
}

TEST_CASE("kolmogorov fit input validation") {
  TimeGrid g(0.0, 1.0, 64);
  std::vector<GridPath> few(10, sample_brownian(g, 1, 1));
  CHECK_THROWS(kolmogorov_scaling_fit(few, 1, 4.0));
  std::vector<GridPath> enough(100, sample_brownian(g, 1, 1));
  CHECK_THROWS(kolmogorov_scaling_fit(enough, 3, 2.0));  // q < 3 at level 3
  CHECK_THROWS(kolmogorov_scaling_fit(enough, 4, 4.0));
}

TEST_CASE("level-3 scaling of the iterated-integral remainder") {
  // Pi(R^Y; M)_{s,t} = int (delta Y - Y' delta X) dM for Y = f(X), f smooth,
  // X, M independent Brownian: remainder pairs at scale dt behave like
  // dt^{1 + 1/2 -}, so the level-3 slope clears 1.0 at alpha = 0.4.
  TimeGrid g(0.0, 1.0, 128);
  const int n = 128, n_samples = 300;
  std::vector<GridPath> xs, ms, ys, yps;
  xs.reserve(n_samples);
  for (int s = 0; s < n_samples; ++s) {
    GridPath x = sample_brownian(g, 1, derive_seed(9, s, 0));
    GridPath m = sample_brownian(g, 1, derive_seed(9, s, 1));
    GridPath y = make_grid_path(g, 1, 1), yp = make_grid_path(g, 1, 1);
    for (int k = 0; k <= n; ++k) {
      double xv = x.values[k](0, 0);
      y.values[k](0, 0) = std::sin(xv);
      yp.values[k](0, 0) = std::cos(xv);
    }
    xs.push_back(x);
    ms.push_back(m);
    ys.push_back(y);
    yps.push_back(yp);
  }
  auto pi_rm = [&](int s, int i, int j) {
    double pi = 0.0;
    for (int r = i; r < j; ++r) {
      double rem = ys[s].values[r](0, 0) - ys[s].values[i](0, 0) -
                   yps[s].values[i](0, 0) * (xs[s].values[r](0, 0) - xs[s].values[i](0, 0));
      pi += rem * (ms[s].values[r + 1](0, 0) - ms[s].values[r](0, 0));
    }
    return std::abs(pi);
  };
  ScalingFit fit = kolmogorov_scaling_fit(pi_rm, n_samples, g, 3, 3.0);
  CHECK(fit.slope >= 1.0);
}

TEST_CASE("quantiles are deterministic order statistics") {
  std::vector<double> v = {5.0, 1.0, 3.0, 2.0, 4.0};
  CHECK(quantile(v, 0.5) == doctest::Approx(3.0));
  CHECK(quantile(v, 0.0) == doctest::Approx(1.0));
  CHECK(quantile(v, 1.0) == doctest::Approx(5.0));
  CHECK(quantile(v, 0.9) == doctest::Approx(4.6));
}
