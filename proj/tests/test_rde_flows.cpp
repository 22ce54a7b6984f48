#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

#include "rsc/diagnostics.hpp"
#include "rsc/rde.hpp"
#include "rsc/rng.hpp"

using namespace rsc;

namespace {

Box box1(double lo, double hi) {
  Box b;
  b.lo = Vec::Constant(1, lo);
  b.hi = Vec::Constant(1, hi);
  return b;
}

RoughPath time_driver(int n, int refine) {
  TimeGrid gf(0.0, 1.0, n * refine);
  GridPath p = make_grid_path(gf, 1, 1);
  for (int k = 0; k <= gf.n_steps; ++k) p.values[k](0, 0) = gf.time(k);
  return canonical_lift_smooth(p, refine);
}

VectorFieldPair linear_sigma_vf() {
  VectorFieldPair vf;
  vf.mu = componentwise_field(1, {{fun_const(0.0)}});
  vf.sigma = componentwise_field(1, {{fun_linear(1.0)}});
  return vf;
}

}  // namespace

TEST_CASE("registry derivatives agree with finite differences") {
  Box b = box1(-1.2, 1.2);
  VectorFieldPair vf;
  vf.mu = componentwise_field(1, {{fun_poly(0.1, -0.4, 0.3, 0.05)}});
  vf.sigma = componentwise_field(1, {{fun_sin(0.7, 1.3, 0.2, 0.9)}});
  CHECK(fd_validate(vf.mu, b, 1e-4) < 1e-6);
  CHECK(fd_validate(vf.sigma, b, 1e-4) < 1e-6);

  MatrixField lin = linear_matrix_field(
      {(Mat(2, 2) << 0.1, 0.2, -0.3, 0.4).finished(), (Mat(2, 2) << 0.5, 0, 0, -0.1).finished()},
      Mat::Identity(2, 2));
  Box b2;
  b2.lo = Vec::Constant(2, -1.0);
  b2.hi = Vec::Constant(2, 1.0);
  CHECK(fd_validate(lin, b2, 1e-4) < 1e-8);
}

TEST_CASE("pure drift: unit-speed translation") {
  RoughPath rz = time_driver(32, 4);
  VectorFieldPair vf;
  vf.mu = componentwise_field(1, {{fun_const(1.0)}});
  vf.sigma = componentwise_field(1, {{fun_const(0.0)}});
  GridPath x = rde_solve(vf, rz, 0, Vec::Constant(1, 0.5));
  for (int k = 0; k <= 32; ++k)
    CHECK(x.values[k](0, 0) == doctest::Approx(0.5 + rz.base.grid.time(k)).epsilon(1e-12));
}

TEST_CASE("linear diffusion against the smooth time driver: exponential oracle") {
  std::vector<double> meshes, errs;
  for (int n : {32, 64, 128, 256}) {
    RoughPath rz = time_driver(n, 8);
    GridPath x = rde_solve(linear_sigma_vf(), rz, 0, Vec::Constant(1, 1.0));
    meshes.push_back(1.0 / n);
    errs.push_back(std::abs(x.values[n](0, 0) - std::exp(1.0)));
  }
  CHECK(errs.back() < 1e-3);
  RateFit fit = convergence_rate(meshes, errs);
  CHECK(fit.slope >= 0.9);
}

TEST_CASE("geometric brownian motion: strong order ~1 with coupled areas") {
  // dX = X dZ against the Ito lift on a shared fine sample
  std::vector<double> meshes;
  std::vector<std::vector<double>> errs;
  const int levels[4] = {16, 32, 64, 128};
  for (int n : levels) meshes.push_back(1.0 / n);
  errs.resize(4);
  for (int rep = 0; rep < 200; ++rep) {
    GridPath fine = sample_brownian(TimeGrid(0.0, 1.0, 128), 1, derive_seed(3, rep));
    for (int l = 0; l < 4; ++l) {
      int n = levels[l];
      RoughPath rz = ito_lift_exact_scalar(coarsen(fine, 128 / n));
      GridPath x = rde_solve(linear_sigma_vf(), rz, 0, Vec::Constant(1, 1.0));
      double wt = fine.values[128](0, 0);
      double exact = std::exp(wt - 0.5);
      errs[l].push_back(std::abs(x.values[n](0, 0) - exact));
    }
  }
  std::vector<double> med;
  for (auto& e : errs) med.push_back(quantile(e, 0.5));
  RateFit fit = convergence_rate(meshes, med);
  CHECK(fit.slope >= 0.9);
}

TEST_CASE("jacobian of a linear drift flow matches the matrix exponential") {
  const int n = 1024;
  RoughPath rz = time_driver(n, 1);
  Mat b(2, 2);
  b << 0.3, -0.5, 0.4, -0.2;
  VectorFieldPair vf;
  vf.mu = linear_matrix_field({Mat(b.col(0)), Mat(b.col(1))}, Mat::Zero(2, 1));
  vf.sigma = componentwise_field(2, {{fun_const(0.0)}, {fun_const(0.0)}});
  GridPath a = rde_jacobian(vf, rz, 0, Vec::Zero(2));
  Mat expected = b.exp();
  CHECK((a.values[n] - expected).norm() < 1e-3);
  CHECK((a.values[0] - Mat::Identity(2, 2)).norm() == 0.0);
}

TEST_CASE("jacobian of the linear diffusion flow equals the state ratio exactly") {
  GridPath fine = sample_brownian(TimeGrid(0.0, 1.0, 64 * 8), 1, 17);
  RoughPath rz = ito_lift_from_fine(fine, 8);
  const double x0 = 0.7;
  VectorFieldPair vf = linear_sigma_vf();
  FlowResult fr = solve_flow(vf, rz, 0, Vec::Constant(1, x0), 64, true, true);
  for (int k = 0; k <= 64; ++k) {
    CHECK(fr.jac[k](0, 0) == doctest::Approx(fr.x[k](0) / x0).epsilon(1e-12));
    CHECK(std::abs(fr.hess[k](0, 0)) < 1e-12);  // linear flow has zero Hessian
  }
}

TEST_CASE("hessian against a finite-difference oracle for a quadratic drift") {
  const int n = 256;
  TimeGrid gf(0.0, 0.25, n);
  GridPath p = make_grid_path(gf, 1, 1);
  for (int k = 0; k <= n; ++k) p.values[k](0, 0) = gf.time(k);
  RoughPath rz = canonical_lift_smooth(p, 1);
  VectorFieldPair vf;
  vf.mu = componentwise_field(1, {{fun_poly(0.0, 0.0, 1.0)}});  // mu(x) = x^2
  vf.sigma = componentwise_field(1, {{fun_const(0.0)}});
  const double x0 = 0.4, h = 1e-4;
  GridPath hess = rde_hessian(vf, rz, 0, Vec::Constant(1, x0));
  auto terminal = [&](double x) {
    return rde_solve(vf, rz, 0, Vec::Constant(1, x)).values[n](0, 0);
  };
  double fd = (terminal(x0 + h) - 2.0 * terminal(x0) + terminal(x0 - h)) / (h * h);
  CHECK(hess.values[n](0, 0) == doctest::Approx(fd).epsilon(1e-3));
  CHECK(hess.values[0].norm() == 0.0);
}

TEST_CASE("flow property holds exactly at grid nodes") {
  GridPath fine = sample_brownian(TimeGrid(0.0, 1.0, 32 * 8), 1, 23);
  RoughPath rz = stratonovich_lift_from_fine(fine, 8);
  VectorFieldPair vf;
  vf.mu = componentwise_field(1, {{fun_linear(-0.3)}});
  vf.sigma = componentwise_field(1, {{fun_sin(0.4, 1.0, 0.0, 0.8)}});
  Vec x0 = Vec::Constant(1, 0.2);
  FlowResult whole = solve_flow(vf, rz, 0, x0, 32, false, false);
  FlowResult first = solve_flow(vf, rz, 0, x0, 13, false, false);
  FlowResult second = solve_flow(vf, rz, 13, Vec(first.x.back()), 32, false, false);
  CHECK((whole.state(32) - second.state(32)).norm() == 0.0);
}

TEST_CASE("divergence guard raises with the offending node") {
  RoughPath rz = time_driver(64, 1);
  VectorFieldPair vf;
  vf.mu = componentwise_field(1, {{fun_poly(0.0, 0.0, 0.0, 1.0)}});  // x^3
  vf.sigma = componentwise_field(1, {{fun_const(0.0)}});
  CHECK_THROWS_AS(rde_solve(vf, rz, 0, Vec::Constant(1, 20.0)), DivergenceError);
}

TEST_CASE("forward flow jet: initial slice, fd consistency, criterion stability") {
  VectorFieldPair vf;
  vf.mu = componentwise_field(1, {{fun_linear(-0.2)}});
  vf.sigma = componentwise_field(1, {{fun_sin(0.3, 1.0, 0.0, 0.7)}});
  Box b = box1(-0.8, 0.8);

  GridPath fine = sample_brownian(TimeGrid(0.0, 1.0, 32 * 16), 1, 29);
  RoughPath rz = stratonovich_lift_from_fine(fine, 16);
  JetField jf = forward_flow_jet(vf, rz, 0, b);

  JetValue j0 = jf.eval(0, Vec::Constant(1, 0.3));
  CHECK(j0.F(0) == doctest::Approx(0.3));
  CHECK(j0.dF(0, 0) == doctest::Approx(1.0));
  CHECK(j0.d2F.norm() == 0.0);

  FdJetReport r1 = fd_jet_check(jf, b, 2e-3, &rz, 3);
  FdJetReport r2 = fd_jet_check(jf, b, 1e-3, &rz, 3);
  CHECK(r1.dev_dF < 1e-4);
  CHECK(r2.dev_dF <= r1.dev_dF);

  JetSeminorms s1 = field_criterion(jf, rz, b, 5, 8);
  RoughPath rz2 = stratonovich_lift_from_fine(fine, 8);  // driver refinement x2
  JetField jf2 = forward_flow_jet(vf, rz2, 0, b);
  JetSeminorms s2 = field_criterion(jf2, rz2, b, 5, 16);
  CHECK(std::isfinite(s1.t_part));
  CHECK(std::isfinite(s1.x_part));
  CHECK(s1.x_part > 0.0);
  CHECK(std::abs(s2.x_part - s1.x_part) / s1.x_part < 0.3);
}

TEST_CASE("backward flow jet: trivial dynamics and terminal slice") {
  RoughPath rz = time_driver(16, 1);
  BracketPath br = zero_bracket(rz.base.grid, 1);
  VectorFieldPair vf;
  vf.mu = componentwise_field(1, {{fun_const(0.0)}});
  vf.sigma = componentwise_field(1, {{fun_const(0.0)}});
  Box b = box1(-1, 1);
  JetField id_back = backward_flow_jet(vf, rz, identity_test(1), br.rate, b);
  for (int t : {0, 8, 16}) {
    JetValue j = id_back.eval(t, Vec::Constant(1, 0.4));
    CHECK(j.F(0) == doctest::Approx(0.4));
    CHECK(j.dF(0, 0) == doctest::Approx(1.0));
    CHECK(j.Fp.norm() == 0.0);
    CHECK(j.Fdot.norm() == 0.0);
  }

  VectorFieldPair vf2;
  vf2.mu = componentwise_field(1, {{fun_linear(-0.3)}});
  vf2.sigma = componentwise_field(1, {{fun_sin(0.4, 1.0, 0.0, 0.6)}});
  TestFunction g = test_from_fun(fun_tanh(1.0, 1.0));
  GridPath fine = sample_brownian(TimeGrid(0.0, 1.0, 16 * 8), 1, 31);
  RoughPath rw = stratonovich_lift_from_fine(fine, 8);
  JetField back = backward_flow_jet(vf2, rw, g, br.rate, b);
  JetValue jT = back.eval(16, Vec::Constant(1, 0.3));
  CHECK(jT.F(0) == doctest::Approx(std::tanh(0.3)).epsilon(1e-12));
  double sech2 = 1.0 - std::tanh(0.3) * std::tanh(0.3);
  CHECK(jT.dF(0, 0) == doctest::Approx(sech2).epsilon(1e-12));
  CHECK(jT.d2F(0, 0) == doctest::Approx(-2.0 * std::tanh(0.3) * sech2).epsilon(1e-12));
}

TEST_CASE("rde solution jet: remainder bounded across dyadic refinements") {
  VectorFieldPair vf;
  vf.mu = componentwise_field(1, {{fun_linear(-0.4)}});
  vf.sigma = componentwise_field(1, {{fun_cos(0.5, 1.0, 0.0, 0.9)}});
  GridPath fine = sample_brownian(TimeGrid(0.0, 1.0, 128 * 8), 1, 37);
  std::vector<double> rems;
  for (int n : {32, 64, 128}) {
    RoughPath rz = stratonovich_lift_from_fine(fine, 128 * 8 / n);
    StronglyControlledPath jet = rde_solution_jet(vf, rz, Vec::Constant(1, 0.1));
    rems.push_back(jet.r3);
    // identity-field exactness: remainder_2 of (Y, sigma(Y)) is finite as well
    ControlledPath cp = make_controlled(jet.y, jet.yp, rz);
    CHECK(std::isfinite(cp.r2));
  }
  CHECK(rems[2] < 3.0 * rems[0] + 1.0);
}
