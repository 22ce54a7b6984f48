#include "rsc/iag.hpp"

#include <cmath>
#include <stdexcept>

namespace rsc {

Vec ItoCoefficients::b(const Vec& y) const {
  return kind == Kind::Constant ? b_const : b_fn(y);
}

Mat ItoCoefficients::beta(const Vec& y) const {
  return kind == Kind::Constant ? beta_const : beta_fn(y);
}

GridPath step_ito_process(const ItoCoefficients& co, const VectorFieldPair& vf,
                          const RoughPath& rz, const Vec& y0) {
  if (co.kind == ItoCoefficients::Kind::Trivial) {
    FlowResult fr = solve_flow(vf, rz, 0, y0, rz.base.grid.n_steps, false, false);
    GridPath y = make_grid_path(rz.base.grid, y0.size(), 1);
    for (int k = 0; k <= rz.base.grid.n_steps; ++k) y.values[k] = fr.x[k];
    return y;
  }
  const double dt = rz.base.grid.dt();
  GridPath y = make_grid_path(rz.base.grid, y0.size(), 1);
  y.values[0] = y0;
  for (int k = 0; k < rz.base.grid.n_steps; ++k) {
    Vec cur = y.values[k];
    Vec dw = rz.base.values[k + 1] - rz.base.values[k];
    y.values[k + 1] = cur + co.b(cur) * dt + co.beta(cur) * dw;
  }
  return y;
}

namespace {

Vec b_of(const ItoCoefficients& co, const VectorFieldPair& vf, const Vec& y) {
  return co.kind == ItoCoefficients::Kind::Trivial ? Vec(vf.mu.value(y)) : co.b(y);
}

Mat beta_of(const ItoCoefficients& co, const VectorFieldPair& vf, const Vec& y) {
  return co.kind == ItoCoefficients::Kind::Trivial ? vf.sigma.value(y) : co.beta(y);
}

struct FieldJet2 {
  double value;
  Mat grad;  // (1 x dX)
  Mat hess;  // (1 x dX^2)
};

// f composed with the realized flow started at (t, y), with first and second
// derivatives from the variational solves.
FieldJet2 realized_field(const VectorFieldPair& vf, const TestFunction& f, const RoughPath& rz,
                         int t, const Vec& y) {
  FlowResult fr = solve_flow(vf, rz, t, y, rz.base.grid.n_steps, true, true);
  const Vec& xT = fr.x.back();
  const Mat& a = fr.jac.back();
  const Mat& b = fr.hess.back();
  FieldJet2 out;
  out.value = f.value(xT)(0);
  Mat gf = f.grad(xT);
  out.grad = gf * a;
  out.hess = precompose_both(f.hess(xT), a, a) + gf * b;
  return out;
}

}  // namespace

IagPieces iag_partition_sum(const VectorFieldPair& vf, const TestFunction& f,
                            const ItoCoefficients& co, const std::vector<int>& partition,
                            const RoughPath& rz, const GridPath& y,
                            const GridPath& bracket_rate) {
  if (f.dim_out != 1) throw std::invalid_argument("iag_partition_sum: scalar test functions");
  const int n = rz.base.grid.n_steps;
  const double dt = rz.base.grid.dt();
  const int dw = rz.dim();
  if (partition.front() != 0 || partition.back() != n)
    throw std::invalid_argument("iag_partition_sum: partition must span the grid");

  IagPieces out;
  double s_pi = 0.0, l_pi = 0.0;
  for (std::size_t i = 0; i + 1 < partition.size(); ++i) {
    const int ti = partition[i];
    const int tn = partition[i + 1];
    FlowResult tilde = solve_flow(vf, rz, ti, Vec(y.values[ti]), tn, false, false);
    for (int r = ti; r < tn; ++r) {
      Vec dwr = rz.base.values[r + 1] - rz.base.values[r];
      // comparison-process leg
      Vec yr = y.values[r];
      FieldJet2 jy = realized_field(vf, f, rz, tn, yr);
      Mat beta_r = beta_of(co, vf, yr);
      s_pi += (jy.grad * (beta_r * dwr))(0);
      double lbb = (jy.grad * Vec(b_of(co, vf, yr)))(0) +
                   0.5 * (precompose_both(jy.hess, beta_r, beta_r) *
                          flatten(Mat::Identity(beta_r.cols(), beta_r.cols())))(0);
      l_pi += lbb * dt;
      // restarted-flow leg
      Vec xr = tilde.state(r);
      FieldJet2 jx = realized_field(vf, f, rz, tn, xr);
      Mat sig_r = vf.sigma.value(xr);
      s_pi -= (jx.grad * (sig_r * dwr))(0);
      double lsm = (jx.grad * Vec(vf.mu.value(xr)))(0) +
                   0.5 * (precompose_both(jx.hess, sig_r, sig_r) *
                          flatten(bracket_rate.values[r]))(0);
      l_pi -= lsm * dt;
    }
  }
  (void)dw;
  FieldJet2 j0 = realized_field(vf, f, rz, 0, Vec(y.values[0]));
  out.lhs = f.value(Vec(y.values[n]))(0) - j0.value;
  out.s_pi = s_pi;
  out.l_pi = l_pi;
  out.defect = std::abs(out.lhs - l_pi - s_pi);
  return out;
}

double iag_weak_difference(const VectorFieldPair& vf, const TestFunction& f,
                           const ItoCoefficients& co, const RoughPath& rz, const GridPath& y,
                           const GridPath& bracket_rate) {
  const int n = rz.base.grid.n_steps;
  const double dt = rz.base.grid.dt();
  FieldJet2 j0 = realized_field(vf, f, rz, 0, Vec(y.values[0]));
  double lhs = f.value(Vec(y.values[n]))(0) - j0.value;
  double rhs = 0.0;
  for (int r = 0; r < n; ++r) {
    Vec yr = y.values[r];
    FieldJet2 j = realized_field(vf, f, rz, r, yr);
    Mat beta_r = beta_of(co, vf, yr);
    Mat sig_r = vf.sigma.value(yr);
    rhs += (j.grad * (Vec(b_of(co, vf, yr)) - Vec(vf.mu.value(yr))))(0) * dt;
    double qb = (precompose_both(j.hess, beta_r, beta_r) *
                 flatten(Mat::Identity(beta_r.cols(), beta_r.cols())))(0);
    double qs = (precompose_both(j.hess, sig_r, sig_r) * flatten(bracket_rate.values[r]))(0);
    rhs += 0.5 * (qb - qs) * dt;
  }
  return lhs - rhs;
}

RoughPath restrict_rough_path(const RoughPath& r, int s, int t) {
  if (s < 0 || t > r.base.grid.n_steps || t - s < 2)
    throw std::invalid_argument("restrict_rough_path: need t - s >= 2");
  TimeGrid g(r.base.grid.time(s), r.base.grid.time(t), t - s);
  std::vector<Mat> base(r.base.values.begin() + s, r.base.values.begin() + t + 1);
  std::vector<Mat> blocks(r.area.consecutive.begin() + s, r.area.consecutive.begin() + t);
  RoughPath out;
  out.alpha = r.alpha;
  out.base = GridPath(g, std::move(base));
  out.area = make_chen(g, std::move(blocks), out.base, out.base);
  return out;
}

double interpolation_defect(const VectorFieldPair& vf, const VectorFieldPair& vf_hat,
                            const RoughPath& rz, const GridPath& bracket_rate, const Vec& x,
                            int s, int t, const Box& box) {
  RoughPath sub = restrict_rough_path(rz, s, t);
  GridPath rate(sub.base.grid,
                std::vector<Mat>(bracket_rate.values.begin() + s,
                                 bracket_rate.values.begin() + t + 1));
  StronglyControlledPath hat = rde_solution_jet(vf_hat, sub, x);
  return rag_defect(vf, identity_test(vf.dim_x()), hat, sub, rate, box);
}

std::vector<double> good_approximation_check(const GridPath& phi, const GridPath& phip,
                                             const RoughPath& strato,
                                             const std::vector<int>& skeleton_factors) {
  const int n = strato.base.grid.n_steps;
  const double dt = strato.base.grid.dt();
  Vec rough = rough_integral(phi, phip, strato, 0, n);
  std::vector<double> out;
  for (int g : skeleton_factors) {
    if (g < 1 || n % g != 0)
      throw std::invalid_argument("good_approximation_check: factor must divide n_steps");
    Vec classical = Vec::Zero(phi.rows());
    for (int k = 0; k < n; ++k) {
      int cell = k / g;
      Vec slope =
          (Vec(strato.base.values[(cell + 1) * g]) - Vec(strato.base.values[cell * g])) /
          (g * dt);
      // trapezoid quadrature of the classical integral within the cell
      classical += 0.5 * (phi.values[k] + phi.values[k + 1]) * slope * dt;
    }
    out.push_back((classical - rough).norm());
  }
  return out;
}

DminusReport verify_dminus_identity(const VectorFieldPair& vf, double x0, int u,
                                    const GridPath& w_fine, int coarsen_factor, double eps) {
  if (vf.dim_x() != 1 || vf.dim_z() != 1)
    throw std::invalid_argument("verify_dminus_identity: scalar scenario only");
  RoughPath rz = stratonovich_lift_from_fine(w_fine, coarsen_factor);
  const int n = rz.base.grid.n_steps;
  if (u < 0 || u > n - 2) throw std::invalid_argument("verify_dminus_identity: bad u");
  Vec x0v = Vec::Constant(1, x0);
  FlowResult base = solve_flow(vf, rz, u, x0v, n, true, true);
  const double sig0 = vf.sigma.value(x0v)(0, 0);
  const double dsig0 = vf.sigma.d1(x0v, Vec::Ones(1))(0, 0);
  const double dt = rz.base.grid.dt();

  // C by its own linear SDE, third-order steps consistent with the joint system
  std::vector<double> c_sde(n - u + 1);
  c_sde[0] = dsig0;
  Vec one = Vec::Ones(1);
  for (int k = u; k < n; ++k) {
    double x = base.x[k - u](0);
    double a = base.jac[k - u](0, 0);
    double c = c_sde[k - u];
    Vec xv = Vec::Constant(1, x);
    double sig = vf.sigma.value(xv)(0, 0);
    double dsig = vf.sigma.d1(xv, one)(0, 0);
    double d2sig = vf.sigma.d2(xv, one, one)(0, 0);
    double d3sig = vf.sigma.d3(xv, one, one, one)(0, 0);
    double dmu = vf.mu.d1(xv, one)(0, 0);
    double d2mu = vf.mu.d2(xv, one, one)(0, 0);
    double dz = (rz.base.values[k + 1] - rz.base.values[k])(0, 0);
    double area = rz.area.consecutive[k](0, 0);
    double drift = sig0 * d2mu * a * a + dmu * c;
    double diff = sig0 * d2sig * a * a + dsig * c;
    // area chain rule of the joint (X, A, C) system
    double gc_area = (sig0 * d3sig * a * a * sig + d2sig * sig * c) +
                     2.0 * sig0 * d2sig * a * (dsig * a) + dsig * diff;
    c_sde[k - u + 1] = c + drift * dt + diff * dz + gc_area * area;
  }

  // bump response of the Jacobian: add eps to the fine path strictly after u
  auto bumped = [&](double e) {
    GridPath w = w_fine;
    for (int j = u * coarsen_factor + 1; j <= w_fine.grid.n_steps; ++j)
      w.values[j].array() += e;
    RoughPath r = stratonovich_lift_from_fine(w, coarsen_factor);
    return solve_flow(vf, r, u, x0v, n, true, false);
  };
  FlowResult plus = bumped(eps);
  FlowResult minus = bumped(-eps);

  DminusReport rep;
  for (int k = u; k <= n; ++k) {
    double a = base.jac[k - u](0, 0);
    double b = base.hess[k - u](0, 0);
    double target = dsig0 * a + sig0 * b;
    rep.residual_sde = std::max(rep.residual_sde, std::abs(c_sde[k - u] - target));
    if (k > u) {
      double c_fd = (plus.jac[k - u](0, 0) - minus.jac[k - u](0, 0)) / (2.0 * eps);
      rep.residual_fd = std::max(rep.residual_fd, std::abs(c_fd - target));
    }
  }
  return rep;
}

}  // namespace rsc
