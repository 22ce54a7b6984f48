#include "rsc/formulas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rsc {

ConvergenceReport make_report(std::string name, std::vector<double> meshes,
                              const std::vector<std::vector<double>>& defects_per_mesh,
                              double order_threshold, double finest_median_bound) {
  ConvergenceReport rep;
  rep.name = std::move(name);
  rep.meshes = std::move(meshes);
  rep.order_threshold = order_threshold;
  for (const auto& d : defects_per_mesh) {
    rep.median.push_back(quantile(d, 0.5));
    rep.p90.push_back(quantile(d, 0.9));
  }
  bool all_zero = true;
  for (double m : rep.median) all_zero = all_zero && m <= 1e-14;
  if (all_zero) {
    rep.exact = true;
    rep.fitted_order = std::numeric_limits<double>::infinity();
    rep.pass = true;
  } else {
    RateFit fit = convergence_rate(rep.meshes, rep.median);
    rep.fitted_order = fit.slope;
    rep.pass = fit.slope >= order_threshold;
  }
  if (finest_median_bound > 0 && rep.median.back() > finest_median_bound) rep.pass = false;
  return rep;
}

double riw_defect(const JetField& f, const StronglyControlledPath& scp, const RoughPath& rx,
                  const BracketPath& bracket) {
  const int n = rx.base.grid.n_steps;
  const double dt = rx.base.grid.dt();
  StronglyControlledPath z = compose_field_path(f, scp, bracket.rate);
  Vec rhs = Vec::Zero(z.y.rows());
  double worst = 0.0;
  for (int k = 0; k < n; ++k) {
    Vec dx = rx.base.values[k + 1] - rx.base.values[k];
    rhs += z.yp.values[k] * dx + z.ypp.values[k] * flatten(rx.area.consecutive[k]);
    rhs += Vec(z.ydot.values[k]) * dt;
    double d = (Vec(z.y.values[k + 1]) - Vec(z.y.values[0]) - rhs).norm();
    if (d > worst) worst = d;
  }
  return worst;
}

double dx_integrand_norm(const JetField& f, const StronglyControlledPath& scp) {
  double worst = 0.0;
  for (int k = 0; k <= scp.y.grid.n_steps; ++k) {
    JetValue j = f.eval(k, Vec(scp.y.values[k]));
    worst = std::max(worst, (j.Fp + j.dF * scp.yp.values[k]).norm());
  }
  return worst;
}

ScRSM build_scrsm(const Vec& y0, const GridPath& dxY, const GridPath& dxxY,
                  const GridPath& ydot, const GridPath& m, const BracketPath& qv_m,
                  const GridPath& n, const RoughPath& rx) {
  ScRSM s;
  s.dxY = dxY;
  s.dxxY = dxxY;
  s.ydot = ydot;
  s.m = m;
  s.qv_m = qv_m;
  s.n = n;
  GridPath rsi = rough_stochastic_integral(dxY, dxxY, n, rx);
  const double dt = rx.base.grid.dt();
  s.y = make_grid_path(rx.base.grid, y0.size(), 1);
  Vec drift = Vec::Zero(y0.size());
  for (int k = 0; k <= rx.base.grid.n_steps; ++k) {
    s.y.values[k] = y0 + drift + Vec(m.values[k]) - Vec(m.values[0]) + Vec(rsi.values[k]);
    if (k < rx.base.grid.n_steps) drift += Vec(ydot.values[k]) * dt;
  }
  // re-evaluate the defining sum
  GridPath rsi2 = rough_stochastic_integral(dxY, dxxY, n, rx);
  Vec drift2 = Vec::Zero(y0.size());
  double worst = 0.0;
  for (int k = 0; k <= rx.base.grid.n_steps; ++k) {
    Vec expect = y0 + drift2 + Vec(m.values[k]) - Vec(m.values[0]) + Vec(rsi2.values[k]);
    worst = std::max(worst, (Vec(s.y.values[k]) - expect).norm());
    if (k < rx.base.grid.n_steps) drift2 += Vec(ydot.values[k]) * dt;
  }
  s.construction_defect = worst;
  return s;
}

double rsiw_defect(const JetField& f, const ScRSM& y, const RoughPath& rx,
                   const BracketPath& x_bracket, const RsiwOptions& opt) {
  const int n = rx.base.grid.n_steps;
  const int dx = rx.dim();
  const int dy = static_cast<int>(y.y.rows());
  const int du = f.dim_out;
  const double dt = rx.base.grid.dt();

  std::vector<JetValue> jets(n + 1);
  for (int k = 0; k <= n; ++k) jets[k] = f.eval(k, Vec(y.y.values[k]));

  // d X-integrand pair and its martingale part N-tilde
  GridPath z1 = make_grid_path(rx.base.grid, du, dx);
  GridPath z2 = make_grid_path(rx.base.grid, du, dx * dx);
  GridPath ntil = make_grid_path(rx.base.grid, du, dx);
  Vec ntil_acc = Vec::Zero(du * dx);
  for (int k = 0; k <= n; ++k) {
    const JetValue& j = jets[k];
    const Mat& dxy = y.dxY.values[k];
    z1.values[k] = j.Fp + j.dF * dxy;
    Mat dFp_dxy = precompose_first(j.dFp, dx, dxy);  // (du, dx^2)
    z2.values[k] = j.dF * y.dxxY.values[k] + j.Fpp + dFp_dxy +
                   bilinear_transpose(dFp_dxy, dx, dx) + precompose_both(j.d2F, dxy, dxy);
    ntil.values[k] = unflatten(ntil_acc, du, dx);
    if (k < n) {
      Vec dm = Vec(y.m.values[k + 1]) - Vec(y.m.values[k]);
      Mat dn = y.n.values[k + 1] - y.n.values[k];
      Mat inc = j.dF * dn + contract_first(j.dFp, dy, dx, dm) +
                contract_first(precompose_second(j.d2F, dy, dxy), dy, dx, dm);
      ntil_acc += flatten(inc);
    }
  }
  GridPath rsi = rough_stochastic_integral(z1, z2, ntil, rx);

  // accumulate all non-rough terms in one pass
  Vec acc = Vec::Zero(du);
  double worst = 0.0;
  for (int k = 0; k < n; ++k) {
    const JetValue& j = jets[k];
    const Mat& dxy = y.dxY.values[k];
    Vec dm = Vec(y.m.values[k + 1]) - Vec(y.m.values[k]);
    acc += j.dF * dm;                                        // int dF dM
    acc += (j.dF * Vec(y.ydot.values[k]) + j.Fdot) * dt;     // drift terms
    Mat dqx = x_bracket.path.values[k + 1] - x_bracket.path.values[k];
    Mat dx_bil = precompose_first(j.dFp, dx, dxy) + 0.5 * precompose_both(j.d2F, dxy, dxy);
    acc += dx_bil * flatten(dqx);                            // d[X] term
    if (!opt.drop_m_bracket) {
      Mat dqm = y.qv_m.path.values[k + 1] - y.qv_m.path.values[k];
      acc += 0.5 * j.d2F * flatten(dqm);                     // 1/2 int d2F d<M>
    }
    Vec lhs = Vec(jets[k + 1].F) - Vec(jets[0].F);
    double d = (lhs - Vec(rsi.values[k + 1]) - acc).norm();
    if (d > worst) worst = d;
  }
  return worst;
}

Vec MartingaleField::g(int t, const Vec& x) const {
  return beta.value(x) * Vec(w.values[t]);
}

Mat MartingaleField::dg(int t, const Vec& x) const {
  const int dy = beta.dim_in;
  Mat out(beta.rows, dy);
  Vec wt = w.values[t];
  for (int i = 0; i < dy; ++i) out.col(i) = beta.d1(x, Vec::Unit(dy, i)) * wt;
  return out;
}

Mat MartingaleField::d2g(int t, const Vec& x) const {
  const int dy = beta.dim_in;
  Mat out(beta.rows, dy * dy);
  Vec wt = w.values[t];
  for (int i = 0; i < dy; ++i)
    for (int j = 0; j < dy; ++j)
      out.col(i + j * dy) = beta.d2(x, Vec::Unit(dy, i), Vec::Unit(dy, j)) * wt;
  return out;
}

double rsiw_martingale_defect(const MartingaleField& g, const ScRSM& y, const RoughPath& rx,
                              const BracketPath& x_bracket, const RsiwOptions& opt) {
  const int n = rx.base.grid.n_steps;
  const int dx = rx.dim();
  const int dy = static_cast<int>(y.y.rows());
  const int dh = g.beta.rows;
  const double dt = rx.base.grid.dt();

  Vec g0 = g.g(0, Vec(y.y.values[0]));
  Vec acc = Vec::Zero(dh);
  double worst = 0.0;
  for (int k = 0; k < n; ++k) {
    Vec xk = y.y.values[k];
    Vec dw = Vec(g.w.values[k + 1]) - Vec(g.w.values[k]);
    Vec dm = Vec(y.m.values[k + 1]) - Vec(y.m.values[k]);
    Vec dxv = rx.base.values[k + 1] - rx.base.values[k];
    Mat dg_k = g.dg(k, xk);
    Mat d2g_k = g.d2g(k, xk);
    const Mat& dxy = y.dxY.values[k];

    acc += g.beta.value(xk) * dw;                       // int beta(Y) dW
    acc += dg_k * Vec(y.ydot.values[k]) * dt;           // int DG Ydot dr
    acc += dg_k * dm;                                   // int DG dM
    // corrected Riemann sums for the d X term
    Mat z = dg_k * dxy;                                 // (dh x dx)
    Mat zp = precompose_both(d2g_k, dxy, dxy) + dg_k * y.dxxY.values[k];
    acc += z * dxv + zp * flatten(rx.area.consecutive[k]);
    if (!opt.drop_covariation) {
      // realized <int Dbeta(Y) dW, M>
      Mat dl(dh, dy);
      for (int i = 0; i < dy; ++i) dl.col(i) = g.beta.d1(xk, Vec::Unit(dy, i)) * dw;
      acc += dl * dm;
    }
    if (!opt.drop_m_bracket) {
      Mat dqm = y.qv_m.path.values[k + 1] - y.qv_m.path.values[k];
      acc += 0.5 * d2g_k * flatten(dqm);
    }
    Mat dqx = x_bracket.path.values[k + 1] - x_bracket.path.values[k];
    acc += 0.5 * precompose_both(d2g_k, dxy, dxy) * flatten(dqx);

    Vec lhs = g.g(k + 1, Vec(y.y.values[k + 1])) - g0;
    double d = (lhs - acc).norm();
    if (d > worst) worst = d;
  }
  return worst;
}

double total_rsiw_defect(const JetField& f, const MartingaleField& g, const ScRSM& y,
                         const RoughPath& rx, const BracketPath& x_bracket,
                         const RsiwOptions& opt) {
  const int n = rx.base.grid.n_steps;
  const int dx = rx.dim();
  const int dy = static_cast<int>(y.y.rows());
  const int du = f.dim_out;
  const double dt = rx.base.grid.dt();

  std::vector<JetValue> jets(n + 1);
  for (int k = 0; k <= n; ++k) jets[k] = f.eval(k, Vec(y.y.values[k]));

  GridPath z1 = make_grid_path(rx.base.grid, du, dx);
  GridPath z2 = make_grid_path(rx.base.grid, du, dx * dx);
  GridPath ntil = make_grid_path(rx.base.grid, du, dx);
  Vec ntil_acc = Vec::Zero(du * dx);
  for (int k = 0; k <= n; ++k) {
    const JetValue& j = jets[k];
    const Mat& dxy = y.dxY.values[k];
    z1.values[k] = j.Fp + j.dF * dxy;
    Mat dFp_dxy = precompose_first(j.dFp, dx, dxy);
    z2.values[k] = j.dF * y.dxxY.values[k] + j.Fpp + dFp_dxy +
                   bilinear_transpose(dFp_dxy, dx, dx) + precompose_both(j.d2F, dxy, dxy);
    ntil.values[k] = unflatten(ntil_acc, du, dx);
    if (k < n) {
      Vec dm = Vec(y.m.values[k + 1]) - Vec(y.m.values[k]);
      Mat dn = y.n.values[k + 1] - y.n.values[k];
      Mat inc = j.dF * dn + contract_first(j.dFp, dy, dx, dm) +
                contract_first(precompose_second(j.d2F, dy, dxy), dy, dx, dm);
      ntil_acc += flatten(inc);
    }
  }
  GridPath rsi = rough_stochastic_integral(z1, z2, ntil, rx);

  Vec h0 = Vec(jets[0].F) + g.g(0, Vec(y.y.values[0]));
  Vec acc = Vec::Zero(du);
  double worst = 0.0;
  for (int k = 0; k < n; ++k) {
    const JetValue& j = jets[k];
    Vec xk = y.y.values[k];
    const Mat& dxy = y.dxY.values[k];
    Vec dm = Vec(y.m.values[k + 1]) - Vec(y.m.values[k]);
    Vec dw = Vec(g.w.values[k + 1]) - Vec(g.w.values[k]);
    Vec dxv = rx.base.values[k + 1] - rx.base.values[k];
    Mat dg_k = g.dg(k, xk);
    Mat d2g_k = g.d2g(k, xk);

    // F part
    acc += j.dF * dm;
    acc += (j.dF * Vec(y.ydot.values[k]) + j.Fdot) * dt;
    Mat dqx = x_bracket.path.values[k + 1] - x_bracket.path.values[k];
    Mat f_bil = precompose_first(j.dFp, dx, dxy) + 0.5 * precompose_both(j.d2F, dxy, dxy);
    acc += f_bil * flatten(dqx);
    // G part
    acc += g.beta.value(xk) * dw;
    acc += dg_k * Vec(y.ydot.values[k]) * dt;
    acc += dg_k * dm;
    Mat zg = dg_k * dxy;
    Mat zgp = precompose_both(d2g_k, dxy, dxy) + dg_k * y.dxxY.values[k];
    acc += zg * dxv + zgp * flatten(rx.area.consecutive[k]);
    if (!opt.drop_covariation) {
      Mat dl(du, dy);
      for (int i = 0; i < dy; ++i) dl.col(i) = g.beta.d1(xk, Vec::Unit(dy, i)) * dw;
      acc += dl * dm;
    }
    acc += 0.5 * precompose_both(d2g_k, dxy, dxy) * flatten(dqx);
    if (!opt.drop_m_bracket) {
      Mat dqm = y.qv_m.path.values[k + 1] - y.qv_m.path.values[k];
      acc += 0.5 * (j.d2F + d2g_k) * flatten(dqm);
    }

    Vec lhs = Vec(jets[k + 1].F) + g.g(k + 1, Vec(y.y.values[k + 1])) - h0;
    double d = (lhs - Vec(rsi.values[k + 1]) - acc).norm();
    if (d > worst) worst = d;
  }
  return worst;
}

TransportChecks transport_checks(const VectorFieldPair& vf, const TestFunction& g,
                                 const RoughPath& rz, const GridPath& bracket_rate,
                                 const std::vector<Vec>& lattice_pts,
                                 const std::vector<std::vector<Vec>>& y_ref,
                                 const std::vector<int>& checkpoints) {
  const int n = rz.base.grid.n_steps;
  Box box{lattice_pts.front(), lattice_pts.back()};
  JetField u = backward_flow_jet(vf, rz, g, bracket_rate, box);
  TransportChecks out;
  for (std::size_t p = 0; p < lattice_pts.size(); ++p) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
      double v = u.eval(checkpoints[c], y_ref[p][c]).F(0);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    out.drift = std::max(out.drift, hi - lo);
    out.terminal = std::max(
        out.terminal, (u.eval(n, lattice_pts[p]).F - Vec(g.value(lattice_pts[p]))).norm());
  }
  // composed-jet residuals on the lattice of initial points
  JetField fwd = forward_flow_jet(vf, rz, 0, box);
  JetField comp = compose_fields(u, fwd, bracket_rate);
  for (const Vec& x : lattice_pts) {
    for (int c : checkpoints) {
      JetValue j = comp.eval(c, x);
      double r = std::max({j.Fp.norm(), j.Fpp.norm(), j.Fdot.norm()});
      out.jet_residual = std::max(out.jet_residual, r);
    }
  }
  return out;
}

double rag_defect(const VectorFieldPair& vf, const TestFunction& f,
                  const StronglyControlledPath& scp, const RoughPath& rz,
                  const GridPath& bracket_rate, const Box& box) {
  JetField back = backward_flow_jet(vf, rz, f, bracket_rate, box);
  BracketPath br;
  br.rate = bracket_rate;
  br.path = make_grid_path(rz.base.grid, bracket_rate.rows(), bracket_rate.cols());
  const double dt = rz.base.grid.dt();
  for (int k = 0; k < rz.base.grid.n_steps; ++k)
    br.path.values[k + 1] = br.path.values[k] + bracket_rate.values[k] * dt;
  return riw_defect(back, scp, rz, br);
}

}  // namespace rsc
