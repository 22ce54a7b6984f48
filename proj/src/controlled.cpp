#include "rsc/controlled.hpp"

#include <cmath>
#include <stdexcept>

namespace rsc {

namespace {

// X_{i,j} reconstructed in O(1) from prefix areas via Chen.
struct AreaTable {
  std::vector<Mat> prefix;  // X_{0,k}
  const GridPath* base;

  explicit AreaTable(const RoughPath& rx) : base(&rx.base) {
    const int n = rx.base.grid.n_steps;
    const int d = rx.dim();
    prefix.resize(n + 1, Mat::Zero(d, d));
    for (int k = 0; k < n; ++k) {
      Vec dl = rx.base.values[k] - rx.base.values[0];
      Vec dr = rx.base.values[k + 1] - rx.base.values[k];
      prefix[k + 1] = prefix[k] + rx.area.consecutive[k] + dl * dr.transpose();
    }
  }

  Mat at(int i, int j) const {
    Vec dl = base->values[i] - base->values[0];
    Vec dr = base->values[j] - base->values[i];
    return prefix[j] - prefix[i] - dl * dr.transpose();
  }
};

}  // namespace

double remainder_2(const ControlledPath& cp, const RoughPath& rx, int min_gap) {
  const int n = rx.base.grid.n_steps;
  if (!(cp.y.grid == rx.base.grid)) throw std::invalid_argument("remainder_2: grid mismatch");
  const auto dv = rx.base.rows();
  const auto c = cp.y.cols();
  if (cp.yp.cols() != dv * c) throw std::invalid_argument("remainder_2: yp shape");
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + min_gap; j <= n; ++j) {
      Vec dx = rx.base.values[j] - rx.base.values[i];
      Mat rem = cp.y.values[j] - cp.y.values[i] - contract_first(cp.yp.values[i], dv, c, dx);
      double dt = rx.base.grid.time(j) - rx.base.grid.time(i);
      double r = rem.norm() / std::pow(dt, 2.0 * cp.alpha);
      if (r > best) best = r;
    }
  }
  return best;
}

double remainder_3(const StronglyControlledPath& scp, const RoughPath& rx, int min_gap) {
  const int n = rx.base.grid.n_steps;
  if (!(scp.y.grid == rx.base.grid)) throw std::invalid_argument("remainder_3: grid mismatch");
  AreaTable areas(rx);
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + min_gap; j <= n; ++j) {
      Vec dx = rx.base.values[j] - rx.base.values[i];
      double dt = rx.base.grid.time(j) - rx.base.grid.time(i);
      Vec rem = Vec(scp.y.values[j]) - Vec(scp.y.values[i]) - scp.yp.values[i] * dx -
                scp.ypp.values[i] * flatten(areas.at(i, j)) - Vec(scp.ydot.values[i]) * dt;
      double r = rem.norm() / std::pow(dt, 3.0 * scp.alpha);
      if (r > best) best = r;
    }
  }
  return best;
}

ControlledPath make_controlled(GridPath y, GridPath yp, const RoughPath& rx, int min_gap) {
  ControlledPath cp;
  cp.y = std::move(y);
  cp.yp = std::move(yp);
  cp.alpha = rx.alpha;
  cp.r2 = remainder_2(cp, rx, min_gap);
  return cp;
}

StronglyControlledPath make_strongly_controlled(GridPath y, GridPath yp, GridPath ypp,
                                                GridPath ydot, const RoughPath& rx, int min_gap) {
  StronglyControlledPath scp;
  scp.y = std::move(y);
  scp.yp = std::move(yp);
  scp.ypp = std::move(ypp);
  scp.ydot = std::move(ydot);
  scp.alpha = rx.alpha;
  scp.r3 = remainder_3(scp, rx, min_gap);
  return scp;
}

JetValue zero_jet(int dx, int du, int dv) {
  JetValue j;
  j.F = Vec::Zero(du);
  j.Fp = Mat::Zero(du, dv);
  j.dF = Mat::Zero(du, dx);
  j.Fpp = Mat::Zero(du, dv * dv);
  j.dFp = Mat::Zero(du, dx * dv);
  j.d2F = Mat::Zero(du, dx * dx);
  j.Fdot = Vec::Zero(du);
  return j;
}

std::vector<Vec> lattice(const Box& box, int points_per_axis) {
  const int d = box.dim();
  if (points_per_axis < 2) throw std::invalid_argument("lattice: need >= 2 points per axis");
  std::vector<Vec> pts;
  std::vector<int> idx(d, 0);
  const long total = static_cast<long>(std::pow(points_per_axis, d));
  pts.reserve(total);
  for (long c = 0; c < total; ++c) {
    Vec x(d);
    long rem = c;
    for (int i = 0; i < d; ++i) {
      int k = rem % points_per_axis;
      rem /= points_per_axis;
      x(i) = box.lo(i) + (box.hi(i) - box.lo(i)) * k / (points_per_axis - 1);
    }
    pts.push_back(x);
  }
  return pts;
}

JetField identity_field(int dim, int dim_driver, const Box& box) {
  JetField f;
  f.dim_x = f.dim_out = dim;
  f.dim_driver = dim_driver;
  f.box = box;
  f.eval = [dim, dim_driver](int, const Vec& x) {
    JetValue j = zero_jet(dim, dim, dim_driver);
    j.F = x;
    j.dF = Mat::Identity(dim, dim);
    return j;
  };
  return f;
}

JetField static_field(int dim_x, int dim_out, int dim_driver, const Box& box,
                      std::function<Vec(const Vec&)> f,
                      std::function<Mat(const Vec&)> df,
                      std::function<Mat(const Vec&)> d2f) {
  JetField out;
  out.dim_x = dim_x;
  out.dim_out = dim_out;
  out.dim_driver = dim_driver;
  out.box = box;
  out.eval = [=](int, const Vec& x) {
    JetValue j = zero_jet(dim_x, dim_out, dim_driver);
    j.F = f(x);
    j.dF = df(x);
    j.d2F = d2f(x);
    return j;
  };
  return out;
}

JetValue compose_jets(const JetValue& j2, const JetValue& j1, const Mat& bracket_rate) {
  const auto dx1 = j1.dF.cols();
  const auto dx2 = j2.dF.cols();  // == dim of j1's output
  const auto dv = j1.Fp.cols();
  JetValue z;
  z.F = j2.F;
  z.Fp = j2.Fp + j2.dF * j1.Fp;
  z.dF = j2.dF * j1.dF;

  Mat dFp_f1p = precompose_first(j2.dFp, dv, j1.Fp);  // (v,w) -> dF2'(F1'v (x) w)
  z.Fpp = j2.Fpp + dFp_f1p + bilinear_transpose(dFp_f1p, dv, dv) +
          precompose_both(j2.d2F, j1.Fp, j1.Fp) + j2.dF * j1.Fpp;

  z.dFp = precompose_first(j2.dFp, dv, j1.dF) + precompose_both(j2.d2F, j1.dF, j1.Fp) +
          j2.dF * j1.dFp;

  z.d2F = precompose_both(j2.d2F, j1.dF, j1.dF) + j2.dF * j1.d2F;

  Mat time_bil = 0.5 * precompose_both(j2.d2F, j1.Fp, j1.Fp) + dFp_f1p;
  z.Fdot = j2.Fdot + j2.dF * j1.Fdot + time_bil * flatten(bracket_rate);
  (void)dx1;
  (void)dx2;
  return z;
}

JetField compose_fields(const JetField& f2, const JetField& f1, const GridPath& bracket_rate) {
  if (f2.dim_x != f1.dim_out)
    throw std::invalid_argument("compose_fields: codomain of f1 must match domain of f2");
  if (f2.dim_driver != f1.dim_driver)
    throw std::invalid_argument("compose_fields: common driver required");
  JetField out;
  out.dim_x = f1.dim_x;
  out.dim_out = f2.dim_out;
  out.dim_driver = f1.dim_driver;
  out.box = f1.box;
  out.lattice_res = f1.lattice_res;
  out.adapted = f1.adapted || f2.adapted;
  auto e1 = f1.eval;
  auto e2 = f2.eval;
  out.eval = [e1, e2, bracket_rate](int t, const Vec& x) {
    JetValue j1 = e1(t, x);
    JetValue j2 = e2(t, j1.F);
    return compose_jets(j2, j1, bracket_rate.values[t]);
  };
  return out;
}

StronglyControlledPath compose_field_path(const JetField& f, const StronglyControlledPath& scp,
                                          const GridPath& bracket_rate) {
  const int n = scp.y.grid.n_steps;
  const int du = f.dim_out;
  const auto dv = scp.yp.cols();
  if (f.dim_x != scp.y.rows())
    throw std::invalid_argument("compose_field_path: spatial dimension mismatch");
  StronglyControlledPath z;
  z.alpha = scp.alpha;
  z.y = make_grid_path(scp.y.grid, du, 1);
  z.yp = make_grid_path(scp.y.grid, du, dv);
  z.ypp = make_grid_path(scp.y.grid, du, dv * dv);
  z.ydot = make_grid_path(scp.y.grid, du, 1);
  // summand order kept identical to compose_jets so that composing with
  // path_as_field agrees bitwise
  for (int k = 0; k <= n; ++k) {
    JetValue j = f.eval(k, Vec(scp.y.values[k]));
    const Mat& yp = scp.yp.values[k];
    z.y.values[k] = j.F;
    z.yp.values[k] = j.Fp + j.dF * yp;
    Mat dFp_yp = precompose_first(j.dFp, dv, yp);
    z.ypp.values[k] = j.Fpp + dFp_yp + bilinear_transpose(dFp_yp, dv, dv) +
                      precompose_both(j.d2F, yp, yp) + j.dF * scp.ypp.values[k];
    Mat time_bil = 0.5 * precompose_both(j.d2F, yp, yp) + dFp_yp;
    z.ydot.values[k] = Vec(j.Fdot) + j.dF * Vec(scp.ydot.values[k]) +
                       time_bil * flatten(bracket_rate.values[k]);
  }
  return z;
}

JetField path_as_field(const StronglyControlledPath& scp, const Box& box) {
  JetField f;
  f.dim_x = box.dim();
  f.dim_out = static_cast<int>(scp.y.rows());
  f.dim_driver = static_cast<int>(scp.yp.cols());
  f.box = box;
  auto y = scp.y;
  auto yp = scp.yp;
  auto ypp = scp.ypp;
  auto ydot = scp.ydot;
  const int dx = f.dim_x;
  const int du = f.dim_out;
  const int dv = f.dim_driver;
  f.eval = [=](int t, const Vec&) {
    JetValue j = zero_jet(dx, du, dv);
    j.F = y.values[t];
    j.Fp = yp.values[t];
    j.Fpp = ypp.values[t];
    j.Fdot = ydot.values[t];
    return j;
  };
  return f;
}

StronglyControlledPath reverse_orientation(const StronglyControlledPath& scp) {
  const auto dv = scp.yp.cols();
  StronglyControlledPath out = scp;
  for (int k = 0; k <= scp.y.grid.n_steps; ++k) {
    out.yp.values[k] = -scp.yp.values[k];
    out.ypp.values[k] = bilinear_transpose(scp.ypp.values[k], dv, dv);
    out.ydot.values[k] = -scp.ydot.values[k];
  }
  return out;
}

namespace {

double lip_ratio(double num, double den) { return den > 0 ? num / den : 0.0; }

}  // namespace

JetSeminorms field_criterion(const JetField& f, const RoughPath& rx, const Box& box,
                             int resolution, int time_stride, int min_gap) {
  const int n = rx.base.grid.n_steps;
  const double alpha = rx.alpha;
  const auto dv = rx.base.rows();
  const auto dx = f.dim_x;
  auto pts = lattice(box, resolution);
  std::vector<int> tnodes;
  for (int k = 0; k <= n; k += time_stride) tnodes.push_back(k);
  if (tnodes.back() != n) tnodes.push_back(n);

  // cache jet evaluations on the (time, lattice) sample
  std::vector<std::vector<JetValue>> J(tnodes.size());
  for (std::size_t a = 0; a < tnodes.size(); ++a) {
    J[a].reserve(pts.size());
    for (const Vec& x : pts) J[a].push_back(f.eval(tnodes[a], x));
  }

  JetSeminorms s;

  // spatial part: Lip residuals at frozen times
  for (std::size_t a = 0; a < tnodes.size(); ++a) {
    for (std::size_t p = 0; p < pts.size(); ++p) {
      for (std::size_t q = 0; q < pts.size(); ++q) {
        if (p == q) continue;
        Vec dxv = pts[q] - pts[p];
        double r = dxv.norm();
        const JetValue& j0 = J[a][p];
        const JetValue& j1 = J[a][q];
        // F: third-order Taylor
        Vec rem0 = j1.F - j0.F - j0.dF * dxv - 0.5 * apply_bilinear(j0.d2F, dxv, dxv);
        // dF: second-order
        Mat rem1 = j1.dF - j0.dF - contract_first(j0.d2F, dx, dx, dxv);
        // d2F, F'', dF', Fdot: first-order
        double rem2 = (j1.d2F - j0.d2F).norm() + (j1.Fpp - j0.Fpp).norm() +
                      (j1.dFp - j0.dFp).norm() + (j1.Fdot - j0.Fdot).norm();
        // F': second-order with dF' as spatial derivative
        Mat remp = j1.Fp - j0.Fp - contract_first(j0.dFp, dx, static_cast<int>(dv), dxv);
        double v = std::max({lip_ratio(rem0.norm(), std::pow(r, 3.0)),
                             lip_ratio(rem1.norm(), r * r), lip_ratio(remp.norm(), r * r),
                             lip_ratio(rem2, r)});
        if (v > s.x_part) s.x_part = v;
      }
    }
  }

  // temporal part: controlled-path residuals at frozen points
  AreaTable areas(rx);
  for (std::size_t p = 0; p < pts.size(); ++p) {
    for (std::size_t a = 0; a < tnodes.size(); ++a) {
      for (std::size_t b = a + 1; b < tnodes.size(); ++b) {
        int i = tnodes[a], j = tnodes[b];
        if (j - i < min_gap) continue;
        double dt = rx.base.grid.time(j) - rx.base.grid.time(i);
        Vec dxv = rx.base.values[j] - rx.base.values[i];
        const JetValue& j0 = J[a][p];
        const JetValue& j1 = J[b][p];
        Vec r3 = j1.F - j0.F - j0.Fp * dxv - j0.Fpp * flatten(areas.at(i, j)) - j0.Fdot * dt;
        Mat r2a = j1.Fp - j0.Fp - contract_first(j0.Fpp, dv, dv, dxv);
        // dF with (dF')^T as Gubinelli derivative
        Mat dFpT0 = bilinear_transpose(j0.dFp, dx, dv);  // L(V (x) X; U)
        Mat r2b = j1.dF - j0.dF - contract_first(dFpT0, dv, dx, dxv);
        double r1 = std::max({(j1.Fpp - j0.Fpp).norm(), (j1.dFp - j0.dFp).norm(),
                              (j1.d2F - j0.d2F).norm(), (j1.Fdot - j0.Fdot).norm()});
        double v = std::max({lip_ratio(r3.norm(), std::pow(dt, 3.0 * alpha)),
                             lip_ratio(r2a.norm(), std::pow(dt, 2.0 * alpha)),
                             lip_ratio(r2b.norm(), std::pow(dt, 2.0 * alpha)),
                             lip_ratio(r1, std::pow(dt, alpha))});
        if (v > s.t_part) s.t_part = v;
      }
    }
  }

  // full mixed cascade residuals, for audit
  for (std::size_t a = 0; a < tnodes.size(); ++a) {
    for (std::size_t b = a + 1; b < tnodes.size(); ++b) {
      int i = tnodes[a], j = tnodes[b];
      if (j - i < min_gap) continue;
      double dt = rx.base.grid.time(j) - rx.base.grid.time(i);
      Vec dXv = rx.base.values[j] - rx.base.values[i];
      Mat area = areas.at(i, j);
      for (std::size_t p = 0; p < pts.size(); ++p) {
        for (std::size_t q = 0; q < pts.size(); ++q) {
          Vec dxv = pts[q] - pts[p];
          double scale = anisotropic_distance(dt, dxv.norm(), alpha);
          if (scale <= 0) continue;
          const JetValue& j0 = J[a][p];
          const JetValue& j1 = J[b][q];
          Vec full = j1.F - j0.F - j0.Fp * dXv - j0.dF * dxv - j0.Fpp * flatten(area) -
                     apply_bilinear(j0.dFp, dxv, dXv) -
                     0.5 * apply_bilinear(j0.d2F, dxv, dxv) - j0.Fdot * dt;
          s.cascade3 = std::max(s.cascade3, full.norm() / std::pow(scale, 3.0));
          Mat rp = j1.Fp - j0.Fp - contract_first(j0.Fpp, dv, dv, dXv) -
                   contract_first(j0.dFp, dx, dv, dxv);
          Mat dFpT0 = bilinear_transpose(j0.dFp, dx, dv);
          Mat rd = j1.dF - j0.dF - contract_first(dFpT0, dv, dx, dXv) -
                   contract_first(j0.d2F, dx, dx, dxv);
          s.cascade2 = std::max(s.cascade2, std::max(rp.norm(), rd.norm()) / (scale * scale));
          double r1 = std::max({(j1.Fpp - j0.Fpp).norm(), (j1.dFp - j0.dFp).norm(),
                                (j1.d2F - j0.d2F).norm(), (j1.Fdot - j0.Fdot).norm()});
          s.cascade1 = std::max(s.cascade1, r1 / scale);
        }
      }
    }
  }
  return s;
}

FdJetReport fd_jet_check(const JetField& f, const Box& box, double h, const RoughPath* rx,
                         int n_points) {
  FdJetReport rep;
  auto pts = lattice(box, n_points);
  const int dx = f.dim_x;
  const auto dv = f.dim_driver;
  std::vector<int> tnodes = {0};
  int n_time = 0;
  if (rx) {
    n_time = rx->base.grid.n_steps;
    tnodes = {0, n_time / 2, n_time};
  }
  for (int t : tnodes) {
    for (const Vec& x : pts) {
      JetValue j0 = f.eval(t, x);
      for (int i = 0; i < dx; ++i) {
        Vec ei = Vec::Unit(dx, i);
        JetValue jp = f.eval(t, Vec(x + h * ei));
        JetValue jm = f.eval(t, Vec(x - h * ei));
        Vec dcol = (jp.F - jm.F) / (2.0 * h);
        rep.dev_dF = std::max(rep.dev_dF, (dcol - j0.dF.col(i)).norm());
        Mat dfp_col = (jp.Fp - jm.Fp) / (2.0 * h);  // d/dx_i F'
        Mat stored = contract_first(j0.dFp, dx, dv, ei);
        rep.dev_dFp = std::max(rep.dev_dFp, (dfp_col - stored).norm());
        for (int jdx = 0; jdx < dx; ++jdx) {
          Vec ej = Vec::Unit(dx, jdx);
          JetValue jpp = f.eval(t, Vec(x + h * ei + h * ej));
          JetValue jpm = f.eval(t, Vec(x + h * ei - h * ej));
          JetValue jmp = f.eval(t, Vec(x - h * ei + h * ej));
          JetValue jmm = f.eval(t, Vec(x - h * ei - h * ej));
          Vec mixed = (jpp.F - jpm.F - jmp.F + jmm.F) / (4.0 * h * h);
          rep.dev_d2F = std::max(rep.dev_d2F, (mixed - apply_bilinear(j0.d2F, ei, ej)).norm());
        }
      }
      Mat d2 = j0.d2F;
      rep.sym_defect = std::max(
          rep.sym_defect, (d2 - bilinear_transpose(d2, dx, dx)).norm());
    }
  }
  if (rx) {
    // (dF)' = (dF')^T consistency as a 2-alpha remainder along the driver
    for (const Vec& x : pts) {
      for (int i = 0; i < n_time; ++i) {
        int j = std::min(n_time, i + std::max(1, n_time / 8));
        if (j <= i) continue;
        JetValue j0 = f.eval(i, x);
        JetValue j1 = f.eval(j, x);
        Vec dX = rx->base.values[j] - rx->base.values[i];
        Mat dFpT = bilinear_transpose(j0.dFp, dx, dv);
        Mat rem = j1.dF - j0.dF - contract_first(dFpT, dv, dx, dX);
        double dt = rx->base.grid.time(j) - rx->base.grid.time(i);
        rep.commute_defect =
            std::max(rep.commute_defect, rem.norm() / std::pow(dt, 2.0 * rx->alpha));
      }
    }
  }
  return rep;
}

}  // namespace rsc
