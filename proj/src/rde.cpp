#include "rsc/rde.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

namespace rsc {

namespace {

constexpr double kExplosionGuard = 1e8;

struct StepData {
  Vec dz;
  Mat area;  // (dZ x dZ)
  double dt;
};

Vec gamma_term(const VectorFieldPair& vf, const Vec& x, const Mat& sig, const Mat& area) {
  const int dz = vf.sigma.cols;
  Vec out = Vec::Zero(vf.mu.rows);
  for (int a = 0; a < dz; ++a) {
    Mat ma = vf.sigma.d1(x, Vec(sig.col(a)));
    out += ma * area.row(a).transpose();
  }
  return out;
}

Vec step_state(const VectorFieldPair& vf, const Vec& x, const StepData& sd) {
  Mat sig = vf.sigma.value(x);
  return x + Vec(vf.mu.value(x)) * sd.dt + sig * sd.dz + gamma_term(vf, x, sig, sd.area);
}

// DPhi(x) w, the exact derivative of the step map.
Vec step_jac_dir(const VectorFieldPair& vf, const Vec& x, const Mat& sig, const StepData& sd,
                 const Vec& w) {
  const int dz = vf.sigma.cols;
  Vec out = w + Vec(vf.mu.d1(x, w)) * sd.dt + vf.sigma.d1(x, w) * sd.dz;
  Mat dsig_w = vf.sigma.d1(x, w);
  for (int a = 0; a < dz; ++a) {
    Mat term = vf.sigma.d2(x, w, Vec(sig.col(a))) + vf.sigma.d1(x, Vec(dsig_w.col(a)));
    out += term * sd.area.row(a).transpose();
  }
  return out;
}

// D^2 Phi(x)(u, v).
Vec step_hess_dir(const VectorFieldPair& vf, const Vec& x, const Mat& sig, const StepData& sd,
                  const Vec& u, const Vec& v) {
  const int dz = vf.sigma.cols;
  Vec out = Vec(vf.mu.d2(x, u, v)) * sd.dt + vf.sigma.d2(x, u, v) * sd.dz;
  Mat dsig_u = vf.sigma.d1(x, u);
  Mat dsig_v = vf.sigma.d1(x, v);
  Mat d2sig_uv = vf.sigma.d2(x, u, v);
  for (int a = 0; a < dz; ++a) {
    Mat term = vf.sigma.d3(x, u, v, Vec(sig.col(a))) + vf.sigma.d2(x, u, Vec(dsig_v.col(a))) +
               vf.sigma.d2(x, v, Vec(dsig_u.col(a))) + vf.sigma.d1(x, Vec(d2sig_uv.col(a)));
    out += term * sd.area.row(a).transpose();
  }
  return out;
}

}  // namespace

FlowResult solve_flow(const VectorFieldPair& vf, const RoughPath& rz, int s, const Vec& x0,
                      int e, bool with_jac, bool with_hess) {
  const int n = rz.base.grid.n_steps;
  if (s < 0 || e > n || s > e) throw std::invalid_argument("solve_flow: bad interval");
  const int dx = vf.dim_x();
  FlowResult r;
  r.s = s;
  r.e = e;
  r.x.reserve(e - s + 1);
  r.x.push_back(x0);
  if (with_jac || with_hess) {
    r.jac.reserve(e - s + 1);
    r.jac.push_back(Mat::Identity(dx, dx));
  }
  if (with_hess) {
    r.hess.reserve(e - s + 1);
    r.hess.push_back(Mat::Zero(dx, dx * dx));
  }
  const double dt = rz.base.grid.dt();
  for (int k = s; k < e; ++k) {
    StepData sd{Vec(rz.base.values[k + 1] - rz.base.values[k]), rz.area.consecutive[k], dt};
    const Vec& x = r.x.back();
    Mat sig = vf.sigma.value(x);
    Vec xn = x + Vec(vf.mu.value(x)) * dt + sig * sd.dz + gamma_term(vf, x, sig, sd.area);
    if (!xn.allFinite() || xn.norm() > kExplosionGuard) throw DivergenceError(k + 1);
    if (with_jac || with_hess) {
      const Mat& a = r.jac.back();
      Mat an(dx, dx);
      for (int j = 0; j < dx; ++j) an.col(j) = step_jac_dir(vf, x, sig, sd, Vec(a.col(j)));
      if (with_hess) {
        const Mat& b = r.hess.back();
        Mat bn(dx, dx * dx);
        for (int i = 0; i < dx; ++i)
          for (int j = i; j < dx; ++j) {
            Vec v = step_hess_dir(vf, x, sig, sd, Vec(a.col(i)), Vec(a.col(j))) +
                    step_jac_dir(vf, x, sig, sd, Vec(b.col(i + j * dx)));
            bn.col(i + j * dx) = v;
            bn.col(j + i * dx) = v;
          }
        r.hess.push_back(bn);
      }
      r.jac.push_back(an);
    }
    r.x.push_back(xn);
  }
  return r;
}

namespace {

GridPath flow_to_grid(const RoughPath& rz, int s, const std::vector<Mat>& vals) {
  const int n = rz.base.grid.n_steps;
  if (n - s < 2) throw std::invalid_argument("rde: need at least two steps after s");
  TimeGrid g(rz.base.grid.time(s), rz.base.grid.T, n - s);
  return GridPath(g, vals);
}

}  // namespace

GridPath rde_solve(const VectorFieldPair& vf, const RoughPath& rz, int s, const Vec& x0) {
  FlowResult r = solve_flow(vf, rz, s, x0, rz.base.grid.n_steps, false, false);
  std::vector<Mat> vals(r.x.begin(), r.x.end());
  return flow_to_grid(rz, s, vals);
}

GridPath rde_jacobian(const VectorFieldPair& vf, const RoughPath& rz, int s, const Vec& x0) {
  FlowResult r = solve_flow(vf, rz, s, x0, rz.base.grid.n_steps, true, false);
  return flow_to_grid(rz, s, r.jac);
}

GridPath rde_hessian(const VectorFieldPair& vf, const RoughPath& rz, int s, const Vec& x0) {
  FlowResult r = solve_flow(vf, rz, s, x0, rz.base.grid.n_steps, true, true);
  return flow_to_grid(rz, s, r.hess);
}

Mat gamma_sigma(const VectorFieldPair& vf, const Vec& x) {
  const int dx = vf.dim_x();
  const int dz = vf.dim_z();
  Mat sig = vf.sigma.value(x);
  Mat out(dx, dz * dz);
  for (int a = 0; a < dz; ++a) {
    Mat ma = vf.sigma.d1(x, Vec(sig.col(a)));  // derivative along sigma e_a
    for (int b = 0; b < dz; ++b) out.col(a + b * dz) = ma.col(b);
  }
  return out;
}

StronglyControlledPath rde_solution_jet(const VectorFieldPair& vf, const RoughPath& rz,
                                        const Vec& x0) {
  const int n = rz.base.grid.n_steps;
  const int dx = vf.dim_x();
  const int dz = vf.dim_z();
  FlowResult r = solve_flow(vf, rz, 0, x0, n, false, false);
  StronglyControlledPath scp;
  scp.alpha = rz.alpha;
  scp.y = make_grid_path(rz.base.grid, dx, 1);
  scp.yp = make_grid_path(rz.base.grid, dx, dz);
  scp.ypp = make_grid_path(rz.base.grid, dx, dz * dz);
  scp.ydot = make_grid_path(rz.base.grid, dx, 1);
  for (int k = 0; k <= n; ++k) {
    const Vec& x = r.x[k];
    scp.y.values[k] = x;
    scp.yp.values[k] = vf.sigma.value(x);
    scp.ypp.values[k] = gamma_sigma(vf, x);
    scp.ydot.values[k] = vf.mu.value(x);
  }
  return scp;
}

namespace {

struct FlowCache {
  std::map<std::pair<int, std::vector<double>>, std::shared_ptr<FlowResult>> map;
  std::mutex mu;

  std::shared_ptr<FlowResult> get(int t, const Vec& x) {
    std::vector<double> key(x.data(), x.data() + x.size());
    std::lock_guard<std::mutex> lock(mu);
    auto it = map.find({t, key});
    return it == map.end() ? nullptr : it->second;
  }
  void put(int t, const Vec& x, std::shared_ptr<FlowResult> r) {
    std::vector<double> key(x.data(), x.data() + x.size());
    std::lock_guard<std::mutex> lock(mu);
    map.emplace(std::make_pair(t, std::move(key)), std::move(r));
  }
};

}  // namespace

JetField forward_flow_jet(const VectorFieldPair& vf, const RoughPath& rz, int s, const Box& box) {
  const int dx = vf.dim_x();
  const int dz = vf.dim_z();
  const int n = rz.base.grid.n_steps;
  auto cache = std::make_shared<FlowCache>();
  JetField f;
  f.dim_x = dx;
  f.dim_out = dx;
  f.dim_driver = dz;
  f.box = box;
  f.eval = [vf, rz, s, n, dx, dz, cache](int t, const Vec& x) {
    if (t < s || t > n) throw std::invalid_argument("forward_flow_jet: t outside [s, T]");
    auto fr = cache->get(s, x);
    if (!fr) {
      fr = std::make_shared<FlowResult>(solve_flow(vf, rz, s, x, n, true, true));
      cache->put(s, x, fr);
    }
    const Vec& xt = fr->state(t);
    JetValue j = zero_jet(dx, dx, dz);
    j.F = xt;
    j.Fp = vf.sigma.value(xt);
    j.dF = fr->jacobian(t);
    j.Fpp = gamma_sigma(vf, xt);
    // dF'(w (x) v) = [D sigma(xt)(Dphi w)] v
    for (int i = 0; i < dx; ++i) {
      Mat dsig = vf.sigma.d1(xt, Vec(j.dF.col(i)));
      for (int v = 0; v < dz; ++v) j.dFp.col(i + v * dx) = dsig.col(v);
    }
    j.d2F = fr->hessian(t);
    j.Fdot = vf.mu.value(xt);
    return j;
  };
  return f;
}

JetField backward_flow_jet(const VectorFieldPair& vf, const RoughPath& rz, const TestFunction& g,
                           const GridPath& bracket_rate, const Box& box) {
  const int dx = vf.dim_x();
  const int dz = vf.dim_z();
  const int du = g.dim_out;
  const int n = rz.base.grid.n_steps;
  auto cache = std::make_shared<FlowCache>();
  JetField f;
  f.dim_x = dx;
  f.dim_out = du;
  f.dim_driver = dz;
  f.box = box;
  f.eval = [vf, rz, g, bracket_rate, n, dx, dz, du, cache](int t, const Vec& x) {
    auto fr = cache->get(t, x);
    if (!fr) {
      fr = std::make_shared<FlowResult>(solve_flow(vf, rz, t, x, n, true, true));
      cache->put(t, x, fr);
    }
    const Vec& xT = fr->state(n);
    const Mat& A = fr->jacobian(n);    // D phi-bar
    const Mat& B = fr->hessian(n);     // D^2 phi-bar
    Mat sig = vf.sigma.value(x);
    Mat grad_g = g.grad(xT);           // (du x dx)
    Mat du_mat = grad_g * A;           // Du
    Mat d2u = precompose_both(g.hess(xT), A, A) + grad_g * B;  // (du, dx^2)

    JetValue j = zero_jet(dx, du, dz);
    j.F = g.value(xT);
    j.Fp = -du_mat * sig;
    j.dF = du_mat;
    Mat gam2 = precompose_both(d2u, sig, sig) + du_mat * gamma_sigma(vf, x);
    j.Fpp = bilinear_transpose(gam2, dz, dz);
    // dF'(w (x) v) = -[D^2u(w, sigma v) + Du(D sigma(w) v)]
    for (int i = 0; i < dx; ++i) {
      Vec ei = Vec::Unit(dx, i);
      Mat d2u_i = contract_first(d2u, dx, dx, ei);   // (du x dx)
      Mat dsig_i = vf.sigma.d1(x, ei);               // (dx x dz)
      Mat block = -(d2u_i * sig + du_mat * dsig_i);  // (du x dz)
      for (int v = 0; v < dz; ++v) j.dFp.col(i + v * dx) = block.col(v);
    }
    j.d2F = d2u;
    Mat time_bil = gam2 - 0.5 * precompose_both(d2u, sig, sig);
    j.Fdot = -du_mat * Vec(vf.mu.value(x)) + time_bil * flatten(bracket_rate.values[t]);
    return j;
  };
  return f;
}

}  // namespace rsc
