#include "rsc/rough_path.hpp"

#include <cmath>
#include <stdexcept>

#include "rsc/rng.hpp"

namespace rsc {

GridPath sample_brownian(const TimeGrid& grid, int dim, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("sample_brownian: dim >= 1");
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double sd = std::sqrt(grid.dt());
  GridPath w = make_grid_path(grid, dim, 1);
  for (int k = 1; k <= grid.n_steps; ++k) {
    Vec dw(dim);
    for (int i = 0; i < dim; ++i) dw(i) = sd * gauss(eng);
    w.values[k] = w.values[k - 1] + dw;
  }
  return w;
}

GridPath bridge_refine_dyadic(const GridPath& w, int factor, std::mt19937_64& eng) {
  if (factor < 1 || (factor & (factor - 1)) != 0)
    throw std::invalid_argument("bridge_refine_dyadic: factor must be a power of two");
  GridPath cur = w;
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int dim = static_cast<int>(w.rows());
  while (factor > 1) {
    TimeGrid g2(cur.grid.t0, cur.grid.T, cur.grid.n_steps * 2);
    GridPath next = make_grid_path(g2, dim, 1);
    const double half = cur.grid.dt() / 2.0;
    const double sd = std::sqrt(half / 2.0);  // Var of midpoint given endpoints
    for (int k = 0; k < cur.grid.n_steps; ++k) {
      next.values[2 * k] = cur.values[k];
      Vec mid = 0.5 * (cur.values[k] + cur.values[k + 1]);
      for (int i = 0; i < dim; ++i) mid(i) += sd * gauss(eng);
      next.values[2 * k + 1] = mid;
    }
    next.values[2 * cur.grid.n_steps] = cur.values[cur.grid.n_steps];
    cur = std::move(next);
    factor /= 2;
  }
  return cur;
}

GridPath bridge_refine(const GridPath& w, int factor, std::mt19937_64& eng) {
  if (factor < 1) throw std::invalid_argument("bridge_refine: factor >= 1");
  if (factor == 1) return w;
  if ((factor & (factor - 1)) == 0) return bridge_refine_dyadic(w, factor, eng);
  const int dim = static_cast<int>(w.rows());
  TimeGrid g2(w.grid.t0, w.grid.T, w.grid.n_steps * factor);
  GridPath out = make_grid_path(g2, dim, 1);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double h = g2.dt();
  for (int k = 0; k < w.grid.n_steps; ++k) {
    out.values[k * factor] = w.values[k];
    const Vec& end = w.values[k + 1];
    for (int j = 1; j < factor; ++j) {
      // sequential conditional law given current point and interval endpoint
      const Vec& prev = out.values[k * factor + j - 1];
      int m = factor - j + 1;  // sub-steps remaining including this one
      Vec mean = prev + (end - prev) / m;
      double var = h * static_cast<double>(m - 1) / m;
      Vec x = mean;
      double sd = std::sqrt(var);
      for (int i = 0; i < dim; ++i) x(i) += sd * gauss(eng);
      out.values[k * factor + j] = x;
    }
  }
  out.values[g2.n_steps] = w.values[w.grid.n_steps];
  return out;
}

GridPath coarsen(const GridPath& p, int factor) {
  if (factor < 1 || p.grid.n_steps % factor != 0)
    throw std::invalid_argument("coarsen: n_steps must be divisible by factor");
  if (factor == 1) return p;
  TimeGrid g(p.grid.t0, p.grid.T, p.grid.n_steps / factor);
  std::vector<Mat> vals;
  vals.reserve(g.nodes());
  for (int k = 0; k <= g.n_steps; ++k) vals.push_back(p.values[k * factor]);
  return GridPath(g, std::move(vals));
}

namespace {

RoughPath lift_from_fine(const GridPath& fine, int coarsen_by, double alpha, bool trapezoid) {
  if (fine.cols() != 1) throw std::invalid_argument("lift: vector path expected");
  if (coarsen_by < 1 || fine.grid.n_steps % coarsen_by != 0)
    throw std::invalid_argument("lift: coarsen factor must divide n_steps");
  const int d = static_cast<int>(fine.rows());
  GridPath base = coarsen(fine, coarsen_by);
  std::vector<Mat> blocks;
  blocks.reserve(base.grid.n_steps);
  for (int k = 0; k < base.grid.n_steps; ++k) {
    Mat a = Mat::Zero(d, d);
    const Vec& start = fine.values[k * coarsen_by];
    for (int j = 0; j < coarsen_by; ++j) {
      const Vec& u = fine.values[k * coarsen_by + j];
      const Vec& v = fine.values[k * coarsen_by + j + 1];
      Vec du = u - start;
      Vec dv = v - u;
      a += du * dv.transpose();
      if (trapezoid) a += 0.5 * dv * dv.transpose();
    }
    blocks.push_back(a);
  }
  RoughPath r;
  r.alpha = alpha;
  r.base = base;
  r.area = make_chen(base.grid, std::move(blocks), base, base);
  return r;
}

}  // namespace

RoughPath ito_lift_from_fine(const GridPath& fine, int coarsen_by, double alpha) {
  return lift_from_fine(fine, coarsen_by, alpha, false);
}

RoughPath stratonovich_lift_from_fine(const GridPath& fine, int coarsen_by, double alpha) {
  return lift_from_fine(fine, coarsen_by, alpha, true);
}

RoughPath ito_lift(const GridPath& w, int refine, std::uint64_t seed, double alpha) {
  auto eng = make_engine(seed, 0, /*purpose=*/0xA11CE);
  GridPath fine = bridge_refine(w, refine, eng);
  return ito_lift_from_fine(fine, refine, alpha);
}

RoughPath stratonovich_lift(const GridPath& w, int refine, std::uint64_t seed, double alpha) {
  auto eng = make_engine(seed, 0, /*purpose=*/0xA11CE);
  GridPath fine = bridge_refine(w, refine, eng);
  return stratonovich_lift_from_fine(fine, refine, alpha);
}

RoughPath canonical_lift_smooth(const GridPath& fine, int coarsen_by, double alpha) {
  return stratonovich_lift_from_fine(fine, coarsen_by, alpha);
}

namespace {

RoughPath exact_scalar_lift(const GridPath& w, double alpha, bool ito) {
  if (w.rows() != 1 || w.cols() != 1)
    throw std::invalid_argument("exact scalar lift: 1-d paths only");
  std::vector<Mat> blocks;
  blocks.reserve(w.grid.n_steps);
  const double dt = w.grid.dt();
  for (int k = 0; k < w.grid.n_steps; ++k) {
    double dw = (w.values[k + 1] - w.values[k])(0, 0);
    blocks.push_back(Mat::Constant(1, 1, 0.5 * (dw * dw - (ito ? dt : 0.0))));
  }
  RoughPath r;
  r.alpha = alpha;
  r.base = w;
  r.area = make_chen(w.grid, std::move(blocks), w, w);
  return r;
}

}  // namespace

RoughPath ito_lift_exact_scalar(const GridPath& w, double alpha) {
  return exact_scalar_lift(w, alpha, true);
}

RoughPath stratonovich_lift_exact_scalar(const GridPath& w, double alpha) {
  return exact_scalar_lift(w, alpha, false);
}

BracketPath bracket(const RoughPath& r) {
  const int d = r.dim();
  GridPath cum = make_grid_path(r.base.grid, d, d);
  for (int k = 0; k < r.base.grid.n_steps; ++k) {
    Vec dx = r.base.values[k + 1] - r.base.values[k];
    Mat inc = dx * dx.transpose() - 2.0 * sym(r.area.consecutive[k]);
    cum.values[k + 1] = cum.values[k] + inc;
  }
  return bracket_rate_from_path(cum);
}

BracketPath bracket_rate_from_path(const GridPath& cumulative) {
  BracketPath b;
  b.path = cumulative;
  b.rate = make_grid_path(cumulative.grid, cumulative.rows(), cumulative.cols());
  const double dt = cumulative.grid.dt();
  for (int k = 0; k < cumulative.grid.n_steps; ++k)
    b.rate.values[k] = (cumulative.values[k + 1] - cumulative.values[k]) / dt;
  b.rate.values[cumulative.grid.n_steps] = b.rate.values[cumulative.grid.n_steps - 1];
  return b;
}

BracketPath ito_bracket(const TimeGrid& g, int dim) {
  GridPath cum = make_grid_path(g, dim, dim);
  for (int k = 0; k <= g.n_steps; ++k)
    cum.values[k] = (g.time(k) - g.t0) * Mat::Identity(dim, dim);
  return bracket_rate_from_path(cum);
}

BracketPath zero_bracket(const TimeGrid& g, int dim) {
  return bracket_rate_from_path(make_grid_path(g, dim, dim));
}

GridPath ito_integral(const GridPath& phi, const GridPath& m) {
  if (!(phi.grid == m.grid)) throw std::invalid_argument("ito_integral: grid mismatch");
  if (phi.cols() != m.rows()) throw std::invalid_argument("ito_integral: shape mismatch");
  GridPath out = make_grid_path(phi.grid, phi.rows(), 1);
  for (int k = 0; k < phi.grid.n_steps; ++k) {
    Vec dm = m.values[k + 1] - m.values[k];
    out.values[k + 1] = out.values[k] + phi.values[k] * dm;
  }
  return out;
}

IbpIntegrals ibp_integral(const GridPath& m_fine, const GridPath& x_fine, int coarsen_by) {
  if (!(m_fine.grid == x_fine.grid)) throw std::invalid_argument("ibp_integral: grid mismatch");
  if (m_fine.cols() != 1 || x_fine.cols() != 1)
    throw std::invalid_argument("ibp_integral: vector paths expected");
  const int dm = static_cast<int>(m_fine.rows());
  const int dx = static_cast<int>(x_fine.rows());
  GridPath m = coarsen(m_fine, coarsen_by);
  GridPath x = coarsen(x_fine, coarsen_by);
  std::vector<Mat> xm, mx;
  xm.reserve(m.grid.n_steps);
  mx.reserve(m.grid.n_steps);
  for (int k = 0; k < m.grid.n_steps; ++k) {
    Mat a = Mat::Zero(dx, dm);  // int delta X (x) dM over the interval
    const Vec& start = x_fine.values[k * coarsen_by];
    for (int j = 0; j < coarsen_by; ++j) {
      Vec du = x_fine.values[k * coarsen_by + j] - start;
      Vec dv = m_fine.values[k * coarsen_by + j + 1] - m_fine.values[k * coarsen_by + j];
      a += du * dv.transpose();
    }
    Vec dmk = m.values[k + 1] - m.values[k];
    Vec dxk = x.values[k + 1] - x.values[k];
    xm.push_back(a);
    mx.push_back(dmk * dxk.transpose() - a.transpose());
  }
  IbpIntegrals out;
  out.pi_xm = make_chen(m.grid, std::move(xm), x, m);
  out.pi_mx = make_chen(m.grid, std::move(mx), m, x);
  return out;
}

GridPath ibp_m_dx(const GridPath& m, const GridPath& x) {
  if (!(m.grid == x.grid)) throw std::invalid_argument("ibp_m_dx: grid mismatch");
  if (m.cols() != x.rows()) throw std::invalid_argument("ibp_m_dx: shape mismatch");
  GridPath out = make_grid_path(m.grid, m.rows(), 1);
  for (int k = 0; k < m.grid.n_steps; ++k) {
    Vec prod_inc = m.values[k + 1] * Vec(x.values[k + 1]) - m.values[k] * Vec(x.values[k]);
    Vec x_dm = (m.values[k + 1] - m.values[k]) * Vec(x.values[k]);
    out.values[k + 1] = out.values[k] + prod_inc - x_dm;
  }
  return out;
}

RoughPath joint_lift(const RoughPath& rx, const MartingaleSample& m, const GridPath& x_fine) {
  if (!(rx.base.grid == m.path.grid)) throw std::invalid_argument("joint_lift: grid mismatch");
  if (!(m.fine.grid == x_fine.grid)) throw std::invalid_argument("joint_lift: fine grid mismatch");
  const int dx = rx.dim();
  const int dm = m.dim();
  const int n = rx.base.grid.n_steps;
  const int cf = m.fine.grid.n_steps / n;

  IbpIntegrals cross = ibp_integral(m.fine, x_fine, cf);

  GridPath base = make_grid_path(rx.base.grid, dx + dm, 1);
  for (int k = 0; k <= n; ++k) {
    base.values[k].topRows(dx) = rx.base.values[k];
    base.values[k].bottomRows(dm) = m.path.values[k];
  }
  std::vector<Mat> blocks;
  blocks.reserve(n);
  for (int k = 0; k < n; ++k) {
    Mat mm = Mat::Zero(dm, dm);  // int delta M (x) dM, left sums on fine mesh
    const Vec& start = m.fine.values[k * cf];
    for (int j = 0; j < cf; ++j) {
      Vec du = m.fine.values[k * cf + j] - start;
      Vec dv = m.fine.values[k * cf + j + 1] - m.fine.values[k * cf + j];
      mm += du * dv.transpose();
    }
    Mat blk = Mat::Zero(dx + dm, dx + dm);
    blk.topLeftCorner(dx, dx) = rx.area.consecutive[k];
    blk.topRightCorner(dx, dm) = cross.pi_xm.consecutive[k];
    blk.bottomLeftCorner(dm, dx) = cross.pi_mx.consecutive[k];
    blk.bottomRightCorner(dm, dm) = mm;
    blocks.push_back(blk);
  }
  RoughPath out;
  out.alpha = rx.alpha;
  out.base = base;
  out.area = make_chen(base.grid, std::move(blocks), base, base);
  return out;
}

RoughPath multi_joint_lift(const RoughPath& rx, const std::vector<MartingaleSample>& ms,
                           const GridPath& x_fine) {
  if (ms.empty()) return rx;
  if (ms.size() == 1) return joint_lift(rx, ms[0], x_fine);
  int dtot = 0;
  for (const auto& m : ms) dtot += m.dim();
  const TimeGrid fg = ms[0].fine.grid;
  const TimeGrid wg = ms[0].path.grid;
  GridPath stacked_fine = make_grid_path(fg, dtot, 1);
  GridPath stacked = make_grid_path(wg, dtot, 1);
  for (int k = 0; k <= fg.n_steps; ++k) {
    int at = 0;
    for (const auto& m : ms) {
      stacked_fine.values[k].middleRows(at, m.dim()) = m.fine.values[k];
      at += m.dim();
    }
  }
  for (int k = 0; k <= wg.n_steps; ++k) {
    int at = 0;
    for (const auto& m : ms) {
      stacked.values[k].middleRows(at, m.dim()) = m.path.values[k];
      at += m.dim();
    }
  }
  MartingaleSample big;
  big.path = stacked;
  big.fine = stacked_fine;
  big.refine = ms[0].refine;
  // realized covariation as bracket for the stacked martingale
  GridPath cum = make_grid_path(wg, dtot, dtot);
  for (int k = 0; k < wg.n_steps; ++k) {
    Vec dm = stacked.values[k + 1] - stacked.values[k];
    cum.values[k + 1] = cum.values[k] + dm * dm.transpose();
  }
  big.bracket = bracket_rate_from_path(cum);
  return joint_lift(rx, big, x_fine);
}

double chen_defect(const RoughPath& r, int subsample) {
  const int n = r.base.grid.n_steps;
  if (subsample < 3) throw std::invalid_argument("chen_defect: need >= 3 nodes");
  // Stored consecutive blocks cancel identically in delta A, so block data can
  // only be audited at construction time; the reconstruction contract that can
  // be checked is (a) delta A == delta base (x) delta base on triples and
  // (b) the declared left/right paths coincide with the base path.
  double worst = 0.0;
  if (r.area.rule == TwoParamGrid::Rule::Chen) {
    for (int k = 0; k <= n; ++k) {
      worst = std::max(worst, (r.area.left.values[k] - r.base.values[k]).norm());
      worst = std::max(worst, (r.area.right.values[k] - r.base.values[k]).norm());
    }
  }
  std::vector<int> nodes;
  for (int i = 0; i < subsample; ++i) nodes.push_back((static_cast<long>(i) * n) / (subsample - 1));
  for (std::size_t a = 0; a + 2 < nodes.size(); ++a)
    for (std::size_t b = a + 1; b + 1 < nodes.size(); ++b)
      for (std::size_t c = b + 1; c < nodes.size(); ++c) {
        int i = nodes[a], k = nodes[b], j = nodes[c];
        if (!(i < k && k < j)) continue;
        Vec dl = r.base.values[k] - r.base.values[i];
        Vec dr = r.base.values[j] - r.base.values[k];
        double d = (second_delta(r.area, i, k, j) - dl * dr.transpose()).norm();
        if (d > worst) worst = d;
      }
  return worst;
}

MartingaleSample brownian_martingale(const GridPath& w_fine, int coarsen_by) {
  MartingaleSample m;
  m.fine = w_fine;
  m.refine = coarsen_by;
  m.path = coarsen(w_fine, coarsen_by);
  m.bracket = ito_bracket(m.path.grid, static_cast<int>(m.path.rows()));
  return m;
}

MartingaleSample ito_martingale(const GridPath& w_fine, int coarsen_by,
                                const std::function<Mat(const Vec&)>& phi,
                                const Mat& integrator_weights) {
  // d M = phi(W_u) d(B W)_u on the fine mesh, B = integrator_weights
  const int n_fine = w_fine.grid.n_steps;
  const int d_out = static_cast<int>(phi(Vec(w_fine.values[0])).rows());
  GridPath mf = make_grid_path(w_fine.grid, d_out, 1);
  GridPath qv_fine = make_grid_path(w_fine.grid, d_out, d_out);
  const double dtf = w_fine.grid.dt();
  for (int k = 0; k < n_fine; ++k) {
    Vec dw = w_fine.values[k + 1] - w_fine.values[k];
    Mat ph = phi(Vec(w_fine.values[k]));
    if (ph.cols() != integrator_weights.rows())
      throw std::invalid_argument("ito_martingale: phi/integrator shapes");
    mf.values[k + 1] = mf.values[k] + ph * (integrator_weights * dw);
    Mat a = ph * integrator_weights;
    qv_fine.values[k + 1] = qv_fine.values[k] + a * a.transpose() * dtf;
  }
  MartingaleSample m;
  m.fine = mf;
  m.refine = coarsen_by;
  m.path = coarsen(mf, coarsen_by);
  m.bracket = bracket_rate_from_path(coarsen(qv_fine, coarsen_by));
  return m;
}

}  // namespace rsc
