#include "rsc/integration.hpp"

#include <stdexcept>

namespace rsc {

namespace {

void check_integrand(const GridPath& y, const GridPath& yp, const RoughPath& rx) {
  const auto dv = rx.base.rows();
  if (!(y.grid == rx.base.grid) || !(yp.grid == rx.base.grid))
    throw std::invalid_argument("rough_integral: grid mismatch");
  if (y.cols() != dv) throw std::invalid_argument("rough_integral: y must be (dU x dV)");
  if (yp.rows() != y.rows() || yp.cols() != dv * dv)
    throw std::invalid_argument("rough_integral: yp must be (dU x dV^2)");
}

}  // namespace

Vec rough_integral(const GridPath& y, const GridPath& yp, const RoughPath& rx, int i, int j) {
  check_integrand(y, yp, rx);
  if (i < 0 || j > rx.base.grid.n_steps || i >= j)
    throw std::invalid_argument("rough_integral: bad interval");
  Vec acc = Vec::Zero(y.rows());
  for (int k = i; k < j; ++k) {
    Vec dx = rx.base.values[k + 1] - rx.base.values[k];
    acc += y.values[k] * dx + yp.values[k] * flatten(rx.area.consecutive[k]);
  }
  return acc;
}

GridPath rough_integral_path(const GridPath& y, const GridPath& yp, const RoughPath& rx) {
  check_integrand(y, yp, rx);
  GridPath out = make_grid_path(y.grid, y.rows(), 1);
  for (int k = 0; k < y.grid.n_steps; ++k) {
    Vec dx = rx.base.values[k + 1] - rx.base.values[k];
    Vec inc = y.values[k] * dx + yp.values[k] * flatten(rx.area.consecutive[k]);
    out.values[k + 1] = out.values[k] + inc;
  }
  return out;
}

GridPath rs_integral(const GridPath& phi, const GridPath& driver) {
  if (!(phi.grid == driver.grid)) throw std::invalid_argument("rs_integral: grid mismatch");
  if (driver.cols() != 1 || phi.cols() != driver.rows())
    throw std::invalid_argument("rs_integral: shape mismatch");
  GridPath out = make_grid_path(phi.grid, phi.rows(), 1);
  for (int k = 0; k < phi.grid.n_steps; ++k) {
    Vec dd = driver.values[k + 1] - driver.values[k];
    out.values[k + 1] = out.values[k] + phi.values[k] * dd;
  }
  return out;
}

GridPath flatten_path(const GridPath& p) {
  GridPath out = make_grid_path(p.grid, p.rows() * p.cols(), 1);
  for (int k = 0; k <= p.grid.n_steps; ++k) out.values[k] = flatten(p.values[k]);
  return out;
}

GridPath rough_stochastic_integral(const GridPath& y, const GridPath& dy,
                                   const GridPath& m, const RoughPath& rx) {
  check_integrand(y, dy, rx);
  if (m.rows() != y.rows() || m.cols() != y.cols())
    throw std::invalid_argument("rough_stochastic_integral: m shape mismatch");
  GridPath ymm = y;
  for (int k = 0; k <= y.grid.n_steps; ++k) ymm.values[k] -= m.values[k];
  GridPath rough = rough_integral_path(ymm, dy, rx);
  GridPath mdx = ibp_m_dx(m, rx.base);
  GridPath out = rough;
  for (int k = 0; k <= y.grid.n_steps; ++k) out.values[k] += mdx.values[k];
  return out;
}

GridPath stop_path(const GridPath& p, int stop_idx) {
  if (stop_idx < 0 || stop_idx > p.grid.n_steps)
    throw std::out_of_range("stop_path: bad index");
  GridPath out = p;
  for (int k = stop_idx + 1; k <= p.grid.n_steps; ++k) out.values[k] = p.values[stop_idx];
  return out;
}

RoughPath stop_rough_path(const RoughPath& r, int stop_idx) {
  RoughPath out;
  out.alpha = r.alpha;
  out.base = stop_path(r.base, stop_idx);
  std::vector<Mat> blocks = r.area.consecutive;
  for (int k = stop_idx; k < r.base.grid.n_steps; ++k) blocks[k].setZero();
  out.area = make_chen(out.base.grid, std::move(blocks), out.base, out.base);
  return out;
}

double stopped_consistency_check(const GridPath& y, const GridPath& dy, const GridPath& m,
                                 const RoughPath& rx, int stop_idx) {
  GridPath full = rough_stochastic_integral(y, dy, m, rx);
  GridPath lhs = stop_path(full, stop_idx);

  // frozen inputs: (Y-M, dY)^tau against X^tau, plus delta(MX)^tau + int X^tau dM^tau
  GridPath ymm = y;
  for (int k = 0; k <= y.grid.n_steps; ++k) ymm.values[k] -= m.values[k];
  GridPath ymm_s = stop_path(ymm, stop_idx);
  GridPath dy_s = stop_path(dy, stop_idx);
  GridPath m_s = stop_path(m, stop_idx);
  RoughPath rx_s = stop_rough_path(rx, stop_idx);
  GridPath rough = rough_integral_path(ymm_s, dy_s, rx_s);

  GridPath rhs = make_grid_path(y.grid, y.rows(), 1);
  Vec x_dm = Vec::Zero(y.rows());  // running int X^tau dM^tau, left sums
  for (int k = 0; k <= y.grid.n_steps; ++k) {
    Vec mx = m_s.values[k] * Vec(rx_s.base.values[k]) - m_s.values[0] * Vec(rx_s.base.values[0]);
    rhs.values[k] = rough.values[k] + mx - x_dm;
    if (k < y.grid.n_steps)
      x_dm += (m_s.values[k + 1] - m_s.values[k]) * Vec(rx_s.base.values[k]);
  }

  double worst = 0.0;
  for (int k = 0; k <= y.grid.n_steps; ++k) {
    double d = (lhs.values[k] - rhs.values[k]).norm();
    if (d > worst) worst = d;
  }
  return worst;
}

}  // namespace rsc
