#include "rsc/time_grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rsc {

TimeGrid::TimeGrid(double t0_, double T_, int n_steps_) : t0(t0_), T(T_), n_steps(n_steps_) {
  if (!(T > t0)) throw std::invalid_argument("TimeGrid: T must exceed t0");
  if (n_steps < 2) throw std::invalid_argument("TimeGrid: n_steps must be >= 2");
}

GridPath::GridPath(TimeGrid g, std::vector<Mat> vals) : grid(g), values(std::move(vals)) {
  if (static_cast<int>(values.size()) != grid.nodes())
    throw std::invalid_argument("GridPath: need n_steps+1 values");
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k].rows() != values[0].rows() || values[k].cols() != values[0].cols())
      throw std::invalid_argument("GridPath: inhomogeneous shapes");
  }
}

GridPath make_grid_path(const TimeGrid& g, Eigen::Index rows, Eigen::Index cols) {
  return GridPath(g, std::vector<Mat>(g.nodes(), Mat::Zero(rows, cols)));
}

GridPath make_scalar_path(const TimeGrid& g, const std::vector<double>& vals) {
  std::vector<Mat> v;
  v.reserve(vals.size());
  for (double x : vals) v.push_back(Mat::Constant(1, 1, x));
  return GridPath(g, std::move(v));
}

void check_finite(const GridPath& p, const char* what) {
  for (const Mat& m : p.values)
    if (!m.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entry");
}

Mat increment(const GridPath& p, int i, int j) {
  if (i < 0 || j > p.grid.n_steps) throw std::out_of_range("increment: index out of range");
  if (i >= j) throw std::invalid_argument("increment: need i < j");
  return p.values[j] - p.values[i];
}

TwoParamGrid make_additive(const GridPath& p) {
  TwoParamGrid a;
  a.grid = p.grid;
  a.rule = TwoParamGrid::Rule::Additive;
  a.consecutive.reserve(p.grid.n_steps);
  for (int k = 0; k < p.grid.n_steps; ++k) a.consecutive.push_back(p.values[k + 1] - p.values[k]);
  return a;
}

TwoParamGrid make_chen(const TimeGrid& g, std::vector<Mat> consecutive,
                       GridPath left, GridPath right) {
  if (static_cast<int>(consecutive.size()) != g.n_steps)
    throw std::invalid_argument("make_chen: need one block per interval");
  if (!(left.grid == g) || !(right.grid == g))
    throw std::invalid_argument("make_chen: left/right grids must match");
  if (left.cols() != 1 || right.cols() != 1)
    throw std::invalid_argument("make_chen: left/right must be vector paths");
  TwoParamGrid a;
  a.grid = g;
  a.rule = TwoParamGrid::Rule::Chen;
  a.consecutive = std::move(consecutive);
  a.left = std::move(left);
  a.right = std::move(right);
  return a;
}

Mat TwoParamGrid::at(int i, int j) const {
  if (i < 0 || j > grid.n_steps) throw std::out_of_range("TwoParamGrid::at: out of range");
  if (i >= j) throw std::invalid_argument("TwoParamGrid::at: need i < j");
  Mat acc = consecutive[i];
  for (int k = i + 1; k < j; ++k) {
    acc += consecutive[k];
    if (rule == Rule::Chen) {
      Vec dl = left.values[k] - left.values[i];
      Vec dr = right.values[k + 1] - right.values[k];
      acc += dl * dr.transpose();
    }
  }
  return acc;
}

Mat second_delta(const TwoParamGrid& a, int i, int k, int j) {
  if (!(i < k && k < j)) throw std::invalid_argument("second_delta: need i < k < j");
  return a.at(i, j) - a.at(i, k) - a.at(k, j);
}

double holder_seminorm(const GridPath& p, double alpha, int min_gap) {
  if (min_gap < 1) throw std::invalid_argument("holder_seminorm: min_gap >= 1");
  const int n = p.grid.n_steps;
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + min_gap; j <= n; ++j) {
      double dt = p.grid.time(j) - p.grid.time(i);
      double r = (p.values[j] - p.values[i]).norm() / std::pow(dt, alpha);
      if (r > best) best = r;
    }
  }
  return best;
}

double two_param_seminorm(const TwoParamGrid& a, double beta, int min_gap) {
  return two_param_seminorm([&a](int i, int j) { return a.at(i, j); }, a.grid, beta, min_gap);
}

double two_param_seminorm(const std::function<Mat(int, int)>& a, const TimeGrid& g, double beta,
                          int min_gap) {
  if (min_gap < 1) throw std::invalid_argument("two_param_seminorm: min_gap >= 1");
  const int n = g.n_steps;
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + min_gap; j <= n; ++j) {
      double dt = g.time(j) - g.time(i);
      double r = a(i, j).norm() / std::pow(dt, beta);
      if (r > best) best = r;
    }
  }
  return best;
}

double anisotropic_distance(double dt, double dx, double alpha) {
  if (dt < 0 || dx < 0) throw std::invalid_argument("anisotropic_distance: negative input");
  return std::max(std::pow(dt, alpha), dx);
}

}  // namespace rsc
