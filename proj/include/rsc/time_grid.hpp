#pragma once

#include <functional>
#include <vector>

#include "rsc/tensor_ops.hpp"

namespace rsc {

struct TimeGrid {
  double t0 = 0.0;
  double T = 1.0;
  int n_steps = 2;

  TimeGrid() = default;
  TimeGrid(double t0_, double T_, int n_steps_);

  double dt() const { return (T - t0) / n_steps; }
  double time(int k) const { return t0 + k * dt(); }
  int nodes() const { return n_steps + 1; }

  bool operator==(const TimeGrid& o) const {
    return t0 == o.t0 && T == o.T && n_steps == o.n_steps;
  }
};

// Uniform grid plus one tensor per node, all of identical shape.
struct GridPath {
  TimeGrid grid;
  std::vector<Mat> values;

  GridPath() = default;
  GridPath(TimeGrid g, std::vector<Mat> vals);

  Eigen::Index rows() const { return values.empty() ? 0 : values.front().rows(); }
  Eigen::Index cols() const { return values.empty() ? 0 : values.front().cols(); }
  int nodes() const { return static_cast<int>(values.size()); }
};

GridPath make_grid_path(const TimeGrid& g, Eigen::Index rows, Eigen::Index cols);

// Scalar convenience: value(k) as 1x1.
GridPath make_scalar_path(const TimeGrid& g, const std::vector<double>& vals);

Mat increment(const GridPath& p, int i, int j);

// A_{s,t} stored on consecutive intervals; general pairs reconstructed by
// left-to-right accumulation with the declared Chen rule, hence exact by
// construction.
struct TwoParamGrid {
  enum class Rule { Additive, Chen };

  TimeGrid grid;
  std::vector<Mat> consecutive;  // one per interval
  Rule rule = Rule::Additive;
  GridPath left, right;  // populated for Rule::Chen; vector-valued (d x 1)

  Mat at(int i, int j) const;
  Eigen::Index rows() const { return consecutive.empty() ? 0 : consecutive.front().rows(); }
  Eigen::Index cols() const { return consecutive.empty() ? 0 : consecutive.front().cols(); }
};

TwoParamGrid make_additive(const GridPath& p);
TwoParamGrid make_chen(const TimeGrid& g, std::vector<Mat> consecutive,
                       GridPath left, GridPath right);

Mat second_delta(const TwoParamGrid& a, int i, int k, int j);

double holder_seminorm(const GridPath& p, double alpha, int min_gap = 1);
double two_param_seminorm(const TwoParamGrid& a, double beta, int min_gap = 1);
double two_param_seminorm(const std::function<Mat(int, int)>& a, const TimeGrid& g, double beta,
                          int min_gap = 1);

double anisotropic_distance(double dt, double dx, double alpha);

void check_finite(const GridPath& p, const char* what);

}  // namespace rsc
