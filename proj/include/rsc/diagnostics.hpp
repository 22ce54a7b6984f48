#pragma once

#include "rsc/time_grid.hpp"

namespace rsc {

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  int n_used = 0;
  bool zeros_excluded = false;
};

// OLS on log-log data; zeros (<= floor) are excluded and flagged.
RateFit convergence_rate(const std::vector<double>& mesh, const std::vector<double>& residual,
                         double zero_floor = 1e-14);

struct ScalingFit {
  double slope = 0.0;
  std::vector<double> scales;  // |t-s| per dyadic level
  std::vector<double> norms;   // empirical L^{q/level} norms
};

// Empirical moment scaling over dyadic gaps; slope targets level*beta.
ScalingFit kolmogorov_scaling_fit(const std::vector<GridPath>& samples, int level, double q);
ScalingFit kolmogorov_scaling_fit(const std::vector<TwoParamGrid>& samples, int level, double q);
// General form for two-parameter objects with their own reconstruction,
// e.g. iterated-integral remainders: value_at(sample, i, j) = |A_{i,j}|.
ScalingFit kolmogorov_scaling_fit(const std::function<double(int, int, int)>& value_at,
                                  int n_samples, const TimeGrid& grid, int level, double q);

double quantile(std::vector<double> v, double p);

}  // namespace rsc
