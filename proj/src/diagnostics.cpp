#include "rsc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rsc {

RateFit convergence_rate(const std::vector<double>& mesh, const std::vector<double>& residual,
                         double zero_floor) {
  if (mesh.size() != residual.size()) throw std::invalid_argument("convergence_rate: sizes");
  std::vector<double> xs, ys;
  RateFit fit;
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    if (!(mesh[i] > 0)) throw std::invalid_argument("convergence_rate: meshes must be positive");
    if (residual[i] <= zero_floor) {
      fit.zeros_excluded = true;
      continue;
    }
    xs.push_back(std::log(mesh[i]));
    ys.push_back(std::log(residual[i]));
  }
  fit.n_used = static_cast<int>(xs.size());
  if (fit.n_used < 3) throw std::invalid_argument("convergence_rate: need >= 3 usable meshes");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) { mx += xs[i]; my += ys[i]; }
  mx /= xs.size();
  my /= ys.size();
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx <= 0) throw std::invalid_argument("convergence_rate: degenerate mesh data");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

namespace {

template <typename Eval>
ScalingFit scaling_core(int n, double dt, int n_samples, int level, double q, Eval&& value_at) {
  if (n_samples < 100) throw std::invalid_argument("kolmogorov_scaling_fit: need >= 100 samples");
  if (level < 1 || level > 3) throw std::invalid_argument("kolmogorov_scaling_fit: level in 1..3");
  if (level == 3 && q < 3.0) throw std::invalid_argument("kolmogorov_scaling_fit: q >= 3 for level 3");
  ScalingFit out;
  const double p = q / level;
  for (int gap = n / 2; gap >= 1; gap /= 2) {
    if (static_cast<int>(out.scales.size()) >= 6) break;
    double acc = 0.0;
    long count = 0;
    for (int s = 0; s < n_samples; ++s) {
      for (int i = 0; i + gap <= n; i += gap) {
        acc += std::pow(value_at(s, i, i + gap), p);
        ++count;
      }
    }
    double norm = std::pow(acc / count, 1.0 / p);
    out.scales.push_back(gap * dt);
    out.norms.push_back(norm);
  }
  RateFit fit = convergence_rate(out.scales, out.norms);
  out.slope = fit.slope;
  return out;
}

}  // namespace

ScalingFit kolmogorov_scaling_fit(const std::vector<GridPath>& samples, int level, double q) {
  if (samples.empty()) throw std::invalid_argument("kolmogorov_scaling_fit: empty");
  const int n = samples[0].grid.n_steps;
  return scaling_core(n, samples[0].grid.dt(), static_cast<int>(samples.size()), level, q,
                      [&](int s, int i, int j) { return (samples[s].values[j] - samples[s].values[i]).norm(); });
}

ScalingFit kolmogorov_scaling_fit(const std::vector<TwoParamGrid>& samples, int level, double q) {
  if (samples.empty()) throw std::invalid_argument("kolmogorov_scaling_fit: empty");
  const int n = samples[0].grid.n_steps;
  return scaling_core(n, samples[0].grid.dt(), static_cast<int>(samples.size()), level, q,
                      [&](int s, int i, int j) { return samples[s].at(i, j).norm(); });
}

ScalingFit kolmogorov_scaling_fit(const std::function<double(int, int, int)>& value_at,
                                  int n_samples, const TimeGrid& grid, int level, double q) {
  return scaling_core(grid.n_steps, grid.dt(), n_samples, level, q, value_at);
}

double quantile(std::vector<double> v, double p) {
  if (v.empty()) throw std::invalid_argument("quantile: empty");
  std::sort(v.begin(), v.end());
  double pos = p * (v.size() - 1);
  std::size_t lo = static_cast<std::size_t>(pos);
  std::size_t hi = std::min(lo + 1, v.size() - 1);
  double w = pos - lo;
  return (1.0 - w) * v[lo] + w * v[hi];
}

}  // namespace rsc
