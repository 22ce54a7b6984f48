#pragma once

#include <string>

#include "rsc/formulas.hpp"

namespace rsc {

// Columnar CSV (flattened row-major tensor entries) plus a JSON header with
// grid metadata and shapes. `base` is a path prefix; writes base.csv and
// base.json (and base.left.*, base.right.* for Chen-rule grids).
void save_grid_path(const std::string& base, const GridPath& p);
GridPath load_grid_path(const std::string& base);

void save_two_param(const std::string& base, const TwoParamGrid& a);
TwoParamGrid load_two_param(const std::string& base);

void save_lift_manifest(const std::string& file, std::uint64_t seed, int refine, double alpha);

// Residual table CSV with header mesh,median,p90,order_so_far.
void save_report_csv(const std::string& file, const ConvergenceReport& rep);
// Full report with config echo and the build id baked in at compile time.
void save_report_json(const std::string& file, const ConvergenceReport& rep,
                      const std::string& config_echo);

std::string format_double(double v);
std::string build_id();

}  // namespace rsc
