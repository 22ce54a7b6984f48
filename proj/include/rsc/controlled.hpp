#pragma once

#include <functional>
#include <memory>

#include "rsc/rough_path.hpp"

namespace rsc {

// (Y, Y') along a reference rough path. y values (r x c) with c == 1 for
// vector paths and c == dV for operator-valued integrands; yp values
// (r, dV*c), column (a + b*dV) pairing slot a with delta X.
struct ControlledPath {
  GridPath y;
  GridPath yp;
  double alpha = 0.4;
  double r2 = 0.0;  // remainder seminorm reported at construction
};

struct StronglyControlledPath {
  GridPath y;     // (d x 1)
  GridPath yp;    // (d x dV)
  GridPath ypp;   // (d x dV^2)
  GridPath ydot;  // (d x 1)
  double alpha = 0.4;
  double r3 = 0.0;
};

ControlledPath make_controlled(GridPath y, GridPath yp, const RoughPath& rx, int min_gap = 1);
StronglyControlledPath make_strongly_controlled(GridPath y, GridPath yp, GridPath ypp,
                                                GridPath ydot, const RoughPath& rx,
                                                int min_gap = 1);

double remainder_2(const ControlledPath& cp, const RoughPath& rx, int min_gap = 1);
double remainder_3(const StronglyControlledPath& scp, const RoughPath& rx, int min_gap = 1);

// Seven-component space-time jet evaluated at (time index, x). Dimensions:
// dx = spatial input, du = output, dv = driver.
struct JetValue {
  Vec F;     // (du)
  Mat Fp;    // F'      (du x dv)
  Mat dF;    // dF      (du x dx)
  Mat Fpp;   // F''     (du x dv^2)
  Mat dFp;   // dF'     (du x dx*dv), first slot spatial
  Mat d2F;   // d^2F    (du x dx^2), symmetric
  Vec Fdot;  // (du)
};

JetValue zero_jet(int dx, int du, int dv);

struct Box {
  Vec lo, hi;
  int dim() const { return static_cast<int>(lo.size()); }
};

std::vector<Vec> lattice(const Box& box, int points_per_axis);

struct JetField {
  int dim_x = 1, dim_out = 1, dim_driver = 1;
  Box box;
  int lattice_res = 21;
  bool adapted = false;  // evaluator realized along the replica's own sample
  std::function<JetValue(int, const Vec&)> eval;

  JetValue operator()(int t, const Vec& x) const { return eval(t, x); }
};

// Neutral element of the composition product.
JetField identity_field(int dim, int dim_driver, const Box& box);

// Time-independent smooth function as a jet: (f, 0, Df, 0, 0, D^2f, 0).
JetField static_field(int dim_x, int dim_out, int dim_driver, const Box& box,
                      std::function<Vec(const Vec&)> f,
                      std::function<Mat(const Vec&)> df,
                      std::function<Mat(const Vec&)> d2f);

JetValue compose_jets(const JetValue& outer, const JetValue& inner, const Mat& bracket_rate);

// Lazy composition; bracket_rate is the [X]-dot path of the common driver
// (zero path allowed for geometric drivers).
JetField compose_fields(const JetField& f2, const JetField& f1, const GridPath& bracket_rate);

// Z_t = F_t(Y_t) with the chain-rule jet (Z, Z', Z'', Zdot).
StronglyControlledPath compose_field_path(const JetField& f, const StronglyControlledPath& scp,
                                          const GridPath& bracket_rate);

// Constant-in-x embedding of a strongly controlled path; composing any field
// with it reproduces compose_field_path along the diagonal.
JetField path_as_field(const StronglyControlledPath& scp, const Box& box);

// Right-point (backward) jets in left-point form, weakly geometric driver:
// (Y, -Y', (Y'')^T, -Ydot).
StronglyControlledPath reverse_orientation(const StronglyControlledPath& scp);

struct JetSeminorms {
  double x_part = 0.0;
  double t_part = 0.0;
  double cascade1 = 0.0;  // first-order rows of the mixed cascade
  double cascade2 = 0.0;  // second-order rows
  double cascade3 = 0.0;  // full third-order expansion
};

JetSeminorms field_criterion(const JetField& f, const RoughPath& rx, const Box& box,
                             int resolution, int time_stride = 1, int min_gap = 1);

struct FdJetReport {
  double dev_dF = 0.0;    // dF vs central differences of F
  double dev_d2F = 0.0;   // d2F vs second differences of F
  double dev_dFp = 0.0;   // dF' vs central differences of F'
  double sym_defect = 0.0;
  double commute_defect = 0.0;  // 2a-remainder of dF with (dF')^T as derivative
};

FdJetReport fd_jet_check(const JetField& f, const Box& box, double h,
                         const RoughPath* rx = nullptr, int n_points = 7);

}  // namespace rsc
