#pragma once

#include "rsc/formulas.hpp"

namespace rsc {

// Ito-process coefficients for the comparison process dY = b dt + beta dW.
// Trivial mode steps Y with the full third-order scheme of (mu, sigma), which
// makes the partition decomposition degenerate exactly.
struct ItoCoefficients {
  enum class Kind { Constant, OfState, Trivial };
  Kind kind = Kind::Constant;
  Vec b_const;   // (dX)
  Mat beta_const;  // (dX x dW)
  std::function<Vec(const Vec&)> b_fn;
  std::function<Mat(const Vec&)> beta_fn;

  Vec b(const Vec& y) const;
  Mat beta(const Vec& y) const;
};

// Y on rz's grid driven by the same increments as rz.base (Euler-Maruyama,
// or the Davie step in trivial mode).
GridPath step_ito_process(const ItoCoefficients& co, const VectorFieldPair& vf,
                          const RoughPath& rz, const Vec& y0);

struct IagPieces {
  double lhs = 0.0;     // F_T(Y_T) - F_0(Y_0)
  double s_pi = 0.0;    // sum of stochastic mismatch terms
  double l_pi = 0.0;    // sum of Lebesgue terms
  double defect = 0.0;  // |lhs - l_pi - s_pi|
};

// The proof's partition decomposition, evaluated per path. partition holds
// node indices on rz's grid including 0 and n. Scalar test functions only.
IagPieces iag_partition_sum(const VectorFieldPair& vf, const TestFunction& f,
                            const ItoCoefficients& co, const std::vector<int>& partition,
                            const RoughPath& rz, const GridPath& y,
                            const GridPath& bracket_rate);

// Per-path difference of the weak identity,
// lhs - int DF (b - mu(Y)) dr - 1/2 int D2F ((beta,beta)-(sigma,sigma)) dr;
// the Skorokhod term is centered, so the replica mean should vanish.
double iag_weak_difference(const VectorFieldPair& vf, const TestFunction& f,
                           const ItoCoefficients& co, const RoughPath& rz, const GridPath& y,
                           const GridPath& bracket_rate);

// Rough forward-backward interpolation: |LHS - RHS| of the flow-difference
// identity between RDE(mu_hat, sigma_hat) and RDE(mu, sigma) on [s, t].
double interpolation_defect(const VectorFieldPair& vf, const VectorFieldPair& vf_hat,
                            const RoughPath& rz, const GridPath& bracket_rate, const Vec& x,
                            int s, int t, const Box& box);

RoughPath restrict_rough_path(const RoughPath& r, int s, int t);

// |classical int phi Zdot^n du - rough integral| for piecewise-linear
// interpolations of the driver over dyadic skeletons.
std::vector<double> good_approximation_check(const GridPath& phi, const GridPath& phip,
                                             const RoughPath& strato,
                                             const std::vector<int>& skeleton_factors);

struct DminusReport {
  double residual_fd = 0.0;   // bump-response route, decays with the mesh
  double residual_sde = 0.0;  // linear-SDE route, exact at scheme level
};

// Scalar scenario: A, B stepped jointly with (X); C both by its linear SDE
// and as the central-difference response of A to a noise bump at u.
DminusReport verify_dminus_identity(const VectorFieldPair& vf, double x0, int u,
                                    const GridPath& w_fine, int coarsen_factor, double eps);

}  // namespace rsc
