#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "rsc/time_grid.hpp"

namespace rsc {

// Index convention, fixed globally: area(a, b) ~ int delta X^a dX^b, i.e. the
// first (row) index carries the delta-X factor. The transpose reverses factors.
struct RoughPath {
  double alpha = 0.4;
  GridPath base;      // vector path (d x 1)
  TwoParamGrid area;  // chen(base, base), blocks (d x d)

  int dim() const { return static_cast<int>(base.rows()); }
};

// Cumulative bracket path, symmetric per node, starting at zero, together with
// its per-interval difference quotients.
struct BracketPath {
  GridPath path;  // (d x d) per node
  GridPath rate;  // (d x d) per node, rate[k] ~ d[X]/dt on [t_k, t_{k+1}]
};

struct MartingaleSample {
  GridPath path;      // (d x 1) per node, on the working grid
  BracketPath bracket;
  GridPath fine;      // same path at integration resolution (refine * n_steps)
  int refine = 1;

  int dim() const { return static_cast<int>(path.rows()); }
};

GridPath sample_brownian(const TimeGrid& grid, int dim, std::uint64_t seed);

// Conditional midpoint refinement: the returned path restricted to the coarse
// nodes equals w exactly; factor must be a power of two here.
GridPath bridge_refine_dyadic(const GridPath& w, int factor, std::mt19937_64& eng);

// Sequential Brownian-bridge interpolation for an arbitrary factor >= 1.
GridPath bridge_refine(const GridPath& w, int factor, std::mt19937_64& eng);

// Subsample every `factor`-th node. n_steps must be divisible by factor.
GridPath coarsen(const GridPath& p, int factor);

// Left-point second level computed on the fine path, coarsened to
// n_fine/coarsen working intervals. coarsen == 1 gives zero blocks.
RoughPath ito_lift_from_fine(const GridPath& fine, int coarsen, double alpha = 0.4);

// Trapezoidal second level; bracket vanishes identically by construction.
RoughPath stratonovich_lift_from_fine(const GridPath& fine, int coarsen, double alpha = 0.4);

// Spec surface: refine internally (Brownian bridge) with an engine derived
// from `seed`, then coarsen back to w's grid.
RoughPath ito_lift(const GridPath& w, int refine, std::uint64_t seed, double alpha = 0.4);
RoughPath stratonovich_lift(const GridPath& w, int refine, std::uint64_t seed, double alpha = 0.4);

// Scalar drivers only: the Ito area is determined by the increments,
// (dW^2 - dt)/2, so no refinement noise enters. Throws for dim > 1.
RoughPath ito_lift_exact_scalar(const GridPath& w, double alpha = 0.4);
RoughPath stratonovich_lift_exact_scalar(const GridPath& w, double alpha = 0.4);

// Canonical (trapezoidal) lift of a smooth path sampled at fine resolution.
RoughPath canonical_lift_smooth(const GridPath& fine, int coarsen, double alpha = 0.4);

// [X] = (dX)(x)(dX) - 2 Sym(X), accumulated over consecutive intervals.
BracketPath bracket(const RoughPath& r);

BracketPath bracket_rate_from_path(const GridPath& cumulative);

// Analytic brackets for declared lifts.
BracketPath ito_bracket(const TimeGrid& g, int dim);    // t * Id
BracketPath zero_bracket(const TimeGrid& g, int dim);   // geometric

// I_k = sum_{m<k} phi_m dM_m, I_0 = 0. phi values (r x dM), output (r x 1).
GridPath ito_integral(const GridPath& phi, const GridPath& m);

// Iterated integrals per consecutive working interval from fine paths.
// pi_xm: int delta X (x) dM by left sums on the fine mesh (zero if refine==1
// is all the resolution there is); pi_mx defined through the IBP identity
// Pi(M;X) = dM (x) dX - Pi(X;M)^T, which then holds exactly on every pair.
struct IbpIntegrals {
  TwoParamGrid pi_xm;  // chen(X, M)
  TwoParamGrid pi_mx;  // chen(M, X)
};
IbpIntegrals ibp_integral(const GridPath& m_fine, const GridPath& x_fine, int coarsen);

// Running path of int M dX := delta(MX) - int X dM (IBP definition), for an
// operator-valued M (values r x dX) against the vector path X; left sums for
// the int X dM part on the working grid.
GridPath ibp_m_dx(const GridPath& m, const GridPath& x);

// (X; M) block lift of Lemma joint-lift; cross blocks are IBP integrals, the
// M-block is the left-sum iterated integral on the fine mesh.
RoughPath joint_lift(const RoughPath& rx, const MartingaleSample& m,
                     const GridPath& x_fine);

RoughPath multi_joint_lift(const RoughPath& rx, const std::vector<MartingaleSample>& ms,
                           const GridPath& x_fine);

// Max Chen defect |delta A_{s,u,t} - dL (x) dR| over subsampled triples.
double chen_defect(const RoughPath& r, int subsample);

MartingaleSample brownian_martingale(const GridPath& w_fine, int coarsen);

// M = int phi(W_all) dW_drv where phi is evaluated on the full fine sample and
// the integrator is a column selection/combination of it. Bracket analytic.
MartingaleSample ito_martingale(const GridPath& w_fine, int coarsen,
                                const std::function<Mat(const Vec&)>& phi,
                                const Mat& integrator_weights);

}  // namespace rsc
