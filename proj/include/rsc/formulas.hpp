#pragma once

#include "rsc/diagnostics.hpp"
#include "rsc/integration.hpp"
#include "rsc/rde.hpp"

namespace rsc {

struct ConvergenceReport {
  std::string name;
  std::vector<double> meshes;
  std::vector<double> median;
  std::vector<double> p90;
  double fitted_order = 0.0;
  bool exact = false;  // all residuals at the zero floor; order not fitted
  bool pass = false;
  double order_threshold = 0.0;
};

ConvergenceReport make_report(std::string name, std::vector<double> meshes,
                              const std::vector<std::vector<double>>& defects_per_mesh,
                              double order_threshold, double finest_median_bound = -1.0);

// Max over grid nodes of |delta(F(Y)) - compensated sums - drift sums|, the
// weak rough Ito-Wentzell identity for the composed jet.
double riw_defect(const JetField& f, const StronglyControlledPath& scp, const RoughPath& rx,
                  const BracketPath& bracket);

// Max over nodes of |F'(Y) + dF(Y) Y'| along the path (cancellation check for
// backward fields composed with their own forward jets).
double dx_integrand_norm(const JetField& f, const StronglyControlledPath& scp);

// Y = Y_0 + int Ydot ds + M + RSI((dxY, dxxY), X) with martingale part N.
struct ScRSM {
  GridPath y;       // (dY x 1)
  GridPath dxY;     // (dY x dX)
  GridPath dxxY;    // (dY x dX^2)
  GridPath ydot;    // (dY x 1)
  GridPath m;       // (dY x 1)
  BracketPath qv_m;
  GridPath n;       // (dY x dX)
  double construction_defect = 0.0;
};

// Assembles y from the defining decomposition, so the defect is zero on the
// grid by construction (still re-evaluated and stored).
ScRSM build_scrsm(const Vec& y0, const GridPath& dxY, const GridPath& dxxY,
                  const GridPath& ydot, const GridPath& m, const BracketPath& qv_m,
                  const GridPath& n, const RoughPath& rx);

struct RsiwOptions {
  bool drop_m_bracket = false;     // negative control: drop 1/2 int d2F d<M>
  bool drop_covariation = false;   // negative control: drop <int Dbeta dW, M>
};

// Pathwise max defect of the rsIW identity for a controlled field.
double rsiw_defect(const JetField& f, const ScRSM& y, const RoughPath& rx,
                   const BracketPath& x_bracket, const RsiwOptions& opt = {});

// beta time-independent; G_t(x) = beta(x) W_t with derivatives under the sum.
struct MartingaleField {
  MatrixField beta;  // x in R^{dY} -> (dH x dW)
  GridPath w;        // (dW x 1) on the working grid

  Vec g(int t, const Vec& x) const;
  Mat dg(int t, const Vec& x) const;   // (dH x dY)
  Mat d2g(int t, const Vec& x) const;  // (dH x dY^2)
};

double rsiw_martingale_defect(const MartingaleField& g, const ScRSM& y, const RoughPath& rx,
                              const BracketPath& x_bracket, const RsiwOptions& opt = {});

double total_rsiw_defect(const JetField& f, const MartingaleField& g, const ScRSM& y,
                         const RoughPath& rx, const BracketPath& x_bracket,
                         const RsiwOptions& opt = {});

struct TransportChecks {
  double drift = 0.0;          // constancy spread of u(t, y_ref(t)) over the lattice
  double jet_residual = 0.0;   // max of |(u o phi)'|, |(u o phi)''|, |(u o phi)^dot|
  double terminal = 0.0;       // |u_T - g| on the lattice
};

// y_ref: per lattice point, reference trajectory values at the checkpoint
// times; checkpoints: node indices on rz's grid.
TransportChecks transport_checks(const VectorFieldPair& vf, const TestFunction& g,
                                 const RoughPath& rz, const GridPath& bracket_rate,
                                 const std::vector<Vec>& lattice_pts,
                                 const std::vector<std::vector<Vec>>& y_ref,
                                 const std::vector<int>& checkpoints);

// rAG: both sides of the backward-field identity for an arbitrary strongly
// controlled path; reduces to riw_defect of the composed jet.
double rag_defect(const VectorFieldPair& vf, const TestFunction& f,
                  const StronglyControlledPath& scp, const RoughPath& rz,
                  const GridPath& bracket_rate, const Box& box);

}  // namespace rsc
