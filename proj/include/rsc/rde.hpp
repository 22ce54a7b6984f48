#pragma once

#include <stdexcept>

#include "rsc/vector_fields.hpp"

namespace rsc {

struct DivergenceError : std::runtime_error {
  int node;
  explicit DivergenceError(int node_)
      : std::runtime_error("state diverged at node " + std::to_string(node_)), node(node_) {}
};

// One third-order step per grid interval:
//   x <- x + mu(x) dt + sigma(x) dZ + Gamma sigma(x)(Z-area),
// Gamma sigma(v (x) w) = D sigma(sigma v) w. Jacobian and Hessian propagate
// the exact derivative of the step map, so flows compose exactly at nodes.
struct FlowResult {
  int s = 0, e = 0;
  std::vector<Vec> x;     // indexed 0..e-s
  std::vector<Mat> jac;   // (dX x dX), empty unless requested
  std::vector<Mat> hess;  // (dX x dX^2), empty unless requested

  const Vec& state(int t) const { return x[t - s]; }
  const Mat& jacobian(int t) const { return jac[t - s]; }
  const Mat& hessian(int t) const { return hess[t - s]; }
};

FlowResult solve_flow(const VectorFieldPair& vf, const RoughPath& rz, int s, const Vec& x0,
                      int e, bool with_jac, bool with_hess);

GridPath rde_solve(const VectorFieldPair& vf, const RoughPath& rz, int s, const Vec& x0);
GridPath rde_jacobian(const VectorFieldPair& vf, const RoughPath& rz, int s, const Vec& x0);
GridPath rde_hessian(const VectorFieldPair& vf, const RoughPath& rz, int s, const Vec& x0);

// Jet of the RDE solution path started at (s, x0):
// (X, sigma(X), Gamma sigma(X), mu(X)).
StronglyControlledPath rde_solution_jet(const VectorFieldPair& vf, const RoughPath& rz,
                                        const Vec& x0);

// (phi, sigma o phi, D phi, Gamma sigma o phi, D(sigma o phi), D^2 phi, mu o phi)
// over (t in [s, T], x = initial point).
JetField forward_flow_jet(const VectorFieldPair& vf, const RoughPath& rz, int s, const Box& box);

// F_t(x) = g(phi(t, T; x)) with jet
// (u, -Gamma u, Du, (Gamma^2 u)^T, -D(Gamma u), D^2 u, time slot), where for a
// non-geometric driver the time slot is
//   -Du mu + (Gamma^2 u - 1/2 D^2 u(sigma, sigma)) [Z]-dot,
// the correction entering through the right-to-left-point conversion of the
// backward expansion.
JetField backward_flow_jet(const VectorFieldPair& vf, const RoughPath& rz, const TestFunction& g,
                           const GridPath& bracket_rate, const Box& box);

// Gamma sigma(x) as a bilinear map (dX, dZ^2).
Mat gamma_sigma(const VectorFieldPair& vf, const Vec& x);

}  // namespace rsc
