#pragma once

#include "rsc/rough_path.hpp"

namespace rsc {

// Integrand convention: an L(V;U)-valued path is stored with (dU x dV) values;
// its Gubinelli derivative with (dU, dV*c) values, column (a + b*dV) pairing
// slot a with delta X and slot b with the operator argument. Vector-valued
// paths are the c == 1 case.

// sum over consecutive intervals in [i, j） of Y_u dX + Y'_u X_u; exact
// additivity over concatenation up to float reassociation.
Vec rough_integral(const GridPath& y, const GridPath& yp, const RoughPath& rx, int i, int j);

// Running path of the same compensated sums, node k = integral over [0, k].
GridPath rough_integral_path(const GridPath& y, const GridPath& yp, const RoughPath& rx);

// Left-point Riemann-Stieltjes sums against a finite-variation driver.
GridPath rs_integral(const GridPath& phi, const GridPath& driver);

// increments of a matrix-valued cumulative path flattened to (d*d x 1), for
// feeding bracket paths to rs_integral.
GridPath flatten_path(const GridPath& p);

// int (Y, dY) dX := int (Y - M, dY) dX + int M dX, the latter an IBP integral.
// y, m: (dU x dV); dy: (dU, dV*dV). Returns the running path.
GridPath rough_stochastic_integral(const GridPath& y, const GridPath& dy,
                                   const GridPath& m, const RoughPath& rx);

// Freeze values after node stop_idx.
GridPath stop_path(const GridPath& p, int stop_idx);
RoughPath stop_rough_path(const RoughPath& r, int stop_idx);

// Max over t <= n of |RSI-then-freeze - RSI of frozen inputs|.
double stopped_consistency_check(const GridPath& y, const GridPath& dy, const GridPath& m,
                                 const RoughPath& rx, int stop_idx);

}  // namespace rsc
