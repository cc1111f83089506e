#pragma once

#include "oscid/adjoint.hpp"
#include "oscid/grid_function.hpp"
#include "oscid/model.hpp"
#include "oscid/ode.hpp"

namespace oscid::sobolev {

enum class RightCondition { dirichlet, neumann_zero };

/// Solves (1 - ell^2 d^2/dr^2) u = rhs on (0, r_max) with a homogeneous
/// Neumann condition at r = 0 and either u = dirichlet_value or u' = 0 at
/// r = r_max. Second-order centered differences with ghost-node Neumann
/// closure, solved by direct tridiagonal elimination.
GridFunction solve_helmholtz(const GridFunction& rhs, double ell,
                             RightCondition right, double dirichlet_value = 0.0);

/// Extracts the Sobolev gradient from the L2 gradient. For p1 the right
/// boundary condition is homogeneous Dirichlet (descent preserves
/// g1(r_circle) = 0); for p2 it is homogeneous Neumann (descent preserves
/// the prescribed end slope of g2). The result carries the matching tags.
GridFunction sobolev_gradient(const GridFunction& l2_grad, double ell,
                              adjoint::Problem problem);

/// Direct smoother for the slaved-amplitude relation: solves the Helmholtz
/// problem with the binned data as right-hand side, Neumann at 0 and the
/// data's own end value as Dirichlet condition at r_max.
GridFunction smooth_g3(const GridFunction& a3_on_grid, double ell);

/// Deposits the measured a_delta record onto the nodal hat functions at the
/// trajectory magnitude r(t), producing the r-grid representation of the
/// slaved amplitude before smoothing. Nodes with no accumulated weight are
/// filled from the nearest nonempty node.
GridFunction bin_a3_measurements(const model::ForwardSolution& sol,
                                 const model::Measurements& meas,
                                 const GridFunction& grid_template);

}  // namespace oscid::sobolev
