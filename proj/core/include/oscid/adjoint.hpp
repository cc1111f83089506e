#pragma once

#include <vector>

#include "oscid/grid_function.hpp"
#include "oscid/model.hpp"
#include "oscid/ode.hpp"
#include "oscid/types.hpp"

namespace oscid::adjoint {

/// Which misfit drives the solve: p1 matches the amplitude record r, p2 the
/// phase record theta.
enum class Problem { p1, p2 };

/// Which propagator a perturbation enters through. The tangent forcing is
/// I*xi*dg1 for g1 and J*xi*dg2 for g2; the same matrix pairs the costate
/// with the state in the gradient.
enum class Control { g1, g2 };

inline Control control_of(Problem p) {
    return p == Problem::p1 ? Control::g1 : Control::g2;
}

inline Mat2 pairing_matrix(Control c) {
    return c == Control::g1 ? Mat2::identity() : Mat2::rotation_generator();
}

/// Linearization of the descriptor right-hand side about a state:
///   A(xi) = g1(r) I + I xi (grad g1)^T + g2(r) J + J xi (grad g2)^T.
/// At the origin this reduces to g1(0) I + g2(0) J.
Mat2 jacobian(const model::DescriptorModel& m, const Vec2& xi);

struct SolveOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-10;
    /// Floor on r(t)/r_circle below which the p2 source (with its 1/r^2
    /// factor) is considered degenerate.
    double r_floor_rel = 1e-6;
};

/// Costate trajectory xi*(t) on [0, T], solved backward from xi*(T) = 0 and
/// re-indexed to increasing physical time.
using AdjointTrajectory = ode::Trajectory;

/// Misfit source entering the adjoint equation at time t:
///   p1: (r - r_tilde)/r * xi,   p2: sin(theta - theta_tilde)/r^2 * J xi,
/// with the measurement records interpolated linearly in t.
Vec2 misfit_source(const model::ForwardSolution& sol,
                   const model::Measurements& meas, Problem problem, double t,
                   double r_floor);

/// Solves the perturbation system d/dt xi' = A(xi(t)) xi' + B xi g'(r(t)),
/// xi'(0) = 0, along the given forward solution.
ode::Trajectory solve_tangent(const model::DescriptorModel& m,
                              const model::ForwardSolution& sol, Control which,
                              const GridFunction& g_prime,
                              const SolveOptions& opts = {});

/// Solves the costate system -d/dt xi* = A(xi(t))^T xi* + s(t) backward from
/// xi*(T) = 0, with the misfit source for the given problem.
AdjointTrajectory solve_adjoint(const model::DescriptorModel& m,
                              const model::ForwardSolution& sol,
                              const model::Measurements& meas, Problem problem,
                              const SolveOptions& opts = {});

/// Nodal sensitivities S_k = integral over [0,T] of (xi*)^T B xi phi_k(r(t)),
/// phi_k the nodal hat functions of the grid template; the time quadrature is
/// the trapezoid rule on n_quad equispaced samples of the dense outputs.
std::vector<double> nodal_sensitivities(const model::ForwardSolution& sol,
                                        const AdjointTrajectory& costate,
                                        Problem problem,
                                        const GridFunction& grid_template,
                                        int n_quad = 32769);

/// Pointwise L2 gradient on the nodal grid: the hat-scattered sensitivities
/// divided by the lumped nodal quadrature weights. This is a stabilized
/// quadrature of the Riesz representer whose literal denominator g1(r) r^2
/// vanishes at the origin and on the limit cycle.
GridFunction assemble_l2_gradient(const model::ForwardSolution& sol,
                                  const AdjointTrajectory& costate, Problem problem,
                                  const GridFunction& grid_template,
                                  int n_quad = 32769);

/// Direct evaluation of the Riesz representer along the trajectory,
///   (xi*)^T B xi / (g1(r) r)
/// (the time pairing under the change of variables dr = g1(r) r dt),
/// averaged per node over quadrature samples and restricted to samples where
/// the denominator exceeds `denominator_floor_rel` times its maximum; nodes
/// with no admissible sample are zero. Cross-validation companion to the
/// scattered assembly.
GridFunction pointwise_l2_gradient(const model::DescriptorModel& m,
                                   const model::ForwardSolution& sol,
                                   const AdjointTrajectory& costate, Problem problem,
                                   const GridFunction& grid_template,
                                   int n_quad = 32769,
                                   double denominator_floor_rel = 1e-8);

}  // namespace oscid::adjoint
