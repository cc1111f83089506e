#pragma once

#include <functional>
#include <string>
#include <vector>

#include "oscid/adjoint.hpp"
#include "oscid/grid_function.hpp"
#include "oscid/model.hpp"
#include "oscid/types.hpp"

namespace oscid::optimize {

/// All solver and optimizer knobs, with the reference-case defaults.
struct IdentificationConfig {
    double T = 70.0;
    int n_t = 500;
    int n_nodes = 75;
    double ell_grad = 1.0;    // gradient-smoothing length scale (p1, p2)
    double ell_g3 = 0.1;      // direct-smoother length scale (p3)
    double end_slope = 0.224; // prescribed slope of g2 at the limit cycle
    int cg_restart = 20;
    double conv_tol = 1e-7;   // relative cost-change convergence threshold
    int max_iters = 500;
    int min_iters = 3;        // guards against spurious first-step termination
    double grad_norm_tol = 1e-8;  // immediate convergence at a stationary start
    double rel_tol = 1e-8;
    double abs_tol = 1e-8;
    double line_search_tol = 1e-2;   // relative step tolerance in Brent
    double first_step_fraction = 0.1;  // first bracket: max nodal change vs max|g|
    int n_quad = 32769;       // time-quadrature samples for gradient assembly
    double r_floor_rel = 1e-6;
    Vec2 xi0{0.023, 0.0};

    adjoint::SolveOptions adjoint_options() const {
        return {rel_tol, abs_tol, r_floor_rel};
    }
};

/// Amplitude misfit: trapezoidal quadrature on the measurement grid of
/// (r(t) - r_tilde(t))^2 / 2.
double cost_j1(const model::ForwardSolution& sol, const model::Measurements& meas);
double evaluate_j1(const model::DescriptorModel& m, const model::Measurements& meas,
                   const IdentificationConfig& cfg);

/// Phase misfit |e^{i theta} - e^{i theta_tilde}|^2 / 2 integrated in time,
/// i.e. the quadrature of 1 - cos(theta - theta_tilde); invariant under
/// 2*pi shifts of either record.
double cost_j2(const model::ForwardSolution& sol, const model::Measurements& meas);
double evaluate_j2(const model::DescriptorModel& m, const model::Measurements& meas,
                   const IdentificationConfig& cfg);

/// Slaving misfit: quadrature of (g3(r(t)) - a_delta_tilde(t))^2 / 2.
double cost_j3(const GridFunction& g3, const model::ForwardSolution& sol,
               const model::Measurements& meas);

struct LineSearchResult {
    double tau = 0.0;
    double value = 0.0;  // phi(tau)
    int evals = 0;
    bool no_progress = false;
};

/// Line minimization of phi over (0, tau_max]: golden-section bracketing
/// followed by Brent refinement, with sufficient decrease against phi(0)
/// enforced. Returns tau = 0 with the no_progress flag when no decrease is
/// found. Non-finite phi values are treated as +infinity.
LineSearchResult brent_line_search(const std::function<double(double)>& phi,
                                   double tau_max, double tol,
                                   double phi_at_zero);

struct IterationRecord {
    int iter = 0;
    double cost = 0.0;
    double step = 0.0;
    double grad_norm = 0.0;
    bool restart = false;
};

struct IterationHistory {
    std::vector<IterationRecord> records;
    double initial_cost = 0.0;
    bool converged = false;
    bool aborted = false;  // persistent forward failure

    void write_csv(const std::string& path) const;
};

struct IdentifyResult {
    GridFunction g;
    IterationHistory history;
};

/// Polak-Ribiere nonlinear CG on the Sobolev gradient for problem p1 or p2.
/// For p1 the partner propagator is ignored (the amplitude dynamics do not
/// involve g2, so it is set to zero); for p2 the partner is the fixed g1
/// estimate. The iterate's declared boundary data is preserved by every
/// update; momentum is zeroed every cfg.cg_restart iterations and whenever
/// the combined direction fails the descent test.
IdentifyResult cg_identify(adjoint::Problem problem, const GridFunction& g_init,
                           const GridFunction& fixed_partner,
                           const model::Measurements& meas,
                           const IdentificationConfig& cfg);

/// Assembles the model a p1/p2 iterate is evaluated on.
model::DescriptorModel iterate_model(adjoint::Problem problem, const GridFunction& g,
                                     const GridFunction& fixed_partner);

struct G3Result {
    GridFunction g3;
    GridFunction binned;
    double j3 = 0.0;
};

/// Direct (iteration-free) reconstruction of g3: bins the measured slaved
/// amplitude onto the grid along the trajectory of the given g1 estimate,
/// then applies the Helmholtz smoother at cfg.ell_g3.
G3Result identify_g3(const GridFunction& g1_hat, const model::Measurements& meas,
                     const IdentificationConfig& cfg);

}  // namespace oscid::optimize
