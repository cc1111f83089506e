#pragma once

#include <span>
#include <string>
#include <vector>

#include "oscid/adjoint.hpp"
#include "oscid/grid_function.hpp"
#include "oscid/model.hpp"
#include "oscid/optimize.hpp"

namespace oscid::validate {

/// Ratio of the one-sided finite-difference directional derivative of the
/// cost to the adjoint-based pairing
///   kappa = [J(g + eps g') - J(g)] / eps / integral(gradL2 J * g' dr);
/// equals one, up to discretization, for a correct gradient. Both cost
/// evaluations use identical integrator settings.
double kappa(adjoint::Problem problem, const model::DescriptorModel& m,
             const GridFunction& g_prime, double epsilon,
             const model::Measurements& meas,
             const optimize::IdentificationConfig& cfg);

struct KappaRow {
    double epsilon = 0.0;
    int n_t = 0;
    double kappa = 0.0;
};

/// Batch kappa over an epsilon grid and a set of time resolutions. For each
/// n_t the measurement records are resampled by linear interpolation and the
/// adjoint denominator is computed once. Rows are ordered by (n_t, epsilon).
std::vector<KappaRow> kappa_sweep(adjoint::Problem problem,
                                  const model::DescriptorModel& m,
                                  const GridFunction& g_prime,
                                  std::span<const double> epsilons,
                                  std::span<const int> n_t_list,
                                  const model::Measurements& meas,
                                  const optimize::IdentificationConfig& cfg);

void write_sweep_csv(const std::string& path, std::span<const KappaRow> rows);

/// Central-difference oracle for the nodal sensitivity of node k:
///   [J(g + eps hat_k) - J(g - eps hat_k)] / (2 eps).
double fd_node_gradient(adjoint::Problem problem, const model::DescriptorModel& m,
                        int node_index, double epsilon,
                        const model::Measurements& meas,
                        const optimize::IdentificationConfig& cfg);

/// One-sided variant, [J(g + eps hat_k) - J(g)] / eps.
double fd_node_gradient_one_sided(adjoint::Problem problem,
                                  const model::DescriptorModel& m, int node_index,
                                  double epsilon, const model::Measurements& meas,
                                  const optimize::IdentificationConfig& cfg);

/// Relative gap between the two sides of the tangent-adjoint identity,
///   integral(s^T xi' dt)  vs  integral((xi*)^T B xi g'(r) dt),
/// each computed by its own quadrature state carried along the respective
/// solve. Zero for exact solutions.
double duality_gap(const model::DescriptorModel& m, const model::ForwardSolution& sol,
                   adjoint::Control which, const GridFunction& g_prime,
                   const model::Measurements& meas, adjoint::Problem problem,
                   const adjoint::SolveOptions& opts = {});

}  // namespace oscid::validate
