#include "oscid/validate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "oscid/csv.hpp"

namespace oscid::validate {

namespace {

double cost_of(adjoint::Problem problem, const model::DescriptorModel& m,
               const model::Measurements& meas,
               const optimize::IdentificationConfig& cfg) {
    return problem == adjoint::Problem::p1 ? optimize::evaluate_j1(m, meas, cfg)
                                           : optimize::evaluate_j2(m, meas, cfg);
}

model::DescriptorModel perturbed(adjoint::Problem problem,
                                 const model::DescriptorModel& m,
                                 const GridFunction& g_prime, double epsilon) {
    model::DescriptorModel out = m;
    GridFunction& target = problem == adjoint::Problem::p1 ? out.g1 : out.g2;
    for (int k = 0; k < target.n_nodes(); ++k) {
        target[k] += epsilon * g_prime[k];
    }
    // Gradient checks perturb freely; declared boundary data no longer holds.
    target.set_tags({});
    return out;
}

double adjoint_pairing(adjoint::Problem problem, const model::DescriptorModel& m,
                       const GridFunction& g_prime, const model::Measurements& meas,
                       const optimize::IdentificationConfig& cfg) {
    const auto sim = model::simulate(m, cfg.xi0, meas.T(), 2, cfg.rel_tol, cfg.abs_tol);
    const auto costate = adjoint::solve_adjoint(m, sim.solution, meas, problem,
                                                cfg.adjoint_options());
    const GridFunction grad = adjoint::assemble_l2_gradient(
        sim.solution, costate, problem, problem == adjoint::Problem::p1 ? m.g1 : m.g2,
        cfg.n_quad);
    return l2_inner(grad, g_prime);
}

}  // namespace

double kappa(adjoint::Problem problem, const model::DescriptorModel& m,
             const GridFunction& g_prime, double epsilon,
             const model::Measurements& meas,
             const optimize::IdentificationConfig& cfg) {
    if (epsilon == 0.0) throw std::invalid_argument("kappa: need epsilon != 0");
    const double denom = adjoint_pairing(problem, m, g_prime, meas, cfg);
    if (std::abs(denom) < 1e-30) {
        throw std::runtime_error("kappa: degenerate perturbation direction");
    }
    const double j0 = cost_of(problem, m, meas, cfg);
    const double j1 = cost_of(problem, perturbed(problem, m, g_prime, epsilon), meas, cfg);
    return (j1 - j0) / epsilon / denom;
}

std::vector<KappaRow> kappa_sweep(adjoint::Problem problem,
                                  const model::DescriptorModel& m,
                                  const GridFunction& g_prime,
                                  std::span<const double> epsilons,
                                  std::span<const int> n_t_list,
                                  const model::Measurements& meas,
                                  const optimize::IdentificationConfig& cfg) {
    std::vector<KappaRow> rows;
    rows.reserve(epsilons.size() * n_t_list.size());
    for (int n_t : n_t_list) {
        const model::Measurements res = meas.resample(n_t);
        const double denom = adjoint_pairing(problem, m, g_prime, res, cfg);
        if (std::abs(denom) < 1e-30) {
            throw std::runtime_error("kappa_sweep: degenerate perturbation direction");
        }
        const double j0 = cost_of(problem, m, res, cfg);
        for (double eps : epsilons) {
            const double j1 =
                cost_of(problem, perturbed(problem, m, g_prime, eps), res, cfg);
            rows.push_back({eps, n_t, (j1 - j0) / eps / denom});
        }
    }
    return rows;
}

void write_sweep_csv(const std::string& path, std::span<const KappaRow> rows) {
    csv::Writer w(path,
                  "gradient validation sweep; columns: epsilon,n_t,kappa,"
                  "log10_abs_kappa_minus_1");
    w.header({"epsilon", "n_t", "kappa", "log10_abs_kappa_minus_1"});
    for (const auto& row : rows) {
        const double dev = std::abs(row.kappa - 1.0);
        w.row({row.epsilon, static_cast<double>(row.n_t), row.kappa,
               dev > 0.0 ? std::log10(dev) : -std::numeric_limits<double>::infinity()});
    }
}

namespace {

model::DescriptorModel node_perturbed(adjoint::Problem problem,
                                      const model::DescriptorModel& m, int node,
                                      double epsilon) {
    model::DescriptorModel out = m;
    GridFunction& target = problem == adjoint::Problem::p1 ? out.g1 : out.g2;
    if (node < 0 || node >= target.n_nodes()) {
        throw std::out_of_range("fd_node_gradient: node index out of range");
    }
    target[node] += epsilon;
    target.set_tags({});
    return out;
}

}  // namespace

double fd_node_gradient(adjoint::Problem problem, const model::DescriptorModel& m,
                        int node_index, double epsilon,
                        const model::Measurements& meas,
                        const optimize::IdentificationConfig& cfg) {
    const double jp =
        cost_of(problem, node_perturbed(problem, m, node_index, epsilon), meas, cfg);
    const double jm =
        cost_of(problem, node_perturbed(problem, m, node_index, -epsilon), meas, cfg);
    return (jp - jm) / (2.0 * epsilon);
}

double fd_node_gradient_one_sided(adjoint::Problem problem,
                                  const model::DescriptorModel& m, int node_index,
                                  double epsilon, const model::Measurements& meas,
                                  const optimize::IdentificationConfig& cfg) {
    const double jp =
        cost_of(problem, node_perturbed(problem, m, node_index, epsilon), meas, cfg);
    const double j0 = cost_of(problem, m, meas, cfg);
    return (jp - j0) / epsilon;
}

double duality_gap(const model::DescriptorModel& m, const model::ForwardSolution& sol,
                   adjoint::Control which, const GridFunction& g_prime,
                   const model::Measurements& meas, adjoint::Problem problem,
                   const adjoint::SolveOptions& opts) {
    const Mat2 b = adjoint::pairing_matrix(which);
    const double T = sol.t_end();
    const double r_floor = opts.r_floor_rel * m.r_circle;

    // Tangent side: (xi'_1, xi'_2, q) with dq/dt = s(t)^T xi'.
    auto tangent_rhs = [&](double t, const ode::State<3>& s) {
        const Vec2 xi = sol.xi(t);
        const Vec2 xp{s[0], s[1]};
        const Vec2 v = adjoint::jacobian(m, xi) * xp + (b * xi) * g_prime.eval(xi.norm());
        const Vec2 src = adjoint::misfit_source(sol, meas, problem, t, r_floor);
        return ode::State<3>{v.x, v.y, src.dot(xp)};
    };
    const auto tan =
        ode::integrate_forward<3>(tangent_rhs, {0.0, 0.0, 0.0}, 0.0, T, opts.rel_tol,
                                  opts.abs_tol);
    const double lhs = tan.states().back()[2];

    // Adjoint side: (xi*_1, xi*_2, p) backward with dp/dt = -(xi*)^T B xi g'.
    auto adjoint_rhs = [&](double t, const ode::State<3>& s) {
        const Vec2 xi = sol.xi(t);
        const Vec2 cs{s[0], s[1]};
        const Vec2 v = adjoint::jacobian(m, xi).transpose() * cs +
                       adjoint::misfit_source(sol, meas, problem, t, r_floor);
        const double pairing = cs.dot(b * xi) * g_prime.eval(xi.norm());
        return ode::State<3>{-v.x, -v.y, -pairing};
    };
    const auto adj = ode::integrate_backward<3>(adjoint_rhs, {0.0, 0.0, 0.0}, T, 0.0,
                                                opts.rel_tol, opts.abs_tol);
    const double rhs_val = adj.states().front()[2];

    return std::abs(lhs - rhs_val) /
           std::max({std::abs(lhs), std::abs(rhs_val), 1e-30});
}

}  // namespace oscid::validate
