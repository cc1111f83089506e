#include "oscid/adjoint.hpp"

#include <cmath>
#include <stdexcept>

namespace oscid::adjoint {

Mat2 jacobian(const model::DescriptorModel& m, const Vec2& xi) {
    const double r = xi.norm();
    Mat2 a = Mat2::identity() * m.g1.eval(r) +
             Mat2::rotation_generator() * m.g2.eval(r);
    if (r > 0.0) {
        const Vec2 grad1 = m.g1.state_gradient(xi);
        const Vec2 grad2 = m.g2.state_gradient(xi);
        a = a + outer(xi, grad1) + outer(Mat2::rotation_generator() * xi, grad2);
    }
    return a;
}

Vec2 misfit_source(const model::ForwardSolution& sol,
                   const model::Measurements& meas, Problem problem, double t,
                   double r_floor) {
    const Vec2 xi = sol.xi(t);
    const double r = xi.norm();
    if (problem == Problem::p1) {
        if (r < r_floor) {
            throw std::runtime_error("adjoint: state magnitude below floor, source degenerate");
        }
        return xi * ((r - meas.r_at(t)) / r);
    }
    if (r < r_floor) {
        throw std::runtime_error("adjoint: state magnitude below floor, phase undefined");
    }
    const double mis = std::sin(sol.theta(t) - meas.theta_at(t));
    return (Mat2::rotation_generator() * xi) * (mis / (r * r));
}

ode::Trajectory solve_tangent(const model::DescriptorModel& m,
                              const model::ForwardSolution& sol, Control which,
                              const GridFunction& g_prime,
                              const SolveOptions& opts) {
    const Mat2 b = pairing_matrix(which);
    auto rhs = [&](double t, const ode::State<2>& s) {
        const Vec2 xi = sol.xi(t);
        const Vec2 v = jacobian(m, xi) * Vec2{s[0], s[1]} +
                       (b * xi) * g_prime.eval(xi.norm());
        return ode::State<2>{v.x, v.y};
    };
    return ode::integrate_forward<2>(rhs, {0.0, 0.0}, 0.0, sol.t_end(),
                                     opts.rel_tol, opts.abs_tol);
}

ode::Trajectory solve_adjoint(const model::DescriptorModel& m,
                              const model::ForwardSolution& sol,
                              const model::Measurements& meas, Problem problem,
                              const SolveOptions& opts) {
    const double r_floor = opts.r_floor_rel * m.r_circle;
    auto rhs = [&](double t, const ode::State<2>& s) {
        const Vec2 xi = sol.xi(t);
        const Vec2 v = jacobian(m, xi).transpose() * Vec2{s[0], s[1]} +
                       misfit_source(sol, meas, problem, t, r_floor);
        return ode::State<2>{-v.x, -v.y};
    };
    return ode::integrate_backward<2>(rhs, {0.0, 0.0}, sol.t_end(), 0.0,
                                      opts.rel_tol, opts.abs_tol);
}

namespace {

// Shared quadrature sweep: visits n_quad equispaced times and hands each
// sample's (weight, r, costate-state pairing value) to the sink.
template <typename Sink>
void pairing_sweep(const model::ForwardSolution& sol, const ode::Trajectory& costate,
                   Problem problem, int n_quad, Sink&& sink) {
    if (n_quad < 2) throw std::invalid_argument("gradient assembly: need n_quad >= 2");
    const Mat2 b = pairing_matrix(control_of(problem));
    const double T = sol.t_end();
    const double dt = T / (n_quad - 1);
    for (int j = 0; j < n_quad; ++j) {
        const double t = T * (static_cast<double>(j) / (n_quad - 1));
        const double w = (j == 0 || j == n_quad - 1) ? 0.5 * dt : dt;
        const Vec2 xi = sol.xi(t);
        const auto cs = costate.at(t);
        const double pairing = Vec2{cs[0], cs[1]}.dot(b * xi);
        sink(w, xi.norm(), pairing);
    }
}

}  // namespace

std::vector<double> nodal_sensitivities(const model::ForwardSolution& sol,
                                        const ode::Trajectory& costate,
                                        Problem problem,
                                        const GridFunction& grid_template,
                                        int n_quad) {
    std::vector<double> s(static_cast<std::size_t>(grid_template.n_nodes()), 0.0);
    pairing_sweep(sol, costate, problem, n_quad,
                  [&](double w, double r, double pairing) {
                      const auto [k, frac] = grid_template.locate(r);
                      s[k] += w * pairing * (1.0 - frac);
                      s[k + 1] += w * pairing * frac;
                  });
    return s;
}

GridFunction assemble_l2_gradient(const model::ForwardSolution& sol,
                                  const ode::Trajectory& costate, Problem problem,
                                  const GridFunction& grid_template, int n_quad) {
    const auto s = nodal_sensitivities(sol, costate, problem, grid_template, n_quad);
    GridFunction grad(grid_template.r_max(), grid_template.n_nodes());
    for (int k = 0; k < grad.n_nodes(); ++k) {
        grad[k] = s[k] / lumped_weight(grad, k);
    }
    return grad;
}

GridFunction pointwise_l2_gradient(const model::DescriptorModel& m,
                                   const model::ForwardSolution& sol,
                                   const ode::Trajectory& costate, Problem problem,
                                   const GridFunction& grid_template, int n_quad,
                                   double denominator_floor_rel) {
    const int n = grid_template.n_nodes();
    std::vector<double> acc(static_cast<std::size_t>(n), 0.0);
    std::vector<double> wsum(static_cast<std::size_t>(n), 0.0);

    // First pass for the denominator scale; g1 is evaluated on the current
    // model, so the scale is trajectory-dependent.
    double denom_max = 0.0;
    pairing_sweep(sol, costate, problem, n_quad, [&](double, double r, double) {
        denom_max = std::max(denom_max, std::abs(m.g1.eval(r) * r));
    });
    const double floor = denominator_floor_rel * denom_max;

    pairing_sweep(sol, costate, problem, n_quad,
                  [&](double w, double r, double pairing) {
                      const double denom = m.g1.eval(r) * r;
                      if (std::abs(denom) <= floor) return;
                      const auto [k, frac] = grid_template.locate(r);
                      const int node = frac < 0.5 ? k : k + 1;
                      acc[node] += w * pairing / denom;
                      wsum[node] += w;
                  });

    GridFunction grad(grid_template.r_max(), n);
    for (int k = 0; k < n; ++k) {
        grad[k] = wsum[k] > 0.0 ? acc[k] / wsum[k] : 0.0;
    }
    return grad;
}

}  // namespace oscid::adjoint
