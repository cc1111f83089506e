#include "oscid/sobolev.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace oscid::sobolev {

GridFunction solve_helmholtz(const GridFunction& rhs, double ell,
                             RightCondition right, double dirichlet_value) {
    if (!(ell > 0.0)) throw std::invalid_argument("solve_helmholtz: need ell > 0");
    const int n = rhs.n_nodes();
    const double h = rhs.h();
    const double mu = ell * ell / (h * h);

    // Rows: lo[k] u_{k-1} + di[k] u_k + up[k] u_{k+1} = b[k].
    std::vector<double> lo(n), di(n), up(n), b(n);
    for (int k = 1; k < n - 1; ++k) {
        lo[k] = -mu;
        di[k] = 1.0 + 2.0 * mu;
        up[k] = -mu;
        b[k] = rhs[k];
    }
    // Neumann at r = 0 via the ghost node u_{-1} = u_1.
    di[0] = 1.0 + 2.0 * mu;
    up[0] = -2.0 * mu;
    b[0] = rhs[0];
    if (right == RightCondition::dirichlet) {
        lo[n - 1] = 0.0;
        di[n - 1] = 1.0;
        b[n - 1] = dirichlet_value;
    } else {
        lo[n - 1] = -2.0 * mu;
        di[n - 1] = 1.0 + 2.0 * mu;
        b[n - 1] = rhs[n - 1];
    }

    // Thomas elimination; the matrix is strictly diagonally dominant for
    // ell > 0, so no pivoting is needed.
    std::vector<double> c(n), d(n);
    c[0] = up[0] / di[0];
    d[0] = b[0] / di[0];
    for (int k = 1; k < n; ++k) {
        const double denom = di[k] - lo[k] * c[k - 1];
        assert(std::abs(denom) > 0.0);
        c[k] = (k < n - 1 ? up[k] : 0.0) / denom;
        d[k] = (b[k] - lo[k] * d[k - 1]) / denom;
    }
    std::vector<double> u(n);
    u[n - 1] = d[n - 1];
    for (int k = n - 2; k >= 0; --k) u[k] = d[k] - c[k] * u[k + 1];
    if (right == RightCondition::dirichlet) u[n - 1] = dirichlet_value;

    return GridFunction(rhs.r_max(), std::move(u));
}

GridFunction sobolev_gradient(const GridFunction& l2_grad, double ell,
                              adjoint::Problem problem) {
    if (problem == adjoint::Problem::p1) {
        GridFunction g = solve_helmholtz(l2_grad, ell, RightCondition::dirichlet, 0.0);
        g.set_tags({LeftBc::neumann_zero, RightBc::dirichlet_zero, 0.0});
        return g;
    }
    GridFunction g = solve_helmholtz(l2_grad, ell, RightCondition::neumann_zero);
    g.set_tags({LeftBc::neumann_zero, RightBc::neumann_value, 0.0});
    return g;
}

GridFunction smooth_g3(const GridFunction& a3_on_grid, double ell) {
    GridFunction g = solve_helmholtz(a3_on_grid, ell, RightCondition::dirichlet,
                                     a3_on_grid[a3_on_grid.n_nodes() - 1]);
    g.set_tags({LeftBc::neumann_zero, RightBc::none, 0.0});
    return g;
}

GridFunction bin_a3_measurements(const model::ForwardSolution& sol,
                                 const model::Measurements& meas,
                                 const GridFunction& grid_template) {
    const int n = grid_template.n_nodes();
    std::vector<double> acc(static_cast<std::size_t>(n), 0.0);
    std::vector<double> wsum(static_cast<std::size_t>(n), 0.0);

    const int n_t = meas.size();
    const double dt = meas.T() / (n_t - 1);
    for (int i = 0; i < n_t; ++i) {
        const double w = (i == 0 || i == n_t - 1) ? 0.5 * dt : dt;
        const double r = sol.r(meas.times[i]);
        const auto [k, frac] = grid_template.locate(r);
        acc[k] += w * (1.0 - frac) * meas.a_delta_tilde[i];
        wsum[k] += w * (1.0 - frac);
        acc[k + 1] += w * frac * meas.a_delta_tilde[i];
        wsum[k + 1] += w * frac;
    }

    bool any = false;
    GridFunction binned(grid_template.r_max(), n);
    for (int k = 0; k < n; ++k) {
        if (wsum[k] > 0.0) {
            binned[k] = acc[k] / wsum[k];
            any = true;
        }
    }
    if (!any) throw std::runtime_error("bin_a3_measurements: trajectory visited no grid node");

    // Fill empty bins from the nearest nonempty neighbor; smoothing follows
    // immediately, so a constant extension is adequate.
    for (int k = 0; k < n; ++k) {
        if (wsum[k] > 0.0) continue;
        int left = -1, right = -1;
        for (int j = k - 1; j >= 0; --j) {
            if (wsum[j] > 0.0) {
                left = j;
                break;
            }
        }
        for (int j = k + 1; j < n; ++j) {
            if (wsum[j] > 0.0) {
                right = j;
                break;
            }
        }
        if (left < 0) {
            binned[k] = binned[right];
        } else if (right < 0) {
            binned[k] = binned[left];
        } else {
            binned[k] = (k - left) <= (right - k) ? binned[left] : binned[right];
        }
    }
    return binned;
}

}  // namespace oscid::sobolev
