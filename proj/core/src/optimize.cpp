#include "oscid/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "oscid/csv.hpp"
#include "oscid/sobolev.hpp"

namespace oscid::optimize {

namespace {

double trapz_weight(int i, int n, double dt) {
    return (i == 0 || i == n - 1) ? 0.5 * dt : dt;
}

}  // namespace

double cost_j1(const model::ForwardSolution& sol, const model::Measurements& meas) {
    const int n = meas.size();
    const double dt = meas.T() / (n - 1);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = sol.r(meas.times[i]) - meas.r_tilde[i];
        acc += trapz_weight(i, n, dt) * 0.5 * d * d;
    }
    return acc;
}

double cost_j2(const model::ForwardSolution& sol, const model::Measurements& meas) {
    const int n = meas.size();
    const double dt = meas.T() / (n - 1);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = sol.theta(meas.times[i]) - meas.theta_tilde[i];
        acc += trapz_weight(i, n, dt) * (1.0 - std::cos(d));
    }
    return acc;
}

double cost_j3(const GridFunction& g3, const model::ForwardSolution& sol,
               const model::Measurements& meas) {
    const int n = meas.size();
    const double dt = meas.T() / (n - 1);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = g3.eval(sol.r(meas.times[i])) - meas.a_delta_tilde[i];
        acc += trapz_weight(i, n, dt) * 0.5 * d * d;
    }
    return acc;
}

double evaluate_j1(const model::DescriptorModel& m, const model::Measurements& meas,
                   const IdentificationConfig& cfg) {
    const auto sim =
        model::simulate(m, cfg.xi0, meas.T(), meas.size(), cfg.rel_tol, cfg.abs_tol);
    return cost_j1(sim.solution, meas);
}

double evaluate_j2(const model::DescriptorModel& m, const model::Measurements& meas,
                   const IdentificationConfig& cfg) {
    const auto sim =
        model::simulate(m, cfg.xi0, meas.T(), meas.size(), cfg.rel_tol, cfg.abs_tol);
    return cost_j2(sim.solution, meas);
}

LineSearchResult brent_line_search(const std::function<double(double)>& phi,
                                   double tau_max, double tol, double phi_at_zero) {
    if (!(tau_max > 0.0)) throw std::invalid_argument("line search: need tau_max > 0");
    constexpr double golden = 1.6180339887498949;
    const double inf = std::numeric_limits<double>::infinity();

    LineSearchResult best{0.0, phi_at_zero, 0, false};
    auto eval = [&](double tau) {
        double v = phi(tau);
        if (!std::isfinite(v)) v = inf;
        ++best.evals;
        if (v < best.value) {
            best.value = v;
            best.tau = tau;
        }
        return v;
    };

    // Seed probe, shrinking until the function decreases somewhere.
    double t1 = tau_max / 16.0;
    double f1 = eval(t1);
    int shrink = 0;
    while (f1 >= phi_at_zero && shrink < 45) {
        t1 *= 0.25;
        f1 = eval(t1);
        ++shrink;
    }
    if (f1 >= phi_at_zero) {
        return {0.0, phi_at_zero, best.evals, true};
    }

    // Golden expansion toward tau_max until the values turn back up.
    double a = shrink == 0 ? 0.0 : t1 / 4.0;
    double m = t1, fm = f1;
    double b = t1, fb = f1;
    bool capped = false;
    while (true) {
        if (b >= tau_max * (1.0 - 1e-12)) {
            capped = true;
            break;
        }
        const double next = std::min(b * golden, tau_max);
        const double fnext = eval(next);
        if (fnext > fm) {
            b = next;
            fb = fnext;
            break;
        }
        a = m;
        m = next;
        fm = fnext;
        b = next;
        fb = fnext;
    }
    if (capped) {
        // Still descending at the bracket bound; take the best point seen.
        return best;
    }
    (void)fb;

    // Brent refinement on [a, b] starting from the bracket interior.
    constexpr double cgold = 0.3819660112501051;
    const double tiny = 1e-14 * tau_max;
    double x = m, w = m, v = m;
    double fx = fm, fw = fm, fv = fm;
    double d = 0.0, e = 0.0;
    for (int it = 0; it < 60; ++it) {
        const double xm = 0.5 * (a + b);
        const double tol1 = tol * std::abs(x) + tiny;
        const double tol2 = 2.0 * tol1;
        if (std::abs(x - xm) <= tol2 - 0.5 * (b - a)) break;
        bool parabolic = false;
        if (std::abs(e) > tol1 && std::isfinite(fx) && std::isfinite(fw) &&
            std::isfinite(fv)) {
            const double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) p = -p;
            q = std::abs(q);
            const double e_old = e;
            e = d;
            if (std::abs(p) < std::abs(0.5 * q * e_old) && p > q * (a - x) &&
                p < q * (b - x)) {
                d = p / q;
                const double u = x + d;
                if (u - a < tol2 || b - u < tol2) d = std::copysign(tol1, xm - x);
                parabolic = true;
            }
        }
        if (!parabolic) {
            e = (x >= xm) ? a - x : b - x;
            d = cgold * e;
        }
        const double u = (std::abs(d) >= tol1) ? x + d : x + std::copysign(tol1, d);
        const double fu = eval(u);
        if (fu <= fx) {
            if (u >= x)
                a = x;
            else
                b = x;
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if (u < x)
                a = u;
            else
                b = u;
            if (fu <= fw || w == x) {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u;
                fv = fu;
            }
        }
    }

    if (best.value >= phi_at_zero) {
        return {0.0, phi_at_zero, best.evals, true};
    }
    return best;
}

model::DescriptorModel iterate_model(adjoint::Problem problem, const GridFunction& g,
                                     const GridFunction& fixed_partner) {
    const double r_circle = g.r_max();
    GridFunction zero(r_circle, g.n_nodes(), 0.0);
    if (problem == adjoint::Problem::p1) {
        // The amplitude equation does not involve g2; use zero phase speed.
        return {g, zero, zero, r_circle};
    }
    return {fixed_partner, g, zero, r_circle};
}

namespace {

struct Evaluation {
    model::SimulationOutput sim;
    double cost;
};

bool bc_compatible(const BoundaryTags& g, const BoundaryTags& d) {
    const bool left_ok = g.left != LeftBc::neumann_zero || d.left == LeftBc::neumann_zero;
    bool right_ok = true;
    if (g.right == RightBc::dirichlet_zero) {
        right_ok = d.right == RightBc::dirichlet_zero;
    } else if (g.right == RightBc::neumann_value) {
        right_ok = d.right == RightBc::neumann_value && d.right_slope == 0.0;
    }
    return left_ok && right_ok;
}

// g <- g - tau * d, preserving g's declared boundary data. The Dirichlet
// node of a p1 direction is exactly zero, so the limit-cycle value of the
// iterate never moves.
GridFunction descend(const GridFunction& g, const GridFunction& d, double tau) {
    if (!bc_compatible(g.tags(), d.tags())) {
        throw std::logic_error("descent direction violates the iterate's boundary tags");
    }
    GridFunction out = g;
    for (int k = 0; k < g.n_nodes(); ++k) out[k] = g[k] - tau * d[k];
    if (g.tags().right == RightBc::dirichlet_zero) out[g.n_nodes() - 1] = g[g.n_nodes() - 1];
    return out;
}

double max_abs(const GridFunction& g) {
    double m = 0.0;
    for (double v : g.values()) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

IdentifyResult cg_identify(adjoint::Problem problem, const GridFunction& g_init,
                           const GridFunction& fixed_partner,
                           const model::Measurements& meas,
                           const IdentificationConfig& cfg) {
    const double inf = std::numeric_limits<double>::infinity();
    GridFunction g = g_init;
    IterationHistory history;

    auto evaluate = [&](const GridFunction& cand) -> Evaluation {
        auto m = iterate_model(problem, cand, fixed_partner);
        auto sim =
            model::simulate(m, cfg.xi0, meas.T(), meas.size(), cfg.rel_tol, cfg.abs_tol);
        const double cost = problem == adjoint::Problem::p1
                                ? cost_j1(sim.solution, meas)
                                : cost_j2(sim.solution, meas);
        return {std::move(sim), cost};
    };

    Evaluation current = evaluate(g);
    history.initial_cost = current.cost;

    GridFunction grad_prev(g.r_max(), g.n_nodes());
    GridFunction direction(g.r_max(), g.n_nodes());
    double grad_prev_norm2 = 0.0;
    double tau_prev = 0.0;

    for (int n = 1; n <= cfg.max_iters; ++n) {
        const auto m = iterate_model(problem, g, fixed_partner);
        GridFunction gl2(g.r_max(), g.n_nodes());
        try {
            const auto costate = adjoint::solve_adjoint(m, current.sim.solution, meas,
                                                        problem, cfg.adjoint_options());
            gl2 = adjoint::assemble_l2_gradient(current.sim.solution, costate, problem,
                                                g, cfg.n_quad);
        } catch (const std::exception&) {
            history.aborted = true;
            break;
        }
        GridFunction gh1 = sobolev::sobolev_gradient(gl2, cfg.ell_grad, problem);
        const double grad_norm2 = h1_inner(gh1, gh1, cfg.ell_grad);
        const double grad_norm = std::sqrt(std::max(grad_norm2, 0.0));

        if (grad_norm < cfg.grad_norm_tol) {
            history.records.push_back({n, current.cost, 0.0, grad_norm, false});
            history.converged = true;
            break;
        }

        bool restarted = (n == 1) || ((n - 1) % cfg.cg_restart == 0);
        if (restarted || grad_prev_norm2 <= 0.0) {
            direction = gh1;
        } else {
            double beta = 0.0;
            GridFunction diff = gh1;
            for (int k = 0; k < diff.n_nodes(); ++k) diff[k] -= grad_prev[k];
            beta = h1_inner(gh1, diff, cfg.ell_grad) / grad_prev_norm2;
            GridFunction cand = gh1;
            for (int k = 0; k < cand.n_nodes(); ++k) cand[k] += beta * direction[k];
            cand.set_tags(gh1.tags());
            // The update moves along -direction, so descent requires a
            // positive pairing with the L2 gradient.
            if (l2_inner(gl2, cand) > 0.0) {
                direction = std::move(cand);
            } else {
                direction = gh1;
                restarted = true;
            }
        }

        const double dir_max = max_abs(direction);
        if (dir_max == 0.0) {
            history.records.push_back({n, current.cost, 0.0, grad_norm, restarted});
            history.converged = true;
            break;
        }
        double tau_max = (tau_prev > 0.0)
                             ? 2.0 * tau_prev
                             : cfg.first_step_fraction *
                                   std::max(max_abs(g), 1e-3 * dir_max) / dir_max;

        Evaluation trial_best{current.sim, current.cost};
        bool have_trial = false;
        auto phi = [&](double tau) -> double {
            try {
                Evaluation e = evaluate(descend(g, direction, tau));
                const double c = e.cost;
                if (!have_trial || c < trial_best.cost) {
                    trial_best = std::move(e);
                    have_trial = true;
                }
                return c;
            } catch (const std::exception&) {
                return inf;
            }
        };

        LineSearchResult ls =
            brent_line_search(phi, tau_max, cfg.line_search_tol, current.cost);
        if (ls.no_progress && !restarted) {
            // Momentum direction stalled; retry once along the plain gradient.
            direction = gh1;
            restarted = true;
            have_trial = false;
            trial_best = Evaluation{current.sim, current.cost};
            tau_max = cfg.first_step_fraction * std::max(max_abs(g), 1e-12) /
                      std::max(max_abs(direction), 1e-300);
            ls = brent_line_search(phi, tau_max, cfg.line_search_tol, current.cost);
        }

        if (ls.no_progress) {
            // No descent along the gradient itself: numerically stationary.
            history.records.push_back({n, current.cost, 0.0, grad_norm, restarted});
            history.converged = true;
            break;
        }

        const double prev_cost = current.cost;
        g = descend(g, direction, ls.tau);
        if (have_trial && trial_best.cost == ls.value) {
            current = std::move(trial_best);
        } else {
            try {
                current = evaluate(g);
            } catch (const std::exception&) {
                history.aborted = true;
                break;
            }
        }
        tau_prev = ls.tau;
        grad_prev = std::move(gh1);
        grad_prev_norm2 = grad_norm2;

        history.records.push_back({n, current.cost, ls.tau, grad_norm, restarted});

        const double rel =
            std::abs(current.cost - prev_cost) / std::max(prev_cost, 1e-300);
        if (n >= cfg.min_iters && rel <= cfg.conv_tol) {
            history.converged = true;
            break;
        }
    }

    return {std::move(g), std::move(history)};
}

G3Result identify_g3(const GridFunction& g1_hat, const model::Measurements& meas,
                     const IdentificationConfig& cfg) {
    const auto m = iterate_model(adjoint::Problem::p1, g1_hat, g1_hat);
    const auto sim =
            model::simulate(m, cfg.xi0, meas.T(), meas.size(), cfg.rel_tol, cfg.abs_tol);
    GridFunction binned = sobolev::bin_a3_measurements(sim.solution, meas, g1_hat);
    GridFunction g3 = sobolev::smooth_g3(binned, cfg.ell_g3);
    const double j3 = cost_j3(g3, sim.solution, meas);
    return {std::move(g3), std::move(binned), j3};
}

void IterationHistory::write_csv(const std::string& path) const {
    csv::Writer w(path, "descent history; columns: iter,cost,step,grad_norm,restart");
    w.header({"iter", "cost", "step", "grad_norm", "restart"});
    for (const auto& rec : records) {
        w.row({static_cast<double>(rec.iter), rec.cost, rec.step, rec.grad_norm,
               rec.restart ? 1.0 : 0.0});
    }
}

}  // namespace oscid::optimize
