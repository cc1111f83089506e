#include <doctest.h>

#include <cmath>
#include <random>

#include "oscid/adjoint.hpp"
#include "oscid/model.hpp"
#include "helpers.hpp"

using namespace oscid;
using adjoint::Control;
using adjoint::Problem;

namespace {

model::Measurements constant_records(double T, int n_t, double r_value,
                                     double theta_value, double a3_value) {
    model::Measurements meas;
    meas.times.resize(n_t);
    meas.r_tilde.assign(n_t, r_value);
    meas.theta_tilde.assign(n_t, theta_value);
    meas.a_delta_tilde.assign(n_t, a3_value);
    for (int i = 0; i < n_t; ++i) meas.times[i] = T * (static_cast<double>(i) / (n_t - 1));
    return meas;
}

model::DescriptorModel zero_model(double r_max, int n_nodes) {
    GridFunction z(r_max, n_nodes, 0.0);
    return {z, z, z, r_max};
}

}  // namespace

TEST_SUITE("adjoint") {

TEST_CASE("constant propagators make the jacobian g1 I + g2 J") {
    GridFunction g1c(2.3, 75, 0.4), g2c(2.3, 75, 1.1), zero(2.3, 75, 0.0);
    model::DescriptorModel m{g1c, g2c, zero, 2.3};
    const Mat2 a = adjoint::jacobian(m, {0.7, -0.2});
    CHECK(a.a11 == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(a.a22 == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(a.a12 == doctest::Approx(-1.1).epsilon(1e-14));
    CHECK(a.a21 == doctest::Approx(1.1).epsilon(1e-14));
}

TEST_CASE("jacobian of g1 = -r^2 at xi = (1, 0) is diag(-3, -1)") {
    // r = 1 is a node of the 21-node grid over [0, 2], so the centered
    // derivative of the sampled quadratic is exact there.
    auto g1 = GridFunction::from_function(2.0, 21, [](double r) { return -r * r; });
    GridFunction zero(2.0, 21, 0.0);
    model::DescriptorModel m{g1, zero, zero, 2.0};
    const Mat2 a = adjoint::jacobian(m, {1.0, 0.0});
    CHECK(a.a11 == doctest::Approx(-3.0).epsilon(1e-12));
    CHECK(a.a12 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(a.a21 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(a.a22 == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("jacobian at the origin is g1(0) I + g2(0) J") {
    const auto m = testutil::landau_truth();
    const Mat2 a = adjoint::jacobian(m, {0.0, 0.0});
    CHECK(a.a11 == doctest::Approx(testutil::kSigma1).epsilon(1e-14));
    CHECK(a.a21 == doctest::Approx(testutil::kOmega1).epsilon(1e-14));
}

TEST_CASE("jacobian matches a finite-difference jacobian of the rhs") {
    const auto m = testutil::landau_truth();
    std::mt19937 rng(19);
    std::uniform_real_distribution<double> u(0.3, 1.4);
    const double eps = 1e-6;
    for (int trial = 0; trial < 10; ++trial) {
        const Vec2 xi{u(rng), u(rng)};
        const Mat2 a = adjoint::jacobian(m, xi);
        const Vec2 fxp = m.rhs({xi.x + eps, xi.y});
        const Vec2 fxm = m.rhs({xi.x - eps, xi.y});
        const Vec2 fyp = m.rhs({xi.x, xi.y + eps});
        const Vec2 fym = m.rhs({xi.x, xi.y - eps});
        CHECK(a.a11 == doctest::Approx((fxp.x - fxm.x) / (2 * eps)).epsilon(5e-5));
        CHECK(a.a21 == doctest::Approx((fxp.y - fxm.y) / (2 * eps)).epsilon(5e-5));
        CHECK(a.a12 == doctest::Approx((fyp.x - fym.x) / (2 * eps)).epsilon(5e-5));
        CHECK(a.a22 == doctest::Approx((fyp.y - fym.y) / (2 * eps)).epsilon(5e-5));
    }
}

TEST_CASE("a zero perturbation direction gives a zero tangent") {
    const auto m = testutil::landau_truth();
    const auto sim = model::simulate(m, testutil::default_xi0(), 40.0, 2, 1e-10, 1e-10);
    GridFunction gp(2.3, 75, 0.0);
    const auto tang = adjoint::solve_tangent(m, sim.solution, Control::g1, gp);
    for (const auto& s : tang.states()) {
        CHECK(s[0] == 0.0);
        CHECK(s[1] == 0.0);
    }
}

TEST_CASE("the tangent is the first-order response of the nonlinear solve") {
    const auto m = testutil::landau_truth();
    const double T = 50.0;
    const auto sim = model::simulate(m, testutil::default_xi0(), T, 2, 1e-12, 1e-12);
    auto gp = GridFunction::from_function(2.3, 75, [](double r) {
        return 0.03 * std::cos(1.7 * r) - 0.01 * r;
    });
    adjoint::SolveOptions opts;
    opts.rel_tol = opts.abs_tol = 1e-12;
    const auto tang = adjoint::solve_tangent(m, sim.solution, Control::g1, gp, opts);

    auto nonlinear_diff = [&](double eps) {
        model::DescriptorModel pert = m;
        for (int k = 0; k < 75; ++k) pert.g1[k] += eps * gp[k];
        pert.g1.set_tags({});
        const auto sim_p =
            model::simulate(pert, testutil::default_xi0(), T, 2, 1e-12, 1e-12);
        double worst = 0.0;
        for (double t = 0.0; t <= T; t += T / 40.0) {
            const Vec2 d = sim_p.solution.xi(t) - sim.solution.xi(t);
            const auto tg = tang.at(t);
            const Vec2 resid = d - Vec2{eps * tg[0], eps * tg[1]};
            worst = std::max(worst, resid.norm());
        }
        return worst;
    };
    const double e1 = nonlinear_diff(2e-3);
    const double e2 = nonlinear_diff(1e-3);
    CHECK(e2 < 1e-4);
    CHECK(e1 / e2 > 2.8);  // quadratic remainder: halving eps quarters it
    CHECK(e1 / e2 < 5.5);
}

TEST_CASE("on a circular orbit the radial tangent grows linearly") {
    const double r0 = 1.5;
    GridFunction zero(2.0, 41, 0.0);
    GridFunction omega(2.0, 41, 0.9);
    model::DescriptorModel m{zero, omega, zero, 2.0};
    const auto sim = model::simulate(m, {r0, 0.0}, 12.0, 2, 1e-11, 1e-11);
    auto gp = GridFunction::from_function(2.0, 41, [](double r) { return -r * r * r; });
    adjoint::SolveOptions opts;
    opts.rel_tol = opts.abs_tol = 1e-11;
    const auto tang = adjoint::solve_tangent(m, sim.solution, Control::g1, gp, opts);
    const double rate = r0 * gp.eval(r0);
    for (double t : {2.0, 6.0, 11.5}) {
        const auto s = tang.at(t);
        const double radial = (sim.solution.xi(t).dot({s[0], s[1]})) / r0;
        CHECK(radial == doctest::Approx(t * rate).epsilon(1e-7));
    }
}

TEST_CASE("a perfectly matched run has a zero costate") {
    const auto m = testutil::landau_truth();
    // Start on the limit cycle: r stays constant and theta grows linearly,
    // so the sampled records interpolate exactly.
    const Vec2 xi0{testutil::kRCircle, 0.0};
    const auto meas = model::synthesize_measurements(m, xi0, 40.0, 400, {}, 1e-11, 1e-11);
    const auto sim = model::simulate(m, xi0, 40.0, 2, 1e-11, 1e-11);
    for (Problem problem : {Problem::p1, Problem::p2}) {
        const auto costate = adjoint::solve_adjoint(m, sim.solution, meas, problem);
        double worst = 0.0;
        for (const auto& s : costate.states()) {
            worst = std::max(worst, std::hypot(s[0], s[1]));
        }
        CHECK(worst < 1e-7);
    }
}

TEST_CASE("frozen linearization with a constant source integrates to s0 (T - t)") {
    const double T = 8.0;
    const auto m = zero_model(2.0, 21);
    const auto meas = constant_records(T, 81, 0.5, 0.0, 0.0);
    const auto sim = model::simulate(m, {1.0, 0.0}, T, 2, 1e-11, 1e-11);
    // g = 0 freezes xi at (1,0): A = 0 and the p1 source is (0.5, 0).
    const auto costate = adjoint::solve_adjoint(m, sim.solution, meas, Problem::p1);
    for (double t : {0.0, 2.0, 5.0, 7.9}) {
        const auto s = costate.at(t);
        CHECK(s[0] == doctest::Approx(0.5 * (T - t)).epsilon(1e-8));
        CHECK(std::abs(s[1]) < 1e-10);
    }
}

TEST_CASE("the costate ends at zero") {
    const auto m = testutil::landau_truth();
    const auto meas = testutil::twin_measurements(200, 50.0);
    model::DescriptorModel biased = m;
    for (int k = 0; k < 75; ++k) biased.g1[k] *= 0.9;
    const auto sim = model::simulate(biased, testutil::default_xi0(), 50.0, 2, 1e-10, 1e-10);
    const auto costate = adjoint::solve_adjoint(biased, sim.solution, meas, Problem::p1);
    CHECK(costate.states().back()[0] == 0.0);
    CHECK(costate.states().back()[1] == 0.0);
}

TEST_CASE("a zero costate assembles to a zero gradient") {
    const auto m = testutil::landau_truth();
    const Vec2 xi0{testutil::kRCircle, 0.0};
    const auto meas = model::synthesize_measurements(m, xi0, 40.0, 400, {}, 1e-11, 1e-11);
    const auto sim = model::simulate(m, xi0, 40.0, 2, 1e-11, 1e-11);
    const auto costate = adjoint::solve_adjoint(m, sim.solution, meas, Problem::p1);
    const auto grad = adjoint::assemble_l2_gradient(sim.solution, costate, Problem::p1, m.g1);
    for (int k = 0; k < grad.n_nodes(); ++k) CHECK(std::abs(grad[k]) < 1e-4);
}

TEST_CASE("nodal assembly is a consistent quadrature of the time pairing") {
    // Twin with a biased iterate so the misfit and costate are nonzero.
    const auto truth = testutil::landau_truth();
    const double T = 60.0;
    const auto meas = model::synthesize_measurements(truth, testutil::default_xi0(), T,
                                                     500, {}, 1e-11, 1e-11);
    model::DescriptorModel iterate = truth;
    for (int k = 0; k < 75; ++k) iterate.g1[k] *= 0.8;
    const auto sim = model::simulate(iterate, testutil::default_xi0(), T, 2, 1e-11, 1e-11);
    adjoint::SolveOptions opts;
    opts.rel_tol = opts.abs_tol = 1e-11;
    const auto costate =
        adjoint::solve_adjoint(iterate, sim.solution, meas, Problem::p1, opts);

    auto gp = GridFunction::from_function(2.3, 75, [](double r) { return -r * r * r; });
    const auto grad = adjoint::assemble_l2_gradient(sim.solution, costate, Problem::p1,
                                                    iterate.g1, 65537);
    const double nodal_route = l2_inner(grad, gp);

    // Independent route: carry the pairing integral as a quadrature state of
    // the integrator itself.
    auto quad_rhs = [&](double t, const ode::State<1>&) {
        const Vec2 xi = sim.solution.xi(t);
        const auto cs = costate.at(t);
        return ode::State<1>{Vec2{cs[0], cs[1]}.dot(xi) * gp.eval(xi.norm())};
    };
    const auto quad = ode::integrate_forward<1>(quad_rhs, {0.0}, 0.0, T, 1e-11, 1e-11);
    const double time_route = quad.states().back()[0];

    CHECK(nodal_route == doctest::Approx(time_route).epsilon(1e-6));
}

TEST_CASE("nodes outside the visited range carry no sensitivity") {
    const auto truth = testutil::landau_truth();
    const double T = 40.0;
    const auto meas =
        model::synthesize_measurements(truth, {1.0, 0.0}, T, 300, {}, 1e-10, 1e-10);
    model::DescriptorModel iterate = truth;
    for (int k = 0; k < 75; ++k) iterate.g1[k] *= 0.85;
    const auto sim = model::simulate(iterate, {1.0, 0.0}, T, 2, 1e-10, 1e-10);
    const auto costate = adjoint::solve_adjoint(iterate, sim.solution, meas, Problem::p1);
    const auto s =
        adjoint::nodal_sensitivities(sim.solution, costate, Problem::p1, iterate.g1);
    // The trajectory starts at r = 1 and grows; nodes below r = 1 - h are
    // never inside a visited cell.
    const double h = iterate.g1.h();
    for (int k = 0; k < iterate.g1.n_nodes(); ++k) {
        if (iterate.g1.node_r(k) < 1.0 - h) CHECK(s[k] == 0.0);
    }
    CHECK(std::abs(s[60]) > 0.0);
}

TEST_CASE("pointwise representer agrees with the scattered assembly") {
    const auto truth = testutil::landau_truth();
    const double T = 60.0;
    const auto meas = model::synthesize_measurements(truth, testutil::default_xi0(), T,
                                                     500, {}, 1e-11, 1e-11);
    model::DescriptorModel iterate = truth;
    for (int k = 0; k < 75; ++k) iterate.g1[k] *= 0.8;
    const auto sim = model::simulate(iterate, testutil::default_xi0(), T, 2, 1e-11, 1e-11);
    const auto costate = adjoint::solve_adjoint(iterate, sim.solution, meas, Problem::p1);
    const auto scattered = adjoint::assemble_l2_gradient(sim.solution, costate,
                                                         Problem::p1, iterate.g1, 262145);
    const auto pointwise = adjoint::pointwise_l2_gradient(
        iterate, sim.solution, costate, Problem::p1, iterate.g1, 262145);
    double scale = 0.0;
    for (int k = 0; k < 75; ++k) scale = std::max(scale, std::abs(scattered[k]));
    int compared = 0;
    for (int k = 8; k < 68; ++k) {
        if (pointwise[k] == 0.0) continue;  // filtered by the denominator floor
        CHECK(std::abs(pointwise[k] - scattered[k]) < 0.08 * scale);
        ++compared;
    }
    CHECK(compared > 30);
}

}  // TEST_SUITE
