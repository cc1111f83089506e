#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oscid/optimize.hpp"
#include "oscid/sobolev.hpp"
#include "helpers.hpp"

using namespace oscid;
using sobolev::RightCondition;

namespace {

// Closed form for rhs = 1, Neumann left, homogeneous Dirichlet right.
double cosh_profile(double r, double ell, double r_max) {
    return 1.0 - std::cosh(r / ell) / std::cosh(r_max / ell);
}

double helmholtz_error_vs_cosh(int n_nodes) {
    GridFunction rhs(2.3, n_nodes, 1.0);
    const auto u = sobolev::solve_helmholtz(rhs, 1.0, RightCondition::dirichlet, 0.0);
    double worst = 0.0;
    for (int k = 0; k < n_nodes; ++k) {
        worst = std::max(worst, std::abs(u[k] - cosh_profile(u.node_r(k), 1.0, 2.3)));
    }
    return worst;
}

}  // namespace

TEST_SUITE("sobolev") {

TEST_CASE("constants pass through untouched under double Neumann") {
    GridFunction rhs(2.3, 75, 0.37);
    const auto u = sobolev::solve_helmholtz(rhs, 1.0, RightCondition::neumann_zero);
    for (int k = 0; k < 75; ++k) {
        CHECK(u[k] == doctest::Approx(0.37).epsilon(1e-13));
    }
}

TEST_CASE("mixed boundary conditions reproduce the cosh closed form") {
    const double err = helmholtz_error_vs_cosh(75);
    CHECK(err < 1e-3);
    GridFunction rhs(2.3, 75, 1.0);
    const auto u = sobolev::solve_helmholtz(rhs, 1.0, RightCondition::dirichlet, 0.0);
    CHECK(u[0] == doctest::Approx(1.0 - 1.0 / std::cosh(2.3)).epsilon(2e-4));
    CHECK(u[74] == 0.0);
}

TEST_CASE("the discretization converges at second order") {
    const double e1 = helmholtz_error_vs_cosh(75);
    const double e2 = helmholtz_error_vs_cosh(149);
    const double e3 = helmholtz_error_vs_cosh(297);
    CHECK(e1 / e2 > 3.0);
    CHECK(e2 / e3 > 3.0);
}

TEST_CASE("the operator approaches the identity as ell shrinks") {
    auto rhs = GridFunction::from_function(2.3, 75, [](double r) {
        return std::sin(1.3 * r) + 0.5 * r;
    });
    double prev = 1e30;
    for (double ell : {1e-1, 1e-2, 1e-3}) {
        const auto u = sobolev::solve_helmholtz(rhs, ell, RightCondition::neumann_zero);
        double gap = 0.0;
        for (int k = 5; k < 70; ++k) gap = std::max(gap, std::abs(u[k] - rhs[k]));
        CHECK(gap < prev);
        prev = gap;
    }
    CHECK(prev < 1e-4);
}

TEST_CASE("interior modes are damped by the discrete low-pass factor") {
    const int n = 75;
    const double r_max = 2.3;
    const double h = r_max / (n - 1);
    for (int mode : {1, 3, 7}) {
        const double k = mode * std::numbers::pi / r_max;
        auto rhs = GridFunction::from_function(r_max, n,
                                               [&](double r) { return std::cos(k * r); });
        for (double ell : {0.3, 1.0}) {
            const auto u = sobolev::solve_helmholtz(rhs, ell, RightCondition::neumann_zero);
            const double k2 = (2.0 - 2.0 * std::cos(k * h)) / (h * h);
            const double factor = 1.0 / (1.0 + ell * ell * k2);
            for (int j = 0; j < n; ++j) {
                CHECK(u[j] == doctest::Approx(factor * rhs[j]).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("discrete maximum principle: nonnegative data keeps the solution nonnegative") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int trial = 0; trial < 8; ++trial) {
        GridFunction rhs(1.9, 41);
        for (int k = 0; k < 41; ++k) rhs[k] = u01(rng);
        const auto ua = sobolev::solve_helmholtz(rhs, 0.7, RightCondition::neumann_zero);
        const auto ub = sobolev::solve_helmholtz(rhs, 0.7, RightCondition::dirichlet, 0.2);
        for (int k = 0; k < 41; ++k) {
            CHECK(ua[k] >= 0.0);
            CHECK(ub[k] >= 0.0);
        }
    }
}

TEST_CASE("the discrete operator is self-adjoint under the lumped quadrature") {
    // Apply the Neumann-Neumann stencil directly and compare both pairings.
    const int n = 31;
    const double ell = 0.6;
    GridFunction grid(1.3, n, 0.0);
    const double mu = ell * ell / (grid.h() * grid.h());
    auto apply = [&](const GridFunction& z, int k) {
        const double left = (k == 0) ? z[1] : z[k - 1];
        const double right = (k == n - 1) ? z[n - 2] : z[k + 1];
        return z[k] - mu * (left - 2.0 * z[k] + right);
    };
    std::mt19937 rng(29);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 6; ++trial) {
        GridFunction zu(1.3, n), zv(1.3, n);
        for (int k = 0; k < n; ++k) {
            zu[k] = gauss(rng);
            zv[k] = gauss(rng);
        }
        double ulv = 0.0, luv = 0.0;
        for (int k = 0; k < n; ++k) {
            ulv += lumped_weight(grid, k) * zu[k] * apply(zv, k);
            luv += lumped_weight(grid, k) * apply(zu, k) * zv[k];
        }
        CHECK(ulv == doctest::Approx(luv).epsilon(1e-12));
    }
}

TEST_CASE("gradient smoothing honors the per-problem boundary conditions") {
    SUBCASE("zero in, zero out") {
        GridFunction zero(2.3, 75, 0.0);
        const auto u = sobolev::sobolev_gradient(zero, 1.0, adjoint::Problem::p1);
        for (int k = 0; k < 75; ++k) CHECK(u[k] == 0.0);
    }
    SUBCASE("p1 maps constants to the cosh profile, pinned at the cycle") {
        GridFunction ones(2.3, 75, 1.0);
        const auto u = sobolev::sobolev_gradient(ones, 1.0, adjoint::Problem::p1);
        CHECK(u[74] == 0.0);
        CHECK(u[0] == doctest::Approx(1.0 - 1.0 / std::cosh(2.3)).epsilon(2e-4));
        CHECK(u.tags().right == RightBc::dirichlet_zero);
        CHECK(u.tags().left == LeftBc::neumann_zero);
    }
    SUBCASE("p2 maps constants to constants, preserving both end slopes") {
        GridFunction ones(2.3, 75, 1.0);
        const auto u = sobolev::sobolev_gradient(ones, 1.0, adjoint::Problem::p2);
        for (int k = 0; k < 75; ++k) CHECK(u[k] == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(u.tags().right == RightBc::neumann_value);
        CHECK(u.tags().right_slope == 0.0);
    }
}

TEST_CASE("the direct smoother is exact on constants") {
    GridFunction c(2.3, 75, 5.29);
    const auto g3 = sobolev::smooth_g3(c, 0.1);
    for (int k = 0; k < 75; ++k) CHECK(g3[k] == doctest::Approx(5.29).epsilon(1e-13));
}

TEST_CASE("smoothing r^2 at ell = 0.1 stays within the interior bound") {
    auto a3 = GridFunction::from_function(2.3, 75, [](double r) { return r * r; });
    const auto g3 = sobolev::smooth_g3(a3, 0.1);
    for (int k = 0; k < 75; ++k) {
        CHECK(std::abs(g3[k] - a3[k]) <= 0.08);
    }
    // interior: the deviation is essentially 2 ell^2 max|a3''| / 2 = 0.02
    for (int k = 10; k < 70; ++k) {
        CHECK(std::abs(g3[k] - a3[k]) <= 0.03);
    }
}

TEST_CASE("binning inverts an amplitude record built from r^2") {
    const auto truth = testutil::landau_truth();
    const auto meas = model::synthesize_measurements(truth, testutil::default_xi0(),
                                                     70.0, 5000, {}, 1e-10, 1e-10);
    const auto sim =
        model::simulate(truth, testutil::default_xi0(), 70.0, 2, 1e-10, 1e-10);
    const auto binned = sobolev::bin_a3_measurements(sim.solution, meas, truth.g3);
    for (int k = 0; k < 75; ++k) {
        const double rk = binned.node_r(k);
        if (rk < 0.1) continue;  // below the initial magnitude: filled bins
        CHECK(std::abs(binned[k] - rk * rk) < 0.05);
    }
    CHECK(std::abs(binned[74] - 5.29) < 0.05);
}

TEST_CASE("binning a constant record returns the constant") {
    const auto truth = testutil::landau_truth();
    auto meas = model::synthesize_measurements(truth, testutil::default_xi0(), 70.0, 500,
                                               {}, 1e-10, 1e-10);
    for (auto& v : meas.a_delta_tilde) v = 4.2;
    const auto sim =
        model::simulate(truth, testutil::default_xi0(), 70.0, 2, 1e-10, 1e-10);
    const auto binned = sobolev::bin_a3_measurements(sim.solution, meas, truth.g3);
    for (int k = 0; k < 75; ++k) CHECK(binned[k] == doctest::Approx(4.2).epsilon(1e-12));
}

TEST_CASE("second-harmonic wiggles phase-average away on the limit cycle") {
    const auto truth = testutil::landau_truth();
    const double omega_lc = truth.g2.eval(truth.r_circle);
    const double T = 10.0 * 2.0 * std::numbers::pi / omega_lc;  // integer periods
    model::Contamination cont;
    cont.second_harmonic = 0.02;
    const auto meas = model::synthesize_measurements(truth, {truth.r_circle, 0.0}, T,
                                                     2000, cont, 1e-10, 1e-10);
    const auto sim =
        model::simulate(truth, {truth.r_circle, 0.0}, T, 2, 1e-10, 1e-10);
    const auto binned = sobolev::bin_a3_measurements(sim.solution, meas, truth.g3);
    CHECK(std::abs(binned[74] - 5.29) < 5e-3);
}

TEST_CASE("decreasing ell drives the slaving misfit down") {
    const auto truth = testutil::landau_truth();
    const auto meas = model::synthesize_measurements(truth, testutil::default_xi0(),
                                                     70.0, 500, {}, 1e-10, 1e-10);
    const auto sim =
        model::simulate(truth, testutil::default_xi0(), 70.0, 2, 1e-10, 1e-10);
    const auto binned = sobolev::bin_a3_measurements(sim.solution, meas, truth.g3);
    double prev = 1e30;
    for (double ell : {0.4, 0.2, 0.1, 0.05}) {
        const auto g3 = sobolev::smooth_g3(binned, ell);
        const double j3 = optimize::cost_j3(g3, sim.solution, meas);
        CHECK(j3 < prev);
        prev = j3;
    }
}

TEST_CASE("invalid length scales are rejected") {
    GridFunction rhs(2.3, 75, 1.0);
    CHECK_THROWS_AS(
        (void)sobolev::solve_helmholtz(rhs, 0.0, RightCondition::neumann_zero),
        std::invalid_argument);
}

}  // TEST_SUITE
