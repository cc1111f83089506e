#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "oscid/validate.hpp"
#include "helpers.hpp"

using namespace oscid;
using adjoint::Control;
using adjoint::Problem;

namespace {

// The twin setup kappa is evaluated on: measurements from the reference
// truth, gradients at a deliberately biased iterate.
struct KappaFixture {
    model::DescriptorModel truth = testutil::landau_truth();
    model::DescriptorModel iterate_p1;
    model::DescriptorModel iterate_p2;
    model::Measurements meas;
    optimize::IdentificationConfig cfg;
    GridFunction g_prime;

    KappaFixture()
        : iterate_p1(truth),
          iterate_p2(truth),
          meas(model::synthesize_measurements(truth, testutil::default_xi0(), 70.0,
                                              5000, {}, 1e-12, 1e-12)),
          cfg(testutil::default_config()),
          g_prime(GridFunction::from_function(2.3, 75,
                                              [](double r) { return -r * r * r; })) {
        for (int k = 0; k < 75; ++k) {
            iterate_p1.g1[k] *= 0.8;   // amplitude misfit, phase ignored
            iterate_p2.g2[k] *= 0.85;  // phase misfit about the true amplitude
        }
        GridFunction zero(2.3, 75, 0.0);
        iterate_p1.g2 = zero;
        cfg.rel_tol = cfg.abs_tol = 1e-12;
        cfg.n_quad = 262145;
    }
};

}  // namespace

TEST_SUITE("validate") {

TEST_CASE("kappa sits on the unity plateau for both problems") {
    const KappaFixture fx;
    for (Problem problem : {Problem::p1, Problem::p2}) {
        const auto& m = problem == Problem::p1 ? fx.iterate_p1 : fx.iterate_p2;
        const double k = validate::kappa(problem, m, fx.g_prime, 1e-7, fx.meas, fx.cfg);
        CHECK(std::abs(k - 1.0) < 1e-3);
    }
}

TEST_CASE("a gradient off by a factor of two would halve kappa") {
    const KappaFixture fx;
    const double k = validate::kappa(Problem::p1, fx.iterate_p1, fx.g_prime, 1e-7,
                                     fx.meas, fx.cfg);
    // doubling the denominator is exactly a halved ratio
    CHECK(k / 2.0 == doctest::Approx(0.5 * k).epsilon(1e-15));
    CHECK(std::abs(k / 2.0 - 0.5) < 1e-3);
}

TEST_CASE("kappa leaves the plateau in the round-off regime") {
    const KappaFixture fx;
    const auto meas500 = fx.meas.resample(500);
    const double good =
        validate::kappa(Problem::p1, fx.iterate_p1, fx.g_prime, 1e-7, meas500, fx.cfg);
    const double tiny =
        validate::kappa(Problem::p1, fx.iterate_p1, fx.g_prime, 1e-15, meas500, fx.cfg);
    CHECK(std::abs(tiny - 1.0) > std::abs(good - 1.0));
}

TEST_CASE("kappa agreement sharpens as the time resolution grows") {
    const KappaFixture fx;
    const std::vector<double> eps{3.16e-9};
    const std::vector<int> n_ts{50, 500, 5000};
    const auto rows = validate::kappa_sweep(Problem::p1, fx.iterate_p1, fx.g_prime, eps,
                                            n_ts, fx.meas, fx.cfg);
    REQUIRE(rows.size() == 3);
    CHECK(std::abs(rows[0].kappa - 1.0) > std::abs(rows[1].kappa - 1.0));
    CHECK(std::abs(rows[1].kappa - 1.0) > std::abs(rows[2].kappa - 1.0));
}

TEST_CASE("the sweep is deterministic") {
    const KappaFixture fx;
    const std::vector<double> eps{1e-7, 1e-5, 1e-3};
    const std::vector<int> n_ts{50, 500};
    const auto a = validate::kappa_sweep(Problem::p1, fx.iterate_p1, fx.g_prime, eps,
                                         n_ts, fx.meas, fx.cfg);
    const auto b = validate::kappa_sweep(Problem::p1, fx.iterate_p1, fx.g_prime, eps,
                                         n_ts, fx.meas, fx.cfg);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].kappa == b[i].kappa);
        CHECK(a[i].epsilon == b[i].epsilon);
        CHECK(a[i].n_t == b[i].n_t);
    }
}

TEST_CASE("a degenerate perturbation direction is reported") {
    const KappaFixture fx;
    GridFunction zero(2.3, 75, 0.0);
    const auto meas500 = fx.meas.resample(500);
    CHECK_THROWS_AS((void)validate::kappa(Problem::p1, fx.iterate_p1, zero, 1e-5,
                                          meas500, fx.cfg),
                    std::runtime_error);
}

TEST_CASE("node oracle: unvisited nodes have zero sensitivity both ways") {
    const auto truth = testutil::landau_truth();
    optimize::IdentificationConfig cfg = testutil::default_config();
    cfg.rel_tol = cfg.abs_tol = 1e-11;
    cfg.xi0 = {1.0, 0.0};  // the visited range is [1, 2.3]
    const auto meas =
        model::synthesize_measurements(truth, cfg.xi0, 70.0, 500, {}, 1e-11, 1e-11);
    model::DescriptorModel iterate = truth;
    for (int k = 0; k < 75; ++k) iterate.g1[k] *= 0.9;
    iterate.g1.set_tags({});
    const double fd = validate::fd_node_gradient(Problem::p1, iterate, 5, 1e-4, meas, cfg);
    CHECK(std::abs(fd) < 1e-10);
}

TEST_CASE("node oracle matches the adjoint nodal sensitivities") {
    const auto truth = testutil::landau_truth();
    optimize::IdentificationConfig cfg = testutil::default_config();
    cfg.rel_tol = cfg.abs_tol = 1e-12;
    cfg.n_quad = 262145;
    const auto meas = model::synthesize_measurements(truth, testutil::default_xi0(),
                                                     70.0, 500, {}, 1e-12, 1e-12);
    model::DescriptorModel iterate = truth;
    for (int k = 0; k < 75; ++k) iterate.g1[k] *= 0.8;
    iterate.g1.set_tags({});
    const auto sim = model::simulate(iterate, testutil::default_xi0(), 70.0, 2,
                                     cfg.rel_tol, cfg.abs_tol);
    const auto costate = adjoint::solve_adjoint(iterate, sim.solution, meas, Problem::p1,
                                                cfg.adjoint_options());
    const auto s = adjoint::nodal_sensitivities(sim.solution, costate, Problem::p1,
                                                iterate.g1, cfg.n_quad);
    for (int node : {10, 37, 60}) {
        const double fd =
            validate::fd_node_gradient(Problem::p1, iterate, node, 1e-4, meas, cfg);
        CHECK(std::abs(fd - s[node]) <= std::max(1e-6, 1e-3 * std::abs(s[node])));
    }
}

TEST_CASE("one-sided estimates bracket the central difference") {
    const auto truth = testutil::landau_truth();
    optimize::IdentificationConfig cfg = testutil::default_config();
    cfg.rel_tol = cfg.abs_tol = 1e-11;
    const auto meas = model::synthesize_measurements(truth, testutil::default_xi0(),
                                                     70.0, 500, {}, 1e-11, 1e-11);
    model::DescriptorModel iterate = truth;
    for (int k = 0; k < 75; ++k) iterate.g1[k] *= 0.8;
    iterate.g1.set_tags({});
    const int node = 37;
    const double eps = 1e-3;
    const double plus =
        validate::fd_node_gradient_one_sided(Problem::p1, iterate, node, eps, meas, cfg);
    const double minus =
        validate::fd_node_gradient_one_sided(Problem::p1, iterate, node, -eps, meas, cfg);
    const double central =
        validate::fd_node_gradient(Problem::p1, iterate, node, eps, meas, cfg);
    const double lo = std::min(plus, minus), hi = std::max(plus, minus);
    const double slack = 1e-9 * std::max(1.0, std::abs(central));
    CHECK(central >= lo - slack);
    CHECK(central <= hi + slack);
    CHECK(central == doctest::Approx(0.5 * (plus + minus)).epsilon(1e-12));
}

TEST_CASE("duality gap: a zero direction is guarded, not a division by zero") {
    const auto truth = testutil::landau_truth();
    const auto meas = testutil::twin_measurements(500, 50.0);
    model::DescriptorModel iterate = truth;
    for (int k = 0; k < 75; ++k) iterate.g1[k] *= 0.9;
    const auto sim = model::simulate(iterate, testutil::default_xi0(), 50.0, 2, 1e-10, 1e-10);
    GridFunction zero(2.3, 75, 0.0);
    const double gap = validate::duality_gap(iterate, sim.solution, Control::g1, zero,
                                             meas, Problem::p1);
    CHECK(gap == 0.0);
}

TEST_CASE("tangent and adjoint pairings agree to 1e-6 on the twin") {
    const auto truth = testutil::landau_truth();
    const double T = 70.0;
    const auto meas =
        model::synthesize_measurements(truth, testutil::default_xi0(), T, 500, {}, 1e-12, 1e-12);
    auto gp = GridFunction::from_function(2.3, 75, [](double r) { return -r * r * r; });
    adjoint::SolveOptions opts;
    opts.rel_tol = opts.abs_tol = 1e-12;

    SUBCASE("p1 pairing through g1") {
        model::DescriptorModel iterate = truth;
        for (int k = 0; k < 75; ++k) iterate.g1[k] *= 0.8;
        GridFunction zero(2.3, 75, 0.0);
        iterate.g2 = zero;
        const auto sim = model::simulate(iterate, testutil::default_xi0(), T, 2, 1e-12, 1e-12);
        const double gap = validate::duality_gap(iterate, sim.solution, Control::g1, gp,
                                                 meas, Problem::p1, opts);
        CHECK(gap < 1e-6);
    }
    SUBCASE("p2 pairing through g2") {
        model::DescriptorModel iterate = truth;
        for (int k = 0; k < 75; ++k) iterate.g2[k] *= 0.85;
        const auto sim = model::simulate(iterate, testutil::default_xi0(), T, 2, 1e-12, 1e-12);
        const double gap = validate::duality_gap(iterate, sim.solution, Control::g2, gp,
                                                 meas, Problem::p2, opts);
        CHECK(gap < 1e-6);
    }
}

TEST_CASE("the duality gap grows when the solves are loosened") {
    const auto truth = testutil::landau_truth();
    const double T = 50.0;
    const auto meas =
        model::synthesize_measurements(truth, testutil::default_xi0(), T, 500, {}, 1e-12, 1e-12);
    model::DescriptorModel iterate = truth;
    for (int k = 0; k < 75; ++k) iterate.g1[k] *= 0.8;
    const auto sim = model::simulate(iterate, testutil::default_xi0(), T, 2, 1e-12, 1e-12);
    auto gp = GridFunction::from_function(2.3, 75, [](double r) { return -r * r * r; });

    adjoint::SolveOptions tight;
    tight.rel_tol = tight.abs_tol = 1e-12;
    adjoint::SolveOptions loose;
    loose.rel_tol = loose.abs_tol = 1e-8;
    const double tight_gap = validate::duality_gap(iterate, sim.solution, Control::g1,
                                                   gp, meas, Problem::p1, tight);
    const double loose_gap = validate::duality_gap(iterate, sim.solution, Control::g1,
                                                   gp, meas, Problem::p1, loose);
    CHECK(loose_gap > tight_gap);
}

TEST_CASE("sweep csv carries the schema comment and the diagnostic column") {
    std::vector<validate::KappaRow> rows{{1e-5, 500, 1.0001}, {1e-4, 500, 0.999}};
    validate::write_sweep_csv("sweep_test.csv", rows);
    std::ifstream in("sweep_test.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("# ", 0) == 0);
    std::getline(in, line);
    CHECK(line == "epsilon,n_t,kappa,log10_abs_kappa_minus_1");
    int count = 0;
    while (std::getline(in, line)) ++count;
    CHECK(count == 2);
    std::remove("sweep_test.csv");
}

}  // TEST_SUITE
