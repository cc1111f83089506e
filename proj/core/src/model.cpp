#include "oscid/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "oscid/csv.hpp"

namespace oscid::model {

ode::Trajectory ForwardSolution::xi_trajectory() const {
    std::vector<double> times = path.times();
    std::vector<ode::State<2>> states(times.size()), derivs(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        states[i] = {path.states()[i][0], path.states()[i][1]};
        derivs[i] = {path.derivatives()[i][0], path.derivatives()[i][1]};
    }
    return ode::Trajectory(std::move(times), std::move(states), std::move(derivs));
}

SimulationOutput simulate(const DescriptorModel& m, const Vec2& xi0, double T,
                          int n_out, double rel_tol, double abs_tol) {
    if (!(T > 0.0)) throw std::invalid_argument("simulate: need T > 0");
    if (n_out < 2) throw std::invalid_argument("simulate: need n_out >= 2");

    auto rhs = [&m](double, const ode::State<3>& s) {
        const double r = std::hypot(s[0], s[1]);
        if (!std::isfinite(r)) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            return ode::State<3>{nan, nan, nan};
        }
        const double p = m.g1.eval(r);
        const double w = m.g2.eval(r);
        return ode::State<3>{p * s[0] - w * s[1], w * s[0] + p * s[1], w};
    };
    const ode::State<3> s0{xi0.x, xi0.y, std::atan2(xi0.y, xi0.x)};

    // The output grid becomes mandatory step endpoints, so the sampled
    // records below are solution values, not interpolants.
    std::vector<double> landing(static_cast<std::size_t>(n_out - 1));
    for (int i = 1; i < n_out; ++i) {
        landing[i - 1] = T * (static_cast<double>(i) / (n_out - 1));
    }

    SimulationOutput out{
        ForwardSolution{
            ode::integrate_forward<3>(rhs, s0, 0.0, T, rel_tol, abs_tol, landing)},
        {}, {}, {}, {}, {}, {}};

    out.times.resize(static_cast<std::size_t>(n_out));
    out.a1.resize(out.times.size());
    out.a2.resize(out.times.size());
    out.r.resize(out.times.size());
    out.theta.resize(out.times.size());
    out.a3.resize(out.times.size());
    for (int i = 0; i < n_out; ++i) {
        const double t = T * (static_cast<double>(i) / (n_out - 1));
        const auto s = out.solution.path.at(t);
        out.times[i] = t;
        out.a1[i] = s[0];
        out.a2[i] = s[1];
        out.r[i] = std::hypot(s[0], s[1]);
        out.theta[i] = s[2];
        out.a3[i] = m.g3.eval(out.r[i]);
    }
    return out;
}

DescriptorModel landau_ground_truth(double sigma1, double beta, double omega1,
                                    double gamma, int n_nodes, double alpha_delta) {
    if (!(sigma1 > 0.0) || !(beta > 0.0) || !(omega1 > 0.0)) {
        throw std::invalid_argument(
            "landau_ground_truth: sigma1, beta, omega1 must be positive");
    }
    const double r_circle = std::sqrt(sigma1 / beta);
    auto g1 = GridFunction::from_function(
        r_circle, n_nodes, [&](double r) { return sigma1 - beta * r * r; },
        {LeftBc::neumann_zero, RightBc::dirichlet_zero, 0.0});
    g1[n_nodes - 1] = 0.0;  // pin the limit-cycle node against rounding
    auto g2 = GridFunction::from_function(
        r_circle, n_nodes, [&](double r) { return omega1 + gamma * r * r; },
        {LeftBc::neumann_zero, RightBc::neumann_value, 2.0 * gamma * r_circle});
    auto g3 = GridFunction::from_function(
        r_circle, n_nodes, [&](double r) { return alpha_delta * r * r; });
    return DescriptorModel{std::move(g1), std::move(g2), std::move(g3), r_circle};
}

DescriptorModel mean_field_ground_truth(double sigma1, double omega1,
                                        double alpha_delta, double beta_delta,
                                        double gamma_delta, int n_nodes) {
    if (!(sigma1 > 0.0) || !(omega1 > 0.0) || !(alpha_delta > 0.0) ||
        !(beta_delta > 0.0)) {
        throw std::invalid_argument(
            "mean_field_ground_truth: sigma1, omega1, alpha_delta, beta_delta must be "
            "positive");
    }
    return landau_ground_truth(sigma1, alpha_delta * beta_delta, omega1,
                               alpha_delta * gamma_delta, n_nodes, alpha_delta);
}

void Measurements::validate() const {
    const std::size_t n = times.size();
    if (n < 2 || r_tilde.size() != n || theta_tilde.size() != n ||
        a_delta_tilde.size() != n) {
        throw std::invalid_argument("measurements: inconsistent record lengths");
    }
    const double dt = times[1] - times[0];
    for (std::size_t i = 1; i < n; ++i) {
        if (std::abs((times[i] - times[i - 1]) - dt) > 1e-9 * std::max(1.0, times.back())) {
            throw std::invalid_argument("measurements: times not equispaced");
        }
    }
    for (double r : r_tilde) {
        if (r < 0.0) throw std::invalid_argument("measurements: negative amplitude record");
    }
}

double Measurements::interp(const std::vector<double>& fld, double t) const {
    const double t0 = times.front();
    const double dt = (times.back() - t0) / (static_cast<double>(times.size()) - 1.0);
    double u = (t - t0) / dt;
    u = std::clamp(u, 0.0, static_cast<double>(times.size()) - 1.0);
    const std::size_t k =
        std::min(static_cast<std::size_t>(u), times.size() - 2);
    const double frac = u - static_cast<double>(k);
    return fld[k] + frac * (fld[k + 1] - fld[k]);
}

Measurements Measurements::resample(int n_t) const {
    if (n_t < 2) throw std::invalid_argument("measurements: need n_t >= 2");
    Measurements out;
    out.times.resize(static_cast<std::size_t>(n_t));
    out.r_tilde.resize(out.times.size());
    out.theta_tilde.resize(out.times.size());
    out.a_delta_tilde.resize(out.times.size());
    for (int i = 0; i < n_t; ++i) {
        const double t =
            times.front() + (times.back() - times.front()) *
                                (static_cast<double>(i) / (n_t - 1));
        out.times[i] = t;
        out.r_tilde[i] = r_at(t);
        out.theta_tilde[i] = theta_at(t);
        out.a_delta_tilde[i] = a_delta_at(t);
    }
    return out;
}

Measurements synthesize_measurements(const DescriptorModel& m, const Vec2& xi0,
                                     double T, int n_t,
                                     const Contamination& contamination,
                                     double rel_tol, double abs_tol) {
    if (n_t < 2) throw std::invalid_argument("synthesize_measurements: need n_t >= 2");
    const SimulationOutput sim = simulate(m, xi0, T, n_t, rel_tol, abs_tol);

    Measurements meas;
    meas.times = sim.times;
    meas.r_tilde = sim.r;
    meas.theta_tilde = sim.theta;
    meas.a_delta_tilde = sim.a3;

    if (contamination.second_harmonic != 0.0) {
        for (int i = 0; i < n_t; ++i) {
            const double wiggle =
                1.0 + contamination.second_harmonic * std::cos(2.0 * sim.theta[i]);
            meas.r_tilde[i] *= wiggle;
            meas.a_delta_tilde[i] *= wiggle;
        }
    }
    if (contamination.noise_std > 0.0) {
        std::mt19937_64 rng(contamination.seed);
        std::normal_distribution<double> gauss(0.0, contamination.noise_std);
        for (int i = 0; i < n_t; ++i) {
            meas.r_tilde[i] = std::max(0.0, meas.r_tilde[i] + gauss(rng));
            meas.theta_tilde[i] += gauss(rng);
            meas.a_delta_tilde[i] += gauss(rng);
        }
    }
    meas.validate();
    return meas;
}

std::pair<std::vector<double>, std::vector<double>> rescale_amplitudes(
    const std::vector<double>& a1, const std::vector<double>& a2, double lambda1,
    double lambda2) {
    if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) {
        throw std::invalid_argument("rescale_amplitudes: eigenvalues must be positive");
    }
    const double s1 = std::sqrt((lambda1 + lambda2) / (2.0 * lambda1));
    const double s2 = std::sqrt((lambda1 + lambda2) / (2.0 * lambda2));
    std::vector<double> b1(a1.size()), b2(a2.size());
    for (std::size_t i = 0; i < a1.size(); ++i) b1[i] = s1 * a1[i];
    for (std::size_t i = 0; i < a2.size(); ++i) b2[i] = s2 * a2[i];
    return {std::move(b1), std::move(b2)};
}

void Measurements::write_csv(const std::string& path) const {
    csv::Writer w(path, "synthetic measurement records; columns: t,r_tilde,theta_tilde,a_delta_tilde");
    w.header({"t", "r_tilde", "theta_tilde", "a_delta_tilde"});
    for (std::size_t i = 0; i < times.size(); ++i) {
        w.row({times[i], r_tilde[i], theta_tilde[i], a_delta_tilde[i]});
    }
}

Measurements Measurements::read_csv(const std::string& path) {
    const auto table = csv::read_numeric(path, 4);
    if (table.size() < 2) throw std::runtime_error("measurements csv: too few rows: " + path);
    Measurements meas;
    meas.times.reserve(table.size());
    for (const auto& row : table) {
        meas.times.push_back(row[0]);
        meas.r_tilde.push_back(row[1]);
        meas.theta_tilde.push_back(row[2]);
        meas.a_delta_tilde.push_back(row[3]);
    }
    meas.validate();
    return meas;
}

}  // namespace oscid::model
