#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "oscid/grid_function.hpp"
#include "oscid/ode.hpp"
#include "oscid/types.hpp"

namespace oscid::model {

/// Phase-invariant 3-state descriptor system
///   d/dt xi = (g1(r) I + g2(r) J) xi,   a3 = g3(r),   r = |xi|,
/// with the three propagators stored on a shared grid over [0, r_circle].
struct DescriptorModel {
    GridFunction g1;
    GridFunction g2;
    GridFunction g3;
    double r_circle;

    Vec2 rhs(const Vec2& xi) const {
        const double r = xi.norm();
        if (!std::isfinite(r)) {
            // overflowing trial states propagate as non-finite so the
            // adaptive integrator rejects the step
            const double nan = std::numeric_limits<double>::quiet_NaN();
            return {nan, nan};
        }
        const double p = g1.eval(r);
        const double w = g2.eval(r);
        return {p * xi.x - w * xi.y, w * xi.x + p * xi.y};
    }
};

/// Dense forward solution of the augmented system (a1, a2, theta); theta is
/// integrated alongside the state, so it is continuous (unwrapped) by
/// construction.
struct ForwardSolution {
    ode::BasicTrajectory<3> path;

    double t_end() const { return path.t_end(); }
    Vec2 xi(double t) const {
        const auto s = path.at(t);
        return {s[0], s[1]};
    }
    double r(double t) const {
        const auto s = path.at(t);
        return std::hypot(s[0], s[1]);
    }
    double theta(double t) const { return path.at(t)[2]; }

    /// The 2-state restriction, for callers that only need xi(t).
    ode::Trajectory xi_trajectory() const;
};

struct SimulationOutput {
    ForwardSolution solution;
    std::vector<double> times;  // n_out equispaced samples on [0, T]
    std::vector<double> a1, a2, r, theta, a3;
};

/// Sampled measurement records on n_t equispaced times over [0, T]. The
/// phase record is stored unwrapped.
struct Measurements {
    std::vector<double> times;
    std::vector<double> r_tilde;
    std::vector<double> theta_tilde;
    std::vector<double> a_delta_tilde;

    double T() const { return times.back(); }
    int size() const { return static_cast<int>(times.size()); }

    double r_at(double t) const { return interp(r_tilde, t); }
    double theta_at(double t) const { return interp(theta_tilde, t); }
    double a_delta_at(double t) const { return interp(a_delta_tilde, t); }

    /// Linear-interpolation resampling onto n_t equispaced times.
    Measurements resample(int n_t) const;

    void validate() const;

    void write_csv(const std::string& path) const;
    static Measurements read_csv(const std::string& path);

private:
    double interp(const std::vector<double>& fld, double t) const;
};

/// Forward integration with continuous phase accumulation; outputs sampled
/// at n_out equispaced times, a3 evaluated pointwise as g3(r(t)).
SimulationOutput simulate(const DescriptorModel& m, const Vec2& xi0, double T,
                          int n_out, double rel_tol = 1e-8, double abs_tol = 1e-8);

/// Landau family: g1 = sigma1 - beta r^2, g2 = omega1 + gamma r^2,
/// g3 = alpha_delta r^2, with the limit cycle at r = sqrt(sigma1/beta).
DescriptorModel landau_ground_truth(double sigma1, double beta, double omega1,
                                    double gamma, int n_nodes,
                                    double alpha_delta = 1.0);

/// Mean-field family with the slaved deformation amplitude substituted in:
/// g1 = sigma1 - beta_delta*alpha_delta r^2, g2 = omega1 +
/// gamma_delta*alpha_delta r^2, g3 = alpha_delta r^2.
DescriptorModel mean_field_ground_truth(double sigma1, double omega1,
                                        double alpha_delta, double beta_delta,
                                        double gamma_delta, int n_nodes);

struct Contamination {
    double second_harmonic = 0.0;  // relative amplitude of the cos(2 theta) wiggle
    double noise_std = 0.0;
    std::uint64_t seed = 0;
};

/// Simulates and samples synthetic measurements. The optional contamination
/// multiplies r and a_delta by (1 + eps2*cos(2 theta)) and adds i.i.d.
/// Gaussian noise to all three records; deterministic for a fixed seed.
Measurements synthesize_measurements(const DescriptorModel& m, const Vec2& xi0,
                                     double T, int n_t,
                                     const Contamination& contamination = {},
                                     double rel_tol = 1e-8, double abs_tol = 1e-8);

/// Energy-equipartition rescaling of the oscillation amplitudes:
///   a1 <- sqrt((l1+l2)/(2 l1)) a1,  a2 <- sqrt((l1+l2)/(2 l2)) a2.
std::pair<std::vector<double>, std::vector<double>> rescale_amplitudes(
    const std::vector<double>& a1, const std::vector<double>& a2, double lambda1,
    double lambda2);

}  // namespace oscid::model
