#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace oscid::ode {

/// Thrown when the adaptive step size underflows (blow-up or severe
/// stiffness). Carries the last time up to which the solution is valid.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double last_valid_time)
        : std::runtime_error(what), last_valid_time_(last_valid_time) {}

    double last_valid_time() const noexcept { return last_valid_time_; }

private:
    double last_valid_time_;
};

template <std::size_t N>
using State = std::array<double, N>;

namespace detail {

template <std::size_t N>
bool all_finite(const State<N>& y) {
    for (double v : y) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

}  // namespace detail

/// Time-ordered solution samples with enough data (states and derivatives at
/// the accepted step points) for cubic Hermite dense output anywhere inside
/// the integration window. Immutable once constructed.
template <std::size_t N>
class BasicTrajectory {
public:
    BasicTrajectory(std::vector<double> times, std::vector<State<N>> states,
                    std::vector<State<N>> derivatives)
        : times_(std::move(times)),
          states_(std::move(states)),
          derivs_(std::move(derivatives)) {
        if (times_.size() < 2 || times_.size() != states_.size() ||
            times_.size() != derivs_.size()) {
            throw std::invalid_argument("trajectory: inconsistent sample arrays");
        }
        for (std::size_t i = 1; i < times_.size(); ++i) {
            if (!(times_[i] > times_[i - 1])) {
                throw std::invalid_argument("trajectory: times not strictly increasing");
            }
        }
        for (const auto& s : states_) {
            if (!detail::all_finite<N>(s)) {
                throw std::invalid_argument("trajectory: non-finite state sample");
            }
        }
    }

    double t_begin() const { return times_.front(); }
    double t_end() const { return times_.back(); }
    std::size_t size() const { return times_.size(); }

    const std::vector<double>& times() const { return times_; }
    const std::vector<State<N>>& states() const { return states_; }
    const std::vector<State<N>>& derivatives() const { return derivs_; }

    /// Dense-output evaluation by cubic Hermite interpolation on the step
    /// containing t. Queries outside [t_begin, t_end] (beyond a rounding
    /// slack) are an error.
    State<N> at(double t) const {
        const double slack =
            64.0 * std::numeric_limits<double>::epsilon() *
            std::max({std::abs(t_begin()), std::abs(t_end()), 1.0});
        if (t < t_begin() - slack || t > t_end() + slack) {
            throw std::out_of_range("trajectory: query time outside integration window");
        }
        const double tc = std::clamp(t, t_begin(), t_end());

        auto it = std::upper_bound(times_.begin(), times_.end(), tc);
        std::size_t k = static_cast<std::size_t>(it - times_.begin());
        k = std::clamp<std::size_t>(k, 1, times_.size() - 1) - 1;

        const double h = times_[k + 1] - times_[k];
        const double s = (tc - times_[k]) / h;
        const double s2 = s * s;
        const double omst = 1.0 - s;
        const double h00 = (1.0 + 2.0 * s) * omst * omst;
        const double h10 = s * omst * omst;
        const double h01 = s2 * (3.0 - 2.0 * s);
        const double h11 = s2 * (s - 1.0);
        State<N> out{};
        for (std::size_t i = 0; i < N; ++i) {
            out[i] = h00 * states_[k][i] + h10 * h * derivs_[k][i] +
                     h01 * states_[k + 1][i] + h11 * h * derivs_[k + 1][i];
        }
        return out;
    }

    std::vector<State<N>> sample_at(std::span<const double> query_times) const {
        std::vector<State<N>> out;
        out.reserve(query_times.size());
        for (double t : query_times) out.push_back(at(t));
        return out;
    }

private:
    std::vector<double> times_;
    std::vector<State<N>> states_;
    std::vector<State<N>> derivs_;
};

using Trajectory = BasicTrajectory<2>;

namespace detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0,
                        c5 = 8.0 / 9.0;
inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                        a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                        a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                        a65 = -5103.0 / 18656.0;
// 5th-order solution weights (row 7 of A equals b, FSAL).
inline constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0,
                        b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0,
                        b6 = 11.0 / 84.0;
// Difference between the 5th- and 4th-order weights, used as error estimate.
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0,
                        e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                        e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

}  // namespace detail

/// Adaptive explicit Runge-Kutta 5(4) integration of dy/dt = rhs(t, y) over
/// [t0, t1], t1 > t0, with proportional step control on the embedded error
/// estimate. Returns the trajectory with dense output. Sorted `landing_times`
/// inside (t0, t1) become mandatory step endpoints, so the stored states
/// there are solution values rather than interpolants.
template <std::size_t N, typename Rhs>
BasicTrajectory<N> integrate_forward(Rhs&& rhs, const State<N>& y0, double t0,
                                     double t1, double rel_tol = 1e-8,
                                     double abs_tol = 1e-8,
                                     std::span<const double> landing_times = {}) {
    using detail::all_finite;
    if (!(t1 > t0)) throw std::invalid_argument("integrate_forward: need t1 > t0");
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
        throw std::invalid_argument("integrate_forward: tolerances must be positive");
    }
    if (!all_finite<N>(y0)) {
        throw std::invalid_argument("integrate_forward: non-finite initial state");
    }

    const double span = t1 - t0;
    constexpr std::size_t max_steps = 20'000'000;
    const double eps = std::numeric_limits<double>::epsilon();

    std::vector<double> times;
    std::vector<State<N>> states, derivs;

    double t = t0;
    State<N> y = y0;
    State<N> f = rhs(t, y);
    if (!all_finite<N>(f)) {
        throw IntegrationError("integrate_forward: rhs not finite at initial state", t0);
    }
    times.push_back(t);
    states.push_back(y);
    derivs.push_back(f);

    // Initial step from the standard two-probe heuristic.
    auto err_scale = [&](const State<N>& a, const State<N>& b, std::size_t i) {
        return abs_tol + rel_tol * std::max(std::abs(a[i]), std::abs(b[i]));
    };
    double h;
    {
        double d0 = 0.0, d1 = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double sc = abs_tol + rel_tol * std::abs(y[i]);
            d0 += (y[i] / sc) * (y[i] / sc);
            d1 += (f[i] / sc) * (f[i] / sc);
        }
        d0 = std::sqrt(d0 / N);
        d1 = std::sqrt(d1 / N);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1;
        h0 = std::min(h0, span);
        State<N> y1;
        for (std::size_t i = 0; i < N; ++i) y1[i] = y[i] + h0 * f[i];
        State<N> f1 = rhs(t + h0, y1);
        double d2 = 0.0;
        if (all_finite<N>(f1)) {
            for (std::size_t i = 0; i < N; ++i) {
                const double sc = abs_tol + rel_tol * std::abs(y[i]);
                d2 += ((f1[i] - f[i]) / sc) * ((f1[i] - f[i]) / sc);
            }
            d2 = std::sqrt(d2 / N) / h0;
        } else {
            d2 = 1.0 / h0;
        }
        const double dm = std::max(d1, d2);
        double h1 = (dm <= 1e-15) ? std::max(1e-6 * span, h0 * 1e-3)
                                  : std::pow(0.01 / dm, 0.2);
        h = std::min({100.0 * h0, h1, span});
    }

    State<N> k2, k3, k4, k5, k6, k7, y_new, y_stage;
    std::size_t steps = 0;
    std::size_t landing_idx = 0;

    while (t < t1) {
        if (++steps > max_steps) {
            throw IntegrationError("integrate_forward: step limit exceeded", t);
        }
        const double t_slack = 16.0 * eps * std::max(std::abs(t1), 1.0);
        while (landing_idx < landing_times.size() &&
               landing_times[landing_idx] <= t + t_slack) {
            ++landing_idx;
        }
        const double target = (landing_idx < landing_times.size())
                                  ? std::min(landing_times[landing_idx], t1)
                                  : t1;
        const double h_step = std::min(h, target - t);
        if (h_step <= 16.0 * eps * std::max(std::abs(t), 1.0)) {
            throw IntegrationError("integrate_forward: step size underflow", t);
        }

        using namespace detail;
        const double hs = h_step;
        for (std::size_t i = 0; i < N; ++i) y_stage[i] = y[i] + hs * a21 * f[i];
        k2 = rhs(t + c2 * hs, y_stage);
        for (std::size_t i = 0; i < N; ++i)
            y_stage[i] = y[i] + hs * (a31 * f[i] + a32 * k2[i]);
        k3 = rhs(t + c3 * hs, y_stage);
        for (std::size_t i = 0; i < N; ++i)
            y_stage[i] = y[i] + hs * (a41 * f[i] + a42 * k2[i] + a43 * k3[i]);
        k4 = rhs(t + c4 * hs, y_stage);
        for (std::size_t i = 0; i < N; ++i)
            y_stage[i] =
                y[i] + hs * (a51 * f[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        k5 = rhs(t + c5 * hs, y_stage);
        for (std::size_t i = 0; i < N; ++i)
            y_stage[i] = y[i] + hs * (a61 * f[i] + a62 * k2[i] + a63 * k3[i] +
                                      a64 * k4[i] + a65 * k5[i]);
        k6 = rhs(t + hs, y_stage);
        for (std::size_t i = 0; i < N; ++i)
            y_new[i] = y[i] + hs * (b1 * f[i] + b3 * k3[i] + b4 * k4[i] +
                                    b5 * k5[i] + b6 * k6[i]);
        k7 = rhs(t + hs, y_new);

        double err = 0.0;
        bool finite = all_finite<N>(y_new) && all_finite<N>(k7);
        if (finite) {
            for (std::size_t i = 0; i < N; ++i) {
                const double ei = hs * (e1 * f[i] + e3 * k3[i] + e4 * k4[i] +
                                        e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                const double w = ei / err_scale(y, y_new, i);
                err += w * w;
            }
            err = std::sqrt(err / N);
        }

        if (finite && err <= 1.0) {
            t = (t + hs >= target - t_slack) ? target : t + hs;
            y = y_new;
            f = k7;  // FSAL
            times.push_back(t);
            states.push_back(y);
            derivs.push_back(f);
            if (hs >= h * (1.0 - 1e-12)) {
                // Only genuine error-controlled steps update the controller;
                // steps clipped to a landing time have artificially small
                // error and would inflate it.
                const double fac = (err == 0.0)
                                       ? 5.0
                                       : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
                h = hs * fac;
            }
        } else {
            const double fac =
                finite ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
            h = hs * fac;
        }
    }

    return BasicTrajectory<N>(std::move(times), std::move(states), std::move(derivs));
}

/// Integrates a terminal-value problem backward from t_final to t_start
/// (t_final > t_start) by forward integration of the time-reversed system.
/// The returned trajectory is re-indexed to increasing physical time and its
/// stored derivatives are physical d/dt values, so dense output works as for
/// a forward solve.
template <std::size_t N, typename Rhs>
BasicTrajectory<N> integrate_backward(Rhs&& rhs, const State<N>& y_final,
                                      double t_final, double t_start,
                                      double rel_tol = 1e-8,
                                      double abs_tol = 1e-8) {
    if (!(t_final > t_start)) {
        throw std::invalid_argument("integrate_backward: need t_final > t_start");
    }
    auto reversed = [&](double s, const State<N>& z) {
        State<N> out = rhs(t_final - s, z);
        for (double& v : out) v = -v;
        return out;
    };
    BasicTrajectory<N> rev = integrate_forward<N>(reversed, y_final, 0.0,
                                                  t_final - t_start, rel_tol, abs_tol);

    const std::size_t n = rev.size();
    std::vector<double> times(n);
    std::vector<State<N>> states(n), derivs(n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t i = n - 1 - j;
        times[j] = t_final - rev.times()[i];
        states[j] = rev.states()[i];
        derivs[j] = rev.derivatives()[i];
        for (double& v : derivs[j]) v = -v;
    }
    // The reversed clock hits both endpoints exactly; pin them to avoid
    // rounding residue in t_final - (t_final - t_start).
    times.front() = t_start;
    times.back() = t_final;
    return BasicTrajectory<N>(std::move(times), std::move(states), std::move(derivs));
}

}  // namespace oscid::ode
