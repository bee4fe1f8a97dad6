#include "phonsr/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace phonsr::integrate {

namespace {

void check_finite(const State& dydt, double t) {
    for (std::size_t i = 0; i < dydt.size(); ++i) {
        if (!std::isfinite(dydt[i].real()) || !std::isfinite(dydt[i].imag()))
            throw IntegrationError("non-finite derivative in slot " +
                                   std::to_string(i) + " at t = " +
                                   std::to_string(t));
    }
}

struct Rk4Workspace {
    State k1, k2, k3, k4, tmp;
    void resize(std::size_t n) {
        k1.resize(n); k2.resize(n); k3.resize(n); k4.resize(n); tmp.resize(n);
    }
};

void rk4_step(const Rhs& rhs, State& y, double t, double h, Rk4Workspace& w) {
    const std::size_t n = y.size();
    rhs(t, y, w.k1);
    check_finite(w.k1, t);
    for (std::size_t i = 0; i < n; ++i) w.tmp[i] = y[i] + 0.5 * h * w.k1[i];
    rhs(t + 0.5 * h, w.tmp, w.k2);
    check_finite(w.k2, t);
    for (std::size_t i = 0; i < n; ++i) w.tmp[i] = y[i] + 0.5 * h * w.k2[i];
    rhs(t + 0.5 * h, w.tmp, w.k3);
    check_finite(w.k3, t);
    for (std::size_t i = 0; i < n; ++i) w.tmp[i] = y[i] + h * w.k3[i];
    rhs(t + h, w.tmp, w.k4);
    check_finite(w.k4, t);
    for (std::size_t i = 0; i < n; ++i)
        y[i] += (h / 6.0) * (w.k1[i] + 2.0 * w.k2[i] + 2.0 * w.k3[i] + w.k4[i]);
}

// Dormand-Prince 5(4) tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b* (error estimator), e7 from the embedded 4th-order weight 1/40
constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695,
                 e4 = b4 - 393.0 / 640, e5 = b5 + 92097.0 / 339200,
                 e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

struct Dp5Workspace {
    State k1, k2, k3, k4, k5, k6, k7, tmp, ynew;
    void resize(std::size_t n) {
        k1.resize(n); k2.resize(n); k3.resize(n); k4.resize(n); k5.resize(n);
        k6.resize(n); k7.resize(n); tmp.resize(n); ynew.resize(n);
    }
};

// Attempts one step; returns the scaled error norm (max over real/imag parts).
double dp5_attempt(const Rhs& rhs, const State& y, double t, double h,
                   const IntegratorConfig& cfg, Dp5Workspace& w) {
    const std::size_t n = y.size();
    rhs(t, y, w.k1);
    check_finite(w.k1, t);
    for (std::size_t i = 0; i < n; ++i) w.tmp[i] = y[i] + h * a21 * w.k1[i];
    rhs(t + c2 * h, w.tmp, w.k2);
    check_finite(w.k2, t);
    for (std::size_t i = 0; i < n; ++i)
        w.tmp[i] = y[i] + h * (a31 * w.k1[i] + a32 * w.k2[i]);
    rhs(t + c3 * h, w.tmp, w.k3);
    check_finite(w.k3, t);
    for (std::size_t i = 0; i < n; ++i)
        w.tmp[i] = y[i] + h * (a41 * w.k1[i] + a42 * w.k2[i] + a43 * w.k3[i]);
    rhs(t + c4 * h, w.tmp, w.k4);
    check_finite(w.k4, t);
    for (std::size_t i = 0; i < n; ++i)
        w.tmp[i] = y[i] + h * (a51 * w.k1[i] + a52 * w.k2[i] + a53 * w.k3[i] +
                               a54 * w.k4[i]);
    rhs(t + c5 * h, w.tmp, w.k5);
    check_finite(w.k5, t);
    for (std::size_t i = 0; i < n; ++i)
        w.tmp[i] = y[i] + h * (a61 * w.k1[i] + a62 * w.k2[i] + a63 * w.k3[i] +
                               a64 * w.k4[i] + a65 * w.k5[i]);
    rhs(t + h, w.tmp, w.k6);
    check_finite(w.k6, t);
    for (std::size_t i = 0; i < n; ++i)
        w.ynew[i] = y[i] + h * (b1 * w.k1[i] + b3 * w.k3[i] + b4 * w.k4[i] +
                                b5 * w.k5[i] + b6 * w.k6[i]);
    rhs(t + h, w.ynew, w.k7);
    check_finite(w.k7, t);

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Complex e = h * (e1 * w.k1[i] + e3 * w.k3[i] + e4 * w.k4[i] +
                               e5 * w.k5[i] + e6 * w.k6[i] + e7 * w.k7[i]);
        const double sr = cfg.atol + cfg.rtol * std::max(std::abs(y[i].real()),
                                                         std::abs(w.ynew[i].real()));
        const double si = cfg.atol + cfg.rtol * std::max(std::abs(y[i].imag()),
                                                         std::abs(w.ynew[i].imag()));
        err = std::max(err, std::abs(e.real()) / sr);
        err = std::max(err, std::abs(e.imag()) / si);
    }
    return err;
}

}  // namespace

State step_rk4(const Rhs& rhs, const State& state, double t, double h) {
    if (!(h > 0.0)) throw IntegrationError("step_rk4: h must be > 0");
    Rk4Workspace w;
    w.resize(state.size());
    State y = state;
    rk4_step(rhs, y, t, h, w);
    return y;
}

void solve_into(const Rhs& rhs, const State& state0, double t0, double t1,
                const std::vector<double>& grid, const IntegratorConfig& config,
                const SampleCallback& on_sample, IntegrationStats* stats) {
    if (grid.empty()) return;
    if (!(t1 > t0)) throw IntegrationError("solve: t_span must be nonempty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < t0 || grid[i] > t1)
            throw IntegrationError("solve: grid point outside t_span");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw IntegrationError("solve: grid must be strictly increasing");
    }
    if (!(config.h_min > 0.0) || !(config.h_init >= config.h_min) ||
        !(config.h_max >= config.h_init) || !(config.rtol > 0.0) ||
        !(config.atol > 0.0) || config.max_steps <= 0)
        throw IntegrationError("solve: invalid integrator config");

    State y = state0;
    double t = t0;
    std::size_t gi = 0;
    if (grid[0] == t0) {
        on_sample(0, t0, y);
        ++gi;
    }

    IntegrationStats local{};
    IntegrationStats& st = stats ? *stats : local;

    Rk4Workspace w4;
    Dp5Workspace w5;
    if (config.method == Method::Rk4Fixed) w4.resize(y.size());
    else w5.resize(y.size());

    double h_ctrl = std::clamp(config.h_init, config.h_min, config.h_max);

    for (; gi < grid.size(); ++gi) {
        const double target = grid[gi];
        while (t < target) {
            if (st.steps_accepted + st.steps_rejected >= config.max_steps)
                throw IntegrationError("solve: max_steps exceeded at t = " +
                                       std::to_string(t));
            if (config.method == Method::Rk4Fixed) {
                const double h = std::min(config.h_init, target - t);
                rk4_step(rhs, y, t, h, w4);
                st.steps_accepted++;
                st.rhs_evals += 4;
                st.h_last = h;
                t = (h < config.h_init || t + h >= target) ? target : t + h;
            } else {
                const bool clipped = h_ctrl > target - t;
                const double h = clipped ? target - t : h_ctrl;
                const double err = dp5_attempt(rhs, y, t, h, config, w5);
                st.rhs_evals += 7;
                if (err <= 1.0) {
                    y.swap(w5.ynew);
                    st.steps_accepted++;
                    st.h_last = h;
                    t = clipped ? target : t + h;
                    const double fac =
                        err == 0.0 ? 5.0
                                   : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
                    const double h_new = std::clamp(h * fac, config.h_min, config.h_max);
                    h_ctrl = clipped ? std::max(h_ctrl, h_new) : h_new;
                } else {
                    st.steps_rejected++;
                    const double fac = std::max(0.2, 0.9 * std::pow(err, -0.2));
                    h_ctrl = h * fac;
                    if (h_ctrl < config.h_min)
                        throw IntegrationError(
                            "solve: step size underflow, stiffness or "
                            "discontinuity at t = " + std::to_string(t));
                }
            }
        }
        on_sample(gi, target, y);
    }
}

std::vector<State> solve(const Rhs& rhs, const State& state0, double t0,
                         double t1, const std::vector<double>& grid,
                         const IntegratorConfig& config,
                         IntegrationStats* stats) {
    std::vector<State> out;
    out.reserve(grid.size());
    solve_into(rhs, state0, t0, t1, grid, config,
               [&](std::size_t, double, const State& y) { out.push_back(y); },
               stats);
    return out;
}

}  // namespace phonsr::integrate
