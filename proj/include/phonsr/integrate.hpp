#ifndef PHONSR_INTEGRATE_HPP
#define PHONSR_INTEGRATE_HPP

#include <functional>
#include <vector>

#include "phonsr/core.hpp"

namespace phonsr::integrate {

using State = std::vector<Complex>;
using Rhs = std::function<void(double t, const State& y, State& dydt)>;

enum class Method { Rk4Fixed, Rk45Adaptive };

struct IntegratorConfig {
    Method method = Method::Rk45Adaptive;
    double rtol = 1e-9;
    double atol = 1e-12;
    double h_init = 1e-3;
    double h_min = 1e-14;
    double h_max = 0.1;
    long max_steps = 50'000'000;
};

struct IntegrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One classical RK4 step. Throws if any stage derivative is non-finite,
/// naming the offending slot.
State step_rk4(const Rhs& rhs, const State& state, double t, double h);

struct IntegrationStats {
    long steps_accepted = 0;
    long steps_rejected = 0;
    long rhs_evals = 0;
    double h_last = 0.0;
};

using SampleCallback =
    std::function<void(std::size_t index, double t, const State& y)>;

/// Integrates state0 over [t0, t1], invoking the callback at each grid point
/// (strictly increasing, within the span). Steps land exactly on grid
/// points. An empty grid performs no integration.
void solve_into(const Rhs& rhs, const State& state0, double t0, double t1,
                const std::vector<double>& grid, const IntegratorConfig& config,
                const SampleCallback& on_sample,
                IntegrationStats* stats = nullptr);

/// As solve_into, collecting the sampled states.
std::vector<State> solve(const Rhs& rhs, const State& state0, double t0,
                         double t1, const std::vector<double>& grid,
                         const IntegratorConfig& config,
                         IntegrationStats* stats = nullptr);

}  // namespace phonsr::integrate

#endif
