#include "phonsr/moments.hpp"

#include <cmath>

#include "phonsr/analytic.hpp"

namespace phonsr::moments {

namespace {

constexpr Complex kI{0.0, 1.0};

void require_scheme(const MomentState& state, ClosureScheme expected) {
    if (state.scheme != expected)
        throw std::invalid_argument("moment rhs: state carries scheme " +
                                    to_string(state.scheme) + ", expected " +
                                    to_string(expected));
}

// Common six-slot system with the S_z^2 correlators supplied by the caller:
// Exact1 uses S_z^2 = 1/4, the mean-field variants factorize.
void six_slot_rhs(const integrate::State& y, integrate::State& dy,
                  const SystemParams& p, Complex sz2, Complex sz2b,
                  Complex sz2bd) {
    const double j = p.j(), g = p.gamma, k = p.kappa, w = p.omega, e = p.eta;
    const Complex sz = y[kSz], bdb = y[kBdB], szb = y[kSzB], szbd = y[kSzBd],
                  b = y[kB], bd = y[kBd];
    dy[kSz] = -2.0 * g * (sz - sz2 + j * (j + 1.0));
    dy[kBdB] = kI * e * (szb - szbd + j * b - j * bd) - 2.0 * k * bdb +
               2.0 * k * p.nbar;
    dy[kSzB] = -(k + 2.0 * g + kI * w) * szb + 2.0 * g * sz2b -
               kI * e * (sz2 + j * sz) - 2.0 * g * j * (j + 1.0) * b;
    dy[kSzBd] = -(k + 2.0 * g - kI * w) * szbd + 2.0 * g * sz2bd +
                kI * e * (sz2 + j * sz) - 2.0 * g * j * (j + 1.0) * bd;
    dy[kB] = -(k + kI * w) * b - kI * e * (sz + j);
    dy[kBd] = -(k - kI * w) * bd + kI * e * (sz + j);
}

void exact2_rhs(const integrate::State& y, integrate::State& dy,
                const SystemParams& p) {
    const double g = p.gamma, k = p.kappa, w = p.omega, e = p.eta;
    const Complex sz = y[kSz2q], spsm = y[kSpSm], bdb = y[kBdB2q],
                  szb = y[kSzB2q], spsmb = y[kSpSmB], b = y[kB2q],
                  szbd = y[kSzBd2q], spsmbd = y[kSpSmBd], bd = y[kBd2q];
    dy[kSz2q] = -2.0 * g * spsm;
    dy[kSpSm] = 8.0 * g * (1.0 + sz - spsm);
    dy[kBdB2q] = kI * e * (szb - szbd + b - bd) - 2.0 * k * bdb + 2.0 * k * p.nbar;
    dy[kSzB2q] = -(k + kI * w) * szb - 2.0 * g * spsmb -
                 kI * e * (2.0 + 2.0 * sz - spsm);
    dy[kSpSmB] = -(k + 8.0 * g + kI * w) * spsmb - 2.0 * kI * e * (1.0 + sz) +
                 8.0 * g * (b + szb);
    dy[kB2q] = -(k + kI * w) * b - kI * e * (1.0 + sz);
    // hermitian conjugates of the last three equations
    dy[kSzBd2q] = -(k - kI * w) * szbd - 2.0 * g * spsmbd +
                  kI * e * (2.0 + 2.0 * sz - spsm);
    dy[kSpSmBd] = -(k + 8.0 * g - kI * w) * spsmbd + 2.0 * kI * e * (1.0 + sz) +
                  8.0 * g * (bd + szbd);
    dy[kBd2q] = -(k - kI * w) * bd + kI * e * (1.0 + sz);
}

}  // namespace

MomentState initial_state(ClosureScheme scheme, const SystemParams& params) {
    MomentState s{scheme, {}};
    if (scheme == ClosureScheme::Exact2) {
        s.values.assign(kSize2, Complex{0.0, 0.0});
        s.values[kSz2q] = 1.0;
        s.values[kSpSm] = 2.0;
        s.values[kBdB2q] = params.nbar;
    } else {
        s.values.assign(kSize1, Complex{0.0, 0.0});
        s.values[kSz] = params.j();
        s.values[kBdB] = params.nbar;
    }
    return s;
}

MomentState rhs_exact1(const MomentState& state, const SystemParams& params) {
    require_scheme(state, ClosureScheme::Exact1);
    if (params.n_dots != 1)
        throw std::invalid_argument("rhs_exact1: requires n_dots == 1");
    MomentState d{state.scheme, integrate::State(kSize1)};
    six_slot_rhs(state.values, d.values, params, 0.25,
                 0.25 * state.values[kB], 0.25 * state.values[kBd]);
    return d;
}

MomentState rhs_exact2(const MomentState& state, const SystemParams& params) {
    require_scheme(state, ClosureScheme::Exact2);
    if (params.n_dots != 2)
        throw std::invalid_argument("rhs_exact2: requires n_dots == 2");
    MomentState d{state.scheme, integrate::State(kSize2)};
    exact2_rhs(state.values, d.values, params);
    return d;
}

MomentState rhs_meanfield(const MomentState& state, const SystemParams& params,
                          ClosureScheme variant) {
    if (variant != ClosureScheme::MeanFieldA && variant != ClosureScheme::MeanFieldB)
        throw std::invalid_argument("rhs_meanfield: variant must be a mean-field scheme");
    require_scheme(state, variant);
    if (params.n_dots < 2)
        throw std::invalid_argument("rhs_meanfield: requires n_dots >= 2");
    const Complex sz = state.values[kSz];
    const Complex sz2 = sz * sz;
    Complex sz2b, sz2bd;
    if (variant == ClosureScheme::MeanFieldA) {
        sz2b = sz * state.values[kSzB];
        sz2bd = sz * state.values[kSzBd];
    } else {
        sz2b = sz2 * state.values[kB];
        sz2bd = sz2 * state.values[kBd];
    }
    MomentState d{state.scheme, integrate::State(kSize1)};
    six_slot_rhs(state.values, d.values, params, sz2, sz2b, sz2bd);
    return d;
}

MomentState rhs(const MomentState& state, const SystemParams& params) {
    switch (state.scheme) {
        case ClosureScheme::Exact1: return rhs_exact1(state, params);
        case ClosureScheme::Exact2: return rhs_exact2(state, params);
        default: return rhs_meanfield(state, params, state.scheme);
    }
}

double default_t_end(ClosureScheme scheme, const SystemParams& params) {
    if (scheme == ClosureScheme::Exact1 || scheme == ClosureScheme::Exact2)
        return 4.0 / params.gamma;
    return 12.0 * analytic::superradiance_scales(params.n_dots, params.gamma).t0;
}

double default_dt_out(const SystemParams& params) {
    const double tau_r = 1.0 / (2.0 * params.gamma * params.n_dots);
    return std::min(0.002, tau_r / 10.0);
}

namespace {
ObservableRecord record_from(const MomentState& s, const SystemParams& p, double t) {
    ObservableRecord rec;
    rec.t = t;
    if (s.scheme == ClosureScheme::Exact2) {
        rec.sz = s.values[kSz2q].real();
        rec.phonons = s.values[kBdB2q].real();
        rec.b_mean = s.values[kB2q];
        rec.szb = s.values[kSzB2q];
        rec.extra["spsm"] = s.values[kSpSm];
        rec.extra["spsmb"] = s.values[kSpSmB];
        rec.intensity = 2.0 * p.gamma * s.values[kSpSm].real();
    } else {
        rec.sz = s.values[kSz].real();
        rec.phonons = s.values[kBdB].real();
        rec.b_mean = s.values[kB];
        rec.szb = s.values[kSzB];
        const MomentState d = rhs(s, p);
        rec.intensity = -d.values[kSz].real();
    }
    return rec;
}
}  // namespace

Trajectory simulate(const SystemParams& params, ClosureScheme scheme,
                    const SimulateOptions& options,
                    integrate::IntegrationStats* stats) {
    validate(params);
    if (scheme == ClosureScheme::Exact1 && params.n_dots != 1)
        throw std::invalid_argument("simulate: Exact1 requires n_dots == 1");
    if (scheme == ClosureScheme::Exact2 && params.n_dots != 2)
        throw std::invalid_argument("simulate: Exact2 requires n_dots == 2");
    if ((scheme == ClosureScheme::MeanFieldA || scheme == ClosureScheme::MeanFieldB) &&
        params.n_dots < 2)
        throw std::invalid_argument("simulate: mean-field closure requires n_dots >= 2");

    const double t_end =
        options.t_end > 0.0 ? options.t_end : default_t_end(scheme, params);
    const double dt =
        options.dt_out > 0.0 ? options.dt_out : default_dt_out(params);

    std::vector<double> grid;
    const auto n_steps = static_cast<std::size_t>(std::floor(t_end / dt + 1e-9));
    grid.reserve(n_steps + 1);
    for (std::size_t i = 0; i <= n_steps; ++i)
        grid.push_back(std::min(i * dt, t_end));

    const MomentState y0 = initial_state(scheme, params);
    auto rhs_fn = [&](double, const integrate::State& y, integrate::State& dy) {
        const MomentState d = rhs(MomentState{scheme, y}, params);
        dy = d.values;
    };
    const auto samples =
        integrate::solve(rhs_fn, y0.values, 0.0, t_end, grid, options.integrator, stats);

    Trajectory traj;
    traj.params = params;
    traj.scheme = to_string(scheme);
    for (std::size_t i = 0; i < samples.size(); ++i)
        traj.append(record_from(MomentState{scheme, samples[i]}, params, grid[i]));
    return traj;
}

}  // namespace phonsr::moments
