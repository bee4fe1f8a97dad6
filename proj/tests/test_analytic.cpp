#include <cmath>
#include <random>

#include "doctest.h"
#include "phonsr/analytic.hpp"
#include "phonsr/integrate.hpp"

using namespace phonsr;
using namespace phonsr::analytic;

namespace {

SystemParams fig2_params() {
    SystemParams p;
    p.n_dots = 1;
    p.omega = 15.0;
    p.eta = 5.0;
    p.kappa = 0.5;
    p.nbar = 10.0;
    return p;
}

}  // namespace

TEST_CASE("single-dot inversion decays from 1/2 to -1/2") {
    CHECK(single_dot_inversion(0.0) == doctest::Approx(0.5));
    CHECK(single_dot_inversion(std::log(2.0) / 2.0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(single_dot_inversion(1.0) == doctest::Approx(-0.5 + std::exp(-2.0)).epsilon(1e-15));
    CHECK(single_dot_inversion(100.0) == doctest::Approx(-0.5).epsilon(1e-15));
    // gamma rescales time
    CHECK(single_dot_inversion(2.0, 0.5) == doctest::Approx(single_dot_inversion(1.0, 1.0)));
}

TEST_CASE("single-dot phonons match an independent integration of the N=1 system") {
    // Oracle: the linear moment system for one dot, restated here from
    // scratch and integrated with a tight adaptive tolerance. For N = 1 the
    // inversion decouples, sz(t) = -1/2 + e^{-2gt}, and with <Sz^2> = 1/4 the
    // remaining five moments are linear in (bdb, szb, szbd, b, bd).
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uw(2.0, 30.0), uk(0.05, 6.0),
        ue(0.5, 8.0), un(0.0, 12.0);
    for (int trial = 0; trial < 6; ++trial) {
        SystemParams p;
        p.n_dots = 1;
        p.omega = uw(rng);
        p.kappa = uk(rng);
        if (std::abs(p.kappa - p.gamma) < 0.05) p.kappa += 0.2;
        p.eta = ue(rng);
        p.nbar = un(rng);
        const double g = p.gamma, k = p.kappa, w = p.omega, e = p.eta,
                     nb = p.nbar;
        const Complex I(0.0, 1.0);
        auto rhs = [&](double t, const integrate::State& y,
                       integrate::State& dy) {
            const Complex sz(-0.5 + std::exp(-2.0 * g * t), 0.0);
            const Complex bdb = y[0], szb = y[1], szbd = y[2], b = y[3],
                          bd = y[4];
            dy[0] = I * e * (szb - szbd + 0.5 * (b - bd)) - 2.0 * k * bdb +
                    2.0 * k * nb;
            dy[1] = -(k + 2.0 * g + I * w) * szb + 2.0 * g * (0.25 * b) -
                    I * e * (0.25 + 0.5 * sz) - 2.0 * g * 0.75 * b;
            dy[2] = -(k + 2.0 * g - I * w) * szbd + 2.0 * g * (0.25 * bd) +
                    I * e * (0.25 + 0.5 * sz) - 2.0 * g * 0.75 * bd;
            dy[3] = -(k + I * w) * b - I * e * (sz + 0.5);
            dy[4] = -(k - I * w) * bd + I * e * (sz + 0.5);
        };
        integrate::State y0 = {Complex(nb, 0.0), {}, {}, {}, {}};
        std::vector<double> grid;
        for (int i = 0; i <= 30; ++i) grid.push_back(0.1 * i);
        integrate::IntegratorConfig cfg;
        cfg.rtol = 1e-12;
        cfg.atol = 1e-13;
        const auto samples = integrate::solve(rhs, y0, 0.0, 3.0, grid, cfg);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            CHECK(single_dot_phonons(grid[i], p) ==
                  doctest::Approx(samples[i][0].real()).epsilon(5e-9));
        }
    }
}

TEST_CASE("single-dot phonons start at nbar and relax back to nbar") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> uw(2.0, 40.0), uk(0.05, 8.0),
        ue(0.0, 10.0), un(0.0, 12.0);
    for (int trial = 0; trial < 40; ++trial) {
        SystemParams p;
        p.n_dots = 1;
        p.omega = uw(rng);
        p.kappa = uk(rng);
        if (std::abs(p.kappa - p.gamma) < 0.05) p.kappa += 0.2;
        p.eta = ue(rng);
        p.nbar = un(rng);
        CHECK(single_dot_phonons(0.0, p) == doctest::Approx(p.nbar).epsilon(1e-10));
        const double t_late = 50.0 / std::min(p.kappa, p.gamma);
        CHECK(single_dot_phonons(t_late, p) == doctest::Approx(p.nbar).epsilon(1e-8));
    }
}

TEST_CASE("single-dot phonons: frozen spot value at the reference parameters") {
    SystemParams p = fig2_params();
    const auto c = single_dot_coefficients(p);
    // with omega=15, eta=5, kappa=1/2, gamma=1, nbar=10:
    // a_bar = 25*(1/2) / ((-1/2)(1/4 + 225)) = -100/901
    CHECK(c.a_bar == doctest::Approx(-100.0 / 901.0).epsilon(1e-14));
    CHECK(c.c_bar == doctest::Approx(1.0 - 0.25 - 225.0).epsilon(1e-14));
    CHECK(c.d_bar == doctest::Approx(30.0).epsilon(1e-14));
    CHECK(c.b_bar == doctest::Approx(50.0 / (225.25 * 227.25)).epsilon(1e-13));
    // u(0) = a_bar - (a_bar + b_bar c_bar) + b_bar c_bar = 0 exactly
    CHECK(single_dot_phonons(0.0, p) == doctest::Approx(10.0).epsilon(1e-14));
}

TEST_CASE("single-dot phonons reject the kappa == gamma line and N > 1") {
    SystemParams p = fig2_params();
    p.kappa = p.gamma;
    CHECK_THROWS_AS(single_dot_phonons(1.0, p), std::domain_error);
    p = fig2_params();
    p.n_dots = 2;
    CHECK_THROWS_AS(single_dot_phonons(1.0, p), std::domain_error);
}

TEST_CASE("superradiance scales") {
    const auto s1 = superradiance_scales(1);
    CHECK(s1.tau_r == doctest::Approx(0.5));
    CHECK(s1.t0 == doctest::Approx(0.0));
    const auto s200 = superradiance_scales(200);
    CHECK(s200.tau_r == doctest::Approx(1.0 / 400.0).epsilon(1e-15));
    CHECK(s200.t0 == doctest::Approx(0.01324579341637009).epsilon(1e-14));
    // gamma rescales both
    const auto sg = superradiance_scales(200, 2.0);
    CHECK(sg.tau_r == doctest::Approx(0.5 * s200.tau_r));
    CHECK(sg.t0 == doctest::Approx(0.5 * s200.t0));
    CHECK_THROWS_AS(superradiance_scales(0), std::domain_error);
}

TEST_CASE("large-N inversion shape") {
    const int n = 200;
    const auto s = superradiance_scales(n);
    // at t = 0 the tanh argument is -ln(N)/2, so sz(0) = (N/2)(N-1)/(N+1)
    CHECK(large_n_inversion(0.0, n) ==
          doctest::Approx(0.5 * n * (n - 1.0) / (n + 1.0)).epsilon(1e-13));
    CHECK(large_n_inversion(s.t0, n) == doctest::Approx(0.0).epsilon(1e-13));
    // odd symmetry about t0
    for (double dt : {0.001, 0.004, 0.02}) {
        CHECK(large_n_inversion(s.t0 + dt, n) ==
              doctest::Approx(-large_n_inversion(s.t0 - dt, n)).epsilon(1e-12));
    }
    // saturates at -N/2
    CHECK(large_n_inversion(1.0, n) == doctest::Approx(-100.0).epsilon(1e-12));
    // strictly decreasing through the emission burst (tanh saturates to
    // exactly -N/2 in double precision well before 12 t0)
    double prev = large_n_inversion(0.0, n);
    for (int i = 1; i <= 100; ++i) {
        const double cur = large_n_inversion(2.0 * s.t0 * i / 100.0, n);
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("large-N intensity is the exact derivative and peaks at gamma N^2/2") {
    const int n = 200;
    const auto s = superradiance_scales(n);
    const double h = 1e-7;
    for (double t : {0.005, s.t0, 0.03}) {
        const double fd = -(large_n_inversion(t + h, n) - large_n_inversion(t - h, n)) / (2 * h);
        CHECK(large_n_intensity(t, n) == doctest::Approx(fd).epsilon(1e-6));
    }
    CHECK(large_n_intensity(s.t0, n) == doctest::Approx(0.5 * n * n).epsilon(1e-14));
    CHECK(large_n_intensity(s.t0 - 0.001, n) < large_n_intensity(s.t0, n));
    CHECK(large_n_intensity(s.t0 + 0.001, n) < large_n_intensity(s.t0, n));
}
