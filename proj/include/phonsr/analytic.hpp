#ifndef PHONSR_ANALYTIC_HPP
#define PHONSR_ANALYTIC_HPP

#include "phonsr/core.hpp"

namespace phonsr::analytic {

/// Coefficients of the closed-form N=1 phonon-number solution.
struct SingleDotCoefficients {
    double a_bar, b_bar, c_bar, d_bar;
};

SingleDotCoefficients single_dot_coefficients(const SystemParams& params);

/// <S_z(t)> = -1/2 + exp(-2 gamma t) for one initially excited dot.
double single_dot_inversion(double t, double gamma = 1.0);

/// Closed-form <b^dag b>(t) for N = 1. Throws for kappa == gamma, where the
/// coefficient a_bar is singular (removable in the physics, not the formula);
/// use the moment-ODE solver on that line.
double single_dot_phonons(double t, const SystemParams& params);

/// tau_R = 1/(2 gamma N), t0 = tau_R ln N.
struct SuperradianceScales {
    double tau_r;
    double t0;
};

SuperradianceScales superradiance_scales(int n_dots, double gamma = 1.0);

/// Large-N collective inversion, -(N/2) tanh[(t - t0)/(2 tau_R)].
double large_n_inversion(double t, int n_dots, double gamma = 1.0);

/// Exact -d/dt of large_n_inversion: (gamma N^2 / 2) sech^2[(t - t0)/(2 tau_R)].
double large_n_intensity(double t, int n_dots, double gamma = 1.0);

}  // namespace phonsr::analytic

#endif
