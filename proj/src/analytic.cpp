#include "phonsr/analytic.hpp"

#include <cmath>

namespace phonsr::analytic {

SingleDotCoefficients single_dot_coefficients(const SystemParams& params) {
    const double w = params.omega, k = params.kappa, g = params.gamma,
                 e = params.eta;
    if (k == g)
        throw std::domain_error(
            "single_dot_phonons: coefficient a_bar singular at kappa == gamma; "
            "use the moment-ODE solver");
    SingleDotCoefficients c{};
    c.a_bar = e * e * k / ((k - g) * (k * k + w * w));
    c.c_bar = 2.0 * g * k - k * k - w * w;
    c.d_bar = 2.0 * g * w;
    const double damped = (k - 2.0 * g) * (k - 2.0 * g) + w * w;
    c.b_bar = 2.0 * e * e / ((k * k + w * w) * damped);
    return c;
}

double single_dot_inversion(double t, double gamma) {
    return -0.5 + std::exp(-2.0 * gamma * t);
}

double single_dot_phonons(double t, const SystemParams& params) {
    if (params.n_dots != 1)
        throw std::domain_error("single_dot_phonons: requires n_dots == 1");
    const auto c = single_dot_coefficients(params);
    const double g = params.gamma, k = params.kappa, w = params.omega;
    return params.nbar + c.a_bar * std::exp(-2.0 * g * t) -
           (c.a_bar + c.b_bar * c.c_bar) * std::exp(-2.0 * k * t) +
           c.b_bar * std::exp(-(2.0 * g + k) * t) *
               (c.c_bar * std::cos(w * t) - c.d_bar * std::sin(w * t));
}

SuperradianceScales superradiance_scales(int n_dots, double gamma) {
    if (n_dots < 1)
        throw std::domain_error("superradiance_scales: n_dots >= 1 required");
    const double tau_r = 1.0 / (2.0 * gamma * n_dots);
    return {tau_r, tau_r * std::log(static_cast<double>(n_dots))};
}

double large_n_inversion(double t, int n_dots, double gamma) {
    const auto s = superradiance_scales(n_dots, gamma);
    return -(0.5 * n_dots) * std::tanh((t - s.t0) / (2.0 * s.tau_r));
}

double large_n_intensity(double t, int n_dots, double gamma) {
    const auto s = superradiance_scales(n_dots, gamma);
    const double sech = 1.0 / std::cosh((t - s.t0) / (2.0 * s.tau_r));
    return 0.5 * gamma * n_dots * n_dots * sech * sech;
}

}  // namespace phonsr::analytic
