#ifndef PHONSR_CORE_HPP
#define PHONSR_CORE_HPP

#include <complex>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace phonsr {

using Complex = std::complex<double>;

/// Physical rates and counts defining one scenario. All rates are in units
/// of the single-dot decay rate gamma; time is in units of 1/gamma.
struct SystemParams {
    int n_dots = 1;       // N
    double omega = 1.0;   // mechanical mode frequency
    double eta = 0.0;     // QD-phonon coupling
    double kappa = 1.0;   // mechanical damping rate
    double gamma = 1.0;   // single-QD decay rate, the unit of all rates
    double nbar = 0.0;    // mean thermal phonon occupation
    double omega_qd = 0.0;  // QD transition frequency; drops out of all
                            // tracked observables, kept for invariance tests

    double j() const { return 0.5 * n_dots; }
};

struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Returns params unchanged if all bounds hold; otherwise throws a
/// ValidationError naming every violated bound.
SystemParams validate(const SystemParams& params);

/// Bose-Einstein occupation 1/[exp(hbar*omega/kB*T) - 1]. The only
/// absolute-unit entry point: omega_abs in rad/s, temperature in kelvin.
double thermal_occupation(double omega_abs, double temperature);

enum class ClosureScheme { Exact1, Exact2, MeanFieldA, MeanFieldB };

std::string to_string(ClosureScheme scheme);

/// One time sample of the tracked observables. <S_z b^dag> is never stored;
/// it is conj(szb) by construction.
struct ObservableRecord {
    double t = 0.0;
    double sz = 0.0;        // <S_z>
    double phonons = 0.0;   // <b^dag b>
    double intensity = 0.0; // I(t) = -d<S_z>/dt
    Complex b_mean{0.0, 0.0};
    Complex szb{0.0, 0.0};
    std::map<std::string, Complex> extra;       // scheme-specific correlators
    std::optional<double> trunc_diag;           // Lindblad truncation diagnostic
};

struct Trajectory {
    SystemParams params;
    std::string scheme;
    std::vector<ObservableRecord> records;

    // records must be strictly increasing in t, starting at t = 0
    void append(ObservableRecord rec);

    // closure schemes may undershoot zero; flagged, not rejected
    std::size_t negative_phonon_count() const;
};

/// Fills the intensity column from -d<S_z>/dt via centered finite
/// differences (second-order one-sided at the endpoints).
Trajectory intensity_from_inversion(Trajectory trajectory);

}  // namespace phonsr

#endif
