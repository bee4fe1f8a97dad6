#include "phonsr/core.hpp"

#include <cmath>

namespace phonsr {

SystemParams validate(const SystemParams& params) {
    std::vector<std::string> violations;
    if (params.n_dots < 1) violations.push_back("n_dots >= 1");
    if (!(params.omega > 0.0)) violations.push_back("omega > 0");
    if (!(params.eta >= 0.0)) violations.push_back("eta >= 0");
    if (!(params.kappa > 0.0)) violations.push_back("kappa > 0");
    if (!(params.gamma > 0.0)) violations.push_back("gamma > 0");
    if (!(params.nbar >= 0.0)) violations.push_back("nbar >= 0");
    if (!violations.empty()) {
        std::string msg = "invalid parameters, violated:";
        for (const auto& v : violations) msg += " [" + v + "]";
        throw ValidationError(msg);
    }
    return params;
}

double thermal_occupation(double omega_abs, double temperature) {
    if (!(omega_abs > 0.0))
        throw ValidationError("thermal_occupation: omega_abs must be > 0");
    if (!(temperature > 0.0))
        throw ValidationError(
            "thermal_occupation: temperature must be > 0 "
            "(request the zero-temperature limit as nbar = 0)");
    constexpr double hbar = 1.054571817e-34;  // J s
    constexpr double kB = 1.380649e-23;       // J/K
    const double x = hbar * omega_abs / (kB * temperature);
    return 1.0 / std::expm1(x);
}

std::string to_string(ClosureScheme scheme) {
    switch (scheme) {
        case ClosureScheme::Exact1: return "exact1";
        case ClosureScheme::Exact2: return "exact2";
        case ClosureScheme::MeanFieldA: return "meanfield_a";
        case ClosureScheme::MeanFieldB: return "meanfield_b";
    }
    return "unknown";
}

void Trajectory::append(ObservableRecord rec) {
    if (records.empty()) {
        if (rec.t != 0.0)
            throw std::invalid_argument("Trajectory: first record must be at t = 0");
    } else if (!(rec.t > records.back().t)) {
        throw std::invalid_argument("Trajectory: records must be strictly increasing in t");
    }
    records.push_back(std::move(rec));
}

std::size_t Trajectory::negative_phonon_count() const {
    std::size_t n = 0;
    for (const auto& r : records)
        if (r.phonons < 0.0) ++n;
    return n;
}

Trajectory intensity_from_inversion(Trajectory trajectory) {
    auto& recs = trajectory.records;
    const std::size_t n = recs.size();
    if (n < 3)
        throw std::invalid_argument("intensity_from_inversion: need at least 3 records");
    // grid may be non-uniform; use the three-point formulas for unequal spacing
    for (std::size_t i = 0; i < n; ++i) {
        double dsz;
        if (i == 0) {
            const double h1 = recs[1].t - recs[0].t;
            const double h2 = recs[2].t - recs[1].t;
            dsz = (-(2 * h1 + h2) / (h1 * (h1 + h2))) * recs[0].sz +
                  ((h1 + h2) / (h1 * h2)) * recs[1].sz -
                  (h1 / (h2 * (h1 + h2))) * recs[2].sz;
        } else if (i == n - 1) {
            const double h1 = recs[n - 2].t - recs[n - 3].t;
            const double h2 = recs[n - 1].t - recs[n - 2].t;
            dsz = (h2 / (h1 * (h1 + h2))) * recs[n - 3].sz -
                  ((h1 + h2) / (h1 * h2)) * recs[n - 2].sz +
                  ((h1 + 2 * h2) / (h2 * (h1 + h2))) * recs[n - 1].sz;
        } else {
            const double h1 = recs[i].t - recs[i - 1].t;
            const double h2 = recs[i + 1].t - recs[i].t;
            dsz = (-h2 / (h1 * (h1 + h2))) * recs[i - 1].sz +
                  ((h2 - h1) / (h1 * h2)) * recs[i].sz +
                  (h1 / (h2 * (h1 + h2))) * recs[i + 1].sz;
        }
        recs[i].intensity = -dsz;
    }
    return trajectory;
}

}  // namespace phonsr
