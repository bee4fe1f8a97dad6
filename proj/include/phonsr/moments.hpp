#ifndef PHONSR_MOMENTS_HPP
#define PHONSR_MOMENTS_HPP

#include "phonsr/core.hpp"
#include "phonsr/integrate.hpp"

namespace phonsr::moments {

/// Complex-valued vector of tracked expectation values for one closure
/// scheme. Conjugate pairs are stored and integrated independently; the
/// symmetry <b^dag> = conj<b> doubles as an integration-quality diagnostic.
struct MomentState {
    ClosureScheme scheme;
    integrate::State values;
};

// slot layout, Exact1 / MeanFieldA / MeanFieldB
enum Slot1 : std::size_t { kSz = 0, kBdB = 1, kSzB = 2, kSzBd = 3, kB = 4, kBd = 5 };
inline constexpr std::size_t kSize1 = 6;

// slot layout, Exact2 (symmetric subspace of two dots)
enum Slot2 : std::size_t {
    kSz2q = 0, kSpSm = 1, kBdB2q = 2, kSzB2q = 3, kSpSmB = 4, kB2q = 5,
    kSzBd2q = 6, kSpSmBd = 7, kBd2q = 8
};
inline constexpr std::size_t kSize2 = 9;

MomentState initial_state(ClosureScheme scheme, const SystemParams& params);

MomentState rhs_exact1(const MomentState& state, const SystemParams& params);
MomentState rhs_exact2(const MomentState& state, const SystemParams& params);
MomentState rhs_meanfield(const MomentState& state, const SystemParams& params,
                          ClosureScheme variant);

/// Dispatch on state.scheme; checks scheme/params compatibility.
MomentState rhs(const MomentState& state, const SystemParams& params);

struct SimulateOptions {
    double t_end = -1.0;   // < 0: default (4 for N <= 2, 12 t0 for mean-field)
    double dt_out = -1.0;  // < 0: default min(0.002, tau_R/10)
    integrate::IntegratorConfig integrator{};
};

double default_t_end(ClosureScheme scheme, const SystemParams& params);
double default_dt_out(const SystemParams& params);

/// Integrates the chosen moment system from the standard initial conditions
/// (all dots excited, thermal phonons, zero correlators) on a uniform grid.
Trajectory simulate(const SystemParams& params, ClosureScheme scheme,
                    const SimulateOptions& options = {},
                    integrate::IntegrationStats* stats = nullptr);

}  // namespace phonsr::moments

#endif
