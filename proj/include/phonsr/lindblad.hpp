#ifndef PHONSR_LINDBLAD_HPP
#define PHONSR_LINDBLAD_HPP

#include <Eigen/Dense>

#include "phonsr/core.hpp"
#include "phonsr/integrate.hpp"

namespace phonsr::lindblad {

using OperatorMatrix = Eigen::MatrixXcd;
using DensityMatrix = Eigen::MatrixXcd;

/// Truncated symmetric-Dicke (x) Fock composite space. Basis |j,m> (x) |n>,
/// row-major with the Dicke index outer: index = d*(n_max+1) + n, where
/// d = 0 is the fully excited state m = j and d = N is m = -j.
struct HilbertSpec {
    int n_dots = 1;
    int n_max = 1;
    long dim_cap = 20000;

    long dim() const { return static_cast<long>(n_dots + 1) * (n_max + 1); }
};

void validate_spec(const HilbertSpec& spec);

struct Operators {
    OperatorMatrix b, b_dag, sz, sp, sm, s22;
};

/// Identity-padded tensor-factor operators on the composite space.
Operators build_operators(const HilbertSpec& spec);

/// H = omega b^dag b + omega_qd S_z + eta S_22 (b + b^dag).
OperatorMatrix build_hamiltonian(const HilbertSpec& spec, const SystemParams& params);

/// Full master-equation right-hand side,
/// drho/dt = -i[H,rho] + kappa nbar L(b^dag) + kappa(1+nbar) L(b) + gamma L(S^-)
/// with L(O)rho = 2 O rho O^dag - O^dag O rho - rho O^dag O.
DensityMatrix lindblad_rhs(const DensityMatrix& rho, const OperatorMatrix& hamiltonian,
                           const Operators& ops, const SystemParams& params);

struct ThermalState {
    DensityMatrix rho;      // (n_max+1)-dimensional phonon factor
    double tail_mass;       // probability mass lost to truncation
    bool tail_warning;      // tail_mass > 1e-6
};

/// Truncated, renormalized Gibbs state p_n = nbar^n/(1+nbar)^(n+1).
/// Throws if the truncated tail mass exceeds 1e-3.
ThermalState thermal_state(double nbar, int n_max);

struct EvolveOptions {
    double t_end = -1.0;   // < 0: 4/gamma
    double dt_out = -1.0;  // < 0: min(0.002, tau_R/10)
    integrate::IntegratorConfig integrator{
        integrate::Method::Rk45Adaptive, 1e-7, 1e-10, 1e-4, 1e-14, 0.05};
    bool strict_truncation = true;  // error when the top Fock level populates
    bool spot_check_positivity = true;
    int positivity_samples = 10;
};

struct EvolveResult {
    Trajectory trajectory;
    double max_trace_error = 0.0;      // max |tr rho - 1|
    double max_hermiticity_error = 0.0;
    double max_trunc_diag = 0.0;       // max population of Fock level n_max
    double min_eigenvalue = 0.0;       // from positivity spot checks
    integrate::IntegrationStats stats{};
};

/// Evolves |j,j><j,j| (x) thermal(nbar) and samples <S_z>, <b^dag b>, <b>,
/// <S_z b>, <S^+ S^-> plus the truncation diagnostic on a uniform grid.
EvolveResult evolve(const HilbertSpec& spec, const SystemParams& params,
                    const EvolveOptions& options = {});

struct AutoCutoffResult {
    int n_max;
    EvolveResult run;  // the run at the selected cutoff
};

/// Doubling search from spec.n_max: selects the first cutoff whose peak
/// <b^dag b> agrees with the previous cutoff to < 1e-4 relative and whose
/// top-level population stays < 1e-8 over the run.
AutoCutoffResult auto_cutoff_run(const HilbertSpec& spec, const SystemParams& params,
                                 double t_end, EvolveOptions options = {});

int auto_cutoff(const HilbertSpec& spec, const SystemParams& params, double t_end);

}  // namespace phonsr::lindblad

#endif
