#include "phonsr/lindblad.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "phonsr/analytic.hpp"

namespace phonsr::lindblad {

namespace {

constexpr Complex kI{0.0, 1.0};

// Tensor factors on the Dicke ladder (dimension N+1, d = 0 is m = j) and the
// truncated Fock space (dimension n_max+1).
Eigen::MatrixXcd fock_annihilation(int n_max) {
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(n_max + 1, n_max + 1);
    for (int n = 1; n <= n_max; ++n) b(n - 1, n) = std::sqrt(double(n));
    return b;
}

Eigen::MatrixXcd dicke_lowering(int n_dots) {
    const double j = 0.5 * n_dots;
    Eigen::MatrixXcd sm = Eigen::MatrixXcd::Zero(n_dots + 1, n_dots + 1);
    for (int d = 0; d < n_dots; ++d) {
        const double m = j - d;  // S-|j,m> = sqrt((j+m)(j-m+1)) |j,m-1>
        sm(d + 1, d) = std::sqrt((j + m) * (j - m + 1.0));
    }
    return sm;
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index k = 0; k < a.cols(); ++k)
            out.block(i * b.rows(), k * b.cols(), b.rows(), b.cols()) = a(i, k) * b;
    return out;
}

}  // namespace

void validate_spec(const HilbertSpec& spec) {
    if (spec.n_dots < 1)
        throw std::invalid_argument("HilbertSpec: n_dots >= 1 required");
    if (spec.n_max < 1)
        throw std::invalid_argument("HilbertSpec: n_max >= 1 required");
    if (spec.dim() > spec.dim_cap)
        throw std::invalid_argument(
            "HilbertSpec: composite dimension " + std::to_string(spec.dim()) +
            " exceeds cap " + std::to_string(spec.dim_cap));
}

Operators build_operators(const HilbertSpec& spec) {
    validate_spec(spec);
    const int nd = spec.n_dots, nf = spec.n_max + 1;
    const double j = 0.5 * nd;
    const Eigen::MatrixXcd id_d = Eigen::MatrixXcd::Identity(nd + 1, nd + 1);
    const Eigen::MatrixXcd id_f = Eigen::MatrixXcd::Identity(nf, nf);
    const Eigen::MatrixXcd bf = fock_annihilation(spec.n_max);
    const Eigen::MatrixXcd smd = dicke_lowering(nd);
    Eigen::MatrixXcd szd = Eigen::MatrixXcd::Zero(nd + 1, nd + 1);
    for (int d = 0; d <= nd; ++d) szd(d, d) = j - d;

    Operators ops;
    ops.b = kron(id_d, bf);
    ops.b_dag = ops.b.adjoint();
    ops.sz = kron(szd, id_f);
    ops.sm = kron(smd, id_f);
    ops.sp = ops.sm.adjoint();
    ops.s22 = ops.sz + j * Eigen::MatrixXcd::Identity(spec.dim(), spec.dim());
    return ops;
}

OperatorMatrix build_hamiltonian(const HilbertSpec& spec, const SystemParams& params) {
    const Operators ops = build_operators(spec);
    OperatorMatrix h = params.omega * (ops.b_dag * ops.b) +
                       params.eta * (ops.s22 * (ops.b + ops.b_dag));
    if (params.omega_qd != 0.0) h += params.omega_qd * ops.sz;
    return h;
}

DensityMatrix lindblad_rhs(const DensityMatrix& rho, const OperatorMatrix& hamiltonian,
                           const Operators& ops, const SystemParams& params) {
    if (rho.rows() != hamiltonian.rows() || rho.cols() != hamiltonian.cols())
        throw std::invalid_argument("lindblad_rhs: dimension mismatch");
    DensityMatrix out = -kI * (hamiltonian * rho - rho * hamiltonian);
    const auto dissipate = [&](double rate, const OperatorMatrix& op) {
        const OperatorMatrix opd = op.adjoint();
        const OperatorMatrix opdop = opd * op;
        out += rate * (2.0 * op * rho * opd - opdop * rho - rho * opdop);
    };
    dissipate(params.kappa * params.nbar, ops.b_dag);
    dissipate(params.kappa * (1.0 + params.nbar), ops.b);
    dissipate(params.gamma, ops.sm);
    return out;
}

ThermalState thermal_state(double nbar, int n_max) {
    if (nbar < 0.0) throw std::invalid_argument("thermal_state: nbar >= 0 required");
    if (n_max < 0) throw std::invalid_argument("thermal_state: n_max >= 0 required");
    Eigen::VectorXd p(n_max + 1);
    if (nbar == 0.0) {
        p.setZero();
        p(0) = 1.0;
    } else {
        const double q = nbar / (1.0 + nbar);
        double w = 1.0 / (1.0 + nbar);
        for (int n = 0; n <= n_max; ++n, w *= q) p(n) = w;
    }
    const double kept = p.sum();
    const double tail = 1.0 - kept;
    if (tail > 1e-3)
        throw std::domain_error(
            "thermal_state: truncated tail mass " + std::to_string(tail) +
            " > 1e-3; raise n_max");
    ThermalState ts;
    ts.rho = (p / kept).cast<Complex>().asDiagonal();
    ts.tail_mass = tail;
    ts.tail_warning = tail > 1e-6;
    return ts;
}

EvolveResult evolve(const HilbertSpec& spec, const SystemParams& params,
                    const EvolveOptions& options) {
    validate_spec(spec);
    validate(params);
    if (spec.n_dots != params.n_dots)
        throw std::invalid_argument("evolve: spec/params n_dots mismatch");

    // Starting from |j,j><j,j| (x) thermal, every generator (H and all three
    // dissipators) maps states diagonal in the Dicke index to states diagonal
    // in the Dicke index, so rho is stored as N+1 independent Fock-space
    // blocks rho_d. The evolution runs in the interaction picture of
    // omega b^dag b: the free rotation (the stiffest, fastest scale, with
    // coherence frequencies up to omega * n_max) is absorbed analytically and
    // <b>, <S_z b> are re-phased by e^{-i omega t} when sampling. omega_qd
    // generates a constant phase per block and drops out identically.
    const int nf = spec.n_max + 1;
    const int nb = spec.n_dots + 1;
    const double j = 0.5 * spec.n_dots;
    const double knb = params.kappa * params.nbar;
    const double knb1 = params.kappa * (1.0 + params.nbar);

    std::vector<double> sqrt_n(nf + 1);
    for (int n = 0; n <= nf; ++n) sqrt_n[n] = std::sqrt(double(n));
    // S+S- eigenvalue (j+m)(j-m+1) per block; also the block-to-block feed
    // coefficient of 2 gamma S- rho S+
    std::vector<double> s_coll(nb), m_coll(nb), eta_d(nb);
    for (int d = 0; d < nb; ++d) {
        const double m = j - d;
        m_coll[d] = m;
        s_coll[d] = (j + m) * (j - m + 1.0);
        eta_d[d] = params.eta * (m + j);  // eta * S22 eigenvalue
    }
    // per-block diagonal damping weights W_d(n, n'); the b b^dag diagonal is
    // the one of the truncated operators (0 at the top level), which keeps the
    // truncated heating channel trace-preserving exactly like the dense form
    const auto bbdag = [nf](int n) { return n + 1 < nf ? double(n + 1) : 0.0; };
    std::vector<Eigen::MatrixXd> weights(nb, Eigen::MatrixXd(nf, nf));
    for (int d = 0; d < nb; ++d)
        for (int n = 0; n < nf; ++n)
            for (int n2 = 0; n2 < nf; ++n2)
                weights[d](n, n2) = knb1 * (n + n2) + knb * (bbdag(n) + bbdag(n2)) +
                                    2.0 * params.gamma * s_coll[d];

    // initial state: the d = 0 block carries the thermal phonon factor
    const ThermalState th = thermal_state(params.nbar, spec.n_max);
    integrate::State y0(static_cast<std::size_t>(nb) * nf * nf, Complex{0.0, 0.0});
    {
        Eigen::Map<Eigen::MatrixXcd> rho0(y0.data(), nf, nf);
        rho0 = th.rho;
    }

    const auto block = [nf](auto* base, int d) {
        return base + static_cast<std::size_t>(d) * nf * nf;
    };
    // Every channel couples (n, n2) only to its nearest neighbours, so the
    // whole generator is a 9-point stencil in (n, n2). It is evaluated per
    // column in four simple passes over raw interleaved doubles (re, im) so
    // the compiler can vectorize them; on a single core this is what makes
    // the large-cutoff runs affordable.
    std::vector<double> cusq_r(nf + 1), cusq_i(nf + 1), cucsq_r(nf + 1), cucsq_i(nf + 1);
    auto rhs = [&](double t, const integrate::State& y, integrate::State& dy) {
        if (dy.size() != y.size()) dy.resize(y.size());
        const Complex u = std::exp(Complex(0.0, -params.omega * t));  // frame phase
        for (int d = 0; d < nb; ++d) {
            // -i eta_d [u b + conj(u) b^dag, rho]: cu multiplies b, cuc b^dag
            const Complex cu = -kI * eta_d[d] * u;
            const Complex cuc = -kI * eta_d[d] * std::conj(u);
            for (int n = 0; n <= nf; ++n) {
                cusq_r[n] = cu.real() * sqrt_n[n];
                cusq_i[n] = cu.imag() * sqrt_n[n];
                cucsq_r[n] = cuc.real() * sqrt_n[n];
                cucsq_i[n] = cuc.imag() * sqrt_n[n];
            }
            const bool has_eta = eta_d[d] != 0.0;
            const auto* rho = reinterpret_cast<const double*>(block(y.data(), d));
            auto* out = reinterpret_cast<double*>(block(dy.data(), d));
            const double* wd = weights[d].data();
            const double* prev =
                d > 0 ? rho - std::size_t(2) * nf * nf : nullptr;
            const double feed = d > 0 ? 2.0 * params.gamma * s_coll[d - 1] : 0.0;
            const double gup0 = 2.0 * knb1;
            const double gdn0 = 2.0 * knb;
            for (int n2 = 0; n2 < nf; ++n2) {
                const double* c = rho + std::size_t(2) * n2 * nf;
                const double* cup = n2 + 1 < nf ? c + 2 * nf : nullptr;  // col n2+1
                const double* cdn = n2 > 0 ? c - 2 * nf : nullptr;       // col n2-1
                const double* w = wd + std::size_t(n2) * nf;
                double* o = out + std::size_t(2) * n2 * nf;
                const double gup = cup ? gup0 * sqrt_n[n2 + 1] : 0.0;
                const double gdn = cdn ? gdn0 * sqrt_n[n2] : 0.0;
                const double aup_r = cup ? -cucsq_r[n2 + 1] : 0.0;
                const double aup_i = cup ? -cucsq_i[n2 + 1] : 0.0;
                const double adn_r = cdn ? -cusq_r[n2] : 0.0;
                const double adn_i = cdn ? -cusq_i[n2] : 0.0;
                // damping weights and the collective feed from block d-1
                if (prev) {
                    const double* pv = prev + std::size_t(2) * n2 * nf;
                    for (int n = 0; n < nf; ++n) {
                        o[2 * n] = -w[n] * c[2 * n] + feed * pv[2 * n];
                        o[2 * n + 1] = -w[n] * c[2 * n + 1] + feed * pv[2 * n + 1];
                    }
                } else {
                    for (int n = 0; n < nf; ++n) {
                        o[2 * n] = -w[n] * c[2 * n];
                        o[2 * n + 1] = -w[n] * c[2 * n + 1];
                    }
                }
                // same-column commutator shifts: cu sq(n+1) rho(n+1, n2) and
                // cuc sq(n) rho(n-1, n2)
                if (has_eta) {
                    for (int n = 0; n < nf - 1; ++n) {
                        o[2 * n] += cusq_r[n + 1] * c[2 * n + 2] -
                                    cusq_i[n + 1] * c[2 * n + 3];
                        o[2 * n + 1] += cusq_r[n + 1] * c[2 * n + 3] +
                                        cusq_i[n + 1] * c[2 * n + 2];
                    }
                    for (int n = 1; n < nf; ++n) {
                        o[2 * n] += cucsq_r[n] * c[2 * n - 2] -
                                    cucsq_i[n] * c[2 * n - 1];
                        o[2 * n + 1] += cucsq_r[n] * c[2 * n - 1] +
                                        cucsq_i[n] * c[2 * n - 2];
                    }
                }
                // column n2+1: heating recycling gup sq(n+1) rho(n+1, n2+1)
                // plus the commutator term -cuc sq(n2+1) rho(n, n2+1)
                if (cup) {
                    for (int n = 0; n < nf - 1; ++n) {
                        const double g = gup * sqrt_n[n + 1];
                        o[2 * n] += g * cup[2 * n + 2] + aup_r * cup[2 * n] -
                                    aup_i * cup[2 * n + 1];
                        o[2 * n + 1] += g * cup[2 * n + 3] + aup_r * cup[2 * n + 1] +
                                        aup_i * cup[2 * n];
                    }
                    o[2 * nf - 2] +=
                        aup_r * cup[2 * nf - 2] - aup_i * cup[2 * nf - 1];
                    o[2 * nf - 1] +=
                        aup_r * cup[2 * nf - 1] + aup_i * cup[2 * nf - 2];
                }
                // column n2-1: cooling recycling gdn sq(n) rho(n-1, n2-1)
                // plus the commutator term -cu sq(n2) rho(n, n2-1)
                if (cdn) {
                    o[0] += adn_r * cdn[0] - adn_i * cdn[1];
                    o[1] += adn_r * cdn[1] + adn_i * cdn[0];
                    for (int n = 1; n < nf; ++n) {
                        const double g = gdn * sqrt_n[n];
                        o[2 * n] += g * cdn[2 * n - 2] + adn_r * cdn[2 * n] -
                                    adn_i * cdn[2 * n + 1];
                        o[2 * n + 1] += g * cdn[2 * n - 1] + adn_r * cdn[2 * n + 1] +
                                        adn_i * cdn[2 * n];
                    }
                }
            }
        }
    };

    const double t_end = options.t_end > 0.0 ? options.t_end : 4.0 / params.gamma;
    const double tau_r = 1.0 / (2.0 * params.gamma * params.n_dots);
    const double dt = options.dt_out > 0.0 ? options.dt_out
                                           : std::min(0.002, tau_r / 10.0);
    std::vector<double> grid;
    const auto n_steps = static_cast<std::size_t>(std::floor(t_end / dt + 1e-9));
    for (std::size_t i = 0; i <= n_steps; ++i)
        grid.push_back(std::min(i * dt, t_end));

    EvolveResult result;
    result.trajectory.params = params;
    result.trajectory.scheme = "lindblad";
    result.min_eigenvalue = 1.0;

    std::vector<std::size_t> eig_samples;
    if (options.spot_check_positivity && options.positivity_samples > 0) {
        const std::size_t stride =
            std::max<std::size_t>(1, grid.size() / options.positivity_samples);
        for (std::size_t i = 0; i < grid.size(); i += stride) eig_samples.push_back(i);
    }

    auto on_sample = [&](std::size_t index, double t, const integrate::State& y) {
        ObservableRecord rec;
        rec.t = t;
        const Complex u = std::exp(Complex(0.0, -params.omega * t));  // undo the frame
        double tr = 0.0, trunc = 0.0, sz = 0.0, phonons = 0.0, spsm = 0.0;
        double herm = 0.0;
        Complex b_mean{0.0, 0.0}, szb{0.0, 0.0};
        for (int d = 0; d < nb; ++d) {
            Eigen::Map<const Eigen::MatrixXcd> rho(block(y.data(), d), nf, nf);
            double tr_d = 0.0, ph_d = 0.0;
            Complex b_d{0.0, 0.0};
            for (int n = 0; n < nf; ++n) {
                const double pii = rho(n, n).real();
                tr_d += pii;
                ph_d += n * pii;
                if (n + 1 < nf) b_d += sqrt_n[n + 1] * rho(n + 1, n);
            }
            tr += tr_d;
            phonons += ph_d;
            sz += m_coll[d] * tr_d;
            spsm += s_coll[d] * tr_d;
            trunc += rho(nf - 1, nf - 1).real();
            b_mean += b_d;
            szb += m_coll[d] * b_d;
            herm = std::max(herm, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
        }
        rec.sz = sz;
        rec.phonons = phonons;
        rec.intensity = 2.0 * params.gamma * spsm;  // -d<S_z>/dt in closed form
        rec.b_mean = u * b_mean;
        rec.szb = u * szb;
        rec.extra["spsm"] = Complex{spsm, 0.0};
        rec.trunc_diag = trunc;
        result.max_trace_error = std::max(result.max_trace_error, std::abs(tr - 1.0));
        result.max_hermiticity_error = std::max(result.max_hermiticity_error, herm);
        result.max_trunc_diag = std::max(result.max_trunc_diag, trunc);
        if (options.strict_truncation && trunc > 1e-6)
            throw integrate::IntegrationError(
                "evolve: truncation diagnostic " + std::to_string(trunc) +
                " > 1e-6 at t = " + std::to_string(t) + "; n_max too small");
        if (!eig_samples.empty() &&
            std::find(eig_samples.begin(), eig_samples.end(), index) != eig_samples.end()) {
            for (int d = 0; d < nb; ++d) {
                Eigen::Map<const Eigen::MatrixXcd> rho(block(y.data(), d), nf, nf);
                const Eigen::MatrixXcd herm_part = 0.5 * (rho + rho.adjoint());
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm_part,
                                                                   Eigen::EigenvaluesOnly);
                result.min_eigenvalue =
                    std::min(result.min_eigenvalue, es.eigenvalues().minCoeff());
            }
        }
        result.trajectory.append(std::move(rec));
    };

    integrate::solve_into(rhs, y0, 0.0, t_end, grid, options.integrator, on_sample,
                          &result.stats);
    return result;
}

AutoCutoffResult auto_cutoff_run(const HilbertSpec& spec, const SystemParams& params,
                                 double t_end, EvolveOptions options) {
    options.t_end = t_end;
    options.strict_truncation = false;

    const auto peak_phonons = [](const EvolveResult& r) {
        double peak = 0.0;
        for (const auto& rec : r.trajectory.records) peak = std::max(peak, rec.phonons);
        return peak;
    };

    HilbertSpec cur = spec;
    cur.n_max = std::max(1, spec.n_max);
    validate_spec(cur);
    // a seed below the thermal tail gate just advances the doubling search
    EvolveResult prev_run;
    for (;;) {
        try {
            prev_run = evolve(cur, params, options);
            break;
        } catch (const std::domain_error&) {
            cur.n_max *= 2;
            if (cur.dim() > cur.dim_cap)
                throw std::domain_error(
                    "auto_cutoff: dimension cap exceeded before convergence");
        }
    }
    double prev_peak = peak_phonons(prev_run);
    int prev_n = cur.n_max;

    for (;;) {
        HilbertSpec next = cur;
        next.n_max = 2 * cur.n_max;
        if (next.dim() > next.dim_cap)
            throw std::domain_error(
                "auto_cutoff: dimension cap exceeded before convergence");
        EvolveResult run = evolve(next, params, options);
        const double peak = peak_phonons(run);
        const double denom = std::max(std::abs(peak), std::abs(prev_peak));
        const double rel = denom == 0.0 ? 0.0 : std::abs(peak - prev_peak) / denom;
        if (rel < 1e-4) {
            if (prev_run.max_trunc_diag < 1e-8)
                return {prev_n, std::move(prev_run)};
            if (run.max_trunc_diag < 1e-8)
                return {next.n_max, std::move(run)};
        }
        cur = next;
        prev_run = std::move(run);
        prev_peak = peak;
        prev_n = cur.n_max;
    }
}

int auto_cutoff(const HilbertSpec& spec, const SystemParams& params, double t_end) {
    EvolveOptions options;
    options.spot_check_positivity = false;
    return auto_cutoff_run(spec, params, t_end, options).n_max;
}

}  // namespace phonsr::lindblad
