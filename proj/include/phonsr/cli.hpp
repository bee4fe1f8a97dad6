#ifndef PHONSR_CLI_HPP
#define PHONSR_CLI_HPP

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "phonsr/core.hpp"
#include "phonsr/integrate.hpp"

namespace phonsr::cli {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Solver { Analytic, Moments, Lindblad };

std::string to_string(Solver solver);

struct RunConfig {
    SystemParams params;
    Solver solver = Solver::Moments;
    ClosureScheme scheme = ClosureScheme::Exact1;
    double t_end = -1.0;   // < 0: solver default
    double dt_out = -1.0;  // < 0: solver default
    integrate::IntegratorConfig integrator{};
    bool integrator_keys_set = false;
    int n_max = -1;             // lindblad only; -1 with auto_cutoff
    bool auto_cutoff = false;   // lindblad only
    std::optional<bool> phonons;  // explicit request for the phonon column
    std::string out;              // output CSV name (optional)
    std::vector<std::string> applied_defaults;
};

/// Parses a key = value document ('#' comments), applies the documented
/// defaults and rejects unknown keys; overrides are extra "key=value" pairs.
RunConfig parse_config(const std::string& text,
                       const std::vector<std::string>& overrides = {});

struct PeakStats {
    double peak_phonons = 0.0;
    double peak_phonons_time = 0.0;
    double peak_intensity = 0.0;
    double peak_intensity_time = 0.0;
    std::optional<double> fwhm;  // width of <b^dag b> - nbar at half maximum
    double final_phonons = 0.0;
};

PeakStats peak_stats(const Trajectory& trajectory);

struct RunResult {
    Trajectory trajectory;
    nlohmann::json meta;
    std::filesystem::path csv_path;
    std::filesystem::path meta_path;
};

/// Produces the trajectory for a config without touching the filesystem.
Trajectory run_trajectory(const RunConfig& config, nlohmann::json* diagnostics = nullptr);

/// Runs a config and writes the CSV artifact plus its .meta.json sidecar.
RunResult run(const RunConfig& config, const std::filesystem::path& out_dir);

/// Per-observable max-abs and relative-peak deviations of two runs sharing
/// an output grid.
nlohmann::json compare(const RunConfig& config_a, const RunConfig& config_b);

/// One row per swept value: peak <b^dag b>, peak time, FWHM above nbar,
/// final <b^dag b>. Valid parameters: kappa, eta, nbar, n_dots.
std::string sweep(const RunConfig& base, const std::string& parameter,
                  const std::vector<double>& values,
                  const std::filesystem::path& out_dir);

/// Reproduces the per-figure parameter sets; returns the written CSV paths.
std::vector<std::filesystem::path> figure(int number, const std::filesystem::path& out_dir);

// CSV layer: schema is fixed, inapplicable cells are emitted empty.
inline constexpr const char* kCsvHeader =
    "t,sz,phonons,intensity,b_re,b_im,szb_re,szb_im,spsm_re,spsm_im,trunc_diag";

std::string trajectory_to_csv(const Trajectory& trajectory);

struct CsvRow {
    std::array<std::optional<double>, 11> cells;
};

std::vector<CsvRow> parse_trajectory_csv(const std::string& text);

}  // namespace phonsr::cli

#endif
