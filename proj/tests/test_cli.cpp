#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "phonsr/cli.hpp"

using namespace phonsr;
using namespace phonsr::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("phonsr_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static inline int counter = 0;
};

}  // namespace

TEST_CASE("parse_config: minimal document and recorded defaults") {
    const RunConfig cfg = parse_config("solver = moments\nn_dots = 1\n");
    CHECK(cfg.solver == Solver::Moments);
    CHECK(cfg.scheme == ClosureScheme::Exact1);
    CHECK(cfg.params.n_dots == 1);
    CHECK(cfg.t_end < 0.0);
    // every filled-in choice is recorded
    const auto has = [&](const std::string& needle) {
        for (const auto& d : cfg.applied_defaults)
            if (d.find(needle) != std::string::npos) return true;
        return false;
    };
    CHECK(has("gamma"));
    CHECK(has("scheme = exact1"));
    CHECK(has("t_end"));
    CHECK(has("dt_out"));
    CHECK(has("integrator"));
}

TEST_CASE("parse_config: scheme defaults follow n_dots") {
    CHECK(parse_config("solver = moments\nn_dots = 2\n").scheme == ClosureScheme::Exact2);
    CHECK(parse_config("solver = moments\nn_dots = 50\n").scheme ==
          ClosureScheme::MeanFieldA);
}

TEST_CASE("parse_config: comments, spacing and overrides") {
    const std::string doc =
        "# run setup\n"
        "solver = moments   # close to the reference point\n"
        "n_dots=1\n"
        "  omega = 15.0\n"
        "\n"
        "eta = 5\n";
    const RunConfig cfg = parse_config(doc, {"eta=2.5", "kappa=0.5"});
    CHECK(cfg.params.omega == 15.0);
    CHECK(cfg.params.eta == 2.5);  // override wins
    CHECK(cfg.params.kappa == 0.5);
}

TEST_CASE("parse_config: rejections") {
    CHECK_THROWS_AS(parse_config("n_dots = 1\n"), ConfigError);  // solver required
    CHECK_THROWS_AS(parse_config("solver = moments\nturbo = on\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("solver = moments\nomega\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("solver = moments\nomega = fast\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("solver = warp\n"), ConfigError);
    // scheme/n_dots consistency
    CHECK_THROWS_AS(parse_config("solver = moments\nn_dots = 3\nscheme = exact2\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("solver = moments\nn_dots = 1\nscheme = meanfield_a\n"),
                    ConfigError);
    // analytic phonons need the single-dot closed form
    CHECK_THROWS_AS(
        parse_config("solver = analytic\nn_dots = 200\nphonons = true\n"),
        ConfigError);
    CHECK_NOTHROW(parse_config("solver = analytic\nn_dots = 200\n"));
    // lindblad-only keys
    CHECK_THROWS_AS(parse_config("solver = moments\nn_dots = 1\nn_max = 40\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config("solver = analytic\nn_dots = 1\nauto_cutoff = true\n"),
                    ConfigError);
    // scheme is a moments-only key
    CHECK_THROWS_AS(parse_config("solver = lindblad\nn_dots = 1\nscheme = exact1\n"),
                    ConfigError);
    // invalid physics bounds surface as ValidationError
    CHECK_THROWS_AS(parse_config("solver = moments\nn_dots = 1\nkappa = -2\n"),
                    ValidationError);
}

TEST_CASE("parse_config: lindblad cutoff handling") {
    const RunConfig a = parse_config("solver = lindblad\nn_dots = 1\nnbar = 0.2\n");
    CHECK(a.auto_cutoff);
    CHECK(a.n_max == -1);
    const RunConfig b =
        parse_config("solver = lindblad\nn_dots = 1\nnbar = 0.2\nn_max = 32\n");
    CHECK_FALSE(b.auto_cutoff);
    CHECK(b.n_max == 32);
}

TEST_CASE("CSV round-trip preserves full precision") {
    Trajectory traj;
    traj.params.nbar = 10.0;
    traj.scheme = "exact1";
    const double values[] = {0.1234567890123456789, -1.0 / 3.0, M_PI, 1e-17};
    for (int i = 0; i < 4; ++i) {
        ObservableRecord rec;
        rec.t = 0.002 * i;
        rec.sz = values[i];
        rec.phonons = 10.0 + values[i];
        rec.intensity = -values[i];
        rec.b_mean = Complex(values[i], -values[i]);
        rec.szb = Complex(2.0 * values[i], 0.5);
        traj.append(rec);
    }
    const std::string csv = trajectory_to_csv(traj);
    CHECK(csv.rfind(kCsvHeader, 0) == 0);  // header is the fixed schema
    const auto rows = parse_trajectory_csv(csv);
    REQUIRE(rows.size() == 4);
    for (int i = 0; i < 4; ++i) {
        CHECK(*rows[i].cells[0] == 0.002 * i);  // bit-exact through %.17g
        CHECK(*rows[i].cells[1] == values[i]);
        CHECK(*rows[i].cells[2] == 10.0 + values[i]);
        CHECK(*rows[i].cells[4] == values[i]);
        CHECK(*rows[i].cells[5] == -values[i]);
        // exact1 tracks no <S+S-> and no truncation diagnostic
        CHECK_FALSE(rows[i].cells[8].has_value());
        CHECK_FALSE(rows[i].cells[10].has_value());
    }
}

TEST_CASE("analytic CSV leaves mode correlators empty") {
    RunConfig cfg = parse_config("solver = analytic\nn_dots = 1\nomega = 15\n"
                                 "eta = 5\nkappa = 0.5\nnbar = 10\n"
                                 "t_end = 0.1\ndt_out = 0.01\n");
    const Trajectory traj = run_trajectory(cfg);
    const auto rows = parse_trajectory_csv(trajectory_to_csv(traj));
    REQUIRE(rows.size() == 11);
    for (const auto& row : rows) {
        CHECK(row.cells[1].has_value());       // sz
        CHECK(row.cells[2].has_value());       // N = 1: phonons available
        CHECK_FALSE(row.cells[4].has_value()); // b_re not modelled
        CHECK_FALSE(row.cells[6].has_value()); // szb_re not modelled
    }
    // for N >= 2 the closed form covers the inversion only
    RunConfig big = parse_config("solver = analytic\nn_dots = 200\n"
                                 "t_end = 0.05\ndt_out = 0.01\n");
    const auto rows2 = parse_trajectory_csv(trajectory_to_csv(run_trajectory(big)));
    for (const auto& row : rows2) {
        CHECK(row.cells[1].has_value());
        CHECK_FALSE(row.cells[2].has_value());
    }
}

TEST_CASE("peak_stats finds the burst and its width") {
    // synthetic pulse: phonons = nbar + 8 sech^2((t - 1)/0.2)
    Trajectory traj;
    traj.params.nbar = 10.0;
    for (int i = 0; i <= 2000; ++i) {
        ObservableRecord rec;
        rec.t = 0.001 * i;
        const double x = (rec.t - 1.0) / 0.2;
        rec.phonons = 10.0 + 8.0 / (std::cosh(x) * std::cosh(x));
        rec.intensity = rec.phonons - 10.0;
        traj.append(rec);
    }
    const PeakStats s = peak_stats(traj);
    CHECK(s.peak_phonons == doctest::Approx(18.0).epsilon(1e-6));
    CHECK(s.peak_phonons_time == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(s.peak_intensity_time == doctest::Approx(1.0).epsilon(1e-3));
    REQUIRE(s.fwhm.has_value());
    // FWHM of sech^2(x/w) is 2 w arccosh(sqrt 2)
    const double expect = 2.0 * 0.2 * std::acosh(std::sqrt(2.0));
    CHECK(*s.fwhm == doctest::Approx(expect).epsilon(1e-3));
    CHECK(s.final_phonons == doctest::Approx(10.0).epsilon(1e-3));
}

TEST_CASE("peak_stats leaves fwhm unset for monotone data") {
    Trajectory traj;
    traj.params.nbar = 0.0;
    for (int i = 0; i <= 10; ++i) {
        ObservableRecord rec;
        rec.t = 0.1 * i;
        rec.phonons = 0.0;
        traj.append(rec);
    }
    CHECK_FALSE(peak_stats(traj).fwhm.has_value());
}

TEST_CASE("run writes the CSV and meta sidecar") {
    TempDir tmp;
    RunConfig cfg = parse_config(
        "solver = moments\nn_dots = 1\nomega = 15\neta = 5\nkappa = 0.5\n"
        "nbar = 10\nt_end = 0.5\ndt_out = 0.01\nout = smoke\n");
    const RunResult res = run(cfg, tmp.path);
    CHECK(fs::exists(res.csv_path));
    CHECK(fs::exists(res.meta_path));
    CHECK(res.csv_path.filename() == "smoke.csv");
    CHECK(res.meta.at("solver") == "moments");
    CHECK(res.meta.at("scheme") == "exact1");
    CHECK(res.meta.at("records") == 51);
    CHECK(res.meta.at("params").at("nbar") == 10.0);
    CHECK(res.meta.contains("peaks"));
    // the CSV parses back to the same grid
    const auto rows = parse_trajectory_csv(slurp(res.csv_path));
    CHECK(rows.size() == 51);
}

TEST_CASE("repeated runs are byte-identical") {
    TempDir tmp;
    RunConfig cfg = parse_config(
        "solver = moments\nn_dots = 2\nomega = 15\neta = 5\nkappa = 0.5\n"
        "nbar = 10\nt_end = 0.6\ndt_out = 0.002\nout = det\n");
    const RunResult a = run(cfg, tmp.path / "a");
    const RunResult b = run(cfg, tmp.path / "b");
    CHECK(slurp(a.csv_path) == slurp(b.csv_path));
}

TEST_CASE("compare reports per-observable deviations") {
    RunConfig a = parse_config(
        "solver = moments\nn_dots = 1\nomega = 15\neta = 5\nkappa = 0.5\n"
        "nbar = 10\nt_end = 0.5\ndt_out = 0.01\n");
    RunConfig b = a;
    b.integrator.method = integrate::Method::Rk4Fixed;
    b.integrator.h_init = 1e-4;
    b.integrator_keys_set = true;
    const nlohmann::json rep = compare(a, b);
    CHECK(rep.at("max_abs").at("sz").get<double>() < 1e-8);
    CHECK(rep.at("max_abs").at("phonons").get<double>() < 1e-6);
    CHECK(rep.at("max_abs").contains("b"));
    CHECK(rep.at("relative_peak").at("phonons").get<double>() < 1e-8);
    // mismatched grids are rejected
    RunConfig c = a;
    c.dt_out = 0.02;
    CHECK_THROWS_AS(compare(a, c), ConfigError);
}

TEST_CASE("sweep emits one summary row per value") {
    TempDir tmp;
    RunConfig base = parse_config(
        "solver = moments\nn_dots = 200\nomega = 50\neta = 5\nkappa = 20\n"
        "nbar = 10\nt_end = 0.15\n");
    const std::string summary = sweep(base, "kappa", {1.0, 5.0, 20.0}, tmp.path);
    std::istringstream in(summary);
    std::string line;
    std::getline(in, line);
    CHECK(line == "value,peak_phonons,peak_time,fwhm,final_phonons");
    int rows = 0;
    while (std::getline(in, line)) {
        if (!line.empty()) ++rows;
    }
    CHECK(rows == 3);
    CHECK_THROWS_AS(sweep(base, "flux", {1.0}, tmp.path), ConfigError);
}

TEST_CASE("figure presets produce the documented files") {
    TempDir tmp;
    const auto fig3 = figure(3, tmp.path);
    REQUIRE(fig3.size() == 1);
    CHECK(fig3[0].filename() == "fig3_n200.csv");
    const auto rows = parse_trajectory_csv(slurp(fig3[0]));
    CHECK(rows.size() > 100);

    const auto fig4 = figure(4, tmp.path);
    REQUIRE(fig4.size() == 3);
    CHECK(fig4[0].filename() == "fig4_kappa1.csv");
    CHECK(fig4[2].filename() == "fig4_kappa20.csv");
    CHECK_THROWS_AS(figure(7, tmp.path), ConfigError);
}
