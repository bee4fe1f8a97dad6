// phonsr: simulating cooperative phonon dynamics of quantum dots on a
// vibrating nanomechanical resonator.
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "phonsr/cli.hpp"
#include "phonsr/integrate.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw phonsr::cli::ConfigError("cannot read config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<double> parse_values(const std::string& list) {
    std::vector<double> values;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ','))
        values.push_back(std::stod(item));
    if (values.empty())
        throw phonsr::cli::ConfigError("sweep: empty values list");
    return values;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"phonon superradiance simulator"};
    app.require_subcommand(1);
    app.fallthrough();
    bool quiet = false;
    app.add_flag("--quiet", quiet, "suppress progress output");

    std::string config_path, out_dir = ".";
    std::vector<std::string> overrides;

    auto* cmd_run = app.add_subcommand("run", "run one scenario and write CSV + sidecar");
    cmd_run->add_option("--config", config_path, "config file")->required();
    cmd_run->add_option("--out", out_dir, "output directory");
    cmd_run->add_option("--set", overrides, "config override key=value");

    std::string config_a, config_b;
    std::vector<std::string> overrides_b;
    auto* cmd_cmp = app.add_subcommand("compare", "deviation report for two runs on a shared grid");
    cmd_cmp->add_option("--config-a", config_a, "first config")->required();
    cmd_cmp->add_option("--config-b", config_b, "second config")->required();
    cmd_cmp->add_option("--out", out_dir, "output directory");
    cmd_cmp->add_option("--set-a", overrides, "override for config a");
    cmd_cmp->add_option("--set-b", overrides_b, "override for config b");

    std::string sweep_param, sweep_values;
    auto* cmd_sweep = app.add_subcommand("sweep", "run a parameter sweep, write summary CSV");
    cmd_sweep->add_option("--config", config_path, "base config")->required();
    cmd_sweep->add_option("--param", sweep_param, "kappa | eta | nbar | n_dots")->required();
    cmd_sweep->add_option("--values", sweep_values, "comma-separated values")->required();
    cmd_sweep->add_option("--out", out_dir, "output directory");
    cmd_sweep->add_option("--set", overrides, "config override key=value");

    int figure_number = 0;
    auto* cmd_fig = app.add_subcommand("figure", "reproduce a figure's parameter set");
    cmd_fig->add_option("number", figure_number, "2, 3, or 4")->required();
    cmd_fig->add_option("--out", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_run->parsed()) {
            const auto cfg = phonsr::cli::parse_config(read_file(config_path), overrides);
            const auto result = phonsr::cli::run(cfg, out_dir);
            if (!quiet)
                std::cout << "wrote " << result.csv_path.string() << " ("
                          << result.trajectory.records.size() << " records)\n";
        } else if (cmd_cmp->parsed()) {
            const auto cfg_a = phonsr::cli::parse_config(read_file(config_a), overrides);
            const auto cfg_b = phonsr::cli::parse_config(read_file(config_b), overrides_b);
            const auto report = phonsr::cli::compare(cfg_a, cfg_b);
            std::filesystem::create_directories(out_dir);
            std::ofstream out(std::filesystem::path(out_dir) / "compare.json");
            out << report.dump(2) << '\n';
            if (!quiet) std::cout << report.dump(2) << '\n';
        } else if (cmd_sweep->parsed()) {
            const auto cfg = phonsr::cli::parse_config(read_file(config_path), overrides);
            const auto csv =
                phonsr::cli::sweep(cfg, sweep_param, parse_values(sweep_values), out_dir);
            if (!quiet) std::cout << csv;
        } else if (cmd_fig->parsed()) {
            const auto paths = phonsr::cli::figure(figure_number, out_dir);
            if (!quiet)
                for (const auto& p : paths) std::cout << "wrote " << p.string() << '\n';
        }
    } catch (const phonsr::cli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const phonsr::ValidationError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
