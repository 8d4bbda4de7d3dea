#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rkm/cli/commands.hpp"
#include "rkm/version.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Radial-kernel spectral experiments on high-dimensional Gaussian mixtures"};
    app.set_version_flag("--version", rkm::kVersion);
    app.require_subcommand(1, 1);

    rkm::cli::GlobalOptions opts;
    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    app.add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
    auto* seed_opt = app.add_option("--seed", seed, "run this single seed instead of the config's list");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", opts.threads, "worker threads (default: all cores)")->check(CLI::PositiveNumber);
    app.add_flag("--large", opts.large, "allow figure1 panels with n > 2000");
    app.add_flag("--dump-config", opts.dump_config, "print the resolved config and exit");
    app.fallthrough();

    const char* commands[][2] = {
        {"sample", "draw datasets and write them as CSV and binary"},
        {"figure1", "second singular vector of the h_t kernel matrix per (n, s) panel"},
        {"gap-scan", "top singular values of single-Gaussian kernel matrices across dimensions"},
        {"kpca-cluster", "Gaussian-kernel PCA clustering over a seed grid"},
        {"cov-cluster", "covariance clustering with the soft-thresholded h_t kernel"},
        {"gram-check", "empirical component Gram matrix against its reference"},
        {"diag-ch", "kernel smoothness constants over a list of dimensions"},
    };
    for (const auto& [name, help] : commands)
        app.add_subcommand(name, help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (!config_path.empty())
        opts.config_path = config_path;
    if (!out_dir.empty())
        opts.out = out_dir;
    if (*seed_opt)
        opts.seed = seed;
    const std::string command = app.get_subcommands().front()->get_name();
    return rkm::cli::run_command(command, opts, std::cout, std::cerr);
}
