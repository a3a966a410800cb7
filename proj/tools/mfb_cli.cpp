// Command-line driver: mfb <subcommand> --config <path> [--seed <u64>] [--out <dir>]

#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "mfb/commands.hpp"
#include "mfb/config.hpp"
#include "mfb/error.hpp"

int main(int argc, char** argv) {
    CLI::App app{"McKean-Vlasov particle simulation and intrinsic-derivative estimation"};
    std::string subcommand;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "mfb_out";

    std::string names;
    for (const auto& s : mfb::subcommand_names()) names += (names.empty() ? "" : ", ") + s;
    app.add_option("subcommand", subcommand, names)->required()->check(CLI::IsMember(mfb::subcommand_names()));
    app.add_option("--config", config_path, "configuration file")->required();
    app.add_option("--seed", seed, "override [sim] seed");
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    mfb::RunConfig config;
    try {
        config = subcommand == "validate" ? mfb::load_config(config_path) : mfb::parse_config(config_path);
        if (seed) config.seed = *seed;
    } catch (const mfb::Error& e) {
        std::cerr << mfb::to_string(e.code()) << ": " << e.what() << '\n';
        try {
            mfb::write_failures(out_dir, "none", {{subcommand, mfb::to_string(e.code()), e.what()}});
        } catch (const std::exception& w) {
            std::cerr << w.what() << '\n';
        }
        return 2;
    }

    try {
        const mfb::CommandResult result = mfb::run_command(subcommand, config, out_dir, std::cout);
        for (const auto& f : result.files) std::cout << "wrote " << f.string() << '\n';
        return result.exit_code;
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }
}
