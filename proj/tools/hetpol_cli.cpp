#include <iostream>
#include <string>
#include <vector>

#include "hetpol/config.hpp"
#include "hetpol/errors.hpp"
#include "hetpol/run.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty() || args.front() == "--help" || args.front() == "-h") {
        std::cout << "usage: hetpol <command> [--config FILE] [--key value ...]\n"
                     "commands: kernel, free-energy, phase-scan, critical-curve, sample-paths, observables, verify\n"
                     "keys: lambda h p d n n-max horizons replicas samples paths base-seed workers output kappa\n"
                     "      shrink-ratio tol mode\n"
                     "grids: repeat a flag or give comma-separated values (--lambda 0.5,1 --lambda 2)\n";
        return args.empty() ? 2 : 0;
    }
    hetpol::RunConfig config;
    try {
        config = hetpol::parse_config(args);
    } catch (const hetpol::Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
    return hetpol::run(config, std::cerr);
}
